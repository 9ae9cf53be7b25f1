#pragma once

#include "sunny/knowledge_base.hpp"
#include "sunny/rational.hpp"

#include <vector>

namespace sunny {

struct SunnyConfig {
    int k = 16;
    double T = 1800.0;
    SolverId backup;
    std::vector<SolverId> portfolio;

    // Throws unless k >= 1, T > 0, portfolio is a non-empty duplicate-free
    // subset of kb.solvers() and backup is a member of it.
    void validate(const KnowledgeBase& kb) const;
};

// The k training instances nearest to a query in scaled feature space,
// nearest first. Boundary ties are broken by instance id, so the result is
// independent of input order and platform.
struct Neighborhood {
    std::vector<InstanceId> members;
    std::vector<double> distances;  // non-decreasing, same length as members

    std::size_t size() const { return members.size(); }
};

struct SubPortfolio {
    std::vector<SolverId> solvers;  // sorted by name
    int solved_count = 0;           // neighbors solved by at least one member
    double avg_time = 0.0;          // mean over all (member, neighbor) pairs, unsolved = T
};

struct ScheduleEntry {
    SolverId solver;
    RationalMs allocation_ms;  // exact; entries sum to T bit-exactly
    double avg_runtime = 0.0;  // mean runtime over the neighborhood, unsolved = T

    double seconds() const { return rational_ms_to_seconds(allocation_ms); }
};

// Ordered solver schedule filling the budget T, plus the intermediate data
// it was computed from. Serialized format: docs/formats.md.
struct Schedule {
    std::vector<ScheduleEntry> entries;  // ascending neighborhood avg runtime
    int k = 0;
    double T = 0.0;
    int slots = 0;
    RationalMs time_slot_ms{0};
    std::vector<SolverId> subportfolio;
    Neighborhood neighborhood;

    RationalMs total_ms() const;
};

// Euclidean k-NN over the retained scaled features. `scaled_query` must
// already be scaled with `params`. Requires 1 <= k <= |kb.instances()|.
Neighborhood nearest_neighbors(const std::vector<double>& scaled_query, int k,
                               const KnowledgeBase& kb, const ScalingParams& params);

// Number of neighbors solved within T by at least one of `solvers`.
int max_solved(const std::vector<SolverId>& solvers, const Neighborhood& neighbors,
               const KnowledgeBase& kb, double T);

// Smallest subset of the portfolio solving the most neighbors. Tie-break
// chain: max solved count, min cardinality, min average solving time,
// lexicographically smallest sorted name list. Exponential in |portfolio|
// in the worst case; subsets are enumerated by increasing size with a
// coverage bound prune.
SubPortfolio select_subportfolio(const Neighborhood& neighbors, const SunnyConfig& config,
                                 const KnowledgeBase& kb);

// Full pipeline: neighborhood, sub-portfolio, then slot-proportional time
// allocation. Each sub-portfolio solver receives one slot per neighbor it
// solves; the slots of neighbors nobody solves go to the backup solver.
// If no solver solves any neighbor the whole budget goes to the backup.
Schedule build_schedule(const std::vector<double>& scaled_query, const SunnyConfig& config,
                        const KnowledgeBase& kb, const ScalingParams& params);

}  // namespace sunny
