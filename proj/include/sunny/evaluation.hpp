#pragma once

#include "sunny/algorithm.hpp"
#include "sunny/knowledge_base.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sunny {

// Deterministic cross-validation fold assignment. For each repeat the
// instance set is shuffled (mt19937_64 keyed by seed and repeat, explicit
// Fisher-Yates; see docs/formats.md) and dealt round-robin, so fold sizes
// differ by at most one.
struct FoldPlan {
    int repeats = 0;
    int folds = 0;
    std::int64_t seed = 0;
    // assignment[repeat][fold] -> sorted instance ids
    std::vector<std::vector<std::vector<InstanceId>>> assignment;

    const std::vector<InstanceId>& fold(int repeat, int fold_idx) const;
    std::vector<InstanceId> training_set(int repeat, int test_fold) const;
};

FoldPlan make_folds(const KnowledgeBase& kb, int repeats, int folds, std::int64_t seed);

// Result of replaying a schedule against recorded runtimes. Unsolved
// outcomes report time == T.
struct SimulationOutcome {
    InstanceId instance;
    bool solved = false;
    double time = 0.0;
};

// Walk the schedule in order, starting the clock at the instance's
// feature-extraction cost. An entry solves iff its recorded runtime fits in
// its allocation and the cumulative time stays within T.
SimulationOutcome simulate_schedule(const Schedule& schedule, const InstanceId& instance,
                                    const KnowledgeBase& kb);

// Same walk over bare (solver, seconds) pairs with an explicit starting
// elapsed time; baselines that consult no features pass 0.
SimulationOutcome simulate_entries(const std::vector<std::pair<SolverId, double>>& entries,
                                   double T, const InstanceId& instance,
                                   const KnowledgeBase& kb, double initial_elapsed);

struct PortfolioSpec {
    int m = 0;
    std::vector<SolverId> solvers;  // sorted by name
    int potential_solved = 0;
    double avg_time = 0.0;  // over all (member, instance) pairs, unsolved = T
};

// Exact best size-m portfolio: maximize instances solved by at least one
// member, ties by lower average solving time, then by name list. Bounded to
// at most 20 solvers (subset enumeration).
PortfolioSpec compose_portfolio(const KnowledgeBase& kb, int m);

// Portfolio member solving the most instances within the timeout; ties by
// lower total runtime, then name.
SolverId elect_backup(const KnowledgeBase& kb, const std::vector<SolverId>& portfolio);

struct CellMetrics {
    int repeat = 0;
    int fold = 0;
    double psi = 0.0;  // percent of test instances solved
    double ast = 0.0;  // mean solving time, unsolved = T
};

struct RepeatMetrics {
    int repeat = 0;
    double psi = 0.0;
    double ast = 0.0;
};

struct EvaluationReport {
    std::string approach;
    int repeats = 0;
    int folds = 0;
    std::vector<CellMetrics> cells;       // repeat-major, fold-minor
    std::vector<RepeatMetrics> repeat_avg;
    double psi = 0.0;  // mean of repeat averages
    double ast = 0.0;
};

// Sub-portfolio sizes observed across every schedule built during an
// evaluation run.
struct SubportfolioStats {
    double mean = 0.0;
    int max = 0;
    long count = 0;
};

enum class Approach { Sunny, Vbs, Sbs, Knn, Equ };

Approach approach_from_string(const std::string& name);
std::string to_string(Approach approach);

// 5x5-style cross-validated evaluation of the SUNNY scheduler itself.
// Scaling parameters and neighborhoods come from the training folds only;
// simulated solving time includes the instance's feature-extraction cost.
EvaluationReport run_sunny_eval(const KnowledgeBase& kb, const SunnyConfig& config,
                                const FoldPlan& plan, int jobs = 1,
                                SubportfolioStats* stats = nullptr);

// Baselines over the same folds. VBS and SBS consult no features and pay no
// feature cost; KNN pays it. EQU runs every portfolio solver for T/m,
// ordered by ascending knowledge-base-wide average runtime.
EvaluationReport run_baseline(Approach kind, const KnowledgeBase& kb, const SunnyConfig& config,
                              const FoldPlan& plan, int jobs = 1);

struct SweepRow {
    int m = 0;
    int k = 0;
    double psi = 0.0;
    double ast = 0.0;
    double avg_subpf_size = 0.0;
    int max_subpf_size = 0;
};

// Full (m, k) grid: for each m the portfolio is composed and a backup
// elected on the whole knowledge base, then SUNNY is evaluated per k.
std::vector<SweepRow> sweep_k(const KnowledgeBase& kb, const std::vector<int>& m_range,
                              const std::vector<int>& k_range, const FoldPlan& plan,
                              double T, int jobs = 1);

}  // namespace sunny
