#include "sunny/algorithm.hpp"

#include "sunny/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

namespace sunny {

void SunnyConfig::validate(const KnowledgeBase& kb) const {
    if (k < 1) {
        throw Error("k must be >= 1");
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw Error("T must be a positive finite number of seconds");
    }
    if (portfolio.empty()) {
        throw Error("portfolio must not be empty");
    }
    std::set<SolverId> names;
    for (const auto& s : portfolio) {
        kb.solver_index(s);
        if (!names.insert(s).second) {
            throw Error("portfolio lists solver '" + s + "' twice");
        }
    }
    if (!names.count(backup)) {
        throw Error("backup solver '" + backup + "' is not in the portfolio");
    }
}

RationalMs Schedule::total_ms() const {
    RationalMs sum{0};
    for (const auto& e : entries) {
        sum += e.allocation_ms;
    }
    return sum;
}

Neighborhood nearest_neighbors(const std::vector<double>& scaled_query, int k,
                               const KnowledgeBase& kb, const ScalingParams& params) {
    if (k < 1) {
        throw Error("k must be >= 1");
    }
    const auto& instances = kb.instances();
    if (static_cast<std::size_t>(k) > instances.size()) {
        throw Error("k = " + std::to_string(k) + " exceeds the knowledge base size (" +
                    std::to_string(instances.size()) + ")");
    }
    if (scaled_query.size() != params.retained.size()) {
        throw Error("scaled query has " + std::to_string(scaled_query.size()) +
                    " values, expected " + std::to_string(params.retained.size()) +
                    " retained features");
    }

    struct Candidate {
        double dist2;
        std::size_t index;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto scaled = apply_scaling(params, kb.features(instances[i]));
        double d2 = 0.0;
        for (std::size_t j = 0; j < scaled.size(); ++j) {
            const double diff = scaled_query[j] - scaled[j];
            d2 += diff * diff;
        }
        candidates.push_back({d2, i});
    }
    // Boundary ties resolve by instance id so the prefix is unique.
    auto closer = [&](const Candidate& a, const Candidate& b) {
        if (a.dist2 != b.dist2) {
            return a.dist2 < b.dist2;
        }
        return instances[a.index] < instances[b.index];
    };
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(), closer);

    Neighborhood nb;
    nb.members.reserve(k);
    nb.distances.reserve(k);
    for (int i = 0; i < k; ++i) {
        nb.members.push_back(instances[candidates[i].index]);
        nb.distances.push_back(std::sqrt(candidates[i].dist2));
    }
    return nb;
}

namespace {

// Neighbor coverage as bit blocks; neighborhoods are not bounded by 64.
using Mask = std::vector<std::uint64_t>;

int popcount(const Mask& m) {
    int n = 0;
    for (std::uint64_t block : m) {
        n += std::popcount(block);
    }
    return n;
}

void mask_or(Mask& into, const Mask& other) {
    for (std::size_t i = 0; i < into.size(); ++i) {
        into[i] |= other[i];
    }
}

struct SolverProfile {
    SolverId name;
    Mask solved;       // neighbors this solver finishes within T
    double time_sum;   // sum of runtimes over the neighborhood, unsolved = T
};

// Profiles in canonical name order, so subset enumeration visits name lists
// in lexicographic order and "first hit wins" realizes the final tie-break.
std::vector<SolverProfile> make_profiles(const std::vector<SolverId>& portfolio,
                                         const Neighborhood& neighbors,
                                         const KnowledgeBase& kb, double T) {
    std::vector<SolverId> sorted = portfolio;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t blocks = (neighbors.size() + 63) / 64;
    std::vector<SolverProfile> profiles;
    profiles.reserve(sorted.size());
    for (const auto& name : sorted) {
        SolverProfile p;
        p.name = name;
        p.solved.assign(blocks, 0);
        p.time_sum = 0.0;
        const std::size_t s = kb.solver_index(name);
        for (std::size_t i = 0; i < neighbors.size(); ++i) {
            const auto& rec = kb.runtime_at(kb.instance_index(neighbors.members[i]), s);
            if (solves_within(rec, T)) {
                p.solved[i / 64] |= std::uint64_t{1} << (i % 64);
            }
            p.time_sum += effective_runtime(rec, T);
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

struct SubsetSearch {
    const std::vector<SolverProfile>& profiles;
    const std::vector<Mask>& suffix_cover;  // OR of profiles[i..]
    int target;                             // best achievable solved count
    std::size_t want_size = 0;
    bool found = false;
    double best_sum = 0.0;
    std::vector<std::size_t> best;
    std::vector<std::size_t> current;

    void walk(std::size_t next, const Mask& covered, double sum) {
        if (current.size() == want_size) {
            if (popcount(covered) == target && (!found || sum < best_sum)) {
                found = true;
                best_sum = sum;
                best = current;
            }
            return;
        }
        const std::size_t remaining = want_size - current.size();
        for (std::size_t i = next; i + remaining <= profiles.size(); ++i) {
            Mask reach = covered;
            mask_or(reach, suffix_cover[i]);
            if (popcount(reach) < target) {
                break;  // even taking everything from here on cannot cover enough
            }
            Mask with = covered;
            mask_or(with, profiles[i].solved);
            current.push_back(i);
            walk(i + 1, with, sum + profiles[i].time_sum);
            current.pop_back();
        }
    }
};

}  // namespace

int max_solved(const std::vector<SolverId>& solvers, const Neighborhood& neighbors,
               const KnowledgeBase& kb, double T) {
    int count = 0;
    for (const auto& member : neighbors.members) {
        const std::size_t i = kb.instance_index(member);
        for (const auto& s : solvers) {
            if (solves_within(kb.runtime_at(i, kb.solver_index(s)), T)) {
                ++count;
                break;
            }
        }
    }
    return count;
}

SubPortfolio select_subportfolio(const Neighborhood& neighbors, const SunnyConfig& config,
                                 const KnowledgeBase& kb) {
    config.validate(kb);
    if (neighbors.size() == 0) {
        throw Error("select_subportfolio: empty neighborhood");
    }
    const auto profiles = make_profiles(config.portfolio, neighbors, kb, config.T);
    const std::size_t n = profiles.size();
    const std::size_t blocks = (neighbors.size() + 63) / 64;

    std::vector<Mask> suffix_cover(n + 1, Mask(blocks, 0));
    for (std::size_t i = n; i-- > 0;) {
        suffix_cover[i] = suffix_cover[i + 1];
        mask_or(suffix_cover[i], profiles[i].solved);
    }
    const int target = popcount(suffix_cover[0]);

    // Sizes ascending: the first cardinality reaching the target is minimal.
    SubsetSearch search{profiles, suffix_cover, target};
    for (std::size_t size = 0; size <= n; ++size) {
        search.want_size = size;
        search.found = false;
        search.best.clear();
        search.current.clear();
        search.walk(0, Mask(blocks, 0), 0.0);
        if (search.found) {
            break;
        }
    }

    SubPortfolio result;
    for (std::size_t i : search.best) {
        result.solvers.push_back(profiles[i].name);
    }
    result.solved_count = target;
    result.avg_time = result.solvers.empty()
                          ? 0.0
                          : search.best_sum / (static_cast<double>(result.solvers.size()) *
                                               static_cast<double>(neighbors.size()));
    return result;
}

Schedule build_schedule(const std::vector<double>& scaled_query, const SunnyConfig& config,
                        const KnowledgeBase& kb, const ScalingParams& params) {
    config.validate(kb);
    const std::int64_t total_ms = seconds_to_ms(config.T);
    if (total_ms < 1) {
        throw Error("T must be at least one millisecond");
    }

    Schedule schedule;
    schedule.k = config.k;
    schedule.T = config.T;
    schedule.neighborhood = nearest_neighbors(scaled_query, config.k, kb, params);
    const auto sub = select_subportfolio(schedule.neighborhood, config, kb);
    schedule.subportfolio = sub.solvers;

    const int covered = max_solved(sub.solvers, schedule.neighborhood, kb, config.T);
    const int uncovered = config.k - covered;

    struct Allocation {
        SolverId solver;
        int slots = 0;
    };
    std::vector<Allocation> allocations;
    int slot_total = uncovered;
    bool backup_present = false;
    for (const auto& s : sub.solvers) {
        Allocation a;
        a.solver = s;
        a.slots = max_solved({s}, schedule.neighborhood, kb, config.T);
        slot_total += a.slots;
        if (s == config.backup) {
            a.slots += uncovered;
            backup_present = true;
        }
        allocations.push_back(std::move(a));
    }
    if (!backup_present && uncovered > 0) {
        allocations.push_back({config.backup, uncovered});
    }

    schedule.slots = slot_total;  // >= k always: every neighbor owns a slot somewhere
    schedule.time_slot_ms = RationalMs(total_ms, slot_total);

    for (const auto& a : allocations) {
        if (a.slots == 0) {
            continue;
        }
        ScheduleEntry entry;
        entry.solver = a.solver;
        entry.allocation_ms = RationalMs(total_ms * a.slots, slot_total);
        const std::size_t s = kb.solver_index(a.solver);
        double sum = 0.0;
        for (const auto& member : schedule.neighborhood.members) {
            sum += effective_runtime(kb.runtime_at(kb.instance_index(member), s), config.T);
        }
        entry.avg_runtime = sum / static_cast<double>(config.k);
        schedule.entries.push_back(std::move(entry));
    }

    std::sort(schedule.entries.begin(), schedule.entries.end(),
              [](const ScheduleEntry& a, const ScheduleEntry& b) {
                  if (a.avg_runtime != b.avg_runtime) {
                      return a.avg_runtime < b.avg_runtime;
                  }
                  return a.solver < b.solver;
              });
    return schedule;
}

}  // namespace sunny
