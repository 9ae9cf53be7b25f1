#include "sunny/evaluation.hpp"

#include "sunny/error.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>

namespace sunny {

const std::vector<InstanceId>& FoldPlan::fold(int repeat, int fold_idx) const {
    return assignment.at(repeat).at(fold_idx);
}

std::vector<InstanceId> FoldPlan::training_set(int repeat, int test_fold) const {
    std::vector<InstanceId> training;
    for (int f = 0; f < folds; ++f) {
        if (f == test_fold) {
            continue;
        }
        const auto& ids = assignment[repeat][f];
        training.insert(training.end(), ids.begin(), ids.end());
    }
    std::sort(training.begin(), training.end());
    return training;
}

FoldPlan make_folds(const KnowledgeBase& kb, int repeats, int folds, std::int64_t seed) {
    if (repeats < 1) {
        throw Error("repeats must be >= 1");
    }
    if (folds < 2) {
        throw Error("folds must be >= 2");
    }
    if (static_cast<std::size_t>(folds) > kb.instances().size()) {
        throw Error("more folds than instances");
    }

    std::vector<InstanceId> ids = kb.instances();
    std::sort(ids.begin(), ids.end());

    FoldPlan plan;
    plan.repeats = repeats;
    plan.folds = folds;
    plan.seed = seed;
    plan.assignment.resize(repeats);
    for (int r = 0; r < repeats; ++r) {
        // Documented shuffle: mt19937_64 keyed by seed and repeat, explicit
        // Fisher-Yates with modulo draws. Replicable across platforms since
        // mt19937_64 output is fully specified.
        std::mt19937_64 engine(static_cast<std::uint64_t>(seed) +
                               0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r));
        std::vector<InstanceId> shuffled = ids;
        for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(engine() % (i + 1));
            std::swap(shuffled[i], shuffled[j]);
        }
        plan.assignment[r].resize(folds);
        for (std::size_t i = 0; i < shuffled.size(); ++i) {
            plan.assignment[r][i % folds].push_back(std::move(shuffled[i]));
        }
        for (auto& fold : plan.assignment[r]) {
            std::sort(fold.begin(), fold.end());
        }
    }
    return plan;
}

SimulationOutcome simulate_entries(const std::vector<std::pair<SolverId, double>>& entries,
                                   double T, const InstanceId& instance,
                                   const KnowledgeBase& kb, double initial_elapsed) {
    const std::size_t inst = kb.instance_index(instance);
    double elapsed = initial_elapsed;
    for (const auto& [solver, allocation] : entries) {
        const auto& rec = kb.runtime_at(inst, kb.solver_index(solver));
        if (rec.solved && rec.time <= allocation) {
            const double total = elapsed + rec.time;
            if (total <= T) {
                return {instance, true, total};
            }
            return {instance, false, T};  // cap hit before completion
        }
        elapsed += allocation;
    }
    return {instance, false, T};
}

SimulationOutcome simulate_schedule(const Schedule& schedule, const InstanceId& instance,
                                    const KnowledgeBase& kb) {
    std::vector<std::pair<SolverId, double>> entries;
    entries.reserve(schedule.entries.size());
    for (const auto& e : schedule.entries) {
        entries.emplace_back(e.solver, e.seconds());
    }
    return simulate_entries(entries, schedule.T, instance, kb, kb.feature_cost(instance));
}

namespace {

using Mask = std::vector<std::uint64_t>;

int popcount(const Mask& m) {
    int n = 0;
    for (std::uint64_t block : m) {
        n += std::popcount(block);
    }
    return n;
}

struct CoverProfile {
    SolverId name;
    Mask solved;
    double time_sum;
};

std::vector<CoverProfile> instance_profiles(const KnowledgeBase& kb,
                                            const std::vector<SolverId>& solvers) {
    std::vector<SolverId> sorted = solvers;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = kb.instances().size();
    const std::size_t blocks = (n + 63) / 64;
    std::vector<CoverProfile> profiles;
    for (const auto& name : sorted) {
        CoverProfile p{name, Mask(blocks, 0), 0.0};
        const std::size_t s = kb.solver_index(name);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& rec = kb.runtime_at(i, s);
            if (rec.solved) {
                p.solved[i / 64] |= std::uint64_t{1} << (i % 64);
            }
            p.time_sum += rec.time;  // unsolved already carries the timeout
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

}  // namespace

PortfolioSpec compose_portfolio(const KnowledgeBase& kb, int m) {
    const int n = static_cast<int>(kb.solvers().size());
    if (m < 2 || m > n) {
        throw Error("portfolio size m must satisfy 2 <= m <= " + std::to_string(n));
    }
    if (n > 20) {
        throw Error("exact portfolio composition is limited to 20 solvers");
    }
    const auto profiles = instance_profiles(kb, kb.solvers());

    std::vector<int> pick(m);
    for (int i = 0; i < m; ++i) {
        pick[i] = i;
    }
    bool have_best = false;
    int best_solved = -1;
    double best_sum = 0.0;
    std::vector<int> best;
    const std::size_t blocks = profiles.front().solved.size();
    while (true) {
        Mask covered(blocks, 0);
        double sum = 0.0;
        for (int i : pick) {
            for (std::size_t b = 0; b < blocks; ++b) {
                covered[b] |= profiles[i].solved[b];
            }
            sum += profiles[i].time_sum;
        }
        const int solved = popcount(covered);
        // Keep-first realizes the final name-list tie-break: combinations
        // over name-sorted profiles arrive in lexicographic order.
        if (!have_best || solved > best_solved ||
            (solved == best_solved && sum < best_sum)) {
            have_best = true;
            best_solved = solved;
            best_sum = sum;
            best = pick;
        }
        int i = m - 1;
        while (i >= 0 && pick[i] == n - m + i) {
            --i;
        }
        if (i < 0) {
            break;
        }
        ++pick[i];
        for (int j = i + 1; j < m; ++j) {
            pick[j] = pick[j - 1] + 1;
        }
    }

    PortfolioSpec spec;
    spec.m = m;
    for (int i : best) {
        spec.solvers.push_back(profiles[i].name);
    }
    spec.potential_solved = best_solved;
    spec.avg_time = best_sum / (static_cast<double>(m) *
                                static_cast<double>(kb.instances().size()));
    return spec;
}

SolverId elect_backup(const KnowledgeBase& kb, const std::vector<SolverId>& portfolio) {
    if (portfolio.empty()) {
        throw Error("elect_backup: empty portfolio");
    }
    std::vector<SolverId> sorted = portfolio;
    std::sort(sorted.begin(), sorted.end());
    SolverId best;
    int best_count = -1;
    double best_total = 0.0;
    for (const auto& name : sorted) {
        const std::size_t s = kb.solver_index(name);
        int count = 0;
        double total = 0.0;
        for (std::size_t i = 0; i < kb.instances().size(); ++i) {
            const auto& rec = kb.runtime_at(i, s);
            if (rec.solved) {
                ++count;
            }
            total += rec.time;
        }
        if (count > best_count || (count == best_count && total < best_total)) {
            best = name;
            best_count = count;
            best_total = total;
        }
    }
    return best;
}

Approach approach_from_string(const std::string& name) {
    if (name == "SUNNY") return Approach::Sunny;
    if (name == "VBS") return Approach::Vbs;
    if (name == "SBS") return Approach::Sbs;
    if (name == "KNN") return Approach::Knn;
    if (name == "EQU") return Approach::Equ;
    throw Error("unknown approach '" + name + "' (expected SUNNY, VBS, SBS, KNN or EQU)");
}

std::string to_string(Approach approach) {
    switch (approach) {
        case Approach::Sunny: return "SUNNY";
        case Approach::Vbs: return "VBS";
        case Approach::Sbs: return "SBS";
        case Approach::Knn: return "KNN";
        case Approach::Equ: return "EQU";
    }
    return "?";
}

namespace {

struct CellOutcome {
    double psi = 0.0;
    double ast = 0.0;
    std::vector<int> subpf_sizes;
};

// AST computed as T + mean(time - T): the unsolved terms contribute exactly
// zero, so an all-unsolved cell reports exactly T.
CellOutcome metrics_from(const std::vector<SimulationOutcome>& outcomes, double T) {
    CellOutcome cell;
    int solved = 0;
    double defect = 0.0;
    for (const auto& o : outcomes) {
        if (o.solved) {
            ++solved;
        }
        defect += o.time - T;
    }
    const double n = static_cast<double>(outcomes.size());
    cell.psi = 100.0 * static_cast<double>(solved) / n;
    cell.ast = T + defect / n;
    return cell;
}

struct EvalJob {
    Approach kind;
    const KnowledgeBase& kb;
    const SunnyConfig& config;
    const FoldPlan& plan;
    SolverId single_best;                               // SBS
    std::vector<std::pair<SolverId, double>> equ_entries;  // EQU

    CellOutcome run_cell(int repeat, int fold) const;
};

CellOutcome EvalJob::run_cell(int repeat, int fold) const {
    const auto& test = plan.fold(repeat, fold);
    std::vector<SimulationOutcome> outcomes;
    outcomes.reserve(test.size());
    CellOutcome cell;

    if (kind == Approach::Vbs) {
        for (const auto& inst : test) {
            const std::size_t i = kb.instance_index(inst);
            SimulationOutcome out{inst, false, config.T};
            for (const auto& s : config.portfolio) {
                const auto& rec = kb.runtime_at(i, kb.solver_index(s));
                if (solves_within(rec, config.T) && (!out.solved || rec.time < out.time)) {
                    out.solved = true;
                    out.time = rec.time;
                }
            }
            outcomes.push_back(out);
        }
    } else if (kind == Approach::Sbs) {
        const std::vector<std::pair<SolverId, double>> entries{{single_best, config.T}};
        for (const auto& inst : test) {
            outcomes.push_back(simulate_entries(entries, config.T, inst, kb, 0.0));
        }
    } else if (kind == Approach::Equ) {
        for (const auto& inst : test) {
            outcomes.push_back(simulate_entries(equ_entries, config.T, inst, kb, 0.0));
        }
    } else {
        const auto training = plan.training_set(repeat, fold);
        if (static_cast<std::size_t>(config.k) > training.size()) {
            throw Error("k = " + std::to_string(config.k) + " exceeds the training-set size (" +
                        std::to_string(training.size()) + ")");
        }
        const KnowledgeBase train_kb = kb.restricted_to(training);
        const ScalingParams params = fit_scaling(train_kb, training);
        for (const auto& inst : test) {
            const auto scaled = apply_scaling(params, kb.features(inst));
            if (kind == Approach::Sunny) {
                const Schedule schedule = build_schedule(scaled, config, train_kb, params);
                cell.subpf_sizes.push_back(static_cast<int>(schedule.subportfolio.size()));
                outcomes.push_back(simulate_schedule(schedule, inst, kb));
            } else {  // KNN: best single solver in the neighborhood, full budget
                const auto nb = nearest_neighbors(scaled, config.k, train_kb, params);
                SolverId pick;
                int pick_count = -1;
                double pick_time = 0.0;
                std::vector<SolverId> sorted = config.portfolio;
                std::sort(sorted.begin(), sorted.end());
                for (const auto& s : sorted) {
                    const std::size_t si = kb.solver_index(s);
                    int count = 0;
                    double time = 0.0;
                    for (const auto& member : nb.members) {
                        const auto& rec =
                            train_kb.runtime_at(train_kb.instance_index(member), si);
                        if (solves_within(rec, config.T)) {
                            ++count;
                        }
                        time += effective_runtime(rec, config.T);
                    }
                    if (count > pick_count || (count == pick_count && time < pick_time)) {
                        pick = s;
                        pick_count = count;
                        pick_time = time;
                    }
                }
                const std::vector<std::pair<SolverId, double>> entries{{pick, config.T}};
                outcomes.push_back(
                    simulate_entries(entries, config.T, inst, kb, kb.feature_cost(inst)));
            }
        }
    }

    const CellOutcome metrics = metrics_from(outcomes, config.T);
    cell.psi = metrics.psi;
    cell.ast = metrics.ast;
    return cell;
}

EvaluationReport assemble_report(const std::string& label, const FoldPlan& plan,
                                 const std::vector<CellOutcome>& cells,
                                 SubportfolioStats* stats) {
    EvaluationReport report;
    report.approach = label;
    report.repeats = plan.repeats;
    report.folds = plan.folds;
    long size_count = 0;
    long size_sum = 0;
    int size_max = 0;
    for (int r = 0; r < plan.repeats; ++r) {
        double psi_sum = 0.0;
        double ast_sum = 0.0;
        for (int f = 0; f < plan.folds; ++f) {
            const auto& cell = cells[static_cast<std::size_t>(r) * plan.folds + f];
            report.cells.push_back({r + 1, f + 1, cell.psi, cell.ast});
            psi_sum += cell.psi;
            ast_sum += cell.ast;
            for (int s : cell.subpf_sizes) {
                ++size_count;
                size_sum += s;
                size_max = std::max(size_max, s);
            }
        }
        report.repeat_avg.push_back(
            {r + 1, psi_sum / plan.folds, ast_sum / plan.folds});
    }
    double psi_total = 0.0;
    double ast_total = 0.0;
    for (const auto& rep : report.repeat_avg) {
        psi_total += rep.psi;
        ast_total += rep.ast;
    }
    report.psi = psi_total / plan.repeats;
    report.ast = ast_total / plan.repeats;
    if (stats) {
        stats->count = size_count;
        stats->max = size_max;
        stats->mean = size_count ? static_cast<double>(size_sum) / size_count : 0.0;
    }
    return report;
}

std::vector<CellOutcome> run_cells(const EvalJob& job, int jobs) {
    const int total = job.plan.repeats * job.plan.folds;
    std::vector<CellOutcome> cells(total);
    if (jobs <= 1) {
        for (int c = 0; c < total; ++c) {
            cells[c] = job.run_cell(c / job.plan.folds, c % job.plan.folds);
        }
        return cells;
    }
    // Cells are independent; each worker writes only its own slots, so the
    // assembled report does not depend on completion order.
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= total) {
                return;
            }
            try {
                cells[c] = job.run_cell(c / job.plan.folds, c % job.plan.folds);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    const int workers = std::min(jobs, total);
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return cells;
}

}  // namespace

EvaluationReport run_sunny_eval(const KnowledgeBase& kb, const SunnyConfig& config,
                                const FoldPlan& plan, int jobs, SubportfolioStats* stats) {
    config.validate(kb);
    EvalJob job{Approach::Sunny, kb, config, plan, {}, {}};
    return assemble_report("SUNNY", plan, run_cells(job, jobs), stats);
}

EvaluationReport run_baseline(Approach kind, const KnowledgeBase& kb, const SunnyConfig& config,
                              const FoldPlan& plan, int jobs) {
    if (kind == Approach::Sunny) {
        return run_sunny_eval(kb, config, plan, jobs);
    }
    config.validate(kb);
    EvalJob job{kind, kb, config, plan, {}, {}};
    if (kind == Approach::Sbs) {
        job.single_best = elect_backup(kb, config.portfolio);
    } else if (kind == Approach::Equ) {
        // Equal share T/m each, ordered by ascending average runtime over
        // the whole knowledge base (ties by name).
        std::vector<std::pair<double, SolverId>> order;
        for (const auto& s : config.portfolio) {
            const std::size_t si = kb.solver_index(s);
            double sum = 0.0;
            for (std::size_t i = 0; i < kb.instances().size(); ++i) {
                sum += kb.runtime_at(i, si).time;
            }
            order.emplace_back(sum / static_cast<double>(kb.instances().size()), s);
        }
        std::sort(order.begin(), order.end());
        const double share = config.T / static_cast<double>(config.portfolio.size());
        for (const auto& [avg, s] : order) {
            job.equ_entries.emplace_back(s, share);
        }
    }
    return assemble_report(to_string(kind), plan, run_cells(job, jobs), nullptr);
}

std::vector<SweepRow> sweep_k(const KnowledgeBase& kb, const std::vector<int>& m_range,
                              const std::vector<int>& k_range, const FoldPlan& plan,
                              double T, int jobs) {
    if (m_range.empty() || k_range.empty()) {
        throw Error("sweep ranges must be non-empty");
    }
    std::vector<SweepRow> rows;
    for (int m : m_range) {
        std::vector<SolverId> portfolio;
        if (m == static_cast<int>(kb.solvers().size())) {
            portfolio = kb.solvers();
            std::sort(portfolio.begin(), portfolio.end());
        } else {
            portfolio = compose_portfolio(kb, m).solvers;
        }
        const SolverId backup = elect_backup(kb, portfolio);
        for (int k : k_range) {
            SunnyConfig config;
            config.k = k;
            config.T = T;
            config.backup = backup;
            config.portfolio = portfolio;
            SubportfolioStats stats;
            const auto report = run_sunny_eval(kb, config, plan, jobs, &stats);
            rows.push_back({m, k, report.psi, report.ast, stats.mean, stats.max});
        }
    }
    return rows;
}

}  // namespace sunny
