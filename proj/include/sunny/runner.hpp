#pragma once

#include "sunny/algorithm.hpp"
#include "sunny/knowledge_base.hpp"

#include <map>
#include <string>
#include <vector>

namespace sunny {

// How to launch one solver on an instance file. The template must contain
// the placeholder {instance} exactly once; it is replaced verbatim by the
// instance path. A solver signals success by printing a line containing
// `success_marker`.
struct SolverCommand {
    std::string command_template;
    std::string success_marker = "----------";
};

enum class StepOutcome { Solved, Timeout, PrematureExit, SpawnError };

std::string to_string(StepOutcome outcome);

struct ExecutionStep {
    SolverId solver;
    double allotted = 0.0;
    double elapsed = 0.0;
    StepOutcome outcome = StepOutcome::Timeout;
};

struct ExecutionTrace {
    std::vector<ExecutionStep> steps;
    bool solved = false;
    double total_time = 0.0;  // sum of step elapsed times
};

// Run the schedule against real solver processes, sequentially. Each entry
// gets its allocation (clipped to the remaining budget); a process that
// exits unsolved early donates its unused time to the next entry. Once the
// schedule is exhausted, not-yet-executed solvers from `fallback_order`
// each get the entire remaining budget in turn. Wall time never exceeds
// T + grace: on expiry a process group receives SIGTERM, then SIGKILL after
// the grace period.
ExecutionTrace execute_schedule(const Schedule& schedule, const std::string& instance_path,
                                const std::map<SolverId, SolverCommand>& commands,
                                const std::vector<SolverId>& fallback_order, double T,
                                double grace_seconds = 1.0);

// Fallback chain for a portfolio: solvers sorted by training-set solved
// count descending, ties by name.
std::vector<SolverId> fallback_order_from_kb(const KnowledgeBase& kb,
                                             const std::vector<SolverId>& portfolio);

}  // namespace sunny
