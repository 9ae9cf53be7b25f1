#pragma once

#include "sunny/algorithm.hpp"
#include "sunny/evaluation.hpp"
#include "sunny/runner.hpp"

#include <map>
#include <string>
#include <vector>

namespace sunny {

// JSON document formats are specified in docs/formats.md.

std::string schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(const std::string& text);

std::string trace_to_json(const ExecutionTrace& trace, const std::string& instance_path);

// Solver configuration file: {"solvers": {name: {"command": ..., "success_marker": ...}}}
std::map<SolverId, SolverCommand> load_solver_commands(const std::string& path);

// approach,repeat,fold,psi,ast rows followed by per-repeat and overall
// aggregate footer rows (fold column "avg" / repeat column "all").
std::string report_to_csv(const EvaluationReport& report);
std::string report_to_json(const EvaluationReport& report);

// One aggregate row per approach.
std::string comparison_csv(const std::vector<EvaluationReport>& reports);

// m,k,psi,ast,avg_subpf_size,max_subpf_size
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace sunny
