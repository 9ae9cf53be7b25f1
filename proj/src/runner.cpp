#include "sunny/runner.hpp"

#include "sunny/error.hpp"

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstring>
#include <set>
#include <string>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace sunny {

std::string to_string(StepOutcome outcome) {
    switch (outcome) {
        case StepOutcome::Solved: return "solved";
        case StepOutcome::Timeout: return "timeout";
        case StepOutcome::PrematureExit: return "premature-exit";
        case StepOutcome::SpawnError: return "error";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string substitute_instance(const std::string& tmpl, const std::string& path) {
    const auto pos = tmpl.find("{instance}");
    std::string cmd = tmpl;
    cmd.replace(pos, std::strlen("{instance}"), path);
    return cmd;
}

void validate_command(const SolverId& solver, const SolverCommand& cmd) {
    const std::string placeholder = "{instance}";
    const auto first = cmd.command_template.find(placeholder);
    if (first == std::string::npos) {
        throw Error("command for solver '" + solver + "' lacks the {instance} placeholder");
    }
    if (cmd.command_template.find(placeholder, first + placeholder.size()) !=
        std::string::npos) {
        throw Error("command for solver '" + solver +
                    "' must contain {instance} exactly once");
    }
    if (cmd.success_marker.empty()) {
        throw Error("solver '" + solver + "' has an empty success marker");
    }
}

struct ProcessResult {
    StepOutcome outcome = StepOutcome::SpawnError;
    double elapsed = 0.0;
};

// Kill the whole process group: solvers commonly spawn children via sh.
void terminate_group(pid_t pid, double grace_seconds) {
    kill(-pid, SIGTERM);
    const auto start = Clock::now();
    int status = 0;
    while (seconds_since(start) < grace_seconds) {
        const pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid || (done == -1 && errno == ECHILD)) {
            return;
        }
        usleep(10000);
    }
    kill(-pid, SIGKILL);
    waitpid(pid, &status, 0);
}

ProcessResult run_solver_process(const std::string& command, const std::string& marker,
                                 double allotted, double grace_seconds) {
    int fds[2];
    if (pipe(fds) != 0) {
        return {StepOutcome::SpawnError, 0.0};
    }
    const auto start = Clock::now();
    const pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        return {StepOutcome::SpawnError, 0.0};
    }
    if (pid == 0) {
        setpgid(0, 0);
        dup2(fds[1], STDOUT_FILENO);
        dup2(fds[1], STDERR_FILENO);
        close(fds[0]);
        close(fds[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    setpgid(pid, pid);  // both sides set it to close the race
    close(fds[1]);

    std::string pending;
    bool marker_seen = false;
    bool eof = false;
    char chunk[4096];

    auto scan_pending = [&](bool flush) {
        std::size_t begin = 0;
        for (;;) {
            const auto nl = pending.find('\n', begin);
            if (nl == std::string::npos) {
                break;
            }
            if (pending.compare(begin, nl - begin, marker) == 0 ||
                pending.substr(begin, nl - begin).find(marker) != std::string::npos) {
                marker_seen = true;
            }
            begin = nl + 1;
        }
        pending.erase(0, begin);
        if (flush && !pending.empty() &&
            pending.find(marker) != std::string::npos) {
            marker_seen = true;
        }
    };

    while (!marker_seen && !eof) {
        const double left = allotted - seconds_since(start);
        if (left <= 0.0) {
            break;
        }
        struct pollfd pfd{fds[0], POLLIN, 0};
        const int timeout_ms = static_cast<int>(std::min(left, 0.05) * 1000.0) + 1;
        const int ready = poll(&pfd, 1, timeout_ms);
        if (ready <= 0) {
            continue;
        }
        const ssize_t n = read(fds[0], chunk, sizeof(chunk));
        if (n > 0) {
            pending.append(chunk, static_cast<std::size_t>(n));
            scan_pending(false);
        } else {
            eof = true;
            scan_pending(true);
        }
    }
    close(fds[0]);

    ProcessResult result;
    result.elapsed = seconds_since(start);
    if (marker_seen) {
        result.outcome = StepOutcome::Solved;
        terminate_group(pid, grace_seconds);
    } else if (eof) {
        result.outcome = StepOutcome::PrematureExit;
        int status = 0;
        waitpid(pid, &status, 0);
    } else {
        result.outcome = StepOutcome::Timeout;
        terminate_group(pid, grace_seconds);
        result.elapsed = seconds_since(start);  // include the termination tail
    }
    return result;
}

}  // namespace

std::vector<SolverId> fallback_order_from_kb(const KnowledgeBase& kb,
                                             const std::vector<SolverId>& portfolio) {
    struct Rank {
        int solved;
        SolverId name;
    };
    std::vector<Rank> ranks;
    for (const auto& s : portfolio) {
        const std::size_t si = kb.solver_index(s);
        int solved = 0;
        for (std::size_t i = 0; i < kb.instances().size(); ++i) {
            if (kb.runtime_at(i, si).solved) {
                ++solved;
            }
        }
        ranks.push_back({solved, s});
    }
    std::sort(ranks.begin(), ranks.end(), [](const Rank& a, const Rank& b) {
        if (a.solved != b.solved) {
            return a.solved > b.solved;
        }
        return a.name < b.name;
    });
    std::vector<SolverId> order;
    order.reserve(ranks.size());
    for (auto& r : ranks) {
        order.push_back(std::move(r.name));
    }
    return order;
}

ExecutionTrace execute_schedule(const Schedule& schedule, const std::string& instance_path,
                                const std::map<SolverId, SolverCommand>& commands,
                                const std::vector<SolverId>& fallback_order, double T,
                                double grace_seconds) {
    if (!(T > 0.0)) {
        throw Error("execute_schedule: T must be positive");
    }
    if (access(instance_path.c_str(), R_OK) != 0) {
        throw Error("instance path '" + instance_path + "' is not readable");
    }
    auto command_for = [&](const SolverId& s) -> const SolverCommand& {
        const auto it = commands.find(s);
        if (it == commands.end()) {
            throw Error("no command configured for solver '" + s + "'");
        }
        return it->second;
    };
    for (const auto& e : schedule.entries) {
        validate_command(e.solver, command_for(e.solver));
    }
    for (const auto& s : fallback_order) {
        validate_command(s, command_for(s));
    }

    // Below this threshold spawning a process is pointless.
    constexpr double kMinSlice = 0.01;

    ExecutionTrace trace;
    std::set<SolverId> executed;
    double remaining = T;
    double carry = 0.0;

    auto run_step = [&](const SolverId& solver, double allotted) {
        const auto& cmd = command_for(solver);
        const auto result = run_solver_process(
            substitute_instance(cmd.command_template, instance_path), cmd.success_marker,
            allotted, grace_seconds);
        executed.insert(solver);
        remaining -= result.elapsed;
        trace.steps.push_back({solver, allotted, result.elapsed, result.outcome});
        trace.total_time += result.elapsed;
        if (result.outcome == StepOutcome::Solved) {
            trace.solved = true;
        }
        // Unused allotment of an early exit funds the next step.
        if (result.outcome == StepOutcome::PrematureExit ||
            result.outcome == StepOutcome::SpawnError) {
            carry = std::max(0.0, allotted - result.elapsed);
        } else {
            carry = 0.0;
        }
    };

    for (const auto& entry : schedule.entries) {
        if (trace.solved || remaining <= kMinSlice) {
            break;
        }
        const double allotted = std::min(entry.seconds() + carry, remaining);
        carry = 0.0;
        if (allotted <= kMinSlice) {
            continue;
        }
        run_step(entry.solver, allotted);
    }

    // Remaining budget goes to not-yet-run solvers, best training record
    // first, each receiving everything that is left in turn.
    if (!trace.solved) {
        for (const auto& solver : fallback_order) {
            if (remaining <= kMinSlice) {
                break;
            }
            if (executed.count(solver)) {
                continue;
            }
            run_step(solver, remaining);
            if (trace.solved) {
                break;
            }
        }
    }
    return trace;
}

}  // namespace sunny
