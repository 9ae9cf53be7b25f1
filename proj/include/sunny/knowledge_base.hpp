#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace sunny {

using SolverId = std::string;
using InstanceId = std::string;

// One (instance, solver) cell of the runtime matrix. Unsolved records carry
// time == timeout, so downstream averages need no special casing.
struct RuntimeRecord {
    double time = 0.0;
    bool solved = false;
};

// Flat row used when constructing a knowledge base programmatically.
struct RuntimeEntry {
    InstanceId instance;
    SolverId solver;
    double time = 0.0;
    bool solved = false;
};

// Per-feature min/max learned from a training set, plus the indices of the
// features that were not constant on it. Derived from training instances
// only.
struct ScalingParams {
    std::vector<double> min;
    std::vector<double> max;
    std::vector<std::size_t> retained;  // ascending indices with min < max

    std::size_t dimensionality() const { return min.size(); }
};

// Immutable training data: instance features plus the full runtime matrix,
// one record per (instance, solver) pair. Safe for concurrent reads.
class KnowledgeBase {
public:
    const std::vector<SolverId>& solvers() const { return solvers_; }
    const std::vector<InstanceId>& instances() const { return instances_; }
    double timeout() const { return timeout_; }
    std::size_t feature_dim() const { return feature_dim_; }

    bool has_instance(const InstanceId& id) const { return instance_index_.count(id) != 0; }
    bool has_solver(const SolverId& id) const { return solver_index_.count(id) != 0; }
    std::size_t instance_index(const InstanceId& id) const;
    std::size_t solver_index(const SolverId& id) const;

    const std::vector<double>& features(const InstanceId& id) const;
    const RuntimeRecord& runtime(const InstanceId& instance, const SolverId& solver) const;
    const RuntimeRecord& runtime_at(std::size_t instance, std::size_t solver) const {
        return runtimes_[instance * solvers_.size() + solver];
    }
    double feature_cost(const InstanceId& id) const;

    // Copy containing only the given instances (in knowledge-base order).
    // Used by cross-validation to restrict neighbor search to training data.
    KnowledgeBase restricted_to(const std::vector<InstanceId>& keep) const;

    friend KnowledgeBase make_knowledge_base(std::vector<InstanceId> instances,
                                             std::vector<SolverId> solvers,
                                             std::vector<std::vector<double>> features,
                                             const std::vector<RuntimeEntry>& runtimes,
                                             std::vector<double> feature_costs,
                                             double timeout);

private:
    KnowledgeBase() = default;

    std::vector<SolverId> solvers_;
    std::vector<InstanceId> instances_;
    std::vector<std::vector<double>> features_;   // by instance index
    std::vector<RuntimeRecord> runtimes_;         // instance-major matrix
    std::vector<double> feature_costs_;           // by instance index
    std::unordered_map<InstanceId, std::size_t> instance_index_;
    std::unordered_map<SolverId, std::size_t> solver_index_;
    std::size_t feature_dim_ = 0;
    double timeout_ = 0.0;
};

// Validating constructor. `feature_costs` may be empty (defaults to 0 per
// instance). Rejects duplicate ids, ragged or non-finite feature rows,
// missing or duplicate runtime cells, and solved records at or above the
// timeout. Unsolved records have their time normalized to the timeout.
KnowledgeBase make_knowledge_base(std::vector<InstanceId> instances,
                                  std::vector<SolverId> solvers,
                                  std::vector<std::vector<double>> features,
                                  const std::vector<RuntimeEntry>& runtimes,
                                  std::vector<double> feature_costs,
                                  double timeout);

// Load a knowledge base from the two CSV files described in
// docs/formats.md: a feature table (optionally ending in a feat_time
// column) and a long-format runtime table.
KnowledgeBase load_knowledge_base(const std::string& features_path,
                                  const std::string& runtimes_path,
                                  double timeout);

// Learn per-feature min/max on `training` and drop constant features
// (exact min == max, no epsilon).
ScalingParams fit_scaling(const KnowledgeBase& kb, const std::vector<InstanceId>& training);

// Map a raw full-dimension vector to [-1, 1] over the retained features.
// Values outside the training range are clamped.
std::vector<double> apply_scaling(const ScalingParams& params, const std::vector<double>& raw);

// Runtime under budget T: the recorded time if the solver finished within
// T, otherwise T itself.
inline double effective_runtime(const RuntimeRecord& rec, double T) {
    return (rec.solved && rec.time <= T) ? rec.time : T;
}

inline bool solves_within(const RuntimeRecord& rec, double T) {
    return rec.solved && rec.time <= T;
}

}  // namespace sunny
