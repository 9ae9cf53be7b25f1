#pragma once

#include "sunny/knowledge_base.hpp"

#include <cstdint>
#include <string>

namespace sunny {

// Clustered benchmark generator. Instances are assigned to clusters
// round-robin; each cluster has a designated solver that solves all of its
// instances fast (below timeout/10) while the other solvers mostly time out
// and occasionally solve slowly. Cluster membership is encoded as a one-hot
// block in the features plus Gaussian noise, followed by one constant
// column and one uninformative noise column.
struct SyntheticParams {
    int clusters = 4;
    int instances = 200;
    int solvers = 4;
    double noise = 1.0;  // stddev around the cluster centers (separation is 10)
    std::uint64_t seed = 1;
    double timeout = 1800.0;
    double slow_solve_prob = 0.15;  // chance a non-designated solver solves at all
    bool emit_feature_cost = true;  // feat_time column, uniform in [0, 2)
};

KnowledgeBase generate_synthetic_kb(const SyntheticParams& params);

// Write the same data as CSV files. Byte-identical for identical params.
void write_synthetic_kb(const SyntheticParams& params, const std::string& features_path,
                        const std::string& runtimes_path);

}  // namespace sunny
