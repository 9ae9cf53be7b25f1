#include "sunny/synthetic.hpp"

#include "sunny/error.hpp"
#include "sunny/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

namespace sunny {

namespace {

// Explicit draws on top of mt19937_64 keep the generated files identical
// across standard libraries (std::*_distribution is not pinned down).
struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double uniform01() {
        return static_cast<double>(engine() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) {
        return lo + uniform01() * (hi - lo);
    }
    double gaussian() {
        double u1 = uniform01();
        while (u1 <= 0.0) {
            u1 = uniform01();
        }
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

// Values are rendered to text and parsed back, so the in-memory knowledge
// base matches a file round-trip bit for bit.
double rounded(double value, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, value);
    double out = 0.0;
    std::from_chars(buf, buf + std::strlen(buf), out);
    return out;
}

struct SyntheticData {
    std::vector<InstanceId> instances;
    std::vector<std::vector<double>> features;  // rounded to 6 decimals
    std::vector<double> costs;                  // rounded to 3 decimals
    std::vector<SolverId> solvers;
    std::vector<RuntimeEntry> runtimes;         // times rounded to 3 decimals
};

SyntheticData generate(const SyntheticParams& p) {
    if (p.clusters < 1 || p.instances < 1 || p.solvers < 1) {
        throw Error("synthetic generator needs clusters, instances and solvers >= 1");
    }
    if (!(p.timeout > 0.0)) {
        throw Error("synthetic generator needs a positive timeout");
    }
    if (!(p.noise >= 0.0)) {
        throw Error("noise level must be >= 0");
    }

    Rng rng(p.seed);
    SyntheticData data;
    for (int s = 0; s < p.solvers; ++s) {
        char name[16];
        std::snprintf(name, sizeof(name), "s%02d", s + 1);
        data.solvers.emplace_back(name);
    }

    const int dim = p.clusters + 2;
    for (int i = 0; i < p.instances; ++i) {
        char name[24];
        std::snprintf(name, sizeof(name), "inst%04d", i + 1);
        data.instances.emplace_back(name);
        const int cluster = i % p.clusters;

        std::vector<double> row(dim, 0.0);
        for (int j = 0; j < p.clusters; ++j) {
            const double center = (j == cluster) ? 10.0 : 0.0;
            row[j] = rounded(center + p.noise * rng.gaussian(), "%.6f");
        }
        row[p.clusters] = 1.0;  // planted constant column
        row[p.clusters + 1] = rounded(rng.uniform(0.0, 10.0), "%.6f");
        data.features.push_back(std::move(row));

        data.costs.push_back(p.emit_feature_cost ? rounded(rng.uniform(0.0, 2.0), "%.3f")
                                                 : 0.0);

        const int designated = cluster % p.solvers;
        for (int s = 0; s < p.solvers; ++s) {
            RuntimeEntry entry;
            entry.instance = data.instances.back();
            entry.solver = data.solvers[s];
            if (s == designated) {
                entry.solved = true;
                entry.time = rounded(
                    rng.uniform(std::min(1.0, p.timeout / 20.0), p.timeout / 10.0), "%.3f");
            } else if (rng.uniform01() < p.slow_solve_prob) {
                entry.solved = true;
                entry.time = rounded(rng.uniform(p.timeout / 2.0, p.timeout * 0.99), "%.3f");
            } else {
                entry.solved = false;
                entry.time = p.timeout;
            }
            data.runtimes.push_back(std::move(entry));
        }
    }
    return data;
}

}  // namespace

KnowledgeBase generate_synthetic_kb(const SyntheticParams& params) {
    auto data = generate(params);
    return make_knowledge_base(std::move(data.instances), std::move(data.solvers),
                               std::move(data.features), data.runtimes,
                               params.emit_feature_cost ? std::move(data.costs)
                                                        : std::vector<double>{},
                               params.timeout);
}

void write_synthetic_kb(const SyntheticParams& params, const std::string& features_path,
                        const std::string& runtimes_path) {
    const auto data = generate(params);
    const int dim = params.clusters + 2;

    std::string features = "instance";
    for (int j = 0; j < dim; ++j) {
        features += ",f" + std::to_string(j + 1);
    }
    if (params.emit_feature_cost) {
        features += ",feat_time";
    }
    features += "\n";
    char buf[64];
    for (std::size_t i = 0; i < data.instances.size(); ++i) {
        features += data.instances[i];
        for (double v : data.features[i]) {
            std::snprintf(buf, sizeof(buf), ",%.6f", v);
            features += buf;
        }
        if (params.emit_feature_cost) {
            std::snprintf(buf, sizeof(buf), ",%.3f", data.costs[i]);
            features += buf;
        }
        features += "\n";
    }
    write_text_file(features_path, features);

    std::string runtimes = "instance,solver,time,solved\n";
    for (const auto& entry : data.runtimes) {
        std::snprintf(buf, sizeof(buf), ",%.3f,%d\n", entry.time, entry.solved ? 1 : 0);
        runtimes += entry.instance;
        runtimes += ',';
        runtimes += entry.solver;
        runtimes += buf;
    }
    write_text_file(runtimes_path, runtimes);
}

}  // namespace sunny
