#include "sunny/knowledge_base.hpp"

#include "sunny/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace sunny {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    for (auto& f : fields) {
        auto begin = f.find_first_not_of(" \t");
        auto end = f.find_last_not_of(" \t");
        f = (begin == std::string::npos) ? std::string() : f.substr(begin, end - begin + 1);
    }
    return fields;
}

double parse_double(const std::string& token, const std::string& context) {
    double value = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw Error(context + ": cannot parse number '" + token + "'");
    }
    return value;
}

}  // namespace

std::size_t KnowledgeBase::instance_index(const InstanceId& id) const {
    auto it = instance_index_.find(id);
    if (it == instance_index_.end()) {
        throw Error("unknown instance '" + id + "'");
    }
    return it->second;
}

std::size_t KnowledgeBase::solver_index(const SolverId& id) const {
    auto it = solver_index_.find(id);
    if (it == solver_index_.end()) {
        throw Error("unknown solver '" + id + "'");
    }
    return it->second;
}

const std::vector<double>& KnowledgeBase::features(const InstanceId& id) const {
    return features_[instance_index(id)];
}

const RuntimeRecord& KnowledgeBase::runtime(const InstanceId& instance,
                                            const SolverId& solver) const {
    return runtime_at(instance_index(instance), solver_index(solver));
}

double KnowledgeBase::feature_cost(const InstanceId& id) const {
    return feature_costs_[instance_index(id)];
}

KnowledgeBase KnowledgeBase::restricted_to(const std::vector<InstanceId>& keep) const {
    std::unordered_set<std::string> wanted;
    for (const auto& id : keep) {
        instance_index(id);  // validates membership
        wanted.insert(id);
    }
    KnowledgeBase out;
    out.solvers_ = solvers_;
    out.solver_index_ = solver_index_;
    out.feature_dim_ = feature_dim_;
    out.timeout_ = timeout_;
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        if (!wanted.count(instances_[i])) {
            continue;
        }
        out.instance_index_[instances_[i]] = out.instances_.size();
        out.instances_.push_back(instances_[i]);
        out.features_.push_back(features_[i]);
        out.feature_costs_.push_back(feature_costs_[i]);
        for (std::size_t s = 0; s < solvers_.size(); ++s) {
            out.runtimes_.push_back(runtime_at(i, s));
        }
    }
    return out;
}

KnowledgeBase make_knowledge_base(std::vector<InstanceId> instances,
                                  std::vector<SolverId> solvers,
                                  std::vector<std::vector<double>> features,
                                  const std::vector<RuntimeEntry>& runtimes,
                                  std::vector<double> feature_costs,
                                  double timeout) {
    if (!(timeout > 0.0) || !std::isfinite(timeout)) {
        throw Error("timeout must be a positive finite number of seconds");
    }
    if (instances.empty()) {
        throw Error("knowledge base needs at least one instance");
    }
    if (solvers.empty()) {
        throw Error("knowledge base needs at least one solver");
    }
    if (features.size() != instances.size()) {
        throw Error("one feature row per instance required");
    }
    if (feature_costs.empty()) {
        feature_costs.assign(instances.size(), 0.0);
    }
    if (feature_costs.size() != instances.size()) {
        throw Error("one feature cost per instance required");
    }

    KnowledgeBase kb;
    for (const auto& id : instances) {
        if (id.empty()) {
            throw Error("empty instance id");
        }
        if (!kb.instance_index_.emplace(id, kb.instance_index_.size()).second) {
            throw Error("duplicate instance id '" + id + "'");
        }
    }
    for (const auto& id : solvers) {
        if (id.empty()) {
            throw Error("empty solver name");
        }
        if (!kb.solver_index_.emplace(id, kb.solver_index_.size()).second) {
            throw Error("duplicate solver name '" + id + "'");
        }
    }

    kb.feature_dim_ = features.front().size();
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != kb.feature_dim_) {
            throw Error("feature row for '" + instances[i] + "' has " +
                        std::to_string(features[i].size()) + " values, expected " +
                        std::to_string(kb.feature_dim_));
        }
        for (double v : features[i]) {
            if (!std::isfinite(v)) {
                throw Error("non-finite feature value for instance '" + instances[i] + "'");
            }
        }
        if (!(feature_costs[i] >= 0.0) || !std::isfinite(feature_costs[i])) {
            throw Error("feature cost for '" + instances[i] + "' must be >= 0");
        }
    }

    kb.instances_ = std::move(instances);
    kb.solvers_ = std::move(solvers);
    kb.features_ = std::move(features);
    kb.feature_costs_ = std::move(feature_costs);
    kb.timeout_ = timeout;

    const std::size_t n_cells = kb.instances_.size() * kb.solvers_.size();
    kb.runtimes_.assign(n_cells, RuntimeRecord{});
    std::vector<bool> seen(n_cells, false);
    for (const auto& entry : runtimes) {
        auto inst_it = kb.instance_index_.find(entry.instance);
        if (inst_it == kb.instance_index_.end()) {
            throw Error("runtime row references unknown instance '" + entry.instance + "'");
        }
        auto solver_it = kb.solver_index_.find(entry.solver);
        if (solver_it == kb.solver_index_.end()) {
            throw Error("runtime row references unknown solver '" + entry.solver + "'");
        }
        const std::size_t cell = inst_it->second * kb.solvers_.size() + solver_it->second;
        if (seen[cell]) {
            throw Error("duplicate runtime record for (" + entry.instance + ", " + entry.solver +
                        ")");
        }
        seen[cell] = true;
        if (!std::isfinite(entry.time) || entry.time < 0.0) {
            throw Error("runtime for (" + entry.instance + ", " + entry.solver +
                        ") must be a finite number >= 0");
        }
        RuntimeRecord rec;
        rec.solved = entry.solved;
        if (entry.solved) {
            if (entry.time >= timeout) {
                throw Error("solved record for (" + entry.instance + ", " + entry.solver +
                            ") has time >= timeout");
            }
            rec.time = entry.time;
        } else {
            rec.time = timeout;  // unsolved convention
        }
        kb.runtimes_[cell] = rec;
    }
    for (std::size_t i = 0; i < kb.instances_.size(); ++i) {
        for (std::size_t s = 0; s < kb.solvers_.size(); ++s) {
            if (!seen[i * kb.solvers_.size() + s]) {
                throw Error("missing runtime record for (" + kb.instances_[i] + ", " +
                            kb.solvers_[s] + ")");
            }
        }
    }
    return kb;
}

KnowledgeBase load_knowledge_base(const std::string& features_path,
                                  const std::string& runtimes_path,
                                  double timeout) {
    std::ifstream ffile(features_path);
    if (!ffile) {
        throw Error("cannot open features file '" + features_path + "'");
    }
    std::string line;
    if (!std::getline(ffile, line)) {
        throw Error(features_path + ": empty file");
    }
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "instance") {
        throw Error(features_path + ": header must be 'instance,f1,...,fD[,feat_time]'");
    }
    const bool has_cost = header.back() == "feat_time";
    const std::size_t dim = header.size() - 1 - (has_cost ? 1 : 0);
    if (dim == 0) {
        throw Error(features_path + ": at least one feature column required");
    }

    std::vector<InstanceId> instances;
    std::vector<std::vector<double>> features;
    std::vector<double> costs;
    std::size_t lineno = 1;
    while (std::getline(ffile, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw Error(features_path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
        }
        instances.push_back(fields[0]);
        std::vector<double> row(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            row[j] = parse_double(fields[1 + j],
                                  features_path + ":" + std::to_string(lineno));
        }
        features.push_back(std::move(row));
        if (has_cost) {
            costs.push_back(parse_double(fields.back(),
                                         features_path + ":" + std::to_string(lineno)));
        }
    }

    std::ifstream rfile(runtimes_path);
    if (!rfile) {
        throw Error("cannot open runtimes file '" + runtimes_path + "'");
    }
    if (!std::getline(rfile, line)) {
        throw Error(runtimes_path + ": empty file");
    }
    auto rheader = split_csv_line(line);
    if (rheader != std::vector<std::string>{"instance", "solver", "time", "solved"}) {
        throw Error(runtimes_path + ": header must be 'instance,solver,time,solved'");
    }

    std::vector<RuntimeEntry> entries;
    std::vector<SolverId> solvers;  // first-appearance order
    std::set<SolverId> seen_solvers;
    lineno = 1;
    while (std::getline(rfile, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw Error(runtimes_path + ":" + std::to_string(lineno) +
                        ": expected 4 fields, got " + std::to_string(fields.size()));
        }
        RuntimeEntry entry;
        entry.instance = fields[0];
        entry.solver = fields[1];
        entry.time = parse_double(fields[2], runtimes_path + ":" + std::to_string(lineno));
        if (fields[3] == "0") {
            entry.solved = false;
        } else if (fields[3] == "1") {
            entry.solved = true;
        } else {
            throw Error(runtimes_path + ":" + std::to_string(lineno) +
                        ": solved must be 0 or 1, got '" + fields[3] + "'");
        }
        if (seen_solvers.insert(entry.solver).second) {
            solvers.push_back(entry.solver);
        }
        entries.push_back(std::move(entry));
    }

    return make_knowledge_base(std::move(instances), std::move(solvers), std::move(features),
                               entries, std::move(costs), timeout);
}

ScalingParams fit_scaling(const KnowledgeBase& kb, const std::vector<InstanceId>& training) {
    if (training.empty()) {
        throw Error("fit_scaling: empty training set");
    }
    const std::size_t dim = kb.feature_dim();
    ScalingParams params;
    params.min.assign(dim, 0.0);
    params.max.assign(dim, 0.0);
    bool first = true;
    for (const auto& id : training) {
        const auto& row = kb.features(id);
        for (std::size_t j = 0; j < dim; ++j) {
            if (first) {
                params.min[j] = params.max[j] = row[j];
            } else {
                params.min[j] = std::min(params.min[j], row[j]);
                params.max[j] = std::max(params.max[j], row[j]);
            }
        }
        first = false;
    }
    for (std::size_t j = 0; j < dim; ++j) {
        if (params.min[j] < params.max[j]) {
            params.retained.push_back(j);
        }
    }
    return params;
}

std::vector<double> apply_scaling(const ScalingParams& params, const std::vector<double>& raw) {
    if (raw.size() != params.dimensionality()) {
        throw Error("apply_scaling: vector has " + std::to_string(raw.size()) +
                    " values, expected " + std::to_string(params.dimensionality()));
    }
    std::vector<double> out;
    out.reserve(params.retained.size());
    for (std::size_t j : params.retained) {
        double v = 2.0 * (raw[j] - params.min[j]) / (params.max[j] - params.min[j]) - 1.0;
        out.push_back(std::clamp(v, -1.0, 1.0));
    }
    return out;
}

}  // namespace sunny
