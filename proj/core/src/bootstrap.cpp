#include "synthscreen/bootstrap.hpp"

#include "synthscreen/random.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numeric>

namespace synthscreen {

namespace {

constexpr std::uint64_t kRealStream = 0x7265616cULL;  // "real"
constexpr std::uint64_t kSynStream = 0x73796eULL;     // "syn"
constexpr std::uint64_t kMetricStream = 0x6d6574ULL;  // "met"

}  // namespace

BootstrapPlan make_plan(const std::string& dataset, std::size_t real_pool_size, std::size_t n_match,
                        std::size_t n_trials, std::uint64_t master_seed) {
    if (n_match == 0) throw Error("make_plan: match size must be positive");
    if (n_trials == 0) throw Error("make_plan: need at least one trial");
    if (n_match > real_pool_size) {
        throw Error("make_plan: match size " + std::to_string(n_match) + " exceeds real pool of " +
                    std::to_string(real_pool_size));
    }
    BootstrapPlan plan{dataset, real_pool_size, n_match, n_trials, master_seed, {}};
    for (std::size_t b = 0; b < n_trials; ++b) {
        Rng rng(derive_seed(master_seed, {hash_string(dataset), kRealStream, b}));
        plan.real_subsets.push_back(rng.sample_without_replacement(real_pool_size, n_match));
    }
    return plan;
}

std::vector<std::size_t> draw_synthetic(const BootstrapPlan& plan, std::size_t trial,
                                        std::size_t syn_pool_size, const ConfigKey& key) {
    if (trial >= plan.n_trials) {
        throw Error("draw_synthetic: trial " + std::to_string(trial) + " outside plan of " +
                    std::to_string(plan.n_trials));
    }
    if (syn_pool_size == 0) throw Error("draw_synthetic: empty synthetic pool");
    const std::size_t n = plan.n_match;
    if (syn_pool_size == n) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    Rng rng(derive_seed(plan.master_seed,
                        {hash_string(key.dataset), kSynStream, hash_string(key.generator),
                         static_cast<std::uint64_t>(key.aug_ratio), trial}));
    return syn_pool_size > n ? rng.sample_without_replacement(syn_pool_size, n)
                             : rng.sample_with_replacement(syn_pool_size, n);
}

std::string plan_to_json(const BootstrapPlan& plan) {
    nlohmann::json j = {{"dataset", plan.dataset},
                        {"real_pool_size", plan.real_pool_size},
                        {"n_match", plan.n_match},
                        {"n_trials", plan.n_trials},
                        {"master_seed", plan.master_seed},
                        {"real_subsets", plan.real_subsets}};
    return j.dump();
}

BootstrapPlan plan_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        BootstrapPlan plan;
        plan.dataset = j.at("dataset").get<std::string>();
        plan.real_pool_size = j.at("real_pool_size").get<std::size_t>();
        plan.n_match = j.at("n_match").get<std::size_t>();
        plan.n_trials = j.at("n_trials").get<std::size_t>();
        plan.master_seed = j.at("master_seed").get<std::uint64_t>();
        plan.real_subsets = j.at("real_subsets").get<std::vector<std::vector<std::size_t>>>();
        if (plan.real_subsets.size() != plan.n_trials) throw Error("plan: subset count != n_trials");
        for (const auto& s : plan.real_subsets) {
            if (s.size() != plan.n_match) throw Error("plan: subset size != n_match");
            for (auto i : s) {
                if (i >= plan.real_pool_size) throw Error("plan: index outside real pool");
            }
        }
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid plan: ") + e.what());
    }
}

std::size_t Pool::size() const {
    std::optional<std::size_t> n;
    auto check = [&](std::size_t v, const std::string& what) {
        if (n && *n != v) {
            throw Error("pool members disagree on size: " + what + " has " + std::to_string(v) +
                        " items, expected " + std::to_string(*n));
        }
        n = v;
    };
    for (const auto& [enc, set] : embeddings) check(static_cast<std::size_t>(set.rows()), to_string(enc));
    if (labels) check(labels->size(), "labels");
    if (!n || *n == 0) throw Error("empty pool");
    return *n;
}

Pool Pool::prefix(std::size_t n) const {
    if (n > size()) {
        throw Error("pool prefix of " + std::to_string(n) + " exceeds pool size " + std::to_string(size()));
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Pool out;
    for (const auto& [enc, set] : embeddings) out.embeddings.emplace(enc, set.select(idx));
    if (labels) out.labels = labels->select(idx);
    return out;
}

std::vector<MetricRecord> run_config(const BootstrapPlan& plan, const Pool& real, const Pool& syn,
                                     const ConfigKey& key, const BootstrapOptions& opt) {
    validate(key);
    if (key.is_baseline()) throw Error("run_config: baseline configurations have no metrics");
    if (key.dataset != plan.dataset) {
        throw Error("run_config: plan is for dataset '" + plan.dataset + "', key is " + to_string(key));
    }
    if (real.size() != plan.real_pool_size) {
        throw Error("run_config: real pool has " + std::to_string(real.size()) + " items, plan expects " +
                    std::to_string(plan.real_pool_size));
    }
    const std::size_t syn_size = syn.size();
    for (const auto& [enc, set] : real.embeddings) {
        if (set.encoder() != enc) throw Error("encoder mismatch between sidecar and request (real)");
        if (!syn.embeddings.contains(enc)) {
            throw Error(std::string("encoder mismatch: synthetic pool lacks ") + to_string(enc));
        }
    }
    for (const auto& [enc, set] : syn.embeddings) {
        if (set.encoder() != enc) throw Error("encoder mismatch between sidecar and request (synthetic)");
        if (!real.embeddings.contains(enc)) {
            throw Error(std::string("encoder mismatch: real pool lacks ") + to_string(enc));
        }
    }
    if (real.labels.has_value() != syn.labels.has_value()) {
        throw Error("run_config: labels present on only one side");
    }

    std::vector<std::string> names;
    std::map<std::string, std::vector<double>> values;
    auto add = [&](const MetricValue& mv) {
        auto [it, inserted] = values.try_emplace(mv.name);
        if (inserted) names.push_back(mv.name);
        it->second.push_back(mv.value);
    };

    for (std::size_t b = 0; b < plan.n_trials; ++b) {
        const auto& real_idx = plan.real_subsets[b];
        const auto syn_idx = draw_synthetic(plan, b, syn_size, key);
        for (const auto& [enc, set] : real.embeddings) {
            const auto r = set.select(real_idx);
            const auto s = syn.embeddings.at(enc).select(syn_idx);
            const std::uint64_t seed =
                derive_seed(plan.master_seed, {hash_string(key.dataset), kMetricStream,
                                               hash_string(key.generator),
                                               static_cast<std::uint64_t>(key.aug_ratio), b,
                                               static_cast<std::uint64_t>(enc)});
            for (const auto& mv : global_metrics(r.data(), s.data(), enc, seed, opt.global)) add(mv);
        }
        if (real.labels) {
            for (const auto& mv : object_centric_metrics(real.labels->select(real_idx),
                                                         syn.labels->select(syn_idx), opt.object)) {
                add(mv);
            }
        }
    }

    std::vector<MetricRecord> out;
    for (const auto& name : names) {
        const auto& v = values.at(name);
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double disp = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        out.push_back({key, name, mean, disp, static_cast<int>(v.size())});
    }
    return out;
}

}  // namespace synthscreen
