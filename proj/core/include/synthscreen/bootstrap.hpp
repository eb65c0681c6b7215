#pragma once

// Matched-size bootstrap: B real reference subsets of size N are drawn once per
// dataset and reused for every generator, ratio and encoder; each trial pairs
// one of them with a size-N synthetic draw.

#include "synthscreen/dataio.hpp"
#include "synthscreen/embed_metrics.hpp"
#include "synthscreen/object_metrics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace synthscreen {

inline constexpr std::size_t kDefaultTrials = 5;

struct BootstrapPlan {
    std::string dataset;
    std::size_t real_pool_size = 0;
    std::size_t n_match = 0;
    std::size_t n_trials = 0;
    std::uint64_t master_seed = 0;
    std::vector<std::vector<std::size_t>> real_subsets;

    bool operator==(const BootstrapPlan&) const = default;
};

BootstrapPlan make_plan(const std::string& dataset, std::size_t real_pool_size, std::size_t n_match,
                        std::size_t n_trials, std::uint64_t master_seed);

/// N indices into a synthetic pool for one trial. The stream depends on
/// (master seed, dataset, generator, ratio, trial) only. A pool of exactly N
/// yields 0..N-1 in every trial; smaller pools are sampled with replacement.
std::vector<std::size_t> draw_synthetic(const BootstrapPlan& plan, std::size_t trial,
                                        std::size_t syn_pool_size, const ConfigKey& key);

std::string plan_to_json(const BootstrapPlan& plan);
BootstrapPlan plan_from_json(std::string_view text);

/// One image pool: embeddings per encoder plus optional labels, all indexed
/// by the same image order.
struct Pool {
    std::map<Encoder, EmbeddingSet> embeddings;
    std::optional<AnnotationSet> labels;

    /// Common row count; throws if the members disagree or the pool is empty.
    std::size_t size() const;
    /// The first `n` items, in order.
    Pool prefix(std::size_t n) const;
};

struct BootstrapOptions {
    GlobalMetricOptions global;
    ObjectMetricOptions object;
};

/// Evaluates every metric over the plan's trials for one configuration and
/// returns mean and sample standard deviation per metric.
std::vector<MetricRecord> run_config(const BootstrapPlan& plan, const Pool& real, const Pool& syn,
                                     const ConfigKey& key, const BootstrapOptions& opt = {});

}  // namespace synthscreen
