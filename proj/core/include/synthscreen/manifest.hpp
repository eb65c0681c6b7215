#pragma once

// JSON manifest enumerating the real pool and every synthetic configuration
// of each dataset. Relative paths resolve against the manifest's directory.
//
// {
//   "datasets": [{
//     "name": "Pedestrian", "real_train_size": 1530, "regimes": ["scratch", "pretrained"],
//     "real": {"embeddings": {"inception": "real_inc.emb"}, "labels": {"dir": "lbl", "index": "idx.txt"}},
//     "configs": [{"generator": "ADM", "aug_ratio": 10, "pool_size": 153,
//                  "embeddings": {...}, "labels": {...}}]
//   }]
// }

#include "synthscreen/bootstrap.hpp"
#include "synthscreen/dataio.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace synthscreen {

struct LabelPaths {
    std::filesystem::path dir;
    std::filesystem::path index;
};

struct PoolSpec {
    std::map<Encoder, std::filesystem::path> embeddings;
    std::optional<LabelPaths> labels;
};

struct ConfigSpec {
    std::string generator;
    int aug_ratio = 0;
    /// Defaults to the ratio's prefix size, ceil(ratio * real_train_size / 100).
    std::optional<std::size_t> pool_size;
    PoolSpec pool;
};

struct DatasetSpec {
    std::string name;
    std::size_t real_train_size = 0;
    std::vector<Regime> regimes{Regime::scratch, Regime::pretrained};
    PoolSpec real;
    std::vector<ConfigSpec> configs;
};

struct Manifest {
    std::vector<DatasetSpec> datasets;
};

Manifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);
/// Paths are written as given (relative paths stay relative).
std::string manifest_to_json(const Manifest& manifest);

/// Throws listing every referenced file that does not exist.
void check_manifest_paths(const Manifest& manifest);

std::size_t config_count(const Manifest& manifest);

/// ceil(ratio * real_train_size / 100).
std::size_t ratio_pool_size(int aug_ratio, std::size_t real_train_size);
/// Match size at the +10% increment.
std::size_t auto_match_size(std::size_t real_train_size);

/// Loads embeddings (checking each sidecar's encoder tag) and labels.
Pool load_pool(const PoolSpec& spec);

}  // namespace synthscreen
