#pragma once

// Deterministic on-disk fixture: Gaussian embeddings, YOLO labels, a manifest
// and a runs table with a planted generator quality ordering. Used by the
// acceptance suite and the `fixture` CLI command.

#include "synthscreen/dataio.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace synthscreen {

struct FixtureGenerator {
    std::string name;
    double shift = 0;   ///< mean offset of synthetic embeddings along the first axis
    double quality = 1; ///< drives the planted mAP gain, in [0, 1]
    int extra_objects = 0;  ///< added to each synthetic image's object count
};

struct FixtureWorkspaceOptions {
    std::vector<std::string> datasets{"Alpha", "Beta"};
    std::vector<FixtureGenerator> generators{
        {"GenGood", 0.2, 1.0, 0},
        {"GenMid", 1.5, 0.6, 1},
        {"GenPoor", 3.0, 0.2, 3},
    };
    std::vector<int> ratios{10, 25, 50, 75, 100, 125, 150};
    std::vector<Regime> regimes{Regime::scratch};
    std::size_t real_train_size = 300;
    std::size_t inception_dims = 16;
    std::size_t dino_dims = 24;
    double baseline_map = 0.40;
    int training_seeds = 3;
    std::uint64_t seed = 7;
};

struct FixtureWorkspace {
    std::filesystem::path manifest;
    std::filesystem::path runs;
};

/// Writes embeddings, labels, manifest.json and runs.csv under `dir`.
FixtureWorkspace write_fixture_workspace(const std::filesystem::path& dir,
                                         const FixtureWorkspaceOptions& opt = {});

/// Label set with `n_images` images; counts and box sizes depend on the seed.
AnnotationSet make_fixture_labels(std::uint64_t seed, std::size_t n_images, int extra_objects,
                                  const std::string& prefix);

}  // namespace synthscreen
