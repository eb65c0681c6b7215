#include "synthscreen/fixture.hpp"

#include "synthscreen/manifest.hpp"
#include "synthscreen/random.hpp"

#include <cmath>

namespace synthscreen {

namespace fs = std::filesystem;

namespace {

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t dims, double shift) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dims));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.normal();
        m(r, 0) += shift;
    }
    // Round through float so the in-memory values equal what the f32 payload stores.
    return m.cast<float>().cast<double>();
}

}  // namespace

std::pair<EmbeddingSet, EmbeddingSet> make_fixture(std::uint64_t seed, std::size_t n_real, std::size_t n_syn,
                                                   std::size_t dims, double shift) {
    if (n_real < 2 || n_syn < 2 || dims < 1) throw Error("make_fixture: counts must be at least 2");
    Rng real_rng(derive_seed(seed, {0}));
    Rng syn_rng(derive_seed(seed, {1}));
    return {EmbeddingSet(gaussian(real_rng, n_real, dims, 0.0), Encoder::inception, "fixture_real"),
            EmbeddingSet(gaussian(syn_rng, n_syn, dims, shift), Encoder::inception, "fixture_syn")};
}

AnnotationSet make_fixture_labels(std::uint64_t seed, std::size_t n_images, int extra_objects,
                                  const std::string& prefix) {
    Rng rng(seed);
    AnnotationSet set;
    for (std::size_t i = 0; i < n_images; ++i) {
        ImageLabels img;
        img.image_id = prefix + std::to_string(i);
        const int count = 1 + static_cast<int>(rng.index(5)) + extra_objects;
        for (int k = 0; k < count; ++k) {
            // About a third of the boxes fall under the small-area threshold.
            const bool small = rng.uniform() < 0.35;
            const double side = small ? 0.03 + 0.06 * rng.uniform() : 0.12 + 0.25 * rng.uniform();
            Box b;
            b.w = side;
            b.h = side * (0.7 + 0.6 * rng.uniform());
            b.cx = b.w / 2 + (1 - b.w) * rng.uniform();
            b.cy = std::min(1.0, b.h) / 2 + (1 - std::min(1.0, b.h)) * rng.uniform();
            img.boxes.push_back(clamp_box(b));
        }
        set.images.push_back(std::move(img));
    }
    return set;
}

FixtureWorkspace write_fixture_workspace(const fs::path& dir, const FixtureWorkspaceOptions& opt) {
    fs::create_directories(dir);
    Manifest manifest;
    std::vector<RunRecord> runs;
    int max_ratio = 0;
    for (int r : opt.ratios) max_ratio = std::max(max_ratio, r);
    const std::size_t syn_pool = ratio_pool_size(max_ratio, opt.real_train_size);

    for (std::size_t d = 0; d < opt.datasets.size(); ++d) {
        const auto& name = opt.datasets[d];
        const std::uint64_t ds_seed = derive_seed(opt.seed, {hash_string(name)});
        DatasetSpec ds;
        ds.name = name;
        ds.real_train_size = opt.real_train_size;
        ds.regimes = opt.regimes;

        auto write_pool = [&](const std::string& tag, std::uint64_t seed, std::size_t rows, double shift,
                              int extra_objects) {
            PoolSpec spec;
            for (auto [enc, dims] : {std::pair{Encoder::inception, opt.inception_dims},
                                     std::pair{Encoder::dino, opt.dino_dims}}) {
                Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(enc)}));
                const fs::path rel = fs::path(name) / (tag + "_" + to_string(enc) + ".emb");
                write_embeddings(dir / rel, EmbeddingSet(gaussian(rng, rows, dims, shift), enc, name + "/" + tag));
                spec.embeddings.emplace(enc, rel);
            }
            const fs::path label_dir = fs::path(name) / (tag + "_labels");
            const fs::path index = fs::path(name) / (tag + "_index.txt");
            write_labels(dir / label_dir, dir / index,
                         make_fixture_labels(derive_seed(seed, {99}), rows, extra_objects, tag + "_"));
            spec.labels = LabelPaths{label_dir, index};
            return spec;
        };

        ds.real = write_pool("real", derive_seed(ds_seed, {0}), opt.real_train_size, 0.0, 0);
        for (std::size_t g = 0; g < opt.generators.size(); ++g) {
            const auto& gen = opt.generators[g];
            const auto pool = write_pool(gen.name, derive_seed(ds_seed, {1, g}), syn_pool, gen.shift,
                                         gen.extra_objects);
            for (int r : opt.ratios) ds.configs.push_back(ConfigSpec{gen.name, r, std::nullopt, pool});
        }
        manifest.datasets.push_back(std::move(ds));

        // Planted mAP: gains grow with ratio and generator quality; jitter is far
        // smaller than the gap between adjacent qualities.
        for (auto regime : opt.regimes) {
            const double base = opt.baseline_map + 0.05 * static_cast<double>(d) +
                                (regime == Regime::pretrained ? 0.2 : 0.0);
            Rng jitter(derive_seed(ds_seed, {2, static_cast<std::uint64_t>(regime)}));
            for (int seed = 0; seed < opt.training_seeds; ++seed) {
                runs.push_back({ConfigKey{name, regime, kBaselineGenerator, kBaselineRatio}, seed,
                                base + 0.004 * (jitter.uniform() - 0.5)});
            }
            for (const auto& gen : opt.generators) {
                for (int r : opt.ratios) {
                    const double gain = 0.06 * gen.quality * std::log1p(r / 25.0) - 0.02 * (1 - gen.quality);
                    for (int seed = 0; seed < opt.training_seeds; ++seed) {
                        const double noise = 0.004 * (jitter.uniform() - 0.5);
                        runs.push_back({ConfigKey{name, regime, gen.name, r}, seed, base + gain + noise});
                    }
                }
            }
        }
    }

    FixtureWorkspace ws{dir / "manifest.json", dir / "runs.csv"};
    write_text_file(ws.manifest, manifest_to_json(manifest));
    write_text_file(ws.runs, format_runs(make_runs_table(std::move(runs))));
    return ws;
}

}  // namespace synthscreen
