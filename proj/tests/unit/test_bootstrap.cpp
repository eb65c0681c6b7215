#include <doctest.h>

#include "synthscreen/bootstrap.hpp"
#include "synthscreen/fixture.hpp"
#include "synthscreen/manifest.hpp"

#include "tempdir.hpp"

#include <algorithm>
#include <set>

using namespace synthscreen;

namespace {

Pool fixture_pool(std::uint64_t seed, std::size_t n, double shift, bool labels = true) {
    auto [r, s] = make_fixture(seed, n, n, 6, shift);
    Pool p;
    p.embeddings.emplace(Encoder::inception, s);
    if (labels) p.labels = make_fixture_labels(seed, n, 0, "p_");
    return p;
}

Pool real_pool(std::uint64_t seed, std::size_t n) {
    auto [r, s] = make_fixture(seed, n, n, 6, 0.0);
    Pool p;
    p.embeddings.emplace(Encoder::inception, r);
    p.labels = make_fixture_labels(seed + 1000, n, 0, "r_");
    return p;
}

const MetricRecord& find(const std::vector<MetricRecord>& rows, const std::string& name) {
    for (const auto& r : rows) {
        if (r.metric == name) return r;
    }
    throw Error("missing " + name);
}

}  // namespace

TEST_SUITE("plan") {
    TEST_CASE("reference-scale plan") {
        const auto plan = make_plan("TrafficSigns", 1798, 179, 5, 7);
        REQUIRE(plan.real_subsets.size() == 5);
        for (const auto& s : plan.real_subsets) {
            CHECK(s.size() == 179);
            CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 179);
            CHECK(*std::max_element(s.begin(), s.end()) < 1798);
        }
        CHECK(plan.real_subsets[0] != plan.real_subsets[1]);
        CHECK(make_plan("TrafficSigns", 1798, 179, 5, 7) == plan);
        CHECK_FALSE(make_plan("TrafficSigns", 1798, 179, 5, 8) == plan);
    }

    TEST_CASE("match size equal to pool uses the whole pool") {
        const auto plan = make_plan("D", 30, 30, 3, 1);
        for (auto s : plan.real_subsets) {
            std::sort(s.begin(), s.end());
            for (std::size_t i = 0; i < 30; ++i) CHECK(s[i] == i);
        }
    }

    TEST_CASE("invalid plans") {
        CHECK_THROWS(make_plan("D", 10, 11, 5, 1));
        CHECK_THROWS(make_plan("D", 10, 0, 5, 1));
        CHECK_THROWS(make_plan("D", 10, 5, 0, 1));
    }

    TEST_CASE("json round trip") {
        const auto plan = make_plan("Pedestrian", 500, 50, 5, 123456789012345ULL);
        CHECK(plan_from_json(plan_to_json(plan)) == plan);
        CHECK_THROWS(plan_from_json("{\"dataset\": 3}"));
    }
}

TEST_SUITE("draw_synthetic") {
    const auto plan = make_plan("D", 400, 40, 5, 9);
    const ConfigKey key{"D", Regime::scratch, "G", 25};

    TEST_CASE("pool of exactly N is used whole in every trial") {
        for (std::size_t b = 0; b < 5; ++b) {
            const auto idx = draw_synthetic(plan, b, 40, key);
            for (std::size_t i = 0; i < 40; ++i) CHECK(idx[i] == i);
        }
    }

    TEST_CASE("larger pools are drawn without replacement") {
        std::set<std::vector<std::size_t>> distinct;
        for (std::size_t b = 0; b < 5; ++b) {
            const auto idx = draw_synthetic(plan, b, 80, key);
            CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 40);
            distinct.insert(idx);
        }
        CHECK(distinct.size() == 5);
    }

    TEST_CASE("smaller pools allow repeats") {
        const auto idx = draw_synthetic(plan, 0, 20, key);
        CHECK(idx.size() == 40);
        CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() <= 20);
        CHECK(*std::max_element(idx.begin(), idx.end()) < 20);
    }

    TEST_CASE("stream depends on generator and ratio only through the key") {
        const auto a = draw_synthetic(plan, 1, 100, key);
        CHECK(draw_synthetic(plan, 1, 100, key) == a);
        CHECK(draw_synthetic(plan, 1, 100, ConfigKey{"D", Regime::pretrained, "G", 25}) == a);
        CHECK(draw_synthetic(plan, 1, 100, ConfigKey{"D", Regime::scratch, "G", 50}) != a);
        CHECK(draw_synthetic(plan, 1, 100, ConfigKey{"D", Regime::scratch, "H", 25}) != a);
        CHECK_THROWS(draw_synthetic(plan, 5, 100, key));
    }
}

TEST_SUITE("run_config") {
    TEST_CASE("row layout, trial count and dispersion") {
        const auto real = real_pool(1, 120);
        const auto syn = fixture_pool(2, 60, 0.5);
        const auto plan = make_plan("D", 120, 40, 5, 3);
        const auto rows = run_config(plan, real, syn, ConfigKey{"D", Regime::scratch, "G", 25});
        CHECK(rows.size() == 13 + 5);
        for (const auto& r : rows) {
            CHECK(r.trials == 5);
            CHECK(r.dispersion >= 0.0);
            CHECK(r.key.generator == "G");
        }
        CHECK(rows.front().metric == "fid_inception");
        CHECK(rows.back().metric == "difficult_object_ratio_diff_mean");

        const auto one = make_plan("D", 120, 40, 1, 3);
        for (const auto& r : run_config(one, real, syn, ConfigKey{"D", Regime::scratch, "G", 25})) {
            CHECK(r.dispersion == 0.0);
        }
    }

    TEST_CASE("synthetic pool equal to the reference gives identity values") {
        const auto real = real_pool(4, 50);
        const auto plan = make_plan("D", 50, 50, 3, 5);
        // Reference subsets are permutations of the whole pool; the pool of
        // exactly N is used whole, so both sides hold the same images.
        const auto rows = run_config(plan, real, real, ConfigKey{"D", Regime::scratch, "G", 10});
        CHECK(find(rows, "fid_inception").value <= 1e-6);
        CHECK(find(rows, "sw_approx_inception").value <= 1e-9);
        CHECK(find(rows, "precision_inception").value == 1.0);
        CHECK(find(rows, "recall_inception").value == 1.0);
        CHECK(find(rows, "coverage_inception").value == 1.0);
        for (const char* name : kObjectMetricNames) CHECK(find(rows, name).value == 0.0);
    }

    TEST_CASE("closer synthetic pools score better") {
        const auto real = real_pool(6, 100);
        const auto plan = make_plan("D", 100, 50, 5, 5);
        const ConfigKey key{"D", Regime::scratch, "G", 50};
        const auto near = run_config(plan, real, fixture_pool(6, 50, 0.0), key);
        const auto far = run_config(plan, real, fixture_pool(6, 50, 2.0), key);
        CHECK(find(near, "fid_inception").value < find(far, "fid_inception").value);
    }

    TEST_CASE("deterministic and reference-frozen") {
        const auto real = real_pool(7, 90);
        const auto plan = make_plan("D", 90, 30, 5, 1);
        const ConfigKey key{"D", Regime::scratch, "G", 75};
        const auto syn = fixture_pool(8, 70, 1.0);
        const auto a = run_config(plan, real, syn, key);
        const auto b = run_config(plan, real, syn, key);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].value == b[i].value);
        // Another synthetic pool cannot disturb the reference subsets.
        run_config(plan, real, fixture_pool(9, 40, 0.0), key);
        CHECK(plan == make_plan("D", 90, 30, 5, 1));
    }

    TEST_CASE("mismatched inputs are rejected") {
        const auto real = real_pool(1, 60);
        const auto plan = make_plan("D", 60, 20, 2, 1);
        CHECK_THROWS(run_config(plan, real, fixture_pool(2, 30, 0), ConfigKey{"D", Regime::scratch, "baseline", 0}));
        CHECK_THROWS(run_config(plan, real, fixture_pool(2, 30, 0), ConfigKey{"E", Regime::scratch, "G", 10}));
        CHECK_THROWS(run_config(plan, real, fixture_pool(2, 30, 0, false), ConfigKey{"D", Regime::scratch, "G", 10}));
        Pool dino;
        dino.embeddings.emplace(Encoder::dino, make_fixture(1, 30, 30, 6, 0).second);
        dino.labels = make_fixture_labels(1, 30, 0, "d_");
        CHECK_THROWS_WITH(run_config(plan, real, dino, ConfigKey{"D", Regime::scratch, "G", 10}),
                          doctest::Contains("encoder mismatch"));
    }

    TEST_CASE("pool prefix keeps order") {
        const auto p = fixture_pool(3, 40, 0.0);
        const auto q = p.prefix(15);
        CHECK(q.size() == 15);
        CHECK(q.embeddings.at(Encoder::inception).data() == p.embeddings.at(Encoder::inception).data().topRows(15));
        CHECK(q.labels->images[14].image_id == p.labels->images[14].image_id);
        CHECK_THROWS(p.prefix(41));
    }
}

TEST_SUITE("manifest") {
    TEST_CASE("pool and match sizes") {
        CHECK(ratio_pool_size(10, 1798) == 180);
        CHECK(ratio_pool_size(25, 300) == 75);
        CHECK(ratio_pool_size(150, 300) == 450);
        CHECK(auto_match_size(1798) == 180);
        CHECK(auto_match_size(300) == 30);
    }

    TEST_CASE("schema errors") {
        CHECK_THROWS_WITH(parse_manifest("{\"datasets\": []}", ""), doctest::Contains("no configurations"));
        CHECK_THROWS_WITH(parse_manifest("{\"datasets\": [{\"name\": \"A\"}]}", ""),
                          doctest::Contains("manifest schema error"));
        CHECK_THROWS(parse_manifest("not json", ""));
        const std::string bad_ratio = R"({"datasets": [{"name": "A", "real_train_size": 10,
            "real": {"embeddings": {"dino": "r.emb"}},
            "configs": [{"generator": "G", "aug_ratio": 30, "embeddings": {"dino": "g.emb"}}]}]})";
        CHECK_THROWS_WITH(parse_manifest(bad_ratio, ""), doctest::Contains("not on the grid"));
    }

    TEST_CASE("regimes default to both and paths resolve against the manifest") {
        const std::string text = R"({"datasets": [{"name": "A", "real_train_size": 10,
            "real": {"embeddings": {"dino": "r.emb"}},
            "configs": [{"generator": "G", "aug_ratio": 25, "embeddings": {"dino": "/abs/g.emb"}}]}]})";
        const auto m = parse_manifest(text, "/data/run");
        REQUIRE(m.datasets.size() == 1);
        CHECK(m.datasets[0].regimes.size() == 2);
        CHECK(m.datasets[0].real.embeddings.at(Encoder::dino) == std::filesystem::path("/data/run/r.emb"));
        CHECK(m.datasets[0].configs[0].pool.embeddings.at(Encoder::dino) == std::filesystem::path("/abs/g.emb"));
        CHECK(config_count(m) == 1);
        CHECK_THROWS_WITH(check_manifest_paths(m), doctest::Contains("missing files"));
    }

    TEST_CASE("fixture workspace loads and its pools are consistent") {
        TempDir dir("manifest");
        FixtureWorkspaceOptions opt;
        opt.datasets = {"A"};
        opt.real_train_size = 60;
        const auto ws = write_fixture_workspace(dir.path(), opt);
        const auto m = load_manifest(ws.manifest);
        check_manifest_paths(m);
        CHECK(config_count(m) == 21);
        const auto real = load_pool(m.datasets[0].real);
        CHECK(real.size() == 60);
        CHECK(real.embeddings.at(Encoder::dino).dims() == 24);
        const auto syn = load_pool(m.datasets[0].configs.back().pool);
        CHECK(syn.size() >= ratio_pool_size(150, 60));
        CHECK(parse_manifest(manifest_to_json(m), "").datasets[0].configs.size() == 21);

        PoolSpec wrong = m.datasets[0].real;
        const auto inc = wrong.embeddings.at(Encoder::inception);
        wrong.embeddings[Encoder::dino] = inc;
        CHECK_THROWS_WITH(load_pool(wrong), doctest::Contains("encoder mismatch between sidecar and request"));
    }
}
