#include "synthscreen/manifest.hpp"

#include <nlohmann/json.hpp>

namespace synthscreen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

PoolSpec parse_pool(const json& j, const fs::path& base, const std::string& where) {
    PoolSpec spec;
    if (j.contains("embeddings")) {
        for (const auto& [tag, path] : j.at("embeddings").items()) {
            spec.embeddings.emplace(parse_encoder(tag), resolve(base, path.get<std::string>()));
        }
    }
    if (j.contains("labels")) {
        const auto& l = j.at("labels");
        spec.labels = LabelPaths{resolve(base, l.at("dir").get<std::string>()),
                                 resolve(base, l.at("index").get<std::string>())};
    }
    if (spec.embeddings.empty() && !spec.labels) throw Error(where + ": pool lists no inputs");
    return spec;
}

json pool_json(const PoolSpec& spec) {
    json j = json::object();
    json emb = json::object();
    for (const auto& [enc, path] : spec.embeddings) emb[to_string(enc)] = path.generic_string();
    if (!emb.empty()) j["embeddings"] = emb;
    if (spec.labels) {
        j["labels"] = {{"dir", spec.labels->dir.generic_string()},
                       {"index", spec.labels->index.generic_string()}};
    }
    return j;
}

}  // namespace

Manifest parse_manifest(std::string_view json_text, const fs::path& base_dir) {
    Manifest m;
    try {
        const auto root = json::parse(json_text);
        for (const auto& d : root.at("datasets")) {
            DatasetSpec ds;
            ds.name = d.at("name").get<std::string>();
            ds.real_train_size = d.at("real_train_size").get<std::size_t>();
            if (d.contains("regimes")) {
                ds.regimes.clear();
                for (const auto& r : d.at("regimes")) ds.regimes.push_back(parse_regime(r.get<std::string>()));
                if (ds.regimes.empty()) throw Error("dataset '" + ds.name + "' lists no regimes");
            }
            ds.real = parse_pool(d.at("real"), base_dir, ds.name + " real pool");
            for (const auto& c : d.value("configs", json::array())) {
                ConfigSpec cs;
                cs.generator = c.at("generator").get<std::string>();
                cs.aug_ratio = c.at("aug_ratio").get<int>();
                if (c.contains("pool_size")) cs.pool_size = c.at("pool_size").get<std::size_t>();
                cs.pool = parse_pool(c, base_dir, ds.name + "/" + cs.generator);
                validate(ConfigKey{ds.name, Regime::scratch, cs.generator, cs.aug_ratio});
                if (cs.aug_ratio == kBaselineRatio) {
                    throw Error("manifest config " + cs.generator + " has no synthetic ratio");
                }
                ds.configs.push_back(std::move(cs));
            }
            m.datasets.push_back(std::move(ds));
        }
    } catch (const json::exception& e) {
        throw Error(std::string("manifest schema error: ") + e.what());
    }
    if (config_count(m) == 0) throw Error("no configurations");
    return m;
}

Manifest load_manifest(const fs::path& path) {
    return parse_manifest(read_text_file(path), path.parent_path());
}

std::string manifest_to_json(const Manifest& manifest) {
    json root;
    root["datasets"] = json::array();
    for (const auto& ds : manifest.datasets) {
        json d = {{"name", ds.name}, {"real_train_size", ds.real_train_size}};
        d["regimes"] = json::array();
        for (auto r : ds.regimes) d["regimes"].push_back(to_string(r));
        d["real"] = pool_json(ds.real);
        d["configs"] = json::array();
        for (const auto& cs : ds.configs) {
            json c = pool_json(cs.pool);
            c["generator"] = cs.generator;
            c["aug_ratio"] = cs.aug_ratio;
            if (cs.pool_size) c["pool_size"] = *cs.pool_size;
            d["configs"].push_back(std::move(c));
        }
        root["datasets"].push_back(std::move(d));
    }
    return root.dump(2) + "\n";
}

void check_manifest_paths(const Manifest& manifest) {
    std::vector<std::string> missing;
    auto check_pool = [&](const PoolSpec& p) {
        for (const auto& [enc, path] : p.embeddings) {
            fs::path sidecar = path;
            sidecar += ".json";
            if (!fs::exists(path)) missing.push_back(path.string());
            if (!fs::exists(sidecar)) missing.push_back(sidecar.string());
        }
        if (p.labels) {
            if (!fs::is_directory(p.labels->dir)) missing.push_back(p.labels->dir.string());
            if (!fs::exists(p.labels->index)) missing.push_back(p.labels->index.string());
        }
    };
    for (const auto& ds : manifest.datasets) {
        check_pool(ds.real);
        for (const auto& cs : ds.configs) check_pool(cs.pool);
    }
    if (!missing.empty()) {
        std::string msg = "manifest references missing files:";
        for (const auto& m : missing) msg += "\n  " + m;
        throw Error(msg);
    }
}

std::size_t config_count(const Manifest& manifest) {
    std::size_t n = 0;
    for (const auto& ds : manifest.datasets) n += ds.configs.size();
    return n;
}

std::size_t ratio_pool_size(int aug_ratio, std::size_t real_train_size) {
    if (aug_ratio <= 0) throw Error("ratio_pool_size: ratio must be positive");
    return (static_cast<std::size_t>(aug_ratio) * real_train_size + 99) / 100;
}

std::size_t auto_match_size(std::size_t real_train_size) { return ratio_pool_size(10, real_train_size); }

Pool load_pool(const PoolSpec& spec) {
    Pool pool;
    for (const auto& [enc, path] : spec.embeddings) {
        auto set = load_embeddings(path);
        if (set.encoder() != enc) {
            throw Error("encoder mismatch between sidecar and request: " + path.string() + " is tagged " +
                        to_string(set.encoder()) + ", manifest expects " + to_string(enc));
        }
        pool.embeddings.emplace(enc, std::move(set));
    }
    if (spec.labels) pool.labels = load_labels(spec.labels->dir, spec.labels->index);
    pool.size();
    return pool;
}

}  // namespace synthscreen
