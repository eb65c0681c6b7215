#include "synthscreen/dataio.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace synthscreen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kClampTolerance = 1e-6;
constexpr std::array<int, 8> kRatioGrid{0, 10, 25, 50, 75, 100, 125, 150};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return value;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

// Maps required column names to positions in a CSV header.
std::map<std::string, std::size_t> header_index(std::string_view header,
                                                const std::vector<std::string>& required,
                                                const std::string& what) {
    std::map<std::string, std::size_t> idx;
    const auto cols = split(header, ',');
    for (std::size_t i = 0; i < cols.size(); ++i) idx[std::string(trim(cols[i]))] = i;
    for (const auto& name : required) {
        if (!idx.contains(name)) throw Error(what + ": missing column '" + name + "'");
    }
    return idx;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

float load_f32le(const unsigned char* p) {
    std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                         (static_cast<std::uint32_t>(p[2]) << 16) |
                         (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

void store_f32le(float f, unsigned char* p) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    p[0] = static_cast<unsigned char>(bits);
    p[1] = static_cast<unsigned char>(bits >> 8);
    p[2] = static_cast<unsigned char>(bits >> 16);
    p[3] = static_cast<unsigned char>(bits >> 24);
}

ConfigKey parse_key(const std::vector<std::string_view>& cols,
                    const std::map<std::string, std::size_t>& idx, const std::string& where) {
    ConfigKey key;
    key.dataset = std::string(trim(cols.at(idx.at("dataset"))));
    key.regime = parse_regime(trim(cols.at(idx.at("regime"))));
    key.generator = std::string(trim(cols.at(idx.at("generator"))));
    const auto ratio = parse_number<int>(cols.at(idx.at("aug_ratio")));
    if (!ratio) throw Error(where + ": non-numeric aug_ratio");
    key.aug_ratio = *ratio;
    validate(key);
    return key;
}

}  // namespace

const char* to_string(Encoder e) { return e == Encoder::inception ? "inception" : "dino"; }

Encoder parse_encoder(std::string_view tag) {
    if (tag == "inception") return Encoder::inception;
    if (tag == "dino") return Encoder::dino;
    throw Error("unknown encoder tag '" + std::string(tag) + "'");
}

EmbeddingSet::EmbeddingSet(Matrix data, Encoder encoder, std::string set_id)
    : data_(std::move(data)), encoder_(encoder), set_id_(std::move(set_id)) {
    if (data_.rows() < 1 || data_.cols() < 1) throw Error("embedding set must be non-empty");
    for (Eigen::Index r = 0; r < data_.rows(); ++r) {
        if (!data_.row(r).allFinite()) {
            throw Error("non-finite feature in row " + std::to_string(r) + " of '" + set_id_ + "'");
        }
    }
}

EmbeddingSet EmbeddingSet::select(const std::vector<std::size_t>& indices) const {
    Matrix out(static_cast<Eigen::Index>(indices.size()), data_.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= static_cast<std::size_t>(data_.rows())) {
            throw Error("embedding index out of range");
        }
        out.row(static_cast<Eigen::Index>(i)) = data_.row(static_cast<Eigen::Index>(indices[i]));
    }
    return EmbeddingSet(std::move(out), encoder_, set_id_);
}

EmbeddingSet load_embeddings(const fs::path& path) {
    fs::path sidecar = path;
    sidecar += ".json";
    if (!fs::exists(sidecar)) throw Error("missing sidecar " + sidecar.string());

    json meta;
    try {
        meta = json::parse(read_text_file(sidecar));
    } catch (const json::exception& e) {
        throw Error("invalid sidecar " + sidecar.string() + ": " + e.what());
    }
    if (!meta.contains("rows") || !meta.contains("dims") || !meta.contains("encoder")) {
        throw Error("sidecar " + sidecar.string() + " lacks rows/dims/encoder");
    }
    const auto dtype = meta.value("dtype", std::string("f32le"));
    if (dtype != "f32le") throw Error("unsupported dtype '" + dtype + "'");
    const auto rows = meta.at("rows").get<std::int64_t>();
    const auto dims = meta.at("dims").get<std::int64_t>();
    if (rows < 1 || dims < 1) throw Error("sidecar rows and dims must be positive");
    const Encoder encoder = parse_encoder(meta.at("encoder").get<std::string>());
    const auto set_id = meta.value("set_id", path.stem().string());

    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    const auto expected = static_cast<std::size_t>(rows) * static_cast<std::size_t>(dims) * 4;
    if (bytes.size() != expected) {
        throw Error("payload size mismatch for " + path.string() + ": expected " +
                    std::to_string(expected) + " bytes (rows x dims x 4), found " +
                    std::to_string(bytes.size()));
    }

    Matrix data(rows, dims);
    const unsigned char* p = bytes.data();
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < dims; ++c, p += 4) data(r, c) = load_f32le(p);
    }
    return EmbeddingSet(std::move(data), encoder, set_id);
}

void write_embeddings(const fs::path& path, const EmbeddingSet& set) {
    const auto& m = set.data();
    std::vector<unsigned char> bytes(static_cast<std::size_t>(m.size()) * 4);
    unsigned char* p = bytes.data();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c, p += 4) {
            store_f32le(static_cast<float>(m(r, c)), p);
        }
    }
    write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));

    json meta = {{"rows", m.rows()},
                 {"dims", m.cols()},
                 {"dtype", "f32le"},
                 {"encoder", to_string(set.encoder())},
                 {"set_id", set.set_id()}};
    fs::path sidecar = path;
    sidecar += ".json";
    write_text_file(sidecar, meta.dump(2) + "\n");
}

Box clamp_box(const Box& b) {
    const double x0 = std::clamp(b.cx - b.w / 2, 0.0, 1.0);
    const double x1 = std::clamp(b.cx + b.w / 2, 0.0, 1.0);
    const double y0 = std::clamp(b.cy - b.h / 2, 0.0, 1.0);
    const double y1 = std::clamp(b.cy + b.h / 2, 0.0, 1.0);
    // Already-inside boxes are returned untouched so clamping is idempotent bit for bit.
    if (x0 == b.cx - b.w / 2 && x1 == b.cx + b.w / 2 && y0 == b.cy - b.h / 2 &&
        y1 == b.cy + b.h / 2) {
        return b;
    }
    Box out = b;
    out.cx = (x0 + x1) / 2;
    out.w = x1 - x0;
    out.cy = (y0 + y1) / 2;
    out.h = y1 - y0;
    return out;
}

AnnotationSet AnnotationSet::select(const std::vector<std::size_t>& indices) const {
    AnnotationSet out;
    out.images.reserve(indices.size());
    for (auto i : indices) {
        if (i >= images.size()) throw Error("label index out of range");
        out.images.push_back(images[i]);
    }
    return out;
}

Box parse_label_line(std::string_view line) {
    const auto fields = split_ws(line);
    if (fields.size() != 5) throw Error("malformed label line: '" + std::string(line) + "'");
    const auto cls = parse_number<int>(fields[0]);
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto x = parse_number<double>(fields[i + 1]);
        if (!x || !std::isfinite(*x)) {
            throw Error("malformed label line: '" + std::string(line) + "'");
        }
        v[i] = *x;
    }
    if (!cls) throw Error("malformed label line: '" + std::string(line) + "'");
    for (double x : v) {
        if (x < -kClampTolerance || x > 1 + kClampTolerance) {
            throw Error("label coordinate outside [0,1]: '" + std::string(line) + "'");
        }
    }
    Box b{*cls, std::clamp(v[0], 0.0, 1.0), std::clamp(v[1], 0.0, 1.0), std::clamp(v[2], 0.0, 1.0),
          std::clamp(v[3], 0.0, 1.0)};
    if (b.w <= 0 || b.h <= 0) throw Error("label box with non-positive size: '" + std::string(line) + "'");
    return clamp_box(b);
}

AnnotationSet load_labels(const fs::path& dir, const fs::path& index) {
    AnnotationSet out;
    const std::string index_text = read_text_file(index);
    for (auto id : lines_of(index_text)) {
        ImageLabels img;
        img.image_id = std::string(id);
        const fs::path file = dir / (img.image_id + ".txt");
        if (fs::exists(file)) {
            const auto text = read_text_file(file);
            for (auto line : lines_of(text)) {
                try {
                    img.boxes.push_back(parse_label_line(line));
                } catch (const Error& e) {
                    throw Error(file.string() + ": " + e.what());
                }
            }
        }
        out.images.push_back(std::move(img));
    }
    return out;
}

void write_labels(const fs::path& dir, const fs::path& index, const AnnotationSet& labels) {
    fs::create_directories(dir);
    std::string idx;
    for (const auto& img : labels.images) {
        idx += img.image_id + "\n";
        std::string body;
        for (const auto& b : img.boxes) {
            body += std::to_string(b.class_id) + " " + format_double(b.cx) + " " + format_double(b.cy) +
                    " " + format_double(b.w) + " " + format_double(b.h) + "\n";
        }
        write_text_file(dir / (img.image_id + ".txt"), body);
    }
    write_text_file(index, idx);
}

const char* to_string(Regime r) { return r == Regime::scratch ? "scratch" : "pretrained"; }

Regime parse_regime(std::string_view tag) {
    if (tag == "scratch") return Regime::scratch;
    if (tag == "pretrained") return Regime::pretrained;
    throw Error("unknown regime tag '" + std::string(tag) + "'");
}

void validate(const ConfigKey& key) {
    if (key.dataset.empty()) throw Error("config key with empty dataset");
    if (key.generator.empty()) throw Error("config key with empty generator");
    if (std::find(kRatioGrid.begin(), kRatioGrid.end(), key.aug_ratio) == kRatioGrid.end()) {
        throw Error("aug_ratio " + std::to_string(key.aug_ratio) + " is not on the grid");
    }
    if (key.is_baseline() != (key.aug_ratio == kBaselineRatio)) {
        throw Error("generator 'baseline' must pair with aug_ratio 0: " + to_string(key));
    }
}

std::string to_string(const ConfigKey& key) {
    return key.dataset + "/" + to_string(key.regime) + "/" + key.generator + "@" +
           std::to_string(key.aug_ratio);
}

RunsTable make_runs_table(std::vector<RunRecord> records) {
    std::set<std::pair<ConfigKey, int>> seen;
    for (const auto& r : records) {
        validate(r.key);
        if (!(r.map5095 >= 0.0 && r.map5095 <= 1.0)) {
            throw Error("mAP out of range for " + to_string(r.key));
        }
        if (!seen.emplace(r.key, r.seed).second) {
            throw Error("duplicate run record " + to_string(r.key) + " seed " + std::to_string(r.seed));
        }
    }
    return RunsTable{std::move(records)};
}

MetricTable make_metric_table(std::vector<MetricRecord> records) {
    std::set<std::pair<ConfigKey, std::string>> seen;
    for (const auto& r : records) {
        validate(r.key);
        if (r.key.is_baseline()) throw Error("metric table cannot contain baseline keys");
        if (r.metric.empty()) throw Error("metric record with empty name");
        if (!std::isfinite(r.value)) {
            throw Error("non-finite metric value " + r.metric + " at " + to_string(r.key));
        }
        if (!(r.dispersion >= 0.0)) throw Error("negative dispersion for " + r.metric);
        if (!seen.emplace(r.key, r.metric).second) {
            throw Error("duplicate metric record " + r.metric + " at " + to_string(r.key));
        }
    }
    return MetricTable{std::move(records)};
}

RunsTable parse_runs(std::string_view csv) {
    const auto lines = lines_of(csv);
    if (lines.empty()) throw Error("runs table is empty");
    const auto idx = header_index(
        lines[0], {"dataset", "regime", "generator", "aug_ratio", "seed", "map5095"}, "runs table");
    std::vector<RunRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = "runs table line " + std::to_string(i + 1);
        const auto cols = split(lines[i], ',');
        if (cols.size() < idx.size()) throw Error(where + ": wrong field count");
        RunRecord r;
        r.key = parse_key(cols, idx, where);
        const auto seed = parse_number<int>(cols[idx.at("seed")]);
        const auto map = parse_number<double>(cols[idx.at("map5095")]);
        if (!seed || !map) throw Error(where + ": non-numeric field");
        r.seed = *seed;
        r.map5095 = *map;
        records.push_back(std::move(r));
    }
    return make_runs_table(std::move(records));
}

RunsTable load_runs(const fs::path& path) { return parse_runs(read_text_file(path)); }

std::string format_runs(const RunsTable& runs) {
    std::string out = "dataset,regime,generator,aug_ratio,seed,map5095\n";
    for (const auto& r : runs.records) {
        out += r.key.dataset + "," + to_string(r.key.regime) + "," + r.key.generator + "," +
               std::to_string(r.key.aug_ratio) + "," + std::to_string(r.seed) + "," +
               format_double(r.map5095) + "\n";
    }
    return out;
}

MetricTable parse_metrics(std::string_view csv) {
    const auto lines = lines_of(csv);
    if (lines.empty()) throw Error("metrics table is empty");
    const auto idx = header_index(lines[0],
                                  {"dataset", "regime", "generator", "aug_ratio", "metric", "value",
                                   "dispersion", "trials"},
                                  "metrics table");
    std::vector<MetricRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = "metrics table line " + std::to_string(i + 1);
        const auto cols = split(lines[i], ',');
        if (cols.size() < idx.size()) throw Error(where + ": wrong field count");
        MetricRecord r;
        r.key = parse_key(cols, idx, where);
        r.metric = std::string(trim(cols[idx.at("metric")]));
        const auto value = parse_number<double>(cols[idx.at("value")]);
        const auto disp = parse_number<double>(cols[idx.at("dispersion")]);
        const auto trials = parse_number<int>(cols[idx.at("trials")]);
        if (!value || !disp || !trials) throw Error(where + ": non-numeric field");
        r.value = *value;
        r.dispersion = *disp;
        r.trials = *trials;
        records.push_back(std::move(r));
    }
    return make_metric_table(std::move(records));
}

MetricTable load_metrics(const fs::path& path) { return parse_metrics(read_text_file(path)); }

std::string format_metrics(const MetricTable& metrics) {
    std::string out = "dataset,regime,generator,aug_ratio,metric,value,dispersion,trials\n";
    for (const auto& r : metrics.records) {
        out += r.key.dataset + "," + to_string(r.key.regime) + "," + r.key.generator + "," +
               std::to_string(r.key.aug_ratio) + "," + r.metric + "," + format_double(r.value) + "," +
               format_double(r.dispersion) + "," + std::to_string(r.trials) + "\n";
    }
    return out;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace synthscreen
