#pragma once

#include "synthscreen/common.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace synthscreen {

enum class Encoder { inception, dino };

const char* to_string(Encoder e);
Encoder parse_encoder(std::string_view tag);

/// N x D features for one image set under one encoder. Immutable after
/// construction; the constructor rejects non-finite values.
class EmbeddingSet {
public:
    EmbeddingSet(Matrix data, Encoder encoder, std::string set_id);

    const Matrix& data() const noexcept { return data_; }
    Eigen::Index rows() const noexcept { return data_.rows(); }
    Eigen::Index dims() const noexcept { return data_.cols(); }
    Encoder encoder() const noexcept { return encoder_; }
    const std::string& set_id() const noexcept { return set_id_; }

    /// Copies the listed rows, in order, into a new set.
    EmbeddingSet select(const std::vector<std::size_t>& indices) const;

private:
    Matrix data_;
    Encoder encoder_;
    std::string set_id_;
};

/// Reads `<path>` (f32le payload) and `<path>.json` (sidecar).
EmbeddingSet load_embeddings(const std::filesystem::path& path);
/// Writes payload and sidecar. Values are stored as 32-bit floats.
void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);

struct Box {
    int class_id = 0;
    double cx = 0, cy = 0, w = 0, h = 0;

    double area() const noexcept { return w * h; }
};

/// Clamps box edges to the unit square and recomputes centre/size.
/// Idempotent.
Box clamp_box(const Box& b);

struct ImageLabels {
    std::string image_id;
    std::vector<Box> boxes;
};

struct AnnotationSet {
    std::vector<ImageLabels> images;

    std::size_t size() const noexcept { return images.size(); }
    AnnotationSet select(const std::vector<std::size_t>& indices) const;
};

/// Parses one YOLO label line ("class cx cy w h"); throws on malformed input.
Box parse_label_line(std::string_view line);

/// `index` lists one image id per line; `<dir>/<id>.txt` holds its boxes.
/// A missing label file means an image with no boxes.
AnnotationSet load_labels(const std::filesystem::path& dir, const std::filesystem::path& index);
void write_labels(const std::filesystem::path& dir, const std::filesystem::path& index,
                  const AnnotationSet& labels);

enum class Regime { scratch, pretrained };
const char* to_string(Regime r);
Regime parse_regime(std::string_view tag);

inline constexpr int kBaselineRatio = 0;
inline constexpr const char* kBaselineGenerator = "baseline";

/// Coordinate of one experimental cell.
struct ConfigKey {
    std::string dataset;
    Regime regime = Regime::scratch;
    std::string generator;
    int aug_ratio = 0;

    bool is_baseline() const { return generator == kBaselineGenerator; }
    auto operator<=>(const ConfigKey&) const = default;
};

/// Throws unless the ratio is on the grid and baseline <=> ratio 0.
void validate(const ConfigKey& key);
std::string to_string(const ConfigKey& key);

struct RunRecord {
    ConfigKey key;
    int seed = 0;
    double map5095 = 0;
};

struct RunsTable {
    std::vector<RunRecord> records;
};

struct MetricRecord {
    ConfigKey key;
    std::string metric;
    double value = 0;
    double dispersion = 0;
    int trials = 0;
};

struct MetricTable {
    std::vector<MetricRecord> records;
};

/// Validates and returns the table (duplicates, ranges, key grid).
RunsTable make_runs_table(std::vector<RunRecord> records);
MetricTable make_metric_table(std::vector<MetricRecord> records);

RunsTable parse_runs(std::string_view csv);
RunsTable load_runs(const std::filesystem::path& path);
std::string format_runs(const RunsTable& runs);

MetricTable parse_metrics(std::string_view csv);
MetricTable load_metrics(const std::filesystem::path& path);
/// Rows in input order; doubles printed with round-trip precision.
std::string format_metrics(const MetricTable& metrics);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Two Gaussian clouds with identity covariance; the synthetic one is shifted
/// by `shift` along the first axis. Real and synthetic use independent streams
/// of the same seed.
std::pair<EmbeddingSet, EmbeddingSet> make_fixture(std::uint64_t seed, std::size_t n_real,
                                                   std::size_t n_syn, std::size_t dims,
                                                   double shift);

}  // namespace synthscreen
