#pragma once

// Object-centric distribution metrics and dataset regime statistics computed
// from bounding-box annotations.

#include "synthscreen/dataio.hpp"
#include "synthscreen/embed_metrics.hpp"

#include <functional>
#include <vector>

namespace synthscreen {

inline constexpr double kSmallAreaThreshold = 0.01;

struct ImageStats {
    std::size_t n = 0;
    std::vector<double> areas;
    double f_small = 0;
    double c = 0;
    double mean_pair_iou = 0;
};

/// Per-image complexity score from count and small-box fraction.
using ComplexityScorer = std::function<double(std::size_t n, double f_small)>;

/// Default scorer: n * (1 + f_small).
double default_complexity(std::size_t n, double f_small);

double box_iou(const Box& a, const Box& b);

ImageStats image_stats(const ImageLabels& labels, double small_threshold = kSmallAreaThreshold,
                       const ComplexityScorer& scorer = default_complexity);

struct MeanStd {
    double mean = 0;
    double std = 0;
};

struct RegimeStats {
    std::size_t images = 0;
    std::size_t boxes = 0;
    MeanStd inst_per_img;
    double pct_small = 0;
    MeanStd mean_area;
    MeanStd mean_iou;
};

enum class StdKind { population, sample };

RegimeStats regime_stats(const AnnotationSet& labels, double small_threshold = kSmallAreaThreshold,
                         StdKind kind = StdKind::population);

/// Exact 1-D W1 between empirical distributions (quantile-function integral).
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

enum class HistogramKind { count, continuous };

inline constexpr int kContinuousJsdBins = 16;

/// Histogram Jensen-Shannon divergence, base 2, in [0, 1].
double jsd_1d(const std::vector<double>& a, const std::vector<double>& b, HistogramKind kind);

struct ObjectMetricOptions {
    double small_threshold = kSmallAreaThreshold;
    ComplexityScorer scorer = default_complexity;
};

/// The five object-centric metrics, all lower-is-better.
std::vector<MetricValue> object_centric_metrics(const AnnotationSet& real, const AnnotationSet& syn,
                                                const ObjectMetricOptions& opt = {});

}  // namespace synthscreen
