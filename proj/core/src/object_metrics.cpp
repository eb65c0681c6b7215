#include "synthscreen/object_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace synthscreen {

namespace {

MeanStd mean_std(const std::vector<double>& v, StdKind kind) {
    if (v.empty()) return {};
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double denom = kind == StdKind::sample ? static_cast<double>(v.size()) - 1.0
                                                 : static_cast<double>(v.size());
    return {mean, denom > 0 ? std::sqrt(ss / denom) : 0.0};
}

void require_nonempty(const std::vector<double>& a, const std::vector<double>& b, const char* op) {
    if (a.empty() || b.empty()) throw Error(std::string(op) + ": empty input");
}

double xlog2(double p, double q) { return p > 0 ? p * std::log2(p / q) : 0.0; }

}  // namespace

double default_complexity(std::size_t n, double f_small) {
    return static_cast<double>(n) * (1.0 + f_small);
}

double box_iou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.cx + a.w / 2, b.cx + b.w / 2) -
                                        std::max(a.cx - a.w / 2, b.cx - b.w / 2));
    const double iy = std::max(0.0, std::min(a.cy + a.h / 2, b.cy + b.h / 2) -
                                        std::max(a.cy - a.h / 2, b.cy - b.h / 2));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

ImageStats image_stats(const ImageLabels& labels, double small_threshold,
                       const ComplexityScorer& scorer) {
    ImageStats s;
    s.n = labels.boxes.size();
    std::size_t small = 0;
    for (const auto& b : labels.boxes) {
        s.areas.push_back(b.area());
        if (b.area() < small_threshold) ++small;
    }
    s.f_small = s.n > 0 ? static_cast<double>(small) / static_cast<double>(s.n) : 0.0;
    s.c = scorer(s.n, s.f_small);
    if (s.n >= 2) {
        double total = 0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < s.n; ++i) {
            for (std::size_t j = i + 1; j < s.n; ++j) {
                total += box_iou(labels.boxes[i], labels.boxes[j]);
                ++pairs;
            }
        }
        s.mean_pair_iou = total / static_cast<double>(pairs);
    }
    return s;
}

RegimeStats regime_stats(const AnnotationSet& labels, double small_threshold, StdKind kind) {
    if (labels.images.empty()) throw Error("regime_stats: empty annotation set");
    std::vector<double> counts, areas, ious;
    std::size_t small = 0;
    for (const auto& img : labels.images) {
        const auto s = image_stats(img, small_threshold);
        counts.push_back(static_cast<double>(s.n));
        ious.push_back(s.mean_pair_iou);
        for (double a : s.areas) {
            areas.push_back(a);
            if (a < small_threshold) ++small;
        }
    }
    RegimeStats out;
    out.images = labels.images.size();
    out.boxes = areas.size();
    out.inst_per_img = mean_std(counts, kind);
    out.pct_small = areas.empty() ? 0.0 : 100.0 * static_cast<double>(small) / static_cast<double>(areas.size());
    out.mean_area = mean_std(areas, kind);
    out.mean_iou = mean_std(ious, kind);
    return out;
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
    require_nonempty(a, b, "wasserstein_1d");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.size() == b.size()) {
        double total = 0;
        for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
        return total / static_cast<double>(a.size());
    }
    // Walk the merged quantile breakpoints i/n and j/m, in units of 1/(n m).
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::size_t i = 0, j = 0, t = 0;
    double total = 0;
    while (i < n && j < m) {
        const std::size_t next_a = (i + 1) * m;
        const std::size_t next_b = (j + 1) * n;
        const std::size_t next = std::min(next_a, next_b);
        total += static_cast<double>(next - t) * std::abs(a[i] - b[j]);
        t = next;
        if (next_a == next) ++i;
        if (next_b == next) ++j;
    }
    return total / (static_cast<double>(n) * static_cast<double>(m));
}

double jsd_1d(const std::vector<double>& a, const std::vector<double>& b, HistogramKind kind) {
    require_nonempty(a, b, "jsd_1d");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto* v : {&a, &b}) {
        for (double x : *v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }

    std::size_t bins = 0;
    std::function<std::size_t(double)> bin_of;
    if (kind == HistogramKind::count) {
        const double base = std::round(lo);
        bins = static_cast<std::size_t>(std::round(hi) - base) + 1;
        bin_of = [base](double x) { return static_cast<std::size_t>(std::round(x) - base); };
    } else {
        // Zero pooled width means every value is the same constant.
        if (hi == lo) return 0.0;
        bins = kContinuousJsdBins;
        const double width = (hi - lo) / kContinuousJsdBins;
        bin_of = [lo, width](double x) {
            return std::min<std::size_t>(kContinuousJsdBins - 1,
                                         static_cast<std::size_t>(std::floor((x - lo) / width)));
        };
    }

    std::vector<double> p(bins, 0.0), q(bins, 0.0);
    for (double x : a) p[bin_of(x)] += 1.0 / static_cast<double>(a.size());
    for (double x : b) q[bin_of(x)] += 1.0 / static_cast<double>(b.size());
    double js = 0;
    for (std::size_t k = 0; k < bins; ++k) {
        const double mid = 0.5 * (p[k] + q[k]);
        js += 0.5 * xlog2(p[k], mid) + 0.5 * xlog2(q[k], mid);
    }
    return std::clamp(js, 0.0, 1.0);
}

std::vector<MetricValue> object_centric_metrics(const AnnotationSet& real, const AnnotationSet& syn,
                                                const ObjectMetricOptions& opt) {
    if (real.images.empty() || syn.images.empty()) {
        throw Error("object_centric_metrics: empty annotation set");
    }
    struct Summary {
        std::vector<double> counts, complexity;
        std::size_t boxes = 0, small = 0;
    };
    auto summarize_set = [&](const AnnotationSet& set) {
        Summary s;
        for (const auto& img : set.images) {
            const auto st = image_stats(img, opt.small_threshold, opt.scorer);
            s.counts.push_back(static_cast<double>(st.n));
            s.complexity.push_back(st.c);
            s.boxes += st.n;
            for (double a : st.areas) {
                if (a < opt.small_threshold) ++s.small;
            }
        }
        return s;
    };
    const auto r = summarize_set(real);
    const auto s = summarize_set(syn);
    auto ratio = [](const Summary& x) {
        return x.boxes > 0 ? static_cast<double>(x.small) / static_cast<double>(x.boxes) : 0.0;
    };

    return {
        {kObjectMetricNames[0], wasserstein_1d(r.counts, s.counts), Direction::lower_better},
        {kObjectMetricNames[1], jsd_1d(r.counts, s.counts, HistogramKind::count), Direction::lower_better},
        {kObjectMetricNames[2], wasserstein_1d(r.complexity, s.complexity), Direction::lower_better},
        {kObjectMetricNames[3], jsd_1d(r.complexity, s.complexity, HistogramKind::continuous),
         Direction::lower_better},
        {kObjectMetricNames[4], std::abs(ratio(r) - ratio(s)), Direction::lower_better},
    };
}

}  // namespace synthscreen
