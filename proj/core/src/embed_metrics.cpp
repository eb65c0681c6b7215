#include "synthscreen/embed_metrics.hpp"

#include "synthscreen/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace synthscreen {

namespace {

void require_same_dims(const Matrix& a, const Matrix& b, const char* op) {
    if (a.cols() != b.cols()) {
        throw Error(std::string(op) + ": dimension mismatch (" + std::to_string(a.cols()) + " vs " +
                    std::to_string(b.cols()) + ")");
    }
}

void require_rows(const Matrix& a, Eigen::Index min_rows, const char* op, const char* what) {
    if (a.rows() < min_rows) {
        throw Error(std::string(op) + ": " + what + " needs at least " + std::to_string(min_rows) +
                    " samples, got " + std::to_string(a.rows()));
    }
}

Eigen::VectorXd clamped_eigenvalues(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
    return es.eigenvalues().cwiseMax(0.0);
}

Matrix symmetric_sqrt(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Matrix centred_scaled(const Matrix& x) {
    const Eigen::RowVectorXd mu = x.colwise().mean();
    return (x.rowwise() - mu) / std::sqrt(static_cast<double>(x.rows() - 1));
}

double finish_frechet(double value) {
    // Tiny negatives are round-off of a zero distance.
    return std::max(0.0, value);
}

}  // namespace

GaussianSummary summarize(const Matrix& x) {
    require_rows(x, 2, "summarize", "a set");
    GaussianSummary s;
    s.n = x.rows();
    s.mean = x.colwise().mean().transpose();
    const Matrix c = x.rowwise() - s.mean.transpose();
    s.cov = (c.transpose() * c) / static_cast<double>(x.rows() - 1);
    return s;
}

double frechet_distance(const GaussianSummary& real, const GaussianSummary& syn) {
    if (real.mean.size() != syn.mean.size()) throw Error("frechet_distance: dimension mismatch");
    const Matrix sqrt_real = symmetric_sqrt(real.cov);
    Matrix inner = sqrt_real * syn.cov * sqrt_real;
    inner = (inner + inner.transpose()) / 2.0;
    const double trace_sqrt = clamped_eigenvalues(inner).cwiseSqrt().sum();
    const double mean_term = (real.mean - syn.mean).squaredNorm();
    return finish_frechet(mean_term + real.cov.trace() + syn.cov.trace() - 2.0 * trace_sqrt);
}

double frechet_trace_term_gram(const Matrix& real, const Matrix& syn) {
    const Matrix xr = centred_scaled(real);
    const Matrix xs = centred_scaled(syn);
    // Eigenvalues of Sr Ss are the squared singular values of xs * xr^T.
    const Matrix cross = xs * xr.transpose();
    Eigen::BDCSVD<Matrix> svd(cross);
    return svd.singularValues().sum();
}

double frechet_distance(const Matrix& real, const Matrix& syn) {
    require_same_dims(real, syn, "frechet_distance");
    require_rows(real, 2, "frechet_distance", "real set");
    require_rows(syn, 2, "frechet_distance", "synthetic set");
    if (real.cols() < std::min(real.rows(), syn.rows())) {
        return frechet_distance(summarize(real), summarize(syn));
    }
    const double mean_term = (real.colwise().mean() - syn.colwise().mean()).squaredNorm();
    const double tr_r = centred_scaled(real).squaredNorm();
    const double tr_s = centred_scaled(syn).squaredNorm();
    return finish_frechet(mean_term + tr_r + tr_s - 2.0 * frechet_trace_term_gram(real, syn));
}

std::vector<Eigen::Index> fid_inf_ladder(Eigen::Index n, int steps) {
    if (steps < 2) throw Error("fid_inf ladder needs at least two sizes");
    const Eigen::Index lo = (n + 1) / 2;
    std::vector<Eigen::Index> sizes;
    for (int i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) / (steps - 1);
        sizes.push_back(lo + static_cast<Eigen::Index>(std::lround(t * static_cast<double>(n - lo))));
    }
    return sizes;
}

double frechet_distance_inf(const Matrix& real, const Matrix& syn, std::uint64_t seed,
                            const FidInfOptions& opt) {
    require_same_dims(real, syn, "frechet_distance_inf");
    const Eigen::Index n = std::min(real.rows(), syn.rows());
    if (n < 20) throw Error("frechet_distance_inf: too few samples for the size ladder (need 20)");

    const auto sizes = fid_inf_ladder(n, opt.ladder_steps);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        for (int rep = 0; rep < opt.repeats; ++rep) {
            Rng rng(derive_seed(seed, {i, static_cast<std::uint64_t>(rep)}));
            const auto size = static_cast<std::size_t>(sizes[i]);
            const auto ri = rng.sample_without_replacement(static_cast<std::size_t>(real.rows()), size);
            const auto si = rng.sample_without_replacement(static_cast<std::size_t>(syn.rows()), size);
            Matrix r(sizes[i], real.cols()), s(sizes[i], syn.cols());
            for (std::size_t j = 0; j < size; ++j) {
                r.row(static_cast<Eigen::Index>(j)) = real.row(static_cast<Eigen::Index>(ri[j]));
                s.row(static_cast<Eigen::Index>(j)) = syn.row(static_cast<Eigen::Index>(si[j]));
            }
            xs.push_back(1.0 / static_cast<double>(size));
            ys.push_back(frechet_distance(r, s));
        }
    }

    const double count = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    return std::max(0.0, my - slope * mx);
}

double kernel_distance(const Matrix& real, const Matrix& syn) {
    require_same_dims(real, syn, "kernel_distance");
    require_rows(real, 2, "kernel_distance", "real set");
    require_rows(syn, 2, "kernel_distance", "synthetic set");
    const double d = static_cast<double>(real.cols());
    auto kernel = [d](const Matrix& a, const Matrix& b) -> Matrix {
        Eigen::ArrayXXd k = (a * b.transpose()).array() / d + 1.0;
        return (k * k * k).matrix();
    };
    const Matrix krr = kernel(real, real);
    const Matrix kss = kernel(syn, syn);
    const Matrix krs = kernel(real, syn);
    const double n = static_cast<double>(real.rows());
    const double m = static_cast<double>(syn.rows());
    const double term_rr = (krr.sum() - krr.trace()) / (n * (n - 1));
    const double term_ss = (kss.sum() - kss.trace()) / (m * (m - 1));
    // Equal sizes use the paired form, which drops the i == j cross terms and
    // is exactly zero when the two sets are identical.
    const double term_rs = n == m ? (krs.sum() - krs.trace()) / (n * (n - 1)) : krs.sum() / (n * m);
    return term_rr + term_ss - 2.0 * term_rs;
}

Matrix pairwise_distances(const Matrix& a, const Matrix& b) {
    require_same_dims(a, b, "pairwise_distances");
    const Matrix at = a.transpose();
    const Matrix bt = b.transpose();
    Matrix out(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = (at.col(i) - bt.col(j)).norm();
    }
    return out;
}

Vector knn_radii(const Matrix& x, int k) {
    if (k < 1) throw Error("knn_radii: k must be positive");
    if (x.rows() <= k) {
        throw Error("k (" + std::to_string(k) + ") must be smaller than the number of samples (" +
                    std::to_string(x.rows()) + ")");
    }
    const Matrix d = pairwise_distances(x, x);
    Vector radii(x.rows());
    std::vector<double> row;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        row.clear();
        for (Eigen::Index j = 0; j < x.rows(); ++j) {
            if (j != i) row.push_back(d(i, j));
        }
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
        radii(i) = row[static_cast<std::size_t>(k - 1)];
    }
    return radii;
}

PrecisionRecall precision_recall(const Matrix& real, const Matrix& syn, int k) {
    require_same_dims(real, syn, "precision_recall");
    const Vector radii_r = knn_radii(real, k);
    const Vector radii_s = knn_radii(syn, k);
    const Matrix d = pairwise_distances(real, syn);

    Eigen::Index inside_real = 0;
    for (Eigen::Index j = 0; j < syn.rows(); ++j) {
        for (Eigen::Index i = 0; i < real.rows(); ++i) {
            if (d(i, j) <= radii_r(i)) {
                ++inside_real;
                break;
            }
        }
    }
    Eigen::Index inside_syn = 0;
    for (Eigen::Index i = 0; i < real.rows(); ++i) {
        for (Eigen::Index j = 0; j < syn.rows(); ++j) {
            if (d(i, j) <= radii_s(j)) {
                ++inside_syn;
                break;
            }
        }
    }
    return {static_cast<double>(inside_real) / static_cast<double>(syn.rows()),
            static_cast<double>(inside_syn) / static_cast<double>(real.rows())};
}

DensityCoverage density_coverage(const Matrix& real, const Matrix& syn, int k) {
    require_same_dims(real, syn, "density_coverage");
    if (syn.rows() <= k) throw Error("density_coverage: k must be smaller than the synthetic set");
    const Vector radii = knn_radii(real, k);
    const Matrix d = pairwise_distances(real, syn);

    Eigen::Index hits = 0;
    Eigen::Index covered = 0;
    for (Eigen::Index i = 0; i < real.rows(); ++i) {
        bool any = false;
        for (Eigen::Index j = 0; j < syn.rows(); ++j) {
            if (d(i, j) <= radii(i)) {
                ++hits;
                any = true;
            }
        }
        if (any) ++covered;
    }
    return {static_cast<double>(hits) / (static_cast<double>(k) * static_cast<double>(syn.rows())),
            static_cast<double>(covered) / static_cast<double>(real.rows())};
}

double authpct(const Matrix& real, const Matrix& syn) {
    require_same_dims(real, syn, "authpct");
    require_rows(real, 2, "authpct", "real set");
    const Vector nn_real = knn_radii(real, 1);
    const Matrix d = pairwise_distances(real, syn);
    Eigen::Index authentic = 0;
    for (Eigen::Index j = 0; j < syn.rows(); ++j) {
        Eigen::Index nearest = 0;
        d.col(j).minCoeff(&nearest);
        if (d(nearest, j) > nn_real(nearest)) ++authentic;
    }
    return 100.0 * static_cast<double>(authentic) / static_cast<double>(syn.rows());
}

double sliced_wasserstein(const Matrix& real, const Matrix& syn, int n_projections,
                          std::uint64_t seed) {
    require_same_dims(real, syn, "sliced_wasserstein");
    if (real.rows() != syn.rows()) {
        throw Error("sliced_wasserstein: size mismatch (" + std::to_string(real.rows()) + " vs " +
                    std::to_string(syn.rows()) + "); resample to equal sizes first");
    }
    if (n_projections < 1) throw Error("sliced_wasserstein: need at least one projection");

    const Eigen::Index dims = real.cols();
    Rng rng(seed);
    Matrix directions(dims, n_projections);
    for (int p = 0; p < n_projections; ++p) {
        double norm = 0;
        do {
            for (Eigen::Index c = 0; c < dims; ++c) directions(c, p) = rng.normal();
            norm = directions.col(p).norm();
        } while (norm == 0.0);
        directions.col(p) /= norm;
    }

    const Matrix pr = real * directions;
    const Matrix ps = syn * directions;
    const auto n = static_cast<std::size_t>(real.rows());
    std::vector<double> a(n), b(n);
    double total = 0;
    for (int p = 0; p < n_projections; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = pr(static_cast<Eigen::Index>(i), p);
            b[i] = ps(static_cast<Eigen::Index>(i), p);
        }
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        double w = 0;
        for (std::size_t i = 0; i < n; ++i) w += std::abs(a[i] - b[i]);
        total += w / static_cast<double>(n);
    }
    return total / n_projections;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> half_split(std::size_t n,
                                                                         std::uint64_t seed) {
    auto perm = Rng(seed).permutation(n);
    std::vector<std::size_t> first(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n / 2));
    std::vector<std::size_t> second(perm.begin() + static_cast<std::ptrdiff_t>(n / 2), perm.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {std::move(first), std::move(second)};
}

CtScores ct_from_distances(const std::vector<double>& syn_nn, const std::vector<double>& heldout_nn) {
    if (syn_nn.empty() || heldout_nn.empty()) throw Error("ct: empty distance sample");
    struct Item {
        double value;
        bool heldout;
    };
    std::vector<Item> all;
    all.reserve(syn_nn.size() + heldout_nn.size());
    for (double v : syn_nn) all.push_back({v, false});
    for (double v : heldout_nn) all.push_back({v, true});
    std::sort(all.begin(), all.end(), [](const Item& x, const Item& y) { return x.value < y.value; });

    double rank_sum_heldout = 0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].value == all[i].value) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            if (all[t].heldout) rank_sum_heldout += avg_rank;
        }
        i = j;
    }
    const double na = static_cast<double>(syn_nn.size());
    const double nb = static_cast<double>(heldout_nn.size());
    CtScores out;
    out.u = rank_sum_heldout - nb * (nb + 1) / 2.0;
    out.ct_mod = out.u / (na * nb);
    out.ct = (out.u - na * nb / 2.0) / std::sqrt(na * nb * (na + nb + 1) / 12.0);
    return out;
}

CtScores ct_scores(const Matrix& real, const Matrix& syn, std::uint64_t seed) {
    require_same_dims(real, syn, "ct_scores");
    if (real.rows() < 10) throw Error("ct_scores: real set too small to split (need 10)");
    if (syn.rows() < 1) throw Error("ct_scores: empty synthetic set");
    const auto [train_idx, test_idx] = half_split(static_cast<std::size_t>(real.rows()), seed);

    Matrix train(static_cast<Eigen::Index>(train_idx.size()), real.cols());
    Matrix test(static_cast<Eigen::Index>(test_idx.size()), real.cols());
    for (std::size_t i = 0; i < train_idx.size(); ++i)
        train.row(static_cast<Eigen::Index>(i)) = real.row(static_cast<Eigen::Index>(train_idx[i]));
    for (std::size_t i = 0; i < test_idx.size(); ++i)
        test.row(static_cast<Eigen::Index>(i)) = real.row(static_cast<Eigen::Index>(test_idx[i]));

    const Matrix ds = pairwise_distances(train, syn);
    const Matrix dv = pairwise_distances(train, test);
    std::vector<double> a(static_cast<std::size_t>(syn.rows()));
    std::vector<double> b(static_cast<std::size_t>(test.rows()));
    for (Eigen::Index j = 0; j < syn.rows(); ++j) a[static_cast<std::size_t>(j)] = ds.col(j).minCoeff();
    for (Eigen::Index j = 0; j < test.rows(); ++j) b[static_cast<std::size_t>(j)] = dv.col(j).minCoeff();
    return ct_from_distances(a, b);
}

double kde_mean_log_likelihood(const Matrix& centres, const Matrix& points, double bandwidth) {
    require_same_dims(centres, points, "kde_mean_log_likelihood");
    if (!(bandwidth > 0)) throw Error("kde bandwidth must be positive");
    const double dims = static_cast<double>(centres.cols());
    const double log_norm = -0.5 * dims * std::log(2.0 * std::numbers::pi * bandwidth * bandwidth) -
                            std::log(static_cast<double>(centres.rows()));
    const Matrix d = pairwise_distances(centres, points);
    const double inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
    double total = 0;
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < centres.rows(); ++i) top = std::max(top, -d(i, j) * d(i, j) * inv2s2);
        double acc = 0;
        for (Eigen::Index i = 0; i < centres.rows(); ++i) acc += std::exp(-d(i, j) * d(i, j) * inv2s2 - top);
        total += top + std::log(acc) + log_norm;
    }
    return total / static_cast<double>(points.rows());
}

std::vector<double> fls_bandwidth_grid(const Matrix& fit, int grid_size) {
    if (grid_size < 1) throw Error("fls: empty bandwidth grid");
    const Matrix d = pairwise_distances(fit, fit);
    double sum = 0;
    double pairs = 0;
    for (Eigen::Index i = 0; i < fit.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < fit.rows(); ++j) {
            sum += d(i, j);
            pairs += 1;
        }
    }
    const double mean_dist = pairs > 0 ? sum / pairs : 0.0;
    if (!(mean_dist > 0)) throw Error("fls: degenerate bandwidth grid (all fit points identical)");
    // Per-axis scale of a pairwise distance: E||x - y|| ~ sigma sqrt(2D).
    const double scale = mean_dist / std::sqrt(2.0 * static_cast<double>(fit.cols()));
    if (grid_size == 1) return {scale};
    const double lo = std::log(0.02 * scale);
    const double hi = std::log(5.0 * scale);
    std::vector<double> grid;
    for (int i = 0; i < grid_size; ++i) grid.push_back(std::exp(lo + (hi - lo) * i / (grid_size - 1)));
    return grid;
}

FlsScores fls_scores(const Matrix& real, const Matrix& syn, std::uint64_t seed, const FlsOptions& opt) {
    require_same_dims(real, syn, "fls_scores");
    if (syn.rows() < 10) throw Error("fls_scores: synthetic set too small (need 10)");
    const auto [fit_idx, held_idx] = half_split(static_cast<std::size_t>(syn.rows()), seed);
    Matrix fit(static_cast<Eigen::Index>(fit_idx.size()), syn.cols());
    Matrix held(static_cast<Eigen::Index>(held_idx.size()), syn.cols());
    for (std::size_t i = 0; i < fit_idx.size(); ++i)
        fit.row(static_cast<Eigen::Index>(i)) = syn.row(static_cast<Eigen::Index>(fit_idx[i]));
    for (std::size_t i = 0; i < held_idx.size(); ++i)
        held.row(static_cast<Eigen::Index>(i)) = syn.row(static_cast<Eigen::Index>(held_idx[i]));

    const auto grid = opt.bandwidths.empty() ? fls_bandwidth_grid(fit, opt.grid_size) : opt.bandwidths;
    double best_bw = grid.front();
    double best_ll = -std::numeric_limits<double>::infinity();
    for (double bw : grid) {
        const double ll = kde_mean_log_likelihood(fit, held, bw);
        if (ll > best_ll) {
            best_ll = ll;
            best_bw = bw;
        }
    }
    const double dims = static_cast<double>(syn.cols());
    FlsScores out;
    out.bandwidth = best_bw;
    out.fls = -kde_mean_log_likelihood(fit, real, best_bw) / dims;
    out.fls_overfit = out.fls - (-best_ll / dims);
    return out;
}

std::vector<MetricValue> global_metrics(const Matrix& real, const Matrix& syn, Encoder encoder,
                                        std::uint64_t seed, const GlobalMetricOptions& opt) {
    auto sub_seed = [seed](GlobalMetric m) {
        return derive_seed(seed, {static_cast<std::uint64_t>(m)});
    };
    const auto pr = precision_recall(real, syn, opt.k);
    const auto dc = density_coverage(real, syn, opt.k);
    const auto ct = ct_scores(real, syn, sub_seed(GlobalMetric::ct));
    const auto fls = fls_scores(real, syn, sub_seed(GlobalMetric::fls), opt.fls);

    std::vector<MetricValue> out;
    for (auto m : kGlobalMetrics) {
        double v = 0;
        switch (m) {
            case GlobalMetric::fid: v = frechet_distance(real, syn); break;
            case GlobalMetric::fid_inf: v = frechet_distance_inf(real, syn, sub_seed(m), opt.fid_inf); break;
            case GlobalMetric::kd_value: v = kernel_distance(real, syn); break;
            case GlobalMetric::precision: v = pr.precision; break;
            case GlobalMetric::recall: v = pr.recall; break;
            case GlobalMetric::density: v = dc.density; break;
            case GlobalMetric::coverage: v = dc.coverage; break;
            case GlobalMetric::authpct: v = authpct(real, syn); break;
            case GlobalMetric::sw_approx: v = sliced_wasserstein(real, syn, opt.sw_projections, sub_seed(m)); break;
            case GlobalMetric::ct: v = ct.ct; break;
            case GlobalMetric::ct_mod: v = ct.ct_mod; break;
            case GlobalMetric::fls: v = fls.fls; break;
            case GlobalMetric::fls_overfit: v = fls.fls_overfit; break;
        }
        out.push_back({metric_column(m, encoder), v, direction_of(m)});
    }
    return out;
}

}  // namespace synthscreen
