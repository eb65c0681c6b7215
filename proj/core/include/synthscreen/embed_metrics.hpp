#pragma once

// Global embedding-space metrics between a real reference R and a synthetic
// set S. Rows are samples; distances are Euclidean in the raw feature space.

#include "synthscreen/common.hpp"
#include "synthscreen/metric_names.hpp"

#include <cstdint>
#include <vector>

namespace synthscreen {

struct GaussianSummary {
    Vector mean;
    Matrix cov;
    Eigen::Index n = 0;
};

/// Sample mean and unbiased (n-1) covariance.
GaussianSummary summarize(const Matrix& x);

/// ||mu_r - mu_s||^2 + Tr(Sr + Ss - 2 (Sr^1/2 Ss Sr^1/2)^1/2), via symmetric
/// eigendecompositions with eigenvalues clamped at zero. Result clamped to >= 0.
double frechet_distance(const GaussianSummary& real, const GaussianSummary& syn);

/// Frechet distance between the Gaussians fit to two sample matrices. When the
/// covariances are rank-deficient (D >= min(n, m)) the trace term is taken as
/// the nuclear norm of the centred cross-Gram matrix, which has the same value.
double frechet_distance(const Matrix& real, const Matrix& syn);

/// Trace term Tr((Sr^1/2 Ss Sr^1/2)^1/2) computed from centred samples.
double frechet_trace_term_gram(const Matrix& real, const Matrix& syn);

struct FidInfOptions {
    int ladder_steps = 8;
    int repeats = 3;
};

/// Extrapolated Frechet distance: FD at evenly spaced subsample sizes from
/// ceil(N/2) to N, OLS of value against 1/size, intercept clamped to >= 0.
double frechet_distance_inf(const Matrix& real, const Matrix& syn, std::uint64_t seed,
                            const FidInfOptions& opt = {});

/// Subsample sizes used by frechet_distance_inf for a given N.
std::vector<Eigen::Index> fid_inf_ladder(Eigen::Index n, int steps);

/// Unbiased MMD^2 with k(x, y) = (x.y / D + 1)^3. May be slightly negative.
/// For equal sizes row i of each set forms a pair and paired cross terms are
/// excluded; otherwise every cross pair is averaged.
double kernel_distance(const Matrix& real, const Matrix& syn);

/// Euclidean distance matrix, entry (i, j) = ||a_i - b_j||.
Matrix pairwise_distances(const Matrix& a, const Matrix& b);

/// Distance from each row to its k-th nearest other row (self excluded).
Vector knn_radii(const Matrix& x, int k);

struct PrecisionRecall {
    double precision = 0;
    double recall = 0;
};

PrecisionRecall precision_recall(const Matrix& real, const Matrix& syn, int k = 3);

struct DensityCoverage {
    double density = 0;
    double coverage = 0;
};

DensityCoverage density_coverage(const Matrix& real, const Matrix& syn, int k = 3);

/// Percentage of synthetic points farther from their nearest real point r*
/// than r* is from its own nearest real neighbour.
double authpct(const Matrix& real, const Matrix& syn);

/// Mean 1-D W1 over seeded random unit directions. Requires equal sizes.
double sliced_wasserstein(const Matrix& real, const Matrix& syn, int n_projections,
                          std::uint64_t seed);

/// Seeded split of [0, n) into a first half of floor(n/2) indices and the rest.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> half_split(std::size_t n,
                                                                         std::uint64_t seed);

struct CtScores {
    double ct = 0;      ///< Mann-Whitney z of U(B, A)
    double ct_mod = 0;  ///< U / (|A| |B|)
    double u = 0;
};

/// Rank-sum statistics for synthetic NN distances A against held-out real NN
/// distances B. U counts pairs with a < b, ties counting one half.
CtScores ct_from_distances(const std::vector<double>& syn_nn, const std::vector<double>& heldout_nn);

CtScores ct_scores(const Matrix& real, const Matrix& syn, std::uint64_t seed);

struct FlsOptions {
    int grid_size = 20;
    /// Explicit bandwidth candidates; overrides the automatic log grid.
    std::vector<double> bandwidths;
};

struct FlsScores {
    double fls = 0;
    double fls_overfit = 0;
    double bandwidth = 0;
};

/// Mean log-density of `points` under an isotropic Gaussian KDE on `centres`.
double kde_mean_log_likelihood(const Matrix& centres, const Matrix& points, double bandwidth);

/// Automatic bandwidth grid for a fit set; throws for all-identical points.
std::vector<double> fls_bandwidth_grid(const Matrix& fit, int grid_size);

FlsScores fls_scores(const Matrix& real, const Matrix& syn, std::uint64_t seed,
                     const FlsOptions& opt = {});

struct GlobalMetricOptions {
    int k = 3;
    int sw_projections = 128;
    FidInfOptions fid_inf;
    FlsOptions fls;
};

struct MetricValue {
    std::string name;
    double value = 0;
    Direction direction = Direction::lower_better;
};

/// All thirteen global metrics for one (R, S) pair, named for `encoder`.
std::vector<MetricValue> global_metrics(const Matrix& real, const Matrix& syn, Encoder encoder,
                                        std::uint64_t seed, const GlobalMetricOptions& opt = {});

}  // namespace synthscreen
