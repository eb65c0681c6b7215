#pragma once

#include "synthscreen/common.hpp"
#include "synthscreen/dataio.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace synthscreen {

/// The thirteen global metrics, in output order.
enum class GlobalMetric {
    fid,
    fid_inf,
    kd_value,
    precision,
    recall,
    density,
    coverage,
    authpct,
    sw_approx,
    ct,
    ct_mod,
    fls,
    fls_overfit,
};

inline constexpr std::array<GlobalMetric, 13> kGlobalMetrics{
    GlobalMetric::fid,      GlobalMetric::fid_inf,  GlobalMetric::kd_value,  GlobalMetric::precision,
    GlobalMetric::recall,   GlobalMetric::density,  GlobalMetric::coverage,  GlobalMetric::authpct,
    GlobalMetric::sw_approx, GlobalMetric::ct,      GlobalMetric::ct_mod,    GlobalMetric::fls,
    GlobalMetric::fls_overfit,
};

inline constexpr std::array<const char*, 5> kObjectMetricNames{
    "object_count_wass_mean", "object_count_jsd_mean", "complexity_wass_mean",
    "complexity_jsd_mean",    "difficult_object_ratio_diff_mean",
};

/// Table-level column name. Frechet-type metrics are called "fid" in Inception
/// space and "fd" in DINOv2 space, e.g. fid_inception, fd_inf_dino, kd_value_dino.
std::string metric_column(GlobalMetric m, Encoder e);

Direction direction_of(GlobalMetric m);

/// Direction for any column name produced by this library; nullopt if unknown.
std::optional<Direction> direction_of(std::string_view column);

}  // namespace synthscreen
