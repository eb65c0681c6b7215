#include "synthscreen/metric_names.hpp"

#include <algorithm>

namespace synthscreen {

namespace {

const char* base_name(GlobalMetric m, Encoder e) {
    const bool inc = e == Encoder::inception;
    switch (m) {
        case GlobalMetric::fid: return inc ? "fid" : "fd";
        case GlobalMetric::fid_inf: return inc ? "fid_inf" : "fd_inf";
        case GlobalMetric::kd_value: return "kd_value";
        case GlobalMetric::precision: return "precision";
        case GlobalMetric::recall: return "recall";
        case GlobalMetric::density: return "density";
        case GlobalMetric::coverage: return "coverage";
        case GlobalMetric::authpct: return "authpct";
        case GlobalMetric::sw_approx: return "sw_approx";
        case GlobalMetric::ct: return "ct";
        case GlobalMetric::ct_mod: return "ct_mod";
        case GlobalMetric::fls: return "fls";
        case GlobalMetric::fls_overfit: return "fls_overfit";
    }
    return "";
}

}  // namespace

std::string metric_column(GlobalMetric m, Encoder e) {
    return std::string(base_name(m, e)) + "_" + to_string(e);
}

Direction direction_of(GlobalMetric m) {
    switch (m) {
        case GlobalMetric::precision:
        case GlobalMetric::recall:
        case GlobalMetric::density:
        case GlobalMetric::coverage:
        case GlobalMetric::authpct:
        case GlobalMetric::ct:
        case GlobalMetric::ct_mod: return Direction::higher_better;
        default: return Direction::lower_better;
    }
}

std::optional<Direction> direction_of(std::string_view column) {
    for (auto e : {Encoder::inception, Encoder::dino}) {
        for (auto m : kGlobalMetrics) {
            if (column == metric_column(m, e)) return direction_of(m);
        }
    }
    if (std::find(kObjectMetricNames.begin(), kObjectMetricNames.end(), column) !=
        kObjectMetricNames.end()) {
        return Direction::lower_better;
    }
    return std::nullopt;
}

}  // namespace synthscreen
