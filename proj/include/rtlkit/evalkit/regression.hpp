#pragma once

#include <cmath>
#include <vector>

#include "rtlkit/common/error.hpp"

namespace rtlkit::evalkit {

struct RegressionScores {
    double r2_score = 0;
    double mape_percent = 0;
    double rrse = 0;
};

/// r2 = 1 - SSE/SST, rrse = sqrt(SSE/SST), MAPE = 100/n * sum |(y - yhat) / y|.
/// Both ratios use the mean of y, so rrse == sqrt(1 - r2).
inline RegressionScores regression_metrics(const std::vector<double>& y, const std::vector<double>& yhat) {
    require(y.size() == yhat.size(), ErrorKind::Precondition, "y and prediction lengths differ");
    require(y.size() >= 2, ErrorKind::Precondition, "regression metrics need at least two samples");
    double mean = 0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sse = 0, sst = 0, ape = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        require(std::isfinite(y[i]) && std::isfinite(yhat[i]), ErrorKind::NumericError, "non-finite value");
        if (y[i] == 0) fail(ErrorKind::NumericError, "MAPE undefined: y[" + std::to_string(i) + "] is zero");
        sse += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        sst += (y[i] - mean) * (y[i] - mean);
        ape += std::abs((y[i] - yhat[i]) / y[i]);
    }
    if (sst == 0) fail(ErrorKind::NumericError, "r2/RRSE undefined: y has zero variance");
    const double ratio = sse / sst;
    return {1.0 - ratio, 100.0 * ape / static_cast<double>(y.size()), std::sqrt(ratio)};
}

inline double mean_squared_error(const std::vector<double>& y, const std::vector<double>& yhat) {
    require(y.size() == yhat.size() && !y.empty(), ErrorKind::Precondition, "MSE needs equal non-empty inputs");
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return s / static_cast<double>(y.size());
}

} // namespace rtlkit::evalkit
