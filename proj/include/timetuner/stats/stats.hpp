#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "timetuner/error.hpp"

namespace timetuner::stats {

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Lag-m autocorrelation. The numerator sums over the n - m available pairs,
/// the denominator over all n terms; both use the full-series mean.
inline double acf(std::span<const double> x, std::size_t lag) {
    if (x.size() < 2) throw Error(ErrorCode::SeriesTooShort, "acf needs at least 2 values");
    if (lag >= x.size()) throw Error(ErrorCode::LagOutOfRange, "lag " + std::to_string(lag) + " >= length");
    const double mu = mean(x);
    double den = 0.0;
    for (double v : x) den += (v - mu) * (v - mu);
    if (den == 0.0) throw Error(ErrorCode::ConstantSeries, "acf of a constant series");
    if (lag == 0) return 1.0;
    double num = 0.0;
    for (std::size_t t = lag; t < x.size(); ++t) num += (x[t] - mu) * (x[t - lag] - mu);
    return num / den;
}

struct AcfSummary {
    double value = 0.0;   // max acf over lags 1..max_lag
    std::size_t lag = 0;  // argmax
    std::size_t max_lag = 0;
};

/// Single periodicity score: max over lags 1..min(cap, n/4).
inline AcfSummary acf_summary(std::span<const double> x, std::size_t cap = 40) {
    const std::size_t max_lag = std::min(cap, x.size() / 4);
    if (max_lag < 1) throw Error(ErrorCode::SeriesTooShort, "series too short for an acf summary");
    AcfSummary s{-2.0, 0, max_lag};
    for (std::size_t m = 1; m <= max_lag; ++m) {
        const double r = acf(x, m);
        if (r > s.value) {
            s.value = r;
            s.lag = m;
        }
    }
    return s;
}

/// Constant-only MacKinnon asymptotic critical values.
struct AdfCriticalValues {
    static constexpr double one_pct = -3.43;
    static constexpr double five_pct = -2.86;
    static constexpr double ten_pct = -2.57;
};

struct AdfResult {
    double statistic = 0.0;
    int lags_used = 0;
    bool stationary = false;
    double critical_value_5pct = AdfCriticalValues::five_pct;
};

/// Schwert's rule: floor(12 * (n / 100)^(1/4)).
inline int adf_default_lags(std::size_t n) {
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

/// Augmented Dickey-Fuller test with constant: OLS of dx_t on
/// [1, x_{t-1}, dx_{t-1}, ..., dx_{t-p}]; the statistic is the t-ratio of the
/// x_{t-1} coefficient.
inline AdfResult adf_test(std::span<const double> x, int lags = -1) {
    const std::size_t n = x.size();
    if (n < 20) throw Error(ErrorCode::SeriesTooShort, "adf needs at least 20 values");
    const int p = lags < 0 ? adf_default_lags(n) : lags;
    const auto up = static_cast<std::size_t>(p);
    if (n < up + 2) throw Error(ErrorCode::SeriesTooShort, "too many lags for the series length");
    const std::size_t nobs = n - 1 - up;
    const std::size_t ncols = 2 + up;
    if (nobs <= ncols) throw Error(ErrorCode::SeriesTooShort, "not enough observations for the adf regression");

    std::vector<double> dx(n - 1);
    for (std::size_t t = 0; t + 1 < n; ++t) dx[t] = x[t + 1] - x[t];

    Eigen::MatrixXd design(static_cast<Eigen::Index>(nobs), static_cast<Eigen::Index>(ncols));
    Eigen::VectorXd y(static_cast<Eigen::Index>(nobs));
    for (std::size_t r = 0; r < nobs; ++r) {
        const std::size_t t = r + up; // dx index of the response
        const auto row = static_cast<Eigen::Index>(r);
        y(row) = dx[t];
        design(row, 0) = 1.0;
        design(row, 1) = x[t];
        for (std::size_t j = 1; j <= up; ++j) design(row, static_cast<Eigen::Index>(1 + j)) = dx[t - j];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(ncols))
        throw Error(ErrorCode::SingularRegression, "degenerate adf design matrix");
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd resid = y - design * beta;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(nobs - ncols);
    const Eigen::MatrixXd xtx = design.transpose() * design;
    const Eigen::MatrixXd cov = xtx.ldlt().solve(Eigen::MatrixXd::Identity(xtx.rows(), xtx.cols()));
    const double se = std::sqrt(sigma2 * cov(1, 1));
    if (!(se > 0.0) || !std::isfinite(se)) throw Error(ErrorCode::SingularRegression, "zero standard error");

    AdfResult out;
    out.statistic = beta(1) / se;
    out.lags_used = p;
    out.stationary = out.statistic < out.critical_value_5pct;
    return out;
}

/// Pearson correlation, computed in centered form.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "pearson inputs differ in length");
    if (x.size() < 2) throw Error(ErrorCode::SeriesTooShort, "pearson needs at least 2 pairs");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ZeroVariance, "pearson of a constant sequence");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double rmse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) throw Error(ErrorCode::LengthMismatch, "rmse inputs differ in length");
    if (predicted.empty()) throw Error(ErrorCode::SeriesTooShort, "rmse of empty sequences");
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - actual[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(predicted.size()));
}

} // namespace timetuner::stats
