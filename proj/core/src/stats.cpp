#include "cldyn/stats.hpp"

#include <algorithm>
#include <cmath>

#include "cldyn/errors.hpp"

namespace cldyn::stats {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ValidationError("ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        d = std::max(d, std::abs(ia / na - ib / nb));
    }
    return d;
}

double ks_statistic_gaussian(std::vector<double> a, double mean, double sigma) {
    if (a.empty()) throw ValidationError("ks: empty sample");
    if (!(sigma > 0.0)) throw ValidationError("ks: sigma must be > 0");
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double cdf = 0.5 * std::erfc(-(a[i] - mean) / (sigma * std::sqrt(2.0)));
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    return d;
}

double ks_pvalue(double d, double n_effective) {
    // Kolmogorov asymptotic tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
    const double lambda = (std::sqrt(n_effective) + 0.12 + 0.11 / std::sqrt(n_effective)) * d;
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw ValidationError("mean of empty vector");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) throw ValidationError("stddev needs at least two values");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("fit_slope needs two equally sized samples");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw ValidationError("fit_slope: degenerate x");
    return sxy / sxx;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw ValidationError("correlation needs two equally sized samples");
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    const double denom = ca.norm() * cb.norm();
    if (denom == 0.0) throw ValidationError("correlation: zero variance");
    return ca.dot(cb) / denom;
}

}  // namespace cldyn::stats
