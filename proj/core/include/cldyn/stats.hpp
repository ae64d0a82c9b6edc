#pragma once

#include <vector>

#include <Eigen/Core>

namespace cldyn::stats {

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// One-sample KS statistic against N(mean, sigma^2).
double ks_statistic_gaussian(std::vector<double> a, double mean, double sigma);

/// Asymptotic KS p-value for statistic d with effective sample size n.
double ks_pvalue(double d, double n_effective);

double mean(const std::vector<double>& v);
double stddev(const std::vector<double>& v);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Pearson correlation of two equally sized columns.
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace cldyn::stats
