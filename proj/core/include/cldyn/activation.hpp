#pragma once

#include <Eigen/Core>

namespace cldyn {

enum class Activation { relu, identity };

/// phi(x). ReLU derivative at 0 is defined as 0; the finite trainer and the
/// mean-field simulator must agree on this choice bit for bit.
inline double activate(Activation a, double x) {
    return a == Activation::relu ? (x > 0.0 ? x : 0.0) : x;
}

inline double activate_derivative(Activation a, double x) {
    return a == Activation::relu ? (x > 0.0 ? 1.0 : 0.0) : 1.0;
}

inline Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& x) {
    if (a == Activation::identity) return x;
    return x.cwiseMax(0.0);
}

inline Eigen::MatrixXd activate_derivative(Activation a, const Eigen::MatrixXd& x) {
    if (a == Activation::identity) return Eigen::MatrixXd::Ones(x.rows(), x.cols());
    return (x.array() > 0.0).cast<double>();
}

}  // namespace cldyn
