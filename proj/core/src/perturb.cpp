#include "cldyn/perturb.hpp"

#include <cmath>

#include "cldyn/errors.hpp"

namespace cldyn::perturb {

namespace {

void check_args(double t, double rho, int which_task) {
    if (!(t >= 0.0)) throw ValidationError("t must be >= 0");
    if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in [0, 1]");
    if (which_task != 1 && which_task != 2) throw ValidationError("which_task must be 1 or 2");
}

}  // namespace

double delta0_task1_during_task1(double t, double y) {
    check_args(t, 0.0, 1);
    return y * std::exp(-2.0 * t);
}

double delta0_task2_during_task1(double t, double y, double rho) {
    check_args(t, rho, 2);
    return y * (1.0 - rho) + y * rho * std::exp(-2.0 * t);
}

double delta2_during_task1(double t, double y, double rho, int which_task) {
    check_args(t, rho, which_task);
    const double e2 = std::exp(-2.0 * t);
    const double e4 = std::exp(-4.0 * t);
    const double e6 = std::exp(-6.0 * t);
    const double base = y * y * y * (e2 * (t - 0.75) + e4 - 0.25 * e6);
    return which_task == 1 ? base : rho * base;
}

double delta0_post_task2(double t, double y, double rho, int which_task) {
    check_args(t, rho, which_task);
    const double e2 = std::exp(-2.0 * t);
    if (which_task == 1) return y * rho * (1.0 - rho) * (e2 - 1.0);
    return y * (1.0 - rho) * e2;
}

double cf0_infinite(double rho, double y) {
    check_args(0.0, rho, 1);
    const double a = rho * (1.0 - rho);
    return 0.5 * y * y * a * a;
}

double final_loss_task2_after_task1(double rho, double y) {
    check_args(0.0, rho, 1);
    const double a = 1.0 - rho;
    return 0.5 * y * y * a * a;
}

ResidualPair integrate_order0_task1_phase(double t, double y, double rho, double dt) {
    check_args(t, rho, 1);
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    const double k_same = kLazySameTaskKernel;
    const double k_cross = lazy_cross_task_kernel(rho);
    double d1 = y, d2 = y;
    const long steps = static_cast<long>(t / dt + 0.5);
    for (long s = 0; s < steps; ++s) {
        const double d1_old = d1;
        d1 -= dt * k_same * d1_old;   // only task-1 data enter the sums
        d2 -= dt * k_cross * d1_old;
    }
    return {d1, d2};
}

ResidualPair integrate_order0_task2_phase(double t, double y, double rho, double dt) {
    check_args(t, rho, 1);
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    const double k_same = kLazySameTaskKernel;
    const double k_cross = lazy_cross_task_kernel(rho);
    double d1 = 0.0;                // task 1 fully fit before the switch
    double d2 = y * (1.0 - rho);    // end-of-task-1 limit
    const long steps = static_cast<long>(t / dt + 0.5);
    for (long s = 0; s < steps; ++s) {
        const double d2_old = d2;
        d1 -= dt * k_cross * d2_old;
        d2 -= dt * k_same * d2_old;
    }
    return {d1, d2};
}

ResidualPair integrate_order2_task1_phase(double t, double y, double rho, double dt) {
    check_args(t, rho, 1);
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    const double k_same = kLazySameTaskKernel;
    const double k_cross = lazy_cross_task_kernel(rho);
    double d0 = y;                        // order-0 residual of task 1
    double a = 0.0, b = 0.0;              // A(t) = int d0, B(t) = int d0*A
    double d2_1 = 0.0, d2_2 = 0.0;
    const long steps = static_cast<long>(t / dt + 0.5);
    for (long s = 0; s < steps; ++s) {
        const double ab = a * a + 2.0 * b;
        const double k2_same = k_same * ab;    // K2_11 = 2 (A^2 + 2B)
        const double k2_cross = k_cross * ab;  // K2_21 = 2 rho (A^2 + 2B)
        const double d0_old = d0;
        const double d2_1_old = d2_1;
        // Coefficient system: d/dt D2 = -K0 D2 + K2 D0.
        d2_1 += dt * (-k_same * d2_1_old + k2_same * d0_old);
        d2_2 += dt * (-k_cross * d2_1_old + k2_cross * d0_old);
        b += dt * d0_old * a;
        a += dt * d0_old;
        d0 -= dt * k_same * d0_old;
    }
    return {d2_1, d2_2};
}

}  // namespace cldyn::perturb
