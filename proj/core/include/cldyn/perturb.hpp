#pragma once

namespace cldyn::perturb {

/// Lazy-limit NTK constants of the similarity data model (unit-diagonal self
/// Grams, rho*I cross Grams, linear activation, Gaussian readout fields):
/// same-task entries are 2, cross-task entries are 2*rho. Exposed read-only
/// for tests.
inline constexpr double kLazySameTaskKernel = 2.0;
inline constexpr double lazy_cross_task_kernel(double rho) { return 2.0 * rho; }

/// Residual of task-1 data while task 1 trains, at order gamma0^0:
/// y * exp(-2t).
double delta0_task1_during_task1(double t, double y);

/// Residual of task-2 data while task 1 trains, at order gamma0^0:
/// y * (1 - rho + rho * exp(-2t)). This is the solution of the lazy ODE with
/// the initial condition Delta(0) = y; its t->inf limit is y*(1-rho).
double delta0_task2_during_task1(double t, double y, double rho);

/// Order-gamma0^2 residual coefficients while task 1 trains. which_task is 1
/// or 2; task 2 carries an extra factor rho. The first-order coefficient is
/// identically zero.
double delta2_during_task1(double t, double y, double rho, int which_task);

/// Order gamma0^0 residuals while task 2 trains, with time rebased to the
/// task switch and assuming infinitely long task-1 training:
/// task 1: y*rho*(1-rho)*(exp(-2t) - 1); task 2: y*(1-rho)*exp(-2t).
double delta0_post_task2(double t, double y, double rho, int which_task);

/// Infinite-time lazy forgetting of task 1: (y^2/2) * rho^2 * (1-rho)^2.
double cf0_infinite(double rho, double y);

/// Task-2 loss at the end of (infinitely long) task-1 training:
/// (y^2/2) * (1-rho)^2, independent of gamma0 through order gamma0^2.
double final_loss_task2_after_task1(double rho, double y);

/// Brute-force explicit-Euler integrators for the same ODE systems. These are
/// the arbiter for the closed forms above and stay independent of them: they
/// integrate the coupled equations directly from the kernel constants.
struct ResidualPair {
    double task1 = 0.0;
    double task2 = 0.0;
};

/// Order-0 system during task 1 from Delta(0) = (y, y).
ResidualPair integrate_order0_task1_phase(double t, double y, double rho, double dt);

/// Order-0 system during task 2, time rebased to the switch, with the
/// infinite-t1 initial condition (0, y*(1-rho)).
ResidualPair integrate_order0_task2_phase(double t, double y, double rho, double dt);

/// Order-gamma0^2 system during task 1 from Delta2(0) = (0, 0). The kernel
/// correction K2 = 2*rho*(A^2 + 2B) is accumulated on the fly from the
/// order-0 residuals.
ResidualPair integrate_order2_task1_phase(double t, double y, double rho, double dt);

}  // namespace cldyn::perturb
