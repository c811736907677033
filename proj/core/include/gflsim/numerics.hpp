#pragma once

#include <Eigen/Dense>

#include <functional>

namespace gflsim {

/// Smoothing constant for the algebraic max/min envelopes. epsilon = 0 gives
/// the exact operators; the solver always runs with epsilon > 0.
struct SmoothingParams {
    double epsilon = 1e-5;
};

// Smooth envelopes: smax >= max and smin <= min everywhere, both within
// sqrt(epsilon)/2 of the exact operator and C1 for epsilon > 0.
double smax(double a, double b, SmoothingParams eps);
double smin(double a, double b, SmoothingParams eps);

struct SmoothPartials {
    double da = 0.0;
    double db = 0.0;
};

SmoothPartials smax_partials(double a, double b, SmoothingParams eps);
SmoothPartials smin_partials(double a, double b, SmoothingParams eps);

/// One trapezoidal step written as a residual:
///   x_next - x_prev - dt/2 * (f_next + f_prev)
/// Zero exactly when the trapezoidal update holds.
double trapezoidal_residual(double x_next, double x_prev, double f_next, double f_prev,
                            double dt);

/// Companion-model flavour of the trapezoidal residual. Thevenin keeps the
/// state units (series resistance dt/2 with a history voltage source, KVL
/// around the loop); Norton scales into rate units (conductance 2/dt with a
/// history current source, KCL at the node). Both vanish at the same x_next.
enum class CompanionForm { norton, thevenin };

double companion_scale(CompanionForm form, double dt);
double companion_residual(CompanionForm form, double x_next, double f_next, double x_prev,
                          double f_prev, double dt);

struct NewtonSettings {
    double tol = 1e-10;    // residual infinity-norm
    int max_iter = 50;
    double damping = 1.0;  // initial step scale; halved on residual increase
};

/// A square nonlinear system r(x) = 0. The analytic Jacobian is optional;
/// newton_solve falls back to central finite differences when it is absent.
struct ResidualSystem {
    int dimension = 0;
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> residual;
    std::function<void(const Eigen::VectorXd&, Eigen::MatrixXd&)> jacobian;
};

enum class NewtonStatus { converged, non_convergence, singular_jacobian };

struct NewtonResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double residual_norm = 0.0;
    NewtonStatus status = NewtonStatus::converged;

    bool ok() const { return status == NewtonStatus::converged; }
};

/// Damped Newton with dense LU (partial pivoting). The step is scaled by
/// settings.damping, halved while the residual norm increases, floor 1/16;
/// at the floor the best trial found is accepted so the iteration can climb
/// out of deadband corners.
NewtonResult newton_solve(const ResidualSystem& system, const Eigen::VectorXd& x0,
                          const NewtonSettings& settings);

/// Central-difference Jacobian, per-column step max(h_rel*|x_j|, h_floor).
/// The default floor suits solver fallbacks; element-wise verification
/// against an analytic Jacobian wants a larger floor (~1e-7) so near-zero
/// columns are not quotient-noise limited.
Eigen::MatrixXd finite_diff_jacobian(const ResidualSystem& system, const Eigen::VectorXd& x,
                                     double h_rel = 1e-7, double h_floor = 1e-9);

}  // namespace gflsim
