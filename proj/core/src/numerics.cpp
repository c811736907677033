#include "gflsim/numerics.hpp"

#include <cmath>
#include <limits>

namespace gflsim {

double smax(double a, double b, SmoothingParams eps) {
    const double d = a - b;
    return 0.5 * (a + b + std::sqrt(d * d + eps.epsilon));
}

double smin(double a, double b, SmoothingParams eps) {
    const double d = a - b;
    return 0.5 * (a + b - std::sqrt(d * d + eps.epsilon));
}

SmoothPartials smax_partials(double a, double b, SmoothingParams eps) {
    const double d = a - b;
    const double root = std::sqrt(d * d + eps.epsilon);
    if (root == 0.0) {
        return {0.5, 0.5};  // epsilon = 0 at a = b: midpoint of the subgradient
    }
    return {0.5 * (1.0 + d / root), 0.5 * (1.0 - d / root)};
}

SmoothPartials smin_partials(double a, double b, SmoothingParams eps) {
    const double d = a - b;
    const double root = std::sqrt(d * d + eps.epsilon);
    if (root == 0.0) {
        return {0.5, 0.5};
    }
    return {0.5 * (1.0 - d / root), 0.5 * (1.0 + d / root)};
}

double trapezoidal_residual(double x_next, double x_prev, double f_next, double f_prev,
                            double dt) {
    return x_next - x_prev - 0.5 * dt * (f_next + f_prev);
}

double companion_scale(CompanionForm form, double dt) {
    return form == CompanionForm::norton ? 2.0 / dt : 1.0;
}

double companion_residual(CompanionForm form, double x_next, double f_next, double x_prev,
                          double f_prev, double dt) {
    if (form == CompanionForm::norton) {
        const double g = 2.0 / dt;                  // companion conductance
        const double i_hist = g * x_prev + f_prev;  // history current source
        return g * x_next - f_next - i_hist;
    }
    const double r = 0.5 * dt;                  // companion resistance
    const double v_hist = x_prev + r * f_prev;  // history voltage source
    return x_next - r * f_next - v_hist;
}

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

NewtonResult newton_solve(const ResidualSystem& system, const Eigen::VectorXd& x0,
                          const NewtonSettings& settings) {
    constexpr double kDampingFloor = 1.0 / 16.0;
    constexpr double kSingularRatio = 1e-14;

    NewtonResult out;
    out.x = x0;

    Eigen::VectorXd r(system.dimension);
    system.residual(out.x, r);
    out.residual_norm = inf_norm(r);
    if (std::isfinite(out.residual_norm) && out.residual_norm <= settings.tol) {
        return out;  // already converged, zero iterations
    }

    Eigen::MatrixXd jac(system.dimension, system.dimension);
    Eigen::VectorXd trial(system.dimension);
    Eigen::VectorXd r_trial(system.dimension);

    for (int iter = 1; iter <= settings.max_iter; ++iter) {
        if (system.jacobian) {
            system.jacobian(out.x, jac);
        } else {
            jac = finite_diff_jacobian(system, out.x);
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        const Eigen::VectorXd udiag = lu.matrixLU().diagonal().cwiseAbs();
        const double dmax = udiag.maxCoeff();
        if (!(dmax > 0.0) || !std::isfinite(dmax) || udiag.minCoeff() <= kSingularRatio * dmax) {
            out.iterations = iter;
            out.status = NewtonStatus::singular_jacobian;
            return out;
        }

        const Eigen::VectorXd delta = lu.solve(-r);

        double lambda = settings.damping;
        double best_norm = std::numeric_limits<double>::infinity();
        Eigen::VectorXd best_x;
        Eigen::VectorXd best_r;
        bool accepted = false;
        while (true) {
            trial = out.x + lambda * delta;
            system.residual(trial, r_trial);
            const double norm = inf_norm(r_trial);
            if (std::isfinite(norm) && norm < out.residual_norm) {
                out.x = trial;
                r = r_trial;
                out.residual_norm = norm;
                accepted = true;
                break;
            }
            if (std::isfinite(norm) && norm < best_norm) {
                best_norm = norm;
                best_x = trial;
                best_r = r_trial;
            }
            if (lambda <= kDampingFloor) {
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            if (!best_x.size()) {  // every trial was non-finite
                out.iterations = iter;
                out.status = NewtonStatus::non_convergence;
                return out;
            }
            out.x = best_x;
            r = best_r;
            out.residual_norm = best_norm;
        }

        out.iterations = iter;
        if (out.residual_norm <= settings.tol) {
            return out;
        }
    }

    out.status = NewtonStatus::non_convergence;
    return out;
}

Eigen::MatrixXd finite_diff_jacobian(const ResidualSystem& system, const Eigen::VectorXd& x,
                                     double h_rel) {
    constexpr double kAbsFloor = 1e-9;
    const int n = system.dimension;
    Eigen::MatrixXd jac(n, n);
    Eigen::VectorXd xp = x;
    Eigen::VectorXd rp(n);
    Eigen::VectorXd rm(n);
    for (int j = 0; j < n; ++j) {
        const double h = std::max(h_rel * std::abs(x[j]), kAbsFloor);
        xp[j] = x[j] + h;
        system.residual(xp, rp);
        xp[j] = x[j] - h;
        system.residual(xp, rm);
        xp[j] = x[j];
        jac.col(j) = (rp - rm) / (2.0 * h);
    }
    return jac;
}

}  // namespace gflsim
