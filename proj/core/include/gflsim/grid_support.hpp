#pragma once

#include "gflsim/numerics.hpp"

namespace gflsim {

/// Frequency-watt droop: shifts the active-power reference by
/// -kf * (df -/+ fdb) outside a deadband of half-width fdb.
struct FreqSupportParams {
    double kf = 20.0;     // pu power per pu frequency
    double fdb = 6e-4;    // deadband half-width, pu frequency
    bool enabled = false;
};

/// Volt-var droop: shifts the reactive-power reference against the d-axis
/// PCC voltage deviation from vtarget, with deadband vdb and saturation at
/// +/- qmax.
struct VoltVarParams {
    double kv = 10.0;     // pu reactive power per pu voltage
    double vdb = 0.01;    // deadband half-width, pu
    double vtarget = 1.0; // pu
    double qmax = 0.3;    // support limit, pu
    bool enabled = false;
};

/// Per-unit frequency deviation (omega_hat - omega) / omega.
double freq_deviation(double omega_hat, double omega_nom);

// Piecewise forms: the exact deadband characteristics. These are test
// oracles only; the solved system always uses the smooth forms below so the
// Jacobian stays continuous across the deadband edges.
double psup_piecewise(double df, const FreqSupportParams& params);
double qsup_piecewise(double vgd, const VoltVarParams& params);

// Smooth forms built from smin/smax. Within 2*sqrt(eps) of the piecewise
// curves everywhere and C1 for eps > 0.
double psup_smooth(double df, const FreqSupportParams& params, SmoothingParams eps);
double qsup_smooth(double vgd, const VoltVarParams& params, SmoothingParams eps);

// Slopes of the smooth forms, for analytic Jacobians.
double psup_smooth_slope(double df, const FreqSupportParams& params, SmoothingParams eps);
double qsup_smooth_slope(double vgd, const VoltVarParams& params, SmoothingParams eps);

}  // namespace gflsim
