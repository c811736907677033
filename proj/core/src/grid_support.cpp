#include "gflsim/grid_support.hpp"

#include <algorithm>

namespace gflsim {

double freq_deviation(double omega_hat, double omega_nom) {
    return (omega_hat - omega_nom) / omega_nom;
}

double psup_piecewise(double df, const FreqSupportParams& p) {
    if (df > p.fdb) {
        return -p.kf * (df - p.fdb);
    }
    if (df < -p.fdb) {
        return -p.kf * (df + p.fdb);
    }
    return 0.0;
}

double psup_smooth(double df, const FreqSupportParams& p, SmoothingParams eps) {
    const double upper = -p.kf * (df - p.fdb);  // active branch above the deadband
    const double lower = -p.kf * (df + p.fdb);  // active branch below
    return smin(0.0, upper, eps) + smax(0.0, lower, eps);
}

double psup_smooth_slope(double df, const FreqSupportParams& p, SmoothingParams eps) {
    const double upper = -p.kf * (df - p.fdb);
    const double lower = -p.kf * (df + p.fdb);
    return -p.kf * (smin_partials(0.0, upper, eps).db + smax_partials(0.0, lower, eps).db);
}

double qsup_piecewise(double vgd, const VoltVarParams& p) {
    const double dv = vgd - p.vtarget;
    double qval = 0.0;
    if (dv > p.vdb) {
        qval = -p.kv * (dv - p.vdb);
    } else if (dv < -p.vdb) {
        qval = -p.kv * (dv + p.vdb);
    }
    return std::clamp(qval, -p.qmax, p.qmax);
}

double qsup_smooth(double vgd, const VoltVarParams& p, SmoothingParams eps) {
    const double dv = vgd - p.vtarget;
    const double qval = smin(0.0, -p.kv * (dv - p.vdb), eps) +
                        smax(0.0, -p.kv * (dv + p.vdb), eps);
    const double qtemp = smin(qval, p.qmax, eps);
    return smax(qtemp, -p.qmax, eps);
}

double qsup_smooth_slope(double vgd, const VoltVarParams& p, SmoothingParams eps) {
    const double dv = vgd - p.vtarget;
    const double upper = -p.kv * (dv - p.vdb);
    const double lower = -p.kv * (dv + p.vdb);
    const double qval = smin(0.0, upper, eps) + smax(0.0, lower, eps);
    const double dqval =
        -p.kv * (smin_partials(0.0, upper, eps).db + smax_partials(0.0, lower, eps).db);
    const double qtemp = smin(qval, p.qmax, eps);
    const double dqtemp = smin_partials(qval, p.qmax, eps).da * dqval;
    return smax_partials(qtemp, -p.qmax, eps).da * dqtemp;
}

}  // namespace gflsim
