#include "gflsim/frames.hpp"

#include <cmath>

namespace gflsim {

double grid_angle(double t, const GridSourceParams& params, double extra_offset) {
    const double jump = (t >= params.t_dist) ? params.theta_dist : 0.0;
    return params.omega() * (1.0 + params.delta_f_pu) * t + jump + extra_offset;
}

AbcTriple grid_voltage(double t, const GridSourceParams& params, double extra_offset) {
    const double theta = grid_angle(t, params, extra_offset);
    return {params.vm * std::cos(theta),
            params.vm * std::cos(theta - kTwoThirdsPi),
            params.vm * std::cos(theta + kTwoThirdsPi)};
}

DqPair park(const AbcTriple& v, double theta) {
    const double thb = theta - kTwoThirdsPi;
    const double thc = theta + kTwoThirdsPi;
    const double d = v.a * std::cos(theta) + v.b * std::cos(thb) + v.c * std::cos(thc);
    const double q = v.a * std::sin(theta) + v.b * std::sin(thb) + v.c * std::sin(thc);
    return {(2.0 / 3.0) * d, -(2.0 / 3.0) * q};
}

AbcTriple inverse_park(const DqPair& x, double theta) {
    const double thb = theta - kTwoThirdsPi;
    const double thc = theta + kTwoThirdsPi;
    return {x.d * std::cos(theta) - x.q * std::sin(theta),
            x.d * std::cos(thb) - x.q * std::sin(thb),
            x.d * std::cos(thc) - x.q * std::sin(thc)};
}

}  // namespace gflsim
