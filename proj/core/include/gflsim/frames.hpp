#pragma once

namespace gflsim {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kTwoThirdsPi = kTwoPi / 3.0;

/// Instantaneous three-phase quantities, per-unit.
struct AbcTriple {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double operator[](int k) const { return k == 0 ? a : (k == 1 ? b : c); }
    double& operator[](int k) { return k == 0 ? a : (k == 1 ? b : c); }
};

/// Synchronous-frame quantities, per-unit. The d axis is aligned with the
/// PLL angle estimate.
struct DqPair {
    double d = 0.0;
    double q = 0.0;
};

inline DqPair operator+(DqPair l, DqPair r) { return {l.d + r.d, l.q + r.q}; }
inline DqPair operator-(DqPair l, DqPair r) { return {l.d - r.d, l.q - r.q}; }
inline DqPair operator*(double s, DqPair v) { return {s * v.d, s * v.q}; }

/// 90-degree rotation J = [[0,-1],[1,0]]: J v = (-v_q, v_d). This is the
/// matrix behind every dq cross-coupling term in the plant and controller.
inline DqPair rot90(DqPair v) { return {-v.q, v.d}; }

/// Slack-source description: a balanced cosine set of peak vm at frequency
/// f_hz, with a phase jump of theta_dist radians at t_dist seconds.
/// delta_f_pu shifts the synthesis frequency off nominal (per-unit); the
/// controller's nominal angular frequency stays omega() = 2*pi*f_hz.
struct GridSourceParams {
    double vm = 1.0;
    double f_hz = 60.0;
    double theta_dist = 0.0;
    double t_dist = 0.0;
    double delta_f_pu = 0.0;

    double omega() const { return kTwoPi * f_hz; }
};

/// Grid electrical angle: omega*(1+delta_f)*t plus the step offset
/// theta_grid(t) (0 before t_dist, theta_dist from t_dist on) plus any
/// caller-supplied extra offset. The simulator feeds scheduled phase jumps
/// through extra_offset.
double grid_angle(double t, const GridSourceParams& params, double extra_offset = 0.0);

/// Balanced three-phase slack voltage at time t.
AbcTriple grid_voltage(double t, const GridSourceParams& params, double extra_offset = 0.0);

/// Amplitude-invariant (2/3) Park transform at frame angle theta. The
/// matching 3/2 factor lives in the power computation; neither is
/// configurable.
DqPair park(const AbcTriple& v, double theta);

/// Inverse of park(): reconstructs a zero-sum triple from dq components.
AbcTriple inverse_park(const DqPair& x, double theta);

}  // namespace gflsim
