#include "gflsim/controller.hpp"

#include <cassert>

namespace gflsim {

double filter_rate(double input, double state, double time_constant) {
    assert(time_constant > 0.0);
    return (input - state) / time_constant;
}

double pi_rate(double error, const PiBlock& block) { return block.ki * error; }

double pi_output(double error, const PiBlock& block) {
    return block.kp * error + block.integral_state;
}

PllOutputs pll_outputs(const PllState& state, const PiBlock& gains, double omega_nom) {
    PllOutputs out;
    out.delta_pll = gains.kp * state.vq_fil + state.i_pll;
    out.omega_hat = omega_nom * (1.0 + out.delta_pll);
    out.theta_rate = omega_nom * out.delta_pll;
    return out;
}

PowerReading power_compute(const DqPair& v, const DqPair& i) {
    return {1.5 * (v.d * i.d + v.q * i.q), 1.5 * (v.d * i.q - v.q * i.d)};
}

PowerCtrlOutputs power_ctrl_outputs(double p_ref, double q_ref, const PowerCtrlState& state,
                                    const PiBlock& gains) {
    const double ep = p_ref - state.p_fil;
    const double eq = q_ref - state.q_fil;
    PowerCtrlOutputs out;
    out.iref.d = gains.kp * ep + state.int_p;
    out.iref.q = gains.kp * eq + state.int_q;
    out.int_p_rate = gains.ki * ep;
    out.int_q_rate = gains.ki * eq;
    return out;
}

DqPair decouple_feedforward(const DqPair& eps, double omega_hat, const DqPair& ig,
                            const DqPair& vg, double lf, CouplingMode mode) {
    if (mode == CouplingMode::resistive) {
        return eps;
    }
    return eps + omega_hat * lf * rot90(ig) + vg;
}

CurrentCtrlOutputs current_ctrl_outputs(const DqPair& iref, const CurrentCtrlState& state,
                                        double omega_hat, const DqPair& ig, const DqPair& vg,
                                        double lf, CouplingMode mode, const PiBlock& gains) {
    const double ed = iref.d - state.ifil.d;
    const double eq = iref.q - state.ifil.q;
    CurrentCtrlOutputs out;
    out.eps.d = gains.kp * ed + state.int_d;
    out.eps.q = gains.kp * eq + state.int_q;
    out.einv = decouple_feedforward(out.eps, omega_hat, ig, vg, lf, mode);
    out.int_d_rate = gains.ki * ed;
    out.int_q_rate = gains.ki * eq;
    return out;
}

}  // namespace gflsim
