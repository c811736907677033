#pragma once

#include "gflsim/frames.hpp"
#include "gflsim/numerics.hpp"

namespace gflsim {

/// First-order low pass dx/dt = (u - x)/T together with its companion
/// representation. The form is selected globally by the simulation config.
struct FirstOrderFilter {
    double time_constant = 1e-3;  // seconds
    double state = 0.0;
    CompanionForm form = CompanionForm::norton;
};

/// PI controller u = kp*e + I, dI/dt = ki*e.
struct PiBlock {
    double kp = 0.0;
    double ki = 0.0;            // 1/s
    double integral_state = 0.0;
};

/// PLL unknowns. omega_hat = omega*(1 + delta_pll) is maintained as an exact
/// identity at every accepted step.
struct PllState {
    double vq_fil = 0.0;     // filtered q-axis PCC voltage, pu
    double i_pll = 0.0;      // PI integral state
    double delta_pll = 0.0;  // per-unit frequency deviation
    double theta_pll = 0.0;  // angle deviation, rad
    double omega_hat = 0.0;  // estimated angular frequency, rad/s
};

struct PllOutputs {
    double delta_pll = 0.0;
    double omega_hat = 0.0;
    double theta_rate = 0.0;  // d(theta_pll)/dt
};

/// Power-control unknowns: instantaneous and filtered powers, the two PI
/// integrals and the resulting current references.
struct PowerCtrlState {
    double p_g = 0.0;
    double q_g = 0.0;
    double p_fil = 0.0;
    double q_fil = 0.0;
    double int_p = 0.0;  // I_P^d
    double int_q = 0.0;  // I_Q^q
    DqPair iref;
};

/// Current-control unknowns: filtered currents, PI integrals (the V_cc
/// states), PI outputs and the inverter voltage command.
struct CurrentCtrlState {
    DqPair ifil;
    double int_d = 0.0;  // V_cc^d
    double int_q = 0.0;  // V_cc^q
    DqPair eps;
    DqPair einv;
};

/// Plant coupling handled by the current controller: purely resistive
/// network (voltage command passes through) or series R-L (feedforward
/// decoupling added).
enum class CouplingMode { resistive, rl };

/// Low-pass derivative (input - state) / T, fed to the trapezoidal residual.
double filter_rate(double input, double state, double time_constant);

double pi_rate(double error, const PiBlock& block);
double pi_output(double error, const PiBlock& block);

/// delta = kp*vq_fil + I, omega_hat = omega*(1+delta), theta_rate = omega*delta.
PllOutputs pll_outputs(const PllState& state, const PiBlock& gains, double omega_nom);

struct PowerReading {
    double p = 0.0;
    double q = 0.0;
};

/// Instantaneous powers in the synchronous frame:
///   P = 3/2 (v_d i_d + v_q i_q),  Q = 3/2 (v_d i_q - v_q i_d).
PowerReading power_compute(const DqPair& v, const DqPair& i);

struct PowerCtrlOutputs {
    DqPair iref;
    double int_p_rate = 0.0;
    double int_q_rate = 0.0;
};

/// Current references from the power PI pair; one gain set serves both axes.
PowerCtrlOutputs power_ctrl_outputs(double p_ref, double q_ref, const PowerCtrlState& state,
                                    const PiBlock& gains);

/// Feedforward/decoupling stage: einv = eps in resistive mode, and
/// eps + omega_hat*Lf*J*ig + vg in rl mode. Note the raw (unfiltered)
/// current in the cross term.
DqPair decouple_feedforward(const DqPair& eps, double omega_hat, const DqPair& ig,
                            const DqPair& vg, double lf, CouplingMode mode);

struct CurrentCtrlOutputs {
    DqPair eps;
    DqPair einv;
    double int_d_rate = 0.0;
    double int_q_rate = 0.0;
};

/// Full current-control stage. The PI error uses the filtered currents in
/// state.ifil; the decoupling feedforward uses the raw ig.
CurrentCtrlOutputs current_ctrl_outputs(const DqPair& iref, const CurrentCtrlState& state,
                                        double omega_hat, const DqPair& ig, const DqPair& vg,
                                        double lf, CouplingMode mode, const PiBlock& gains);

}  // namespace gflsim
