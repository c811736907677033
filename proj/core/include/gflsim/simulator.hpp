#pragma once

#include "gflsim/scenario.hpp"

#include <array>
#include <string>
#include <vector>

namespace gflsim {

// Layout of the per-step unknown vector. Entries up to int_cc_q are always
// dynamic (trapezoidal rows); ig_d/ig_q are dynamic in the rl topology and
// algebraic in the resistive one; everything after is algebraic.
namespace state_index {
enum Index : int {
    vq_fil = 0,  // filtered q-axis PCC voltage
    i_pll,       // PLL PI integral
    theta_pll,   // PLL angle deviation, rad
    p_fil,       // filtered active power
    q_fil,       // filtered reactive power
    int_p,       // power PI integral, d axis
    int_q,       // power PI integral, q axis
    ifil_d,      // filtered grid current
    ifil_q,
    int_cc_d,    // current PI integral (V_cc)
    int_cc_q,
    ig_d,        // grid current
    ig_q,
    vg_d,        // PCC voltage
    vg_q,
    delta_pll,   // per-unit frequency deviation
    omega_hat,   // estimated angular frequency, rad/s
    p_g,         // instantaneous active power
    q_g,
    p_sup,       // frequency-support power
    q_sup,       // volt-var support power
    iref_d,      // current references
    iref_q,
    eps_d,       // current PI outputs
    eps_q,
    einv_d,      // inverter voltage command
    einv_q,
    count
};
}  // namespace state_index

struct SimState {
    double t = 0.0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(state_index::count);

    PllState pll() const;
    PowerCtrlState power_ctrl() const;
    CurrentCtrlState current_ctrl() const;
    DqPair ig() const { return {x[state_index::ig_d], x[state_index::ig_q]}; }
    DqPair vg() const { return {x[state_index::vg_d], x[state_index::vg_q]}; }
};

// CSV column layout; the order is fixed.
namespace column {
enum Column : int {
    time_s = 0,
    v_g_a, v_g_b, v_g_c,
    v_gd, v_gq, v_gq_fil,
    theta_pll_rad, delta_pll_pu, omega_hat_rad_s,
    p_g, q_g, p_g_fil, q_g_fil,
    i_ref_d, i_ref_q,
    i_g_d, i_g_q, i_g_fil_d, i_g_fil_q,
    e_inv_d, e_inv_q,
    p_sup, q_sup,
    newton_iters,
    count
};
}  // namespace column

struct TimeSeriesRecord {
    std::array<double, column::count> values{};

    double operator[](int c) const { return values[static_cast<std::size_t>(c)]; }
    static const std::array<const char*, column::count>& column_names();
    /// Column index for a name; throws UnknownSignalError listing the valid
    /// names otherwise.
    static int column_of(const std::string& name);
};

/// References and support enables in force for the step starting at a given
/// boundary. Events (and the grid phase jump) take effect at the first step
/// boundary at or after their scheduled time.
struct EffectiveInputs {
    double p_ref = 0.0;
    double q_ref = 0.0;
    bool freq_support_enabled = false;
    bool volt_var_enabled = false;
    double theta_extra = 0.0;  // accumulated phase jumps, rad
};

EffectiveInputs effective_inputs(const Scenario& scenario, double t_boundary);

/// Initial state per the initialization table: locked PLL at the grid angle,
/// filtered powers at the base references, current states at (2/3)P0/Vm and
/// (2/3)Q0/Vm, current-PI integrals scaled by the grid-side resistance.
/// Algebraic outputs are filled consistently. Throws InitError when the
/// assembled residual at t = 0 exceeds config.init_residual_max.
SimState initialize(const Scenario& scenario, const SimConfig& config);

/// Residual of one trapezoidal step from prev to the candidate x_next at
/// t_next: companion rows for every differential state, identity-minus-
/// expression rows for every algebraic output. Zero iff x_next is a valid
/// next state.
Eigen::VectorXd assemble_residual(const Eigen::VectorXd& x_next, const SimState& prev,
                                  double t_next, const Scenario& scenario,
                                  const SimConfig& config);

/// Analytic Jacobian of assemble_residual with respect to x_next.
Eigen::MatrixXd assemble_jacobian(const Eigen::VectorXd& x_next, const SimState& prev,
                                  double t_next, const Scenario& scenario,
                                  const SimConfig& config);

/// The same step packaged for newton_solve (residual + analytic Jacobian).
ResidualSystem make_step_system(const SimState& prev, double t_next, const Scenario& scenario,
                                const SimConfig& config);

struct StepResult {
    SimState state;
    int iterations = 0;
};

/// One Newton-solved trapezoidal advance, seeded at the previous state.
/// Throws SolverError on non-convergence.
StepResult step(const SimState& prev, double t_next, const Scenario& scenario,
                const SimConfig& config);

struct RunResult {
    std::vector<TimeSeriesRecord> records;
    bool completed = true;
    std::string error;
    double t_error = 0.0;
};

/// Full run from t = 0 to t_end inclusive. Deterministic for fixed inputs.
/// On solver failure the partial records are retained and completed=false.
RunResult run(const Scenario& scenario, const SimConfig& config);

/// Independent validation path: explicit forward Euler at dt/refinement with
/// all algebraic outputs recomputed sequentially each micro-step, subsampled
/// to the macro grid. refinement must be >= 10.
RunResult euler_oracle_run(const Scenario& scenario, const SimConfig& config, int refinement);

TimeSeriesRecord make_record(const SimState& state, int newton_iters,
                             const Scenario& scenario);

}  // namespace gflsim
