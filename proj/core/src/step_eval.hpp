#pragma once

#include "gflsim/simulator.hpp"

namespace gflsim::detail {

/// Number of trapezoidal rows: the grid current is a differential state in
/// the rl topology and an algebraic output in the resistive one.
int dynamic_count(Topology topology);

/// Grid params used by the stepping loop: the configured phase jump is
/// routed through EffectiveInputs::theta_extra at step boundaries instead of
/// the t_dist branch, so the synthesis copy has it zeroed.
GridSourceParams synth_params(const Scenario& scenario);

/// Slack voltage in the PLL frame, evaluated directly in dq.
DqPair slack_dq_direct(double t, double theta_pll, const GridSourceParams& synth,
                       double theta_extra);

/// Everything a Newton solve needs that is constant within one step.
struct StepContext {
    const Scenario* scenario = nullptr;
    const SimConfig* config = nullptr;
    EffectiveInputs eff;
    GridSourceParams grid_synth;
    double t_prev = 0.0;
    double t_next = 0.0;
    double dt = 0.0;
    Eigen::VectorXd x_prev;
    Eigen::VectorXd f_prev;  // derivative fields at (x_prev, t_prev)
};

StepContext make_step_context(const SimState& prev, double t_next, const Scenario& scenario,
                              const SimConfig& config);

/// Derivative fields of the dynamic states, given a vector whose algebraic
/// entries are consistent.
Eigen::VectorXd derivative_fields(const Eigen::VectorXd& x, double t, const Scenario& scenario,
                                  const SimConfig& config, const EffectiveInputs& eff);

/// Fill the algebraic entries of x from its dynamic entries. The algebraic
/// part of the system is triangular, so this closed-form sweep is exact.
void fill_algebraic_outputs(Eigen::VectorXd& x, double t, const Scenario& scenario,
                            const SimConfig& config, const EffectiveInputs& eff);

void eval_residual(const StepContext& ctx, const Eigen::VectorXd& x, Eigen::VectorXd& r);
void eval_jacobian(const StepContext& ctx, const Eigen::VectorXd& x, Eigen::MatrixXd& jac);

}  // namespace gflsim::detail
