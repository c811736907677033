#pragma once

#include "gflsim/controller.hpp"
#include "gflsim/frames.hpp"
#include "gflsim/grid_support.hpp"
#include "gflsim/network.hpp"
#include "gflsim/numerics.hpp"

#include <vector>

namespace gflsim {

/// PI gains plus the time constant of the measurement low pass in front of
/// the controller.
struct ControlLoopParams {
    double kp = 0.0;
    double ki = 0.0;
    double tf = 1e-3;  // seconds

    PiBlock gains() const { return {kp, ki, 0.0}; }
};

enum class EventKind { phase_jump, p_step, q_step, support_toggle };

/// Scheduled input change. value is radians for phase_jump and a per-unit
/// reference delta for p_step/q_step; support_toggle ignores it and flips
/// both support enables.
struct Event {
    double t = 0.0;
    EventKind kind = EventKind::phase_jump;
    double value = 0.0;
};

struct Scenario {
    GridSourceParams grid;
    NetworkParams network;
    ControlLoopParams pll{0.5, 10.0, 1e-3};
    ControlLoopParams power{0.1, 10.0, 5e-3};
    ControlLoopParams current{0.3, 20.0, 5e-4};
    double p_ref = 0.0;  // base active-power reference, pu
    double q_ref = 0.0;
    FreqSupportParams freq_support;
    VoltVarParams volt_var;
    std::vector<Event> events;
};

enum class Topology { resistive, rl };

/// Which route the resistive network solve takes: through the per-phase abc
/// equations (then Park) or directly in dq. Both give the same trajectory;
/// the rl topology always works in dq.
enum class FramePath { abc, dq };

struct SimConfig {
    double dt = 5e-5;
    double t_end = 1.0;
    Topology topology = Topology::rl;
    CompanionForm companion_form = CompanionForm::norton;
    FramePath frame = FramePath::abc;
    NewtonSettings solver;
    SmoothingParams epsilon;
    double init_residual_max = 10.0;
};

/// Validates a scenario/config pair. Throws ValidationError naming the
/// offending section.key (the names match the config-file schema).
void validate_scenario(const Scenario& scenario, const SimConfig& config);

}  // namespace gflsim
