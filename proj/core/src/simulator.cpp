#include "gflsim/simulator.hpp"

#include "gflsim/errors.hpp"
#include "step_eval.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace gflsim {

namespace si = state_index;
namespace col = column;

PllState SimState::pll() const {
    return {x[si::vq_fil], x[si::i_pll], x[si::delta_pll], x[si::theta_pll], x[si::omega_hat]};
}

PowerCtrlState SimState::power_ctrl() const {
    PowerCtrlState s;
    s.p_g = x[si::p_g];
    s.q_g = x[si::q_g];
    s.p_fil = x[si::p_fil];
    s.q_fil = x[si::q_fil];
    s.int_p = x[si::int_p];
    s.int_q = x[si::int_q];
    s.iref = {x[si::iref_d], x[si::iref_q]};
    return s;
}

CurrentCtrlState SimState::current_ctrl() const {
    CurrentCtrlState s;
    s.ifil = {x[si::ifil_d], x[si::ifil_q]};
    s.int_d = x[si::int_cc_d];
    s.int_q = x[si::int_cc_q];
    s.eps = {x[si::eps_d], x[si::eps_q]};
    s.einv = {x[si::einv_d], x[si::einv_q]};
    return s;
}

const std::array<const char*, col::count>& TimeSeriesRecord::column_names() {
    static const std::array<const char*, col::count> names = {
        "time_s",        "v_g_a",        "v_g_b",      "v_g_c",     "v_gd",
        "v_gq",          "v_gq_fil",     "theta_pll_rad", "delta_pll_pu",
        "omega_hat_rad_s", "p_g",        "q_g",        "p_g_fil",   "q_g_fil",
        "i_ref_d",       "i_ref_q",      "i_g_d",      "i_g_q",     "i_g_fil_d",
        "i_g_fil_q",     "e_inv_d",      "e_inv_q",    "p_sup",     "q_sup",
        "newton_iters"};
    return names;
}

int TimeSeriesRecord::column_of(const std::string& name) {
    const auto& names = column_names();
    for (int k = 0; k < col::count; ++k) {
        if (name == names[k]) {
            return k;
        }
    }
    std::ostringstream msg;
    msg << "unknown signal '" << name << "'; valid signals:";
    for (const char* n : names) {
        msg << ' ' << n;
    }
    throw UnknownSignalError(msg.str());
}

EffectiveInputs effective_inputs(const Scenario& scenario, double t_boundary) {
    EffectiveInputs eff;
    eff.p_ref = scenario.p_ref;
    eff.q_ref = scenario.q_ref;
    eff.freq_support_enabled = scenario.freq_support.enabled;
    eff.volt_var_enabled = scenario.volt_var.enabled;

    // events take effect at the first step boundary at or after their time;
    // the slack absorbs boundary round-off
    const double slack = 1e-9 * std::max(1.0, std::abs(t_boundary));
    if (scenario.grid.theta_dist != 0.0 && scenario.grid.t_dist <= t_boundary + slack) {
        eff.theta_extra += scenario.grid.theta_dist;
    }
    for (const Event& ev : scenario.events) {
        if (ev.t > t_boundary + slack) {
            break;
        }
        switch (ev.kind) {
            case EventKind::phase_jump:
                eff.theta_extra += ev.value;
                break;
            case EventKind::p_step:
                eff.p_ref += ev.value;
                break;
            case EventKind::q_step:
                eff.q_ref += ev.value;
                break;
            case EventKind::support_toggle:
                eff.freq_support_enabled = !eff.freq_support_enabled;
                eff.volt_var_enabled = !eff.volt_var_enabled;
                break;
        }
    }
    return eff;
}

void validate_scenario(const Scenario& sc, const SimConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };

    if (!(sc.grid.vm > 0.0)) fail("grid.vm: must be > 0");
    if (!(sc.grid.f_hz > 0.0)) fail("grid.f: must be > 0");
    if (sc.grid.t_dist < 0.0) fail("grid.t_dist: must be >= 0");

    for (int k = 0; k < 3; ++k) {
        if (sc.network.rf[k] < 0.0) fail("filter.rf: must be >= 0");
        if (sc.network.rg[k] < 0.0) fail("network.rg: must be >= 0");
    }
    if (!sc.network.is_balanced()) {
        fail("filter.rf/network.rg: per-phase resistances must be balanced");
    }
    if (!(sc.network.rf_dq() + sc.network.rg_dq() > 0.0)) {
        fail("filter.rf + network.rg: must be > 0");
    }
    if (sc.network.lf < 0.0) fail("filter.xf: must be >= 0");
    if (sc.network.lg < 0.0) fail("network.xg: must be >= 0");
    if (cfg.topology == Topology::rl && !(sc.network.lf > 0.0)) {
        fail("filter.xf: must be > 0 for topology = \"rl\"");
    }

    const struct {
        const char* name;
        const ControlLoopParams* p;
    } loops[] = {{"pll", &sc.pll}, {"power_control", &sc.power}, {"current_control", &sc.current}};
    for (const auto& loop : loops) {
        const std::string prefix = loop.name;
        if (loop.p->kp < 0.0) fail(prefix + ".kp: must be >= 0");
        if (loop.p->ki < 0.0) fail(prefix + ".ki: must be >= 0");
        if (!(loop.p->tf > 0.0)) fail(prefix + ".tf: must be > 0");
    }

    if (sc.freq_support.kf < 0.0) fail("frequency_support.kf: must be >= 0");
    if (sc.freq_support.fdb < 0.0) fail("frequency_support.fdb: must be >= 0");
    if (sc.volt_var.kv < 0.0) fail("volt_var.kv: must be >= 0");
    if (sc.volt_var.vdb < 0.0) fail("volt_var.vdb: must be >= 0");
    if (sc.volt_var.qmax < 0.0) fail("volt_var.qmax: must be >= 0");
    if (!(sc.volt_var.vtarget > 0.0)) fail("volt_var.vtarget: must be > 0");

    if (!(cfg.dt > 0.0)) fail("simulation.dt: must be > 0");
    if (!(cfg.t_end > cfg.dt)) fail("simulation.t_end: must exceed simulation.dt");
    const double tf_min = std::min({sc.pll.tf, sc.power.tf, sc.current.tf});
    if (!(cfg.dt < 2.0 * tf_min)) {
        std::ostringstream msg;
        msg << "simulation.dt: filter stability guard requires dt < 2*min(pll.tf, "
               "power_control.tf, current_control.tf) = "
            << 2.0 * tf_min;
        fail(msg.str());
    }
    if (!(cfg.epsilon.epsilon > 0.0)) fail("simulation.epsilon: must be > 0");
    if (!(cfg.solver.tol > 0.0)) fail("simulation.newton_tol: must be > 0");
    if (cfg.solver.max_iter < 1) fail("simulation.newton_max_iter: must be >= 1");
    if (!(cfg.solver.damping > 0.0 && cfg.solver.damping <= 1.0)) {
        fail("simulation.newton_damping: must be in (0, 1]");
    }
    if (!(cfg.init_residual_max > 0.0)) fail("simulation.init_residual_max: must be > 0");

    double t_last = -1.0;
    for (std::size_t k = 0; k < sc.events.size(); ++k) {
        const std::string prefix = "events[" + std::to_string(k) + "]";
        const double t = sc.events[k].t;
        if (t < 0.0 || t > cfg.t_end) fail(prefix + ".t: must lie within [0, t_end]");
        if (t <= t_last) fail(prefix + ".t: event times must be strictly increasing");
        t_last = t;
    }
}

SimState initialize(const Scenario& sc, const SimConfig& cfg) {
    validate_scenario(sc, cfg);
    SimState s;
    s.t = 0.0;
    const EffectiveInputs eff = effective_inputs(sc, 0.0);
    const double id0 = (2.0 / 3.0) * sc.p_ref / sc.grid.vm;
    const double iq0 = (2.0 / 3.0) * sc.q_ref / sc.grid.vm;

    auto& x = s.x;
    x[si::theta_pll] = eff.theta_extra;  // locked to the grid angle at t = 0
    x[si::p_fil] = sc.p_ref;
    x[si::q_fil] = sc.q_ref;
    x[si::int_p] = id0;
    x[si::int_q] = iq0;
    x[si::ifil_d] = id0;
    x[si::ifil_q] = iq0;
    x[si::int_cc_d] = sc.network.rg_dq() * id0;
    x[si::int_cc_q] = sc.network.rg_dq() * iq0;
    x[si::ig_d] = id0;
    x[si::ig_q] = iq0;
    detail::fill_algebraic_outputs(x, 0.0, sc, cfg, eff);

    // Residual of a hypothetical hold step, in state units. A large value
    // means the parameters are inconsistent with this initialization.
    SimConfig probe = cfg;
    probe.companion_form = CompanionForm::thevenin;
    const Eigen::VectorXd r0 = assemble_residual(x, s, cfg.dt, sc, probe);
    const double rnorm = r0.lpNorm<Eigen::Infinity>();
    if (!(rnorm <= cfg.init_residual_max)) {
        std::ostringstream msg;
        msg << "initialization residual " << rnorm
            << " exceeds simulation.init_residual_max = " << cfg.init_residual_max;
        throw InitError(msg.str());
    }
    return s;
}

Eigen::VectorXd assemble_residual(const Eigen::VectorXd& x_next, const SimState& prev,
                                  double t_next, const Scenario& scenario,
                                  const SimConfig& config) {
    const detail::StepContext ctx = detail::make_step_context(prev, t_next, scenario, config);
    Eigen::VectorXd r(si::count);
    detail::eval_residual(ctx, x_next, r);
    return r;
}

Eigen::MatrixXd assemble_jacobian(const Eigen::VectorXd& x_next, const SimState& prev,
                                  double t_next, const Scenario& scenario,
                                  const SimConfig& config) {
    const detail::StepContext ctx = detail::make_step_context(prev, t_next, scenario, config);
    Eigen::MatrixXd jac(si::count, si::count);
    detail::eval_jacobian(ctx, x_next, jac);
    return jac;
}

ResidualSystem make_step_system(const SimState& prev, double t_next, const Scenario& scenario,
                                const SimConfig& config) {
    auto ctx = std::make_shared<detail::StepContext>(
        detail::make_step_context(prev, t_next, scenario, config));
    ResidualSystem sys;
    sys.dimension = si::count;
    sys.residual = [ctx](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        detail::eval_residual(*ctx, x, r);
    };
    sys.jacobian = [ctx](const Eigen::VectorXd& x, Eigen::MatrixXd& jac) {
        detail::eval_jacobian(*ctx, x, jac);
    };
    return sys;
}

StepResult step(const SimState& prev, double t_next, const Scenario& scenario,
                const SimConfig& config) {
    const ResidualSystem sys = make_step_system(prev, t_next, scenario, config);
    const NewtonResult res = newton_solve(sys, prev.x, config.solver);
    if (!res.ok()) {
        std::vector<double> snapshot(res.x.data(), res.x.data() + res.x.size());
        std::ostringstream msg;
        msg << "newton: "
            << (res.status == NewtonStatus::singular_jacobian ? "singular Jacobian"
                                                              : "no convergence")
            << " at t = " << t_next << " (residual " << res.residual_norm << " after "
            << res.iterations << " iterations)";
        throw SolverError(msg.str(), t_next, res.iterations, res.residual_norm,
                          std::move(snapshot));
    }
    StepResult out;
    out.state.t = t_next;
    out.state.x = res.x;
    // keep omega_hat = omega (1 + delta) an exact identity at accepted states
    out.state.x[si::omega_hat] =
        scenario.grid.omega() * (1.0 + out.state.x[si::delta_pll]);
    out.iterations = res.iterations;
    return out;
}

namespace {

int step_count(const SimConfig& config) {
    return static_cast<int>(std::floor(config.t_end / config.dt + 1e-9));
}

}  // namespace

TimeSeriesRecord make_record(const SimState& state, int newton_iters,
                             const Scenario& scenario) {
    const auto& x = state.x;
    const double theta_hat = scenario.grid.omega() * state.t + x[si::theta_pll];
    const AbcTriple vabc = inverse_park({x[si::vg_d], x[si::vg_q]}, theta_hat);

    TimeSeriesRecord rec;
    auto& v = rec.values;
    v[col::time_s] = state.t;
    v[col::v_g_a] = vabc.a;
    v[col::v_g_b] = vabc.b;
    v[col::v_g_c] = vabc.c;
    v[col::v_gd] = x[si::vg_d];
    v[col::v_gq] = x[si::vg_q];
    v[col::v_gq_fil] = x[si::vq_fil];
    v[col::theta_pll_rad] = x[si::theta_pll];
    v[col::delta_pll_pu] = x[si::delta_pll];
    v[col::omega_hat_rad_s] = x[si::omega_hat];
    v[col::p_g] = x[si::p_g];
    v[col::q_g] = x[si::q_g];
    v[col::p_g_fil] = x[si::p_fil];
    v[col::q_g_fil] = x[si::q_fil];
    v[col::i_ref_d] = x[si::iref_d];
    v[col::i_ref_q] = x[si::iref_q];
    v[col::i_g_d] = x[si::ig_d];
    v[col::i_g_q] = x[si::ig_q];
    v[col::i_g_fil_d] = x[si::ifil_d];
    v[col::i_g_fil_q] = x[si::ifil_q];
    v[col::e_inv_d] = x[si::einv_d];
    v[col::e_inv_q] = x[si::einv_q];
    v[col::p_sup] = x[si::p_sup];
    v[col::q_sup] = x[si::q_sup];
    v[col::newton_iters] = newton_iters;
    return rec;
}

RunResult run(const Scenario& scenario, const SimConfig& config) {
    validate_scenario(scenario, config);
    RunResult out;
    SimState state = initialize(scenario, config);
    const int n = step_count(config);
    out.records.reserve(static_cast<std::size_t>(n) + 1);
    out.records.push_back(make_record(state, 0, scenario));
    for (int k = 1; k <= n; ++k) {
        const double t_next = k * config.dt;
        try {
            StepResult sr = step(state, t_next, scenario, config);
            state = sr.state;
            out.records.push_back(make_record(state, sr.iterations, scenario));
        } catch (const SolverError& e) {
            out.completed = false;
            out.error = e.what();
            out.t_error = t_next;
            break;
        }
    }
    return out;
}

RunResult euler_oracle_run(const Scenario& scenario, const SimConfig& config, int refinement) {
    if (refinement < 10) {
        throw ValidationError("euler_oracle_run: refinement must be >= 10");
    }
    validate_scenario(scenario, config);

    RunResult out;
    SimState state = initialize(scenario, config);
    const int n = step_count(config);
    out.records.reserve(static_cast<std::size_t>(n) + 1);
    out.records.push_back(make_record(state, 0, scenario));

    const int n_dyn = detail::dynamic_count(config.topology);
    const double h = config.dt / refinement;
    Eigen::VectorXd x = state.x;
    for (int k = 1; k <= n; ++k) {
        const double t0 = (k - 1) * config.dt;
        const EffectiveInputs eff = effective_inputs(scenario, t0);
        for (int m = 0; m < refinement; ++m) {
            const double tm = t0 + m * h;
            const Eigen::VectorXd f =
                detail::derivative_fields(x, tm, scenario, config, eff);
            for (int j = 0; j < n_dyn; ++j) {
                x[j] += h * f[j];
            }
            detail::fill_algebraic_outputs(x, tm + h, scenario, config, eff);
        }
        if (!x.allFinite()) {
            out.completed = false;
            out.error = "euler oracle: numeric overflow";
            out.t_error = k * config.dt;
            break;
        }
        state.t = k * config.dt;
        state.x = x;
        out.records.push_back(make_record(state, 0, scenario));
    }
    return out;
}

}  // namespace gflsim
