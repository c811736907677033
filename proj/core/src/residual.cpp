#include "step_eval.hpp"

#include "gflsim/errors.hpp"

#include <cmath>

namespace gflsim::detail {

namespace si = state_index;

int dynamic_count(Topology topology) {
    return topology == Topology::rl ? si::ig_q + 1 : si::int_cc_q + 1;
}

GridSourceParams synth_params(const Scenario& scenario) {
    GridSourceParams g = scenario.grid;
    g.theta_dist = 0.0;
    return g;
}

DqPair slack_dq_direct(double t, double theta_pll, const GridSourceParams& synth,
                       double theta_extra) {
    // park() of a balanced cosine set at angle theta_g under frame angle
    // theta_hat is (vm cos(theta_g - theta_hat), vm sin(theta_g - theta_hat)).
    const double phi = grid_angle(t, synth, theta_extra) - (synth.omega() * t + theta_pll);
    return {synth.vm * std::cos(phi), synth.vm * std::sin(phi)};
}

StepContext make_step_context(const SimState& prev, double t_next, const Scenario& scenario,
                              const SimConfig& config) {
    StepContext ctx;
    ctx.scenario = &scenario;
    ctx.config = &config;
    ctx.t_prev = prev.t;
    ctx.t_next = t_next;
    ctx.dt = t_next - prev.t;
    if (!(ctx.dt > 0.0)) {
        throw ValidationError("step: t_next must exceed the previous state time");
    }
    ctx.eff = effective_inputs(scenario, prev.t);
    ctx.grid_synth = synth_params(scenario);
    // Differential states are continuous across an event boundary, but the
    // algebraic outputs jump with it; re-solve them under the inputs now in
    // force before forming the trapezoidal history.
    ctx.x_prev = prev.x;
    fill_algebraic_outputs(ctx.x_prev, prev.t, scenario, config, ctx.eff);
    ctx.f_prev = derivative_fields(ctx.x_prev, prev.t, scenario, config, ctx.eff);
    return ctx;
}

Eigen::VectorXd derivative_fields(const Eigen::VectorXd& x, double t, const Scenario& sc,
                                  const SimConfig& config, const EffectiveInputs& eff) {
    const int n_dyn = dynamic_count(config.topology);
    Eigen::VectorXd f(n_dyn);

    f[si::vq_fil] = filter_rate(x[si::vg_q], x[si::vq_fil], sc.pll.tf);
    f[si::i_pll] = pi_rate(x[si::vq_fil], sc.pll.gains());
    f[si::theta_pll] = sc.grid.omega() * x[si::delta_pll];
    f[si::p_fil] = filter_rate(x[si::p_g], x[si::p_fil], sc.power.tf);
    f[si::q_fil] = filter_rate(x[si::q_g], x[si::q_fil], sc.power.tf);
    f[si::int_p] = pi_rate(eff.p_ref + x[si::p_sup] - x[si::p_fil], sc.power.gains());
    f[si::int_q] = pi_rate(eff.q_ref + x[si::q_sup] - x[si::q_fil], sc.power.gains());
    f[si::ifil_d] = filter_rate(x[si::ig_d], x[si::ifil_d], sc.current.tf);
    f[si::ifil_q] = filter_rate(x[si::ig_q], x[si::ifil_q], sc.current.tf);
    f[si::int_cc_d] = pi_rate(x[si::iref_d] - x[si::ifil_d], sc.current.gains());
    f[si::int_cc_q] = pi_rate(x[si::iref_q] - x[si::ifil_q], sc.current.gains());

    if (config.topology == Topology::rl) {
        const DqPair vs =
            slack_dq_direct(t, x[si::theta_pll], synth_params(sc), eff.theta_extra);
        const DqPair didt = plant_rate_dq({x[si::ig_d], x[si::ig_q]},
                                          {x[si::einv_d], x[si::einv_q]}, vs,
                                          x[si::omega_hat], sc.network);
        f[si::ig_d] = didt.d;
        f[si::ig_q] = didt.q;
    }
    return f;
}

void fill_algebraic_outputs(Eigen::VectorXd& x, double t, const Scenario& sc,
                            const SimConfig& config, const EffectiveInputs& eff) {
    const double w = sc.grid.omega();
    const GridSourceParams synth = synth_params(sc);
    const bool rl = config.topology == Topology::rl;

    PllState pll;
    pll.vq_fil = x[si::vq_fil];
    pll.i_pll = x[si::i_pll];
    const PllOutputs po = pll_outputs(pll, sc.pll.gains(), w);
    x[si::delta_pll] = po.delta_pll;
    x[si::omega_hat] = po.omega_hat;

    x[si::p_sup] = eff.freq_support_enabled
                       ? psup_smooth(freq_deviation(x[si::omega_hat], w), sc.freq_support,
                                     config.epsilon)
                       : 0.0;

    const DqPair vs = slack_dq_direct(t, x[si::theta_pll], synth, eff.theta_extra);
    const double rt = sc.network.series_r();
    const double rg = sc.network.rg_dq();
    const double rf = sc.network.rf_dq();
    const double lt = sc.network.series_l();
    const double alpha = rl ? sc.network.lg / lt : 0.0;

    // The algebraic chain is triangular: the d axis resolves from p_sup, the
    // volt-var support reads the resulting vg_d, then the q axis follows.
    x[si::iref_d] = pi_output(eff.p_ref + x[si::p_sup] - x[si::p_fil],
                              {sc.power.kp, sc.power.ki, x[si::int_p]});
    x[si::eps_d] = pi_output(x[si::iref_d] - x[si::ifil_d],
                             {sc.current.kp, sc.current.ki, x[si::int_cc_d]});
    if (rl) {
        x[si::einv_d] = vs.d + (x[si::eps_d] - x[si::omega_hat] * sc.network.lf * x[si::ig_q] +
                                (rg - alpha * rt) * x[si::ig_d]) /
                                   (1.0 - alpha);
        x[si::vg_d] = (1.0 - alpha) * vs.d + (rg - alpha * rt) * x[si::ig_d] +
                      alpha * x[si::einv_d];
    } else {
        x[si::einv_d] = x[si::eps_d];
        x[si::vg_d] = (x[si::einv_d] * rg + vs.d * rf) / rt;
        x[si::ig_d] = (x[si::einv_d] - vs.d) / rt;
    }

    x[si::q_sup] = eff.volt_var_enabled
                       ? qsup_smooth(x[si::vg_d], sc.volt_var, config.epsilon)
                       : 0.0;
    x[si::iref_q] = pi_output(eff.q_ref + x[si::q_sup] - x[si::q_fil],
                              {sc.power.kp, sc.power.ki, x[si::int_q]});
    x[si::eps_q] = pi_output(x[si::iref_q] - x[si::ifil_q],
                             {sc.current.kp, sc.current.ki, x[si::int_cc_q]});
    if (rl) {
        x[si::einv_q] = vs.q + (x[si::eps_q] + x[si::omega_hat] * sc.network.lf * x[si::ig_d] +
                                (rg - alpha * rt) * x[si::ig_q]) /
                                   (1.0 - alpha);
        x[si::vg_q] = (1.0 - alpha) * vs.q + (rg - alpha * rt) * x[si::ig_q] +
                      alpha * x[si::einv_q];
    } else {
        x[si::einv_q] = x[si::eps_q];
        x[si::vg_q] = (x[si::einv_q] * rg + vs.q * rf) / rt;
        x[si::ig_q] = (x[si::einv_q] - vs.q) / rt;
    }

    const PowerReading pw =
        power_compute({x[si::vg_d], x[si::vg_q]}, {x[si::ig_d], x[si::ig_q]});
    x[si::p_g] = pw.p;
    x[si::q_g] = pw.q;
}

void eval_residual(const StepContext& ctx, const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const Scenario& sc = *ctx.scenario;
    const SimConfig& cfg = *ctx.config;
    const double t = ctx.t_next;
    const double w = sc.grid.omega();
    const bool rl = cfg.topology == Topology::rl;
    r.resize(si::count);

    // companion rows for every differential state
    const Eigen::VectorXd f1 = derivative_fields(x, t, sc, cfg, ctx.eff);
    const int n_dyn = dynamic_count(cfg.topology);
    for (int k = 0; k < n_dyn; ++k) {
        r[k] = companion_residual(cfg.companion_form, x[k], f1[k], ctx.x_prev[k],
                                  ctx.f_prev[k], ctx.dt);
    }

    // network interface
    const double theta_hat = w * t + x[si::theta_pll];
    const DqPair einv{x[si::einv_d], x[si::einv_q]};
    const DqPair ig{x[si::ig_d], x[si::ig_q]};
    DqPair vg_expr;
    if (!rl) {
        DqPair ig_expr;
        if (cfg.frame == FramePath::abc) {
            const AbcTriple vs_abc = grid_voltage(t, ctx.grid_synth, ctx.eff.theta_extra);
            const AbcTriple einv_abc = inverse_park(einv, theta_hat);
            ig_expr = park(line_current_resistive(einv_abc, vs_abc, sc.network), theta_hat);
            vg_expr = park(pcc_voltage_resistive(einv_abc, vs_abc, sc.network), theta_hat);
        } else {
            const DqPair vs =
                slack_dq_direct(t, x[si::theta_pll], ctx.grid_synth, ctx.eff.theta_extra);
            const double rt = sc.network.series_r();
            ig_expr = (1.0 / rt) * (einv - vs);
            vg_expr = (1.0 / rt) * (sc.network.rg_dq() * einv + sc.network.rf_dq() * vs);
        }
        r[si::ig_d] = x[si::ig_d] - ig_expr.d;
        r[si::ig_q] = x[si::ig_q] - ig_expr.q;
    } else {
        const DqPair vs =
            slack_dq_direct(t, x[si::theta_pll], ctx.grid_synth, ctx.eff.theta_extra);
        const DqPair didt = plant_rate_dq(ig, einv, vs, x[si::omega_hat], sc.network);
        vg_expr = pcc_voltage_rl(ig, didt, vs, x[si::omega_hat], sc.network);
    }
    r[si::vg_d] = x[si::vg_d] - vg_expr.d;
    r[si::vg_q] = x[si::vg_q] - vg_expr.q;

    // PLL outputs
    PllState pll;
    pll.vq_fil = x[si::vq_fil];
    pll.i_pll = x[si::i_pll];
    const PllOutputs po = pll_outputs(pll, sc.pll.gains(), w);
    r[si::delta_pll] = x[si::delta_pll] - po.delta_pll;
    r[si::omega_hat] = x[si::omega_hat] - w * (1.0 + x[si::delta_pll]);

    // instantaneous powers
    const PowerReading pw = power_compute({x[si::vg_d], x[si::vg_q]}, ig);
    r[si::p_g] = x[si::p_g] - pw.p;
    r[si::q_g] = x[si::q_g] - pw.q;

    // grid support (smooth forms only; disabled short-circuits to exactly 0)
    r[si::p_sup] = x[si::p_sup] -
                   (ctx.eff.freq_support_enabled
                        ? psup_smooth(freq_deviation(x[si::omega_hat], w), sc.freq_support,
                                      cfg.epsilon)
                        : 0.0);
    r[si::q_sup] = x[si::q_sup] -
                   (ctx.eff.volt_var_enabled
                        ? qsup_smooth(x[si::vg_d], sc.volt_var, cfg.epsilon)
                        : 0.0);

    // power controller
    PowerCtrlState pcs;
    pcs.p_fil = x[si::p_fil];
    pcs.q_fil = x[si::q_fil];
    pcs.int_p = x[si::int_p];
    pcs.int_q = x[si::int_q];
    const PowerCtrlOutputs pco = power_ctrl_outputs(
        ctx.eff.p_ref + x[si::p_sup], ctx.eff.q_ref + x[si::q_sup], pcs, sc.power.gains());
    r[si::iref_d] = x[si::iref_d] - pco.iref.d;
    r[si::iref_q] = x[si::iref_q] - pco.iref.q;

    // current controller PI outputs
    r[si::eps_d] = x[si::eps_d] - pi_output(x[si::iref_d] - x[si::ifil_d],
                                            {sc.current.kp, sc.current.ki, x[si::int_cc_d]});
    r[si::eps_q] = x[si::eps_q] - pi_output(x[si::iref_q] - x[si::ifil_q],
                                            {sc.current.kp, sc.current.ki, x[si::int_cc_q]});

    // voltage command with feedforward decoupling
    const DqPair einv_expr = decouple_feedforward(
        {x[si::eps_d], x[si::eps_q]}, x[si::omega_hat], ig, {x[si::vg_d], x[si::vg_q]},
        sc.network.lf, rl ? CouplingMode::rl : CouplingMode::resistive);
    r[si::einv_d] = x[si::einv_d] - einv_expr.d;
    r[si::einv_q] = x[si::einv_q] - einv_expr.q;
}

void eval_jacobian(const StepContext& ctx, const Eigen::VectorXd& x, Eigen::MatrixXd& jac) {
    const Scenario& sc = *ctx.scenario;
    const SimConfig& cfg = *ctx.config;
    const double t = ctx.t_next;
    const double w = sc.grid.omega();
    const bool rl = cfg.topology == Topology::rl;

    jac.resize(si::count, si::count);
    jac.setZero();

    const double s = companion_scale(cfg.companion_form, ctx.dt);
    const double c = 0.5 * ctx.dt;
    const double sc_c = s * c;

    const double t_pll = sc.pll.tf;
    const double t_pq = sc.power.tf;
    const double t_ig = sc.current.tf;
    const double ki_pll = sc.pll.ki;
    const double kp_pll = sc.pll.kp;
    const double ki_pq = sc.power.ki;
    const double kp_pq = sc.power.kp;
    const double ki_ig = sc.current.ki;
    const double kp_ig = sc.current.kp;

    const double rt = sc.network.series_r();
    const double rg = sc.network.rg_dq();
    const double rf = sc.network.rf_dq();
    const double lf = sc.network.lf;
    const double lt = sc.network.series_l();

    const DqPair vs = slack_dq_direct(t, x[si::theta_pll], ctx.grid_synth, ctx.eff.theta_extra);
    // d(vs)/d(theta_pll) = (vs.q, -vs.d)

    // --- companion rows: J(k,.) = s*(I - c * df/dx)
    jac(si::vq_fil, si::vq_fil) = s * (1.0 + c / t_pll);
    jac(si::vq_fil, si::vg_q) = -sc_c / t_pll;

    jac(si::i_pll, si::i_pll) = s;
    jac(si::i_pll, si::vq_fil) = -sc_c * ki_pll;

    jac(si::theta_pll, si::theta_pll) = s;
    jac(si::theta_pll, si::delta_pll) = -sc_c * w;

    jac(si::p_fil, si::p_fil) = s * (1.0 + c / t_pq);
    jac(si::p_fil, si::p_g) = -sc_c / t_pq;
    jac(si::q_fil, si::q_fil) = s * (1.0 + c / t_pq);
    jac(si::q_fil, si::q_g) = -sc_c / t_pq;

    jac(si::int_p, si::int_p) = s;
    jac(si::int_p, si::p_sup) = -sc_c * ki_pq;
    jac(si::int_p, si::p_fil) = sc_c * ki_pq;
    jac(si::int_q, si::int_q) = s;
    jac(si::int_q, si::q_sup) = -sc_c * ki_pq;
    jac(si::int_q, si::q_fil) = sc_c * ki_pq;

    jac(si::ifil_d, si::ifil_d) = s * (1.0 + c / t_ig);
    jac(si::ifil_d, si::ig_d) = -sc_c / t_ig;
    jac(si::ifil_q, si::ifil_q) = s * (1.0 + c / t_ig);
    jac(si::ifil_q, si::ig_q) = -sc_c / t_ig;

    jac(si::int_cc_d, si::int_cc_d) = s;
    jac(si::int_cc_d, si::iref_d) = -sc_c * ki_ig;
    jac(si::int_cc_d, si::ifil_d) = sc_c * ki_ig;
    jac(si::int_cc_q, si::int_cc_q) = s;
    jac(si::int_cc_q, si::iref_q) = -sc_c * ki_ig;
    jac(si::int_cc_q, si::ifil_q) = sc_c * ki_ig;

    // --- grid current rows
    if (rl) {
        const double wh = x[si::omega_hat];
        jac(si::ig_d, si::ig_d) = s * (1.0 + c * rt / lt);
        jac(si::ig_d, si::ig_q) = -sc_c * wh;
        jac(si::ig_d, si::omega_hat) = -sc_c * x[si::ig_q];
        jac(si::ig_d, si::einv_d) = -sc_c / lt;
        jac(si::ig_d, si::theta_pll) = sc_c * vs.q / lt;

        jac(si::ig_q, si::ig_q) = s * (1.0 + c * rt / lt);
        jac(si::ig_q, si::ig_d) = sc_c * wh;
        jac(si::ig_q, si::omega_hat) = sc_c * x[si::ig_d];
        jac(si::ig_q, si::einv_q) = -sc_c / lt;
        jac(si::ig_q, si::theta_pll) = -sc_c * vs.d / lt;
    } else {
        jac(si::ig_d, si::ig_d) = 1.0;
        jac(si::ig_d, si::einv_d) = -1.0 / rt;
        jac(si::ig_d, si::theta_pll) = vs.q / rt;
        jac(si::ig_q, si::ig_q) = 1.0;
        jac(si::ig_q, si::einv_q) = -1.0 / rt;
        jac(si::ig_q, si::theta_pll) = -vs.d / rt;
    }

    // --- PCC voltage rows
    jac(si::vg_d, si::vg_d) = 1.0;
    jac(si::vg_q, si::vg_q) = 1.0;
    if (rl) {
        // reduced recovery: vg = (1-a) vs + (rg - a rt) ig + a einv, a = lg/lt;
        // the omega_hat cross terms cancel between Lg di/dt and the J i term
        const double alpha = sc.network.lg / lt;
        jac(si::vg_d, si::theta_pll) = -(1.0 - alpha) * vs.q;
        jac(si::vg_d, si::ig_d) = -(rg - alpha * rt);
        jac(si::vg_d, si::einv_d) = -alpha;
        jac(si::vg_q, si::theta_pll) = (1.0 - alpha) * vs.d;
        jac(si::vg_q, si::ig_q) = -(rg - alpha * rt);
        jac(si::vg_q, si::einv_q) = -alpha;
    } else {
        jac(si::vg_d, si::einv_d) = -rg / rt;
        jac(si::vg_d, si::theta_pll) = -rf * vs.q / rt;
        jac(si::vg_q, si::einv_q) = -rg / rt;
        jac(si::vg_q, si::theta_pll) = rf * vs.d / rt;
    }

    // --- PLL algebraic rows
    jac(si::delta_pll, si::delta_pll) = 1.0;
    jac(si::delta_pll, si::vq_fil) = -kp_pll;
    jac(si::delta_pll, si::i_pll) = -1.0;
    jac(si::omega_hat, si::omega_hat) = 1.0;
    jac(si::omega_hat, si::delta_pll) = -w;

    // --- powers
    jac(si::p_g, si::p_g) = 1.0;
    jac(si::p_g, si::vg_d) = -1.5 * x[si::ig_d];
    jac(si::p_g, si::ig_d) = -1.5 * x[si::vg_d];
    jac(si::p_g, si::vg_q) = -1.5 * x[si::ig_q];
    jac(si::p_g, si::ig_q) = -1.5 * x[si::vg_q];
    jac(si::q_g, si::q_g) = 1.0;
    jac(si::q_g, si::vg_d) = -1.5 * x[si::ig_q];
    jac(si::q_g, si::ig_q) = -1.5 * x[si::vg_d];
    jac(si::q_g, si::vg_q) = 1.5 * x[si::ig_d];
    jac(si::q_g, si::ig_d) = 1.5 * x[si::vg_q];

    // --- grid support
    jac(si::p_sup, si::p_sup) = 1.0;
    if (ctx.eff.freq_support_enabled) {
        const double df = freq_deviation(x[si::omega_hat], w);
        jac(si::p_sup, si::omega_hat) =
            -psup_smooth_slope(df, sc.freq_support, cfg.epsilon) / w;
    }
    jac(si::q_sup, si::q_sup) = 1.0;
    if (ctx.eff.volt_var_enabled) {
        jac(si::q_sup, si::vg_d) = -qsup_smooth_slope(x[si::vg_d], sc.volt_var, cfg.epsilon);
    }

    // --- power controller outputs
    jac(si::iref_d, si::iref_d) = 1.0;
    jac(si::iref_d, si::p_sup) = -kp_pq;
    jac(si::iref_d, si::p_fil) = kp_pq;
    jac(si::iref_d, si::int_p) = -1.0;
    jac(si::iref_q, si::iref_q) = 1.0;
    jac(si::iref_q, si::q_sup) = -kp_pq;
    jac(si::iref_q, si::q_fil) = kp_pq;
    jac(si::iref_q, si::int_q) = -1.0;

    // --- current controller outputs
    jac(si::eps_d, si::eps_d) = 1.0;
    jac(si::eps_d, si::iref_d) = -kp_ig;
    jac(si::eps_d, si::ifil_d) = kp_ig;
    jac(si::eps_d, si::int_cc_d) = -1.0;
    jac(si::eps_q, si::eps_q) = 1.0;
    jac(si::eps_q, si::iref_q) = -kp_ig;
    jac(si::eps_q, si::ifil_q) = kp_ig;
    jac(si::eps_q, si::int_cc_q) = -1.0;

    jac(si::einv_d, si::einv_d) = 1.0;
    jac(si::einv_d, si::eps_d) = -1.0;
    jac(si::einv_q, si::einv_q) = 1.0;
    jac(si::einv_q, si::eps_q) = -1.0;
    if (rl) {
        const double wh = x[si::omega_hat];
        jac(si::einv_d, si::omega_hat) = lf * x[si::ig_q];
        jac(si::einv_d, si::ig_q) = wh * lf;
        jac(si::einv_d, si::vg_d) = -1.0;
        jac(si::einv_q, si::omega_hat) = -lf * x[si::ig_d];
        jac(si::einv_q, si::ig_d) = -wh * lf;
        jac(si::einv_q, si::vg_q) = -1.0;
    }
}

}  // namespace gflsim::detail
