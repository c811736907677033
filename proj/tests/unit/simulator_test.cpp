#include "gflsim/simulator.hpp"

#include "gflsim/csv.hpp"
#include "gflsim/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace gflsim;

namespace si = state_index;
namespace col = column;

namespace {

Scenario base_scenario() {
    Scenario sc;
    sc.grid.vm = 1.0;
    sc.grid.f_hz = 60.0;
    const double w = sc.grid.omega();
    sc.network = NetworkParams::balanced(0.01, 0.01, 0.10 / w, 0.05 / w);
    sc.pll = {0.5, 10.0, 1e-3};
    sc.power = {0.1, 10.0, 5e-3};
    sc.current = {0.3, 20.0, 5e-4};
    sc.p_ref = 0.9;
    sc.q_ref = 0.0;
    return sc;
}

SimConfig base_config() {
    SimConfig cfg;
    cfg.dt = 5e-5;
    cfg.t_end = 0.6;
    cfg.topology = Topology::rl;
    return cfg;
}

Scenario jump_scenario(double dtheta = 0.2, double t_dist = 0.1) {
    Scenario sc = base_scenario();
    sc.grid.theta_dist = dtheta;
    sc.grid.t_dist = t_dist;
    return sc;
}

Scenario quiescent_scenario() {
    Scenario sc = base_scenario();
    sc.p_ref = 0.0;
    sc.q_ref = 0.0;
    return sc;
}

Scenario resistive_scenario() {
    Scenario sc = base_scenario();
    sc.network = NetworkParams::balanced(0.05, 0.1, 0.0, 0.0);
    sc.grid.theta_dist = 0.1;
    sc.grid.t_dist = 0.05;
    return sc;
}

double max_signal_deviation(const RunResult& a, const RunResult& b, bool skip_iters = true) {
    REQUIRE(a.records.size() == b.records.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        for (int c = 0; c < col::count; ++c) {
            if (skip_iters && c == col::newton_iters) {
                continue;
            }
            worst = std::max(worst, std::abs(a.records[k][c] - b.records[k][c]));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("initialize: locked PLL and tabulated current states") {
    const Scenario sc = base_scenario();
    const SimConfig cfg = base_config();
    const SimState s = initialize(sc, cfg);

    CHECK(s.x[si::theta_pll] == 0.0);
    CHECK(s.x[si::vq_fil] == 0.0);
    CHECK(s.x[si::i_pll] == 0.0);
    CHECK(s.x[si::p_fil] == 0.9);
    CHECK(s.x[si::q_fil] == 0.0);
    CHECK(s.x[si::ig_d] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(s.x[si::int_p] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(s.x[si::ifil_d] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(s.x[si::int_cc_d] == doctest::Approx(0.01 * 0.6).epsilon(1e-14));
    // zero reactive start zeroes the q-axis chain
    CHECK(s.x[si::ig_q] == 0.0);
    CHECK(s.x[si::int_q] == 0.0);
    CHECK(s.x[si::int_cc_q] == 0.0);
    // derived outputs are consistent
    CHECK(s.x[si::delta_pll] == 0.0);
    CHECK(s.x[si::omega_hat] == sc.grid.omega());
}

TEST_CASE("initialize: PLL starts at the grid angle when the jump is at t = 0") {
    Scenario sc = jump_scenario(0.3, 0.0);
    const SimState s = initialize(sc, base_config());
    CHECK(s.x[si::theta_pll] == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("initialize: residual bound rejects inconsistent setups") {
    const Scenario sc = base_scenario();  // lossy network: not an exact equilibrium
    SimConfig cfg = base_config();
    cfg.init_residual_max = 1e-12;
    CHECK_THROWS_AS(initialize(sc, cfg), InitError);
}

TEST_CASE("assemble_residual: dimension equals the unknown count") {
    const Scenario sc = base_scenario();
    const SimConfig cfg = base_config();
    const SimState s = initialize(sc, cfg);
    const Eigen::VectorXd r = assemble_residual(s.x, s, cfg.dt, sc, cfg);
    CHECK(r.size() == si::count);
}

TEST_CASE("quiescent scenario: the initialization is a numerical fixed point") {
    const Scenario sc = quiescent_scenario();
    SimConfig cfg = base_config();
    cfg.t_end = 0.05;  // 1000 steps
    const RunResult rr = run(sc, cfg);
    REQUIRE(rr.completed);
    REQUIRE(rr.records.size() == 1001);

    const TimeSeriesRecord& first = rr.records.front();
    double drift = 0.0;
    double iref_drift = 0.0;
    for (const TimeSeriesRecord& rec : rr.records) {
        for (int c = 1; c < col::count; ++c) {
            if (c == col::newton_iters) continue;
            drift = std::max(drift, std::abs(rec[c] - first[c]));
        }
        iref_drift = std::max({iref_drift, std::abs(rec[col::i_ref_d] - first[col::i_ref_d]),
                               std::abs(rec[col::i_ref_q] - first[col::i_ref_q])});
        CHECK(rec[col::newton_iters] <= 10.0);
    }
    CHECK(drift <= 1e-6);
    CHECK(iref_drift <= 1e-8);
}

TEST_CASE("assemble_residual: converged state has a tiny residual; outputs are local") {
    const Scenario sc = quiescent_scenario();
    const SimConfig cfg = base_config();
    const SimState s0 = initialize(sc, cfg);
    const StepResult s1 = step(s0, cfg.dt, sc, cfg);

    const Eigen::VectorXd r = assemble_residual(s1.state.x, s0, cfg.dt, sc, cfg);
    CHECK(r.lpNorm<Eigen::Infinity>() <= cfg.solver.tol * 10.0);

    // perturbing one algebraic output changes its own residual row by delta
    const double delta = 1e-3;
    for (int o = si::vg_d; o < si::count; ++o) {
        Eigen::VectorXd xp = s1.state.x;
        xp[o] += delta;
        const Eigen::VectorXd rp = assemble_residual(xp, s0, cfg.dt, sc, cfg);
        CHECK(std::abs((rp[o] - r[o]) - delta) < 1e-12);
    }
}

TEST_CASE("analytic jacobian matches finite differences at random and corner states") {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> g(0.0, 0.05);

    for (const Topology topo : {Topology::rl, Topology::resistive}) {
        Scenario sc = topo == Topology::rl ? base_scenario() : resistive_scenario();
        sc.freq_support.enabled = true;
        sc.volt_var.enabled = true;
        SimConfig cfg = base_config();
        cfg.topology = topo;
        const double w = sc.grid.omega();

        const SimState s0 = initialize(sc, cfg);
        const ResidualSystem sys = make_step_system(s0, cfg.dt, sc, cfg);

        for (int trial = 0; trial < 30; ++trial) {
            Eigen::VectorXd x = s0.x;
            for (int j = 0; j < x.size(); ++j) {
                x[j] += (j == si::omega_hat ? w : 1.0) * g(rng);
            }
            if (trial % 3 == 1) {
                // straddle the frequency deadband corner
                x[si::omega_hat] = w * (1.0 + sc.freq_support.fdb + 1e-7 * g(rng));
            }
            if (trial % 3 == 2) {
                // straddle the volt-var deadband / clamp corners
                x[si::vg_d] = sc.volt_var.vtarget + sc.volt_var.vdb +
                              (trial % 6 == 2 ? 0.0 : sc.volt_var.qmax / sc.volt_var.kv) +
                              1e-7 * g(rng);
            }

            Eigen::MatrixXd analytic(si::count, si::count);
            sys.jacobian(x, analytic);
            const Eigen::MatrixXd fd = finite_diff_jacobian(sys, x);
            for (int r = 0; r < si::count; ++r) {
                for (int c = 0; c < si::count; ++c) {
                    const double scale =
                        std::max(std::abs(analytic(r, c)), std::abs(fd(r, c)));
                    CHECK(std::abs(analytic(r, c) - fd(r, c)) <= 1e-6 * scale + 1e-9);
                }
            }
        }
    }
}

TEST_CASE("phase jump: the PLL reconverges onto the new grid angle") {
    const Scenario sc = jump_scenario(0.2, 0.1);
    const SimConfig cfg = base_config();
    const RunResult rr = run(sc, cfg);
    REQUIRE(rr.completed);

    const TimeSeriesRecord& last = rr.records.back();
    CHECK(std::abs(last[col::theta_pll_rad] - 0.2) < 1e-3);
    CHECK(std::abs(last[col::v_gq_fil]) < 1e-4);

    int max_iters = 0;
    for (const auto& rec : rr.records) {
        max_iters = std::max(max_iters, static_cast<int>(rec[col::newton_iters]));
    }
    CHECK(max_iters <= 10);
}

TEST_CASE("PLL lock property over a range of jump magnitudes") {
    for (const double dtheta : {-0.5, -0.25, 0.1, 0.37, 0.5}) {
        const Scenario sc = jump_scenario(dtheta, 0.05);
        SimConfig cfg = base_config();
        cfg.t_end = 0.55;
        const RunResult rr = run(sc, cfg);
        REQUIRE(rr.completed);
        const TimeSeriesRecord& last = rr.records.back();
        CHECK(std::abs(last[col::theta_pll_rad] - dtheta) < 1e-3);
        CHECK(std::abs(last[col::v_gq_fil]) < 1e-4);
    }
}

TEST_CASE("norton and thevenin companion forms produce the same trajectory") {
    const Scenario sc = jump_scenario(0.2, 0.05);
    SimConfig norton = base_config();
    norton.t_end = 0.3;
    norton.companion_form = CompanionForm::norton;
    SimConfig thevenin = norton;
    thevenin.companion_form = CompanionForm::thevenin;

    const RunResult a = run(sc, norton);
    const RunResult b = run(sc, thevenin);
    REQUIRE(a.completed);
    REQUIRE(b.completed);
    CHECK(max_signal_deviation(a, b) <= 1e-9);
}

TEST_CASE("run: record count and bit-identical determinism") {
    const Scenario sc = quiescent_scenario();
    SimConfig cfg = base_config();
    cfg.t_end = 0.01;
    const RunResult a = run(sc, cfg);
    const RunResult b = run(sc, cfg);
    REQUIRE(a.completed);
    CHECK(a.records.size() == static_cast<std::size_t>(std::floor(cfg.t_end / cfg.dt)) + 1);

    std::ostringstream csv_a;
    std::ostringstream csv_b;
    write_csv(a.records, csv_a);
    write_csv(b.records, csv_b);
    CHECK(csv_a.str() == csv_b.str());
}

TEST_CASE("reference steps settle the filtered powers onto the new targets") {
    Scenario sc = base_scenario();
    sc.p_ref = 0.5;
    sc.q_ref = 0.1;
    sc.events.push_back({0.2, EventKind::p_step, 0.1});
    sc.events.push_back({0.25, EventKind::q_step, 0.1});
    SimConfig cfg = base_config();
    cfg.t_end = 1.2;
    const RunResult rr = run(sc, cfg);
    REQUIRE(rr.completed);

    const TimeSeriesRecord& last = rr.records.back();
    CHECK(std::abs(last[col::p_g_fil] - 0.6) <= 0.005 * 0.6);
    CHECK(std::abs(last[col::q_g_fil] - 0.2) <= 0.005 * 0.2);
}

TEST_CASE("euler oracle: refinement is validated and trajectories converge") {
    CHECK_THROWS_AS(euler_oracle_run(base_scenario(), base_config(), 5), ValidationError);

    const Scenario sc = jump_scenario(0.2, 0.05);
    SimConfig cfg = base_config();
    cfg.dt = 2e-5;
    cfg.t_end = 0.2;
    const RunResult trap = run(sc, cfg);
    REQUIRE(trap.completed);

    const RunResult e10 = euler_oracle_run(sc, cfg, 10);
    const RunResult e100 = euler_oracle_run(sc, cfg, 100);
    const RunResult e1000 = euler_oracle_run(sc, cfg, 1000);
    const double d10 = max_signal_deviation(trap, e10);
    const double d100 = max_signal_deviation(trap, e100);
    const double d1000 = max_signal_deviation(trap, e1000);

    CHECK(d100 < 1e-3);
    CHECK(d1000 < 1e-4);
    CHECK(d10 > d100);
    CHECK(d100 > d1000);
}

TEST_CASE("resistive mode: abc and dq frame paths agree") {
    const Scenario sc = resistive_scenario();
    SimConfig cfg = base_config();
    cfg.topology = Topology::resistive;
    cfg.t_end = 0.3;
    cfg.frame = FramePath::abc;
    const RunResult abc = run(sc, cfg);
    cfg.frame = FramePath::dq;
    const RunResult dq = run(sc, cfg);
    REQUIRE(abc.completed);
    REQUIRE(dq.completed);
    CHECK(max_signal_deviation(abc, dq) <= 1e-8);
}

TEST_CASE("resistive mode: power balance across the divider") {
    const Scenario sc = resistive_scenario();
    SimConfig cfg = base_config();
    cfg.topology = Topology::resistive;
    cfg.t_end = 0.2;
    const RunResult rr = run(sc, cfg);
    REQUIRE(rr.completed);

    const GridSourceParams& g = sc.grid;
    const double rt = sc.network.series_r();
    for (std::size_t k = 0; k < rr.records.size(); k += 7) {
        const TimeSeriesRecord& rec = rr.records[k];
        const double t = rec[col::time_s];
        const double theta_hat = g.omega() * t + rec[col::theta_pll_rad];
        // slack voltage as the stepping loop sees it (jump applied at the boundary)
        GridSourceParams synth = g;
        synth.theta_dist = 0.0;
        const double extra = (g.t_dist <= t + 1e-12) ? g.theta_dist : 0.0;
        const DqPair vs = park(grid_voltage(t, synth, extra), theta_hat);
        const DqPair ig{rec[col::i_g_d], rec[col::i_g_q]};
        const DqPair einv{rec[col::e_inv_d], rec[col::e_inv_q]};
        const double p_inv = 1.5 * (einv.d * ig.d + einv.q * ig.q);
        const double p_slack = 1.5 * (vs.d * ig.d + vs.q * ig.q);
        const double loss = 1.5 * rt * (ig.d * ig.d + ig.q * ig.q);
        CHECK(std::abs(p_inv - p_slack - loss) < 1e-8);
    }
}

TEST_CASE("omega_hat identity holds exactly at every accepted state") {
    const Scenario sc = jump_scenario(0.2, 0.05);
    SimConfig cfg = base_config();
    cfg.t_end = 0.1;
    const RunResult rr = run(sc, cfg);
    REQUIRE(rr.completed);
    const double w = sc.grid.omega();
    for (const auto& rec : rr.records) {
        CHECK(rec[col::omega_hat_rad_s] == w * (1.0 + rec[col::delta_pll_pu]));
    }
}

TEST_CASE("disabled support reproduces the baseline bit for bit") {
    Scenario a = jump_scenario(0.1, 0.05);
    a.freq_support.enabled = false;
    a.freq_support.kf = 20.0;
    a.volt_var.enabled = false;
    Scenario b = a;
    b.freq_support.kf = 999.0;  // parameters of disabled blocks are inert
    b.volt_var.qmax = 0.0;
    SimConfig cfg = base_config();
    cfg.t_end = 0.2;

    std::ostringstream csv_a;
    std::ostringstream csv_b;
    write_csv(run(a, cfg).records, csv_a);
    write_csv(run(b, cfg).records, csv_b);
    CHECK(csv_a.str() == csv_b.str());
}

TEST_CASE("support augmentation: the solved references include the support signals") {
    Scenario sc = base_scenario();
    sc.p_ref = 0.5;
    sc.grid.delta_f_pu = 0.01;
    sc.freq_support.enabled = true;
    SimConfig cfg = base_config();
    cfg.t_end = 1.0;
    const RunResult rr = run(sc, cfg);
    REQUIRE(rr.completed);
    const TimeSeriesRecord& last = rr.records.back();
    // the filtered power settles on p_ref + p_sup
    CHECK(std::abs(last[col::p_g_fil] - (sc.p_ref + last[col::p_sup])) < 1e-3);
    CHECK(last[col::p_sup] < -0.1);  // support is actually active
}

TEST_CASE("effective_inputs: events fold at boundaries") {
    Scenario sc = base_scenario();
    sc.p_ref = 0.5;
    sc.events.push_back({0.1, EventKind::p_step, 0.1});
    sc.events.push_back({0.2, EventKind::phase_jump, 0.05});
    sc.events.push_back({0.3, EventKind::support_toggle, 0.0});

    const EffectiveInputs before = effective_inputs(sc, 0.05);
    CHECK(before.p_ref == 0.5);
    CHECK(before.theta_extra == 0.0);
    CHECK_FALSE(before.freq_support_enabled);

    const EffectiveInputs mid = effective_inputs(sc, 0.25);
    CHECK(mid.p_ref == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(mid.theta_extra == doctest::Approx(0.05).epsilon(1e-14));

    const EffectiveInputs late = effective_inputs(sc, 0.35);
    CHECK(late.freq_support_enabled);
    CHECK(late.volt_var_enabled);
}

TEST_CASE("solver failure surfaces as a retained partial run") {
    Scenario sc = jump_scenario(0.2, 0.05);
    SimConfig cfg = base_config();
    cfg.t_end = 0.2;
    cfg.solver.max_iter = 1;  // cannot converge through the jump
    cfg.solver.tol = 1e-14;
    const RunResult rr = run(sc, cfg);
    CHECK_FALSE(rr.completed);
    CHECK(!rr.records.empty());
    CHECK(!rr.error.empty());
    CHECK(rr.t_error > 0.0);
}
