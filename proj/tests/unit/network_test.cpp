#include "gflsim/network.hpp"

#include "gflsim/errors.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace gflsim;

TEST_CASE("pcc_voltage_resistive: divider cases") {
    const NetworkParams eq = NetworkParams::balanced(0.1, 0.1, 0.0, 0.0);

    const AbcTriple same = pcc_voltage_resistive({0.9, -0.4, -0.5}, {0.9, -0.4, -0.5}, eq);
    CHECK(same.a == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(same.b == doctest::Approx(-0.4).epsilon(1e-14));

    const AbcTriple half = pcc_voltage_resistive({1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, eq);
    CHECK(half.a == doctest::Approx(0.5).epsilon(1e-14));

    const NetworkParams p = NetworkParams::balanced(0.05, 0.1, 0.0, 0.0);
    const AbcTriple v = pcc_voltage_resistive({1.02, 0.0, 0.0}, {1.0, 0.0, 0.0}, p);
    CHECK(v.a == doctest::Approx(1.0133333333333334).epsilon(1e-12));
}

TEST_CASE("resistive ops reject a degenerate divider") {
    const NetworkParams zero;
    CHECK_THROWS_AS(pcc_voltage_resistive({1, 0, 0}, {0, 0, 0}, zero), DegenerateNetworkError);
    CHECK_THROWS_AS(line_current_resistive({1, 0, 0}, {0, 0, 0}, zero), DegenerateNetworkError);
}

TEST_CASE("line_current_resistive: ohm cases") {
    const NetworkParams p = NetworkParams::balanced(1.0, 1.0, 0.0, 0.0);
    const AbcTriple zero = line_current_resistive({0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}, p);
    CHECK(zero.a == 0.0);
    CHECK(zero.b == 0.0);
    const AbcTriple i = line_current_resistive({1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, p);
    CHECK(i.a == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("resistive equations are mutually consistent at the PCC node") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    std::uniform_real_distribution<double> ur(0.01, 0.4);
    for (int trial = 0; trial < 300; ++trial) {
        const NetworkParams p = NetworkParams::balanced(ur(rng), ur(rng), 0.0, 0.0);
        const AbcTriple einv{u(rng), u(rng), u(rng)};
        const AbcTriple vslack{u(rng), u(rng), u(rng)};
        const AbcTriple vg = pcc_voltage_resistive(einv, vslack, p);
        const AbcTriple ig = line_current_resistive(einv, vslack, p);
        for (int k = 0; k < 3; ++k) {
            const double i_filter = (einv[k] - vg[k]) / p.rf[k];
            const double i_grid = (vg[k] - vslack[k]) / p.rg[k];
            CHECK(std::abs(i_filter - ig[k]) < 1e-12);
            CHECK(std::abs(i_grid - ig[k]) < 1e-12);
        }
    }
}

TEST_CASE("plant_rate_dq: rest state and steady state") {
    const double w = kTwoPi * 60.0;
    const NetworkParams p = NetworkParams::balanced(0.05, 0.05, 0.1 / w, 0.05 / w);

    const DqPair rest = plant_rate_dq({0.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, w, p);
    CHECK(rest.d == 0.0);
    CHECK(rest.q == 0.0);

    // zero derivative with i_q = 0 requires einv_d - v_d = R i_d
    const double id = 0.6;
    const double r = p.series_r();
    const DqPair steady = plant_rate_dq({id, 0.0}, {1.0 + r * id, w * p.series_l() * id},
                                        {1.0, 0.0}, w, p);
    CHECK(std::abs(steady.d) < 1e-12);
    CHECK(std::abs(steady.q) < 1e-12);
}

TEST_CASE("cross-coupling term does no work") {
    const double w = kTwoPi * 60.0;
    const NetworkParams lossless = NetworkParams::balanced(0.0, 0.0, 0.1 / w, 0.0);
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const DqPair ig{u(rng), u(rng)};
        // with R = 0 and no driving voltage the rate is the coupling alone
        const DqPair rate = plant_rate_dq(ig, {0.0, 0.0}, {0.0, 0.0}, w, lossless);
        CHECK(std::abs(ig.d * rate.d + ig.q * rate.q) < 1e-14 * w);
    }
}

TEST_CASE("plant step response matches a refined Euler integration") {
    const double w = kTwoPi * 60.0;
    const NetworkParams p = NetworkParams::balanced(0.05, 0.05, 0.1 / w, 0.05 / w);
    const DqPair einv{1.05, 0.02};
    const DqPair vg{1.0, 0.0};
    const double dt = 1e-4;
    const int steps = 1000;  // 0.1 s

    // trapezoidal: (I - dt/2 A) x1 = (I + dt/2 A) x0 + dt b
    const double r = p.series_r();
    const double l = p.series_l();
    Eigen::Matrix2d a;
    a << -r / l, w, -w, -r / l;
    const Eigen::Vector2d b((einv.d - vg.d) / l, (einv.q - vg.q) / l);
    const Eigen::Matrix2d lhs = Eigen::Matrix2d::Identity() - 0.5 * dt * a;
    const Eigen::Matrix2d rhs = Eigen::Matrix2d::Identity() + 0.5 * dt * a;
    const Eigen::Matrix2d lhs_inv = lhs.inverse();

    Eigen::Vector2d x_trap = Eigen::Vector2d::Zero();
    DqPair x_euler{0.0, 0.0};
    const int refine = 100;
    const double h = dt / refine;
    double max_dev = 0.0;
    for (int k = 0; k < steps; ++k) {
        x_trap = lhs_inv * (rhs * x_trap + dt * b);
        for (int m = 0; m < refine; ++m) {
            const DqPair rate = plant_rate_dq(x_euler, einv, vg, w, p);
            x_euler.d += h * rate.d;
            x_euler.q += h * rate.q;
        }
        max_dev = std::max({max_dev, std::abs(x_trap[0] - x_euler.d),
                            std::abs(x_trap[1] - x_euler.q)});
    }
    CHECK(max_dev < 1e-3);
}

TEST_CASE("pcc_voltage_rl: open line and resistive limit") {
    const double w = kTwoPi * 60.0;
    const NetworkParams p = NetworkParams::balanced(0.05, 0.1, 0.1 / w, 0.05 / w);

    const DqPair open = pcc_voltage_rl({0.0, 0.0}, {0.0, 0.0}, {0.98, -0.1}, w, p);
    CHECK(open.d == doctest::Approx(0.98).epsilon(1e-14));
    CHECK(open.q == doctest::Approx(-0.1).epsilon(1e-14));

    NetworkParams no_lg = p;
    no_lg.lg = 0.0;
    const DqPair lim = pcc_voltage_rl({0.5, -0.2}, {123.0, -7.0}, {1.0, 0.0}, w, no_lg);
    CHECK(lim.d == doctest::Approx(1.0 + 0.1 * 0.5).epsilon(1e-14));
    CHECK(lim.q == doctest::Approx(0.0 - 0.1 * 0.2).epsilon(1e-12));
}

TEST_CASE("pcc_voltage_rl reproduces the resistive divider when inductances vanish") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    const double w = kTwoPi * 60.0;
    for (int trial = 0; trial < 300; ++trial) {
        const NetworkParams p = NetworkParams::balanced(0.05, 0.1, 0.0, 0.0);
        const DqPair einv{u(rng), u(rng)};
        const DqPair vslack{u(rng), u(rng)};
        const double rt = p.series_r();
        const DqPair ig = (1.0 / rt) * (einv - vslack);
        const DqPair via_rl = pcc_voltage_rl(ig, {u(rng), u(rng)}, vslack, w, p);
        const DqPair direct = (1.0 / rt) * (p.rg_dq() * einv + p.rf_dq() * vslack);
        CHECK(std::abs(via_rl.d - direct.d) < 1e-12);
        CHECK(std::abs(via_rl.q - direct.q) < 1e-12);
    }
}

TEST_CASE("balanced parameters collapse to single dq values") {
    const NetworkParams p = NetworkParams::balanced(0.03, 0.07, 1e-4, 2e-4);
    CHECK(p.is_balanced());
    CHECK(p.rf_dq() == 0.03);
    CHECK(p.rg_dq() == 0.07);
    CHECK(p.series_r() == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(p.series_l() == doctest::Approx(3e-4).epsilon(1e-14));

    NetworkParams skew = p;
    skew.rf[1] = 0.04;
    CHECK_FALSE(skew.is_balanced());
}
