#pragma once

#include "gflsim/frames.hpp"

#include <array>

namespace gflsim {

/// Filter and line impedances, per-unit. Resistances are stored per phase
/// (the resistive-mode equations are written per phase); inductances are the
/// dq-frame values. Balanced parameters are required: equal per-phase
/// resistances collapse to the same dq value.
struct NetworkParams {
    std::array<double, 3> rf{{0.0, 0.0, 0.0}};
    std::array<double, 3> rg{{0.0, 0.0, 0.0}};
    double lf = 0.0;  // pu * s
    double lg = 0.0;

    // Reactances at nominal frequency as configured (X = omega * L, pu).
    // Kept verbatim so a serialized config reparses to the identical lf/lg;
    // negative means the params were built directly rather than parsed.
    double xf_pu = -1.0;
    double xg_pu = -1.0;

    static NetworkParams balanced(double rf_pu, double rg_pu, double lf_pus, double lg_pus) {
        NetworkParams p;
        p.rf = {rf_pu, rf_pu, rf_pu};
        p.rg = {rg_pu, rg_pu, rg_pu};
        p.lf = lf_pus;
        p.lg = lg_pus;
        return p;
    }

    bool is_balanced() const {
        return rf[0] == rf[1] && rf[1] == rf[2] && rg[0] == rg[1] && rg[1] == rg[2];
    }

    // dq-frame values, valid once balance has been validated.
    double rf_dq() const { return rf[0]; }
    double rg_dq() const { return rg[0]; }
    double series_r() const { return rf_dq() + rg_dq(); }
    double series_l() const { return lf + lg; }
};

/// PCC voltage of the purely resistive divider, per phase:
///   v_g = (e_inv * Rg + v_slack * Rf) / (Rg + Rf).
/// Throws DegenerateNetworkError when Rg + Rf vanishes on some phase.
AbcTriple pcc_voltage_resistive(const AbcTriple& einv, const AbcTriple& vslack,
                                const NetworkParams& params);

/// Line current of the resistive design, per phase:
///   i_g = (e_inv - v_slack) / (Rg + Rf).
AbcTriple line_current_resistive(const AbcTriple& einv, const AbcTriple& vslack,
                                 const NetworkParams& params);

/// Series R-L current derivative in the rotating frame:
///   di_d/dt = (-R i_d + omega_hat L i_q + einv_d - vg_d) / L
///   di_q/dt = (-R i_q - omega_hat L i_d + einv_q - vg_q) / L
/// with (R, L) the series totals of the topology. When the series totals are
/// used, the far-end voltage vg is the slack source.
DqPair plant_rate_dq(const DqPair& ig, const DqPair& einv, const DqPair& vg,
                     double omega_hat, const NetworkParams& params);

/// Algebraic recovery of the PCC voltage between the series elements:
///   v_g = v_slack + Rg i + Lg di/dt + omega_hat Lg J i.
DqPair pcc_voltage_rl(const DqPair& ig, const DqPair& di_dt, const DqPair& vslack_dq,
                      double omega_hat, const NetworkParams& params);

}  // namespace gflsim
