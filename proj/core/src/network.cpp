#include "gflsim/network.hpp"

#include "gflsim/errors.hpp"

#include <cassert>

namespace gflsim {

namespace {

void check_divider(const NetworkParams& p) {
    for (int k = 0; k < 3; ++k) {
        if (p.rf[k] + p.rg[k] <= 0.0) {
            throw DegenerateNetworkError("resistive divider: Rf + Rg must be > 0 on phase " +
                                         std::string(1, char('a' + k)));
        }
    }
}

}  // namespace

AbcTriple pcc_voltage_resistive(const AbcTriple& einv, const AbcTriple& vslack,
                                const NetworkParams& params) {
    check_divider(params);
    AbcTriple v;
    for (int k = 0; k < 3; ++k) {
        v[k] = (einv[k] * params.rg[k] + vslack[k] * params.rf[k]) /
               (params.rg[k] + params.rf[k]);
    }
    return v;
}

AbcTriple line_current_resistive(const AbcTriple& einv, const AbcTriple& vslack,
                                 const NetworkParams& params) {
    check_divider(params);
    AbcTriple i;
    for (int k = 0; k < 3; ++k) {
        i[k] = (einv[k] - vslack[k]) / (params.rg[k] + params.rf[k]);
    }
    return i;
}

DqPair plant_rate_dq(const DqPair& ig, const DqPair& einv, const DqPair& vg,
                     double omega_hat, const NetworkParams& params) {
    const double r = params.series_r();
    const double l = params.series_l();
    assert(l > 0.0);
    return {(-r * ig.d + omega_hat * l * ig.q + einv.d - vg.d) / l,
            (-r * ig.q - omega_hat * l * ig.d + einv.q - vg.q) / l};
}

DqPair pcc_voltage_rl(const DqPair& ig, const DqPair& di_dt, const DqPair& vslack_dq,
                      double omega_hat, const NetworkParams& params) {
    const double rg = params.rg_dq();
    const double lg = params.lg;
    return vslack_dq + rg * ig + lg * di_dt + omega_hat * lg * rot90(ig);
}

}  // namespace gflsim
