#pragma once

#include "ffsm/model.hpp"
#include "ffsm/types.hpp"

namespace ffsm {

// True generalized parameter vectors for a model and a given set of
// conserved momenta. Used for validation and the true-params controller
// mode only; the adaptive loop never sees them.
struct TrueParams {
  DynVec dyn;  // [B_kl..., D_0..D_3, p0]
  KinVec kin;  // [g_0..g_3, v0]
};

// Row regressor of the angular momentum equation, [Y_d | -1], such that
// dyn_regressor(state) * a_d_bar(true) == 0 along any momentum-consistent
// trajectory. Entries depend on joint angles and velocities only.
DynRegressor dyn_regressor(const SystemState& state);

// End-effector velocity regressor [Y_k | I2]: kin_regressor(state) *
// a_k_bar(true) equals the end-effector velocity in the inertial frame.
KinRegressor kin_regressor(const SystemState& state);

TrueParams true_params(const ModelParams& params, const MomentumPair& momenta);

}  // namespace ffsm
