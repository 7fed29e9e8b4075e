#include "ffsm/regressor.hpp"

#include <cmath>

namespace ffsm {

namespace {
std::array<double, kNumBodies> body_rates(double omega_b, const Vec3& phi_dot) {
  std::array<double, kNumBodies> w;
  w[0] = omega_b;
  for (int i = 1; i < kNumBodies; ++i) w[i] = w[i - 1] + phi_dot(i - 1);
  return w;
}
}  // namespace

DynRegressor dyn_regressor(const SystemState& state) {
  const auto th = link_angles(0.0, state.phi);
  const auto w = body_rates(state.omega_b, state.phi_dot);
  DynRegressor row = DynRegressor::Zero();
  for (size_t j = 0; j < kSegmentPairs.size(); ++j) {
    const auto [k, l] = kSegmentPairs[j];
    row(static_cast<int>(j)) = std::cos(th[l] - th[k]) * (w[k] + w[l]);
  }
  row(6) = state.omega_b;
  row(7) = state.phi_dot(0);
  row(8) = state.phi_dot(1);
  row(9) = state.phi_dot(2);
  row(10) = -1.0;
  return row;
}

KinRegressor kin_regressor(const SystemState& state) {
  const auto th = link_angles(state.theta_b, state.phi);
  const auto w = body_rates(state.omega_b, state.phi_dot);
  KinRegressor Y = KinRegressor::Zero();
  for (int k = 0; k < kNumBodies; ++k) Y.col(k) = w[k] * unit_vec_perp(th[k]);
  Y.block<2, 2>(0, 4).setIdentity();
  return Y;
}

TrueParams true_params(const ModelParams& params, const MomentumPair& momenta) {
  const auto coef = generalized_coefficients(params);
  TrueParams out;
  out.dyn.head<10>() = coef.dyn;
  out.dyn(10) = momenta.angular_about_cm;
  out.kin.head<4>() = coef.kin;
  out.kin.tail<2>() = momenta.linear / params.total_mass();
  return out;
}

}  // namespace ffsm
