#pragma once

#include "ffsm/types.hpp"

namespace ffsm {

struct GuardSettings {
  double h_min = 1.0;   // kg m^2, lower bound kept on the estimated base inertia
  double c_min = 1e-3;  // kg m^2, lower bound kept on the coupling row norm
};

// Gradient-estimator state for both generalized parameter vectors. Owned by
// a single simulation loop; updates are strictly sequential.
class ParamEstimate {
 public:
  ParamEstimate(const DynVec& a_d0, const KinVec& a_k0, const GammaD& Gamma_d,
                const GammaK& Gamma_k, const GuardSettings& guard = {},
                bool freeze_momentum_entries = false);

  // Euler step of a_d_hat <- a_d_hat - dt * Gamma_d * Y_d_bar^T * y1,
  // followed by the clamp guard at the given pose.
  void update_dynamic(const DynRegressor& Y_d_bar, double y1, double dt, const Vec3& phi);
  void update_kinematic(const KinRegressor& Y_k_bar, const Vec2& y2, double dt, const Vec3& phi);

  // Repairs the estimate so the derived base inertia stays >= h_min and the
  // coupling row norm stays >= c_min. Counts every activation.
  void guard(const Vec3& phi);

  const DynVec& a_d_hat() const { return a_d_hat_; }
  const KinVec& a_k_hat() const { return a_k_hat_; }
  void set_estimates(const DynVec& a_d, const KinVec& a_k);

  double p0_hat() const { return a_d_hat_(10); }
  Vec2 v0_hat() const { return a_k_hat_.tail<2>(); }

  long guard_h_count() const { return guard_h_count_; }
  long guard_c_count() const { return guard_c_count_; }
  const GuardSettings& bounds() const { return guard_; }
  bool momentum_entries_frozen() const { return freeze_momentum_; }

 private:
  void apply_freeze_mask(DynVec& delta_d) const;
  void apply_freeze_mask(KinVec& delta_k) const;

  DynVec a_d_hat_;
  KinVec a_k_hat_;
  GammaD Gamma_d_;
  GammaK Gamma_k_;
  GuardSettings guard_;
  bool freeze_momentum_ = false;  // pins p0_hat and v0_hat at zero
  long guard_h_count_ = 0;
  long guard_c_count_ = 0;
  DynVec last_valid_a_d_;  // fallback target for the coupling-norm repair
};

}  // namespace ffsm
