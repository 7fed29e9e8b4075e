#pragma once

#include "ffsm/model.hpp"
#include "ffsm/types.hpp"

namespace ffsm {

struct GainSet {
  double lambda_b = 60.0;          // 1/s, attitude gain
  Mat2 Lambda_x = 20.0 * Mat2::Identity();  // 1/s, tracking gain, SPD
  double rank_tol = 1e-8;          // relative pseudoinverse threshold

  void validate() const;
};

struct ControlDiagnostics {
  double s_b = 0.0;         // attitude sliding variable
  Vec2 s_x = Vec2::Zero();  // tracking sliding variable
  double y1 = 0.0;          // measurable dynamic error signal
  Vec2 y2 = Vec2::Zero();   // measurable kinematic error signal
};

struct ControlOutput {
  Vec3 phi_dot_cmd = Vec3::Zero();
  Vec3 zeta = Vec3::Zero();
  ControlDiagnostics diag;
};

// Vector part (z-component) of the planar error quaternion between the
// current and desired attitude: sin((theta_b - theta_bd)/2).
double attitude_error(double theta_b, double theta_bd);

// Projector onto the null space of the 1x3 coupling row,
// T = I - Hbm^+ Hbm. Joint rates in this subspace leave the base
// angular momentum contribution untouched.
Mat3 rns_projector(const RowVec3& Hbm_hat, double rank_tol);

// SVD pseudoinverse with singular values below rank_tol * sigma_max
// treated as zero. Throws DynamicSingularity when the matrix loses row rank.
Mat3x2 pinv_task(const Mat2x3& A, double rank_tol);

// Attitude-regulation law: phi_dot = T zeta + Hbm^+ (p0_hat + Hb lambda deps).
// All hatted quantities come from the estimate vectors, never the true model.
ControlOutput control_attitude_only(const SystemState& state, const DynVec& a_d_hat,
                                    const Vec3& zeta, const GainSet& gains,
                                    double theta_bd);

// Task-space choice of zeta that layers end-effector tracking on top of the
// attitude law.
Vec3 zeta_tracking(const SystemState& state, const DynVec& a_d_hat,
                   const KinVec& a_k_hat, const Vec2& x, const Vec2& x_d,
                   const Vec2& x_d_dot, const GainSet& gains, double theta_bd);

// Combined law with populated diagnostics. x_dot is the measured
// end-effector velocity (needed for s_x and y2).
ControlOutput control_full(const SystemState& state, const DynVec& a_d_hat,
                           const KinVec& a_k_hat, const Vec2& x, const Vec2& x_d,
                           const Vec2& x_d_dot, const Vec2& x_dot,
                           const GainSet& gains, double theta_bd);

// y1 = Hb_hat (omega_b + lambda_b deps) + Hbm_hat (phi_dot - phi_dot_cmd).
// Equals the dynamic regressor times the estimation error whenever the
// command satisfies the attitude consistency identity.
double signal_y1(const SystemState& state, const DynVec& a_d_hat,
                 const Vec3& phi_dot_cmd, const GainSet& gains, double theta_bd);

// y2 = Jb_hat omega_b + Jm_hat (phi_dot - phi_dot_cmd) - (dx_dot + Lambda_x dx).
Vec2 signal_y2(const SystemState& state, const KinVec& a_k_hat,
               const Vec3& phi_dot_cmd, const Vec2& x, const Vec2& x_d,
               const Vec2& x_dot, const Vec2& x_d_dot, const GainSet& gains);

}  // namespace ffsm
