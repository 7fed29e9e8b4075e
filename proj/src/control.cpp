#include "ffsm/control.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ffsm {

void GainSet::validate() const {
  if (!(lambda_b > 0.0)) throw ConfigError("lambda_b must be > 0");
  if (!(rank_tol > 0.0)) throw ConfigError("rank_tol must be > 0");
  if ((Lambda_x - Lambda_x.transpose()).norm() > 1e-12 * (1.0 + Lambda_x.norm()))
    throw ConfigError("Lambda_x must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> es(Lambda_x);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw ConfigError("Lambda_x must be positive definite");
}

double attitude_error(double theta_b, double theta_bd) {
  return std::sin(0.5 * (theta_b - theta_bd));
}

namespace {

Vec3 coupling_row_pinv(const RowVec3& Hbm_hat, double rank_tol) {
  const double nrm2 = Hbm_hat.squaredNorm();
  if (!(std::sqrt(nrm2) > rank_tol)) {
    throw RankDeficientCoupling("coupling row norm " + std::to_string(std::sqrt(nrm2)) +
                                " below rank tolerance, estimator collapsed");
  }
  return Hbm_hat.transpose() / nrm2;
}

struct HattedDyn {
  double Hb;
  RowVec3 Hbm;
  Vec3 Hbm_pinv;
  Mat3 T;
};

HattedDyn hatted_dyn(const DynVec& a_d_hat, const Vec3& phi, double rank_tol) {
  HattedDyn h;
  coupling_from_dyn(a_d_hat.head<10>(), phi, h.Hb, h.Hbm);
  h.Hbm_pinv = coupling_row_pinv(h.Hbm, rank_tol);
  h.T = Mat3::Identity() - h.Hbm_pinv * h.Hbm;
  return h;
}

}  // namespace

Mat3 rns_projector(const RowVec3& Hbm_hat, double rank_tol) {
  const Vec3 pinv = coupling_row_pinv(Hbm_hat, rank_tol);
  return Mat3::Identity() - pinv * Hbm_hat;
}

Mat3x2 pinv_task(const Mat2x3& A, double rank_tol) {
  Eigen::JacobiSVD<Mat2x3> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(1) > rank_tol * sv(0))) {
    throw DynamicSingularity("task matrix singular values " + std::to_string(sv(0)) +
                             ", " + std::to_string(sv(1)) + " rank deficient");
  }
  Eigen::Matrix<double, 3, 2> pinv = Eigen::Matrix<double, 3, 2>::Zero();
  // V * S^-1 * U^T restricted to the two retained directions
  for (int i = 0; i < 2; ++i) {
    pinv += svd.matrixV().col(i) * (1.0 / sv(i)) * svd.matrixU().col(i).transpose();
  }
  return pinv;
}

ControlOutput control_attitude_only(const SystemState& state, const DynVec& a_d_hat,
                                    const Vec3& zeta, const GainSet& gains,
                                    double theta_bd) {
  const auto h = hatted_dyn(a_d_hat, state.phi, gains.rank_tol);
  const double deps = attitude_error(state.theta_b, theta_bd);
  const Vec3 correction = h.Hbm_pinv * (a_d_hat(10) + h.Hb * gains.lambda_b * deps);

  ControlOutput out;
  out.zeta = zeta;
  out.phi_dot_cmd = h.T * zeta + correction;
  out.diag.s_b = state.omega_b + gains.lambda_b * deps;
  out.diag.y1 = h.Hb * out.diag.s_b + h.Hbm * (state.phi_dot - out.phi_dot_cmd);
  return out;
}

Vec3 zeta_tracking(const SystemState& state, const DynVec& a_d_hat,
                   const KinVec& a_k_hat, const Vec2& x, const Vec2& x_d,
                   const Vec2& x_d_dot, const GainSet& gains, double theta_bd) {
  const auto h = hatted_dyn(a_d_hat, state.phi, gains.rank_tol);
  const double deps = attitude_error(state.theta_b, theta_bd);
  const Vec3 correction = h.Hbm_pinv * (a_d_hat(10) + h.Hb * gains.lambda_b * deps);

  Vec2 Jb_hat;
  Mat2x3 Jm_hat;
  jacobians_from_kin(a_k_hat.head<4>(), state.theta_b, state.phi, Jb_hat, Jm_hat);
  const Mat2x3 task = Jm_hat * h.T;
  const Vec2 rhs = -a_k_hat.tail<2>() + x_d_dot - gains.Lambda_x * (x - x_d) -
                   Jm_hat * correction;
  return pinv_task(task, gains.rank_tol) * rhs;
}

ControlOutput control_full(const SystemState& state, const DynVec& a_d_hat,
                           const KinVec& a_k_hat, const Vec2& x, const Vec2& x_d,
                           const Vec2& x_d_dot, const Vec2& x_dot,
                           const GainSet& gains, double theta_bd) {
  const Vec3 zeta =
      zeta_tracking(state, a_d_hat, a_k_hat, x, x_d, x_d_dot, gains, theta_bd);
  ControlOutput out = control_attitude_only(state, a_d_hat, zeta, gains, theta_bd);

  Vec2 Jb_hat;
  Mat2x3 Jm_hat;
  jacobians_from_kin(a_k_hat.head<4>(), state.theta_b, state.phi, Jb_hat, Jm_hat);
  const Vec2 dx = x - x_d;
  const Vec2 dx_dot = x_dot - x_d_dot;
  out.diag.s_x = dx_dot + gains.Lambda_x * dx;
  out.diag.y2 = Jb_hat * state.omega_b + Jm_hat * (state.phi_dot - out.phi_dot_cmd) -
                out.diag.s_x;
  return out;
}

double signal_y1(const SystemState& state, const DynVec& a_d_hat,
                 const Vec3& phi_dot_cmd, const GainSet& gains, double theta_bd) {
  double Hb_hat = 0.0;
  RowVec3 Hbm_hat;
  coupling_from_dyn(a_d_hat.head<10>(), state.phi, Hb_hat, Hbm_hat);
  const double deps = attitude_error(state.theta_b, theta_bd);
  return Hb_hat * (state.omega_b + gains.lambda_b * deps) +
         Hbm_hat * (state.phi_dot - phi_dot_cmd);
}

Vec2 signal_y2(const SystemState& state, const KinVec& a_k_hat,
               const Vec3& phi_dot_cmd, const Vec2& x, const Vec2& x_d,
               const Vec2& x_dot, const Vec2& x_d_dot, const GainSet& gains) {
  Vec2 Jb_hat;
  Mat2x3 Jm_hat;
  jacobians_from_kin(a_k_hat.head<4>(), state.theta_b, state.phi, Jb_hat, Jm_hat);
  const Vec2 s_x = (x_dot - x_d_dot) + gains.Lambda_x * (x - x_d);
  return Jb_hat * state.omega_b + Jm_hat * (state.phi_dot - phi_dot_cmd) - s_x;
}

}  // namespace ffsm
