#include "ffsm/model.hpp"

#include <cmath>

namespace ffsm {

namespace {
constexpr double kBaseInertiaTol = 1e-9;

// Length of segment k inside the chain span from body i to body j (i < j).
// Segment k is the piece of body k lying on the path between the two CMs.
double segment_coeff(const ModelParams& p, int k, int i, int j) {
  if (k == i) return p.bodies[k].r;
  if (k == j) return p.bodies[k].l;
  return p.bodies[k].l + p.bodies[k].r;
}
}  // namespace

std::array<double, kNumBodies> link_angles(double theta_b, const Vec3& phi) {
  std::array<double, kNumBodies> th;
  th[0] = theta_b;
  for (int i = 1; i < kNumBodies; ++i) th[i] = th[i - 1] + phi(i - 1);
  return th;
}

ChainKinematics forward_kinematics(const ModelParams& params, const SystemState& state) {
  ChainKinematics out;
  const auto th = link_angles(state.theta_b, state.phi);
  out.body_angle = th;
  out.body_cm[0] = state.base_cm_pos;
  Vec2 joint = state.base_cm_pos + params.bodies[0].r * unit_vec(th[0]);
  for (int i = 1; i < kNumBodies; ++i) {
    out.body_cm[i] = joint + params.bodies[i].l * unit_vec(th[i]);
    joint = out.body_cm[i] + params.bodies[i].r * unit_vec(th[i]);
  }
  out.end_effector = joint;
  return out;
}

ChainVelocities chain_velocities(const ModelParams& params, const SystemState& state) {
  ChainVelocities out;
  const auto th = link_angles(state.theta_b, state.phi);
  out.body_rate[0] = state.omega_b;
  out.body_cm_vel[0] = state.base_cm_vel;
  Vec2 joint_vel =
      state.base_cm_vel + state.omega_b * params.bodies[0].r * unit_vec_perp(th[0]);
  double rate = state.omega_b;
  for (int i = 1; i < kNumBodies; ++i) {
    rate += state.phi_dot(i - 1);
    out.body_rate[i] = rate;
    out.body_cm_vel[i] = joint_vel + rate * params.bodies[i].l * unit_vec_perp(th[i]);
    joint_vel = out.body_cm_vel[i] + rate * params.bodies[i].r * unit_vec_perp(th[i]);
  }
  out.end_effector_vel = joint_vel;
  return out;
}

MomentumPair brute_force_momentum(const ModelParams& params, const SystemState& state) {
  const auto kin = forward_kinematics(params, state);
  const auto vel = chain_velocities(params, state);
  MomentumPair out;
  double total_mass = 0.0;
  Vec2 weighted_cm = Vec2::Zero();
  for (int i = 0; i < kNumBodies; ++i) {
    const double m = params.bodies[i].mass;
    total_mass += m;
    weighted_cm += m * kin.body_cm[i];
    out.linear += m * vel.body_cm_vel[i];
  }
  const Vec2 system_cm = weighted_cm / total_mass;
  for (int i = 0; i < kNumBodies; ++i) {
    out.angular_about_cm += params.bodies[i].inertia_cm * vel.body_rate[i] +
                            params.bodies[i].mass *
                                cross2(kin.body_cm[i] - system_cm, vel.body_cm_vel[i]);
  }
  return out;
}

GeneralizedCoefficients generalized_coefficients(const ModelParams& params) {
  GeneralizedCoefficients out;
  const double M = params.total_mass();

  // Pair coefficients from the two-body decomposition of the angular
  // momentum about the system CM: sum over body pairs (i, j) of
  // m_i m_j / M times the product of the segment lengths inside the span.
  Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
  for (int k = 0; k < kNumBodies; ++k) {
    for (int l = k; l < kNumBodies; ++l) {
      double sum = 0.0;
      for (int i = 0; i <= k; ++i) {
        for (int j = std::max(l, i + 1); j < kNumBodies; ++j) {
          sum += params.bodies[i].mass * params.bodies[j].mass / M *
                 segment_coeff(params, k, i, j) * segment_coeff(params, l, i, j);
        }
      }
      K(k, l) = sum;
    }
  }
  Vec4 A;  // per-segment effective inertia
  for (int k = 0; k < kNumBodies; ++k) A(k) = params.bodies[k].inertia_cm + K(k, k);
  for (size_t j = 0; j < kSegmentPairs.size(); ++j) {
    out.dyn(static_cast<int>(j)) = K(kSegmentPairs[j].first, kSegmentPairs[j].second);
  }
  for (int t = 0; t < kNumBodies; ++t) {
    double d = 0.0;
    for (int k = t; k < kNumBodies; ++k) d += A(k);
    out.dyn(6 + t) = d;
  }

  // cm_offset h_k: expansion of (system CM - base CM) over the segment
  // directions; kin g_k: the same expansion subtracted from the end-effector
  // path, i.e. the effective lever of segment k on the end-effector motion
  // relative to the system CM.
  out.cm_offset(0) = (M - params.bodies[0].mass) * params.bodies[0].r / M;
  out.kin(0) = params.bodies[0].mass * params.bodies[0].r / M;
  for (int k = 1; k < kNumBodies; ++k) {
    double outboard_mass = 0.0;
    for (int j = k + 1; j < kNumBodies; ++j) outboard_mass += params.bodies[j].mass;
    const double seg = params.bodies[k].l + params.bodies[k].r;
    out.cm_offset(k) = (params.bodies[k].mass * params.bodies[k].l + outboard_mass * seg) / M;
    out.kin(k) = seg - out.cm_offset(k);
  }
  return out;
}

void coupling_from_dyn(const Eigen::Matrix<double, 10, 1>& dyn, const Vec3& phi,
                       double& Hb_bar, RowVec3& Hbm_bar) {
  const auto th = link_angles(0.0, phi);  // only angle differences enter
  Hb_bar = dyn(6);
  Hbm_bar = RowVec3(dyn(7), dyn(8), dyn(9));
  for (size_t j = 0; j < kSegmentPairs.size(); ++j) {
    const auto [k, l] = kSegmentPairs[j];
    const double bc = dyn(static_cast<int>(j)) * std::cos(th[l] - th[k]);
    Hb_bar += 2.0 * bc;
    for (int t = 1; t < kNumBodies; ++t) {
      Hbm_bar(t - 1) += bc * ((k >= t ? 1.0 : 0.0) + (l >= t ? 1.0 : 0.0));
    }
  }
}

void jacobians_from_kin(const Vec4& kin, double theta_b, const Vec3& phi,
                        Vec2& Jb, Mat2x3& Jm) {
  const auto th = link_angles(theta_b, phi);
  Jb.setZero();
  Jm.setZero();
  for (int k = kNumBodies - 1; k >= 0; --k) {
    const Vec2 lever = kin(k) * unit_vec_perp(th[k]);
    Jb += lever;
    if (k >= 1) {
      // segment k moves with every joint up to and including joint k
      for (int t = 1; t <= k; ++t) Jm.col(t - 1) += lever;
    }
  }
}

CouplingMatrices coupling_matrices(const ModelParams& params, const SystemState& state) {
  const auto coef = generalized_coefficients(params);
  CouplingMatrices out;
  coupling_from_dyn(coef.dyn, state.phi, out.Hb_bar, out.Hbm_bar);
  jacobians_from_kin(coef.kin, state.theta_b, state.phi, out.Jb, out.Jm);
  return out;
}

BaseVelocity base_velocity_from_momentum(const GeneralizedCoefficients& coef,
                                         double total_mass, double theta_b,
                                         const Vec3& phi, const Vec3& phi_dot,
                                         const MomentumPair& momenta) {
  double Hb = 0.0;
  RowVec3 Hbm;
  coupling_from_dyn(coef.dyn, phi, Hb, Hbm);
  if (!std::isfinite(Hb)) {
    throw NumericalDivergence("non-finite base inertia during base resolution");
  }
  if (!(Hb > kBaseInertiaTol)) {
    throw NonpositiveBaseInertia("base inertia " + std::to_string(Hb) +
                                 " not positive, model is corrupted");
  }
  BaseVelocity out;
  out.omega_b = (momenta.angular_about_cm - Hbm * phi_dot) / Hb;

  // v_cm = v_base + sum_k h_k w_k u_perp(th_k); invert for the base velocity.
  const auto th = link_angles(theta_b, phi);
  Vec2 relative = Vec2::Zero();
  double rate = out.omega_b;
  relative += coef.cm_offset(0) * rate * unit_vec_perp(th[0]);
  for (int k = 1; k < kNumBodies; ++k) {
    rate += phi_dot(k - 1);
    relative += coef.cm_offset(k) * rate * unit_vec_perp(th[k]);
  }
  out.base_cm_vel = momenta.linear / total_mass - relative;
  return out;
}

BaseVelocity base_velocity_from_momentum(const ModelParams& params, double theta_b,
                                         const Vec3& phi, const Vec3& phi_dot,
                                         const MomentumPair& momenta) {
  return base_velocity_from_momentum(generalized_coefficients(params),
                                     params.total_mass(), theta_b, phi, phi_dot, momenta);
}

}  // namespace ffsm
