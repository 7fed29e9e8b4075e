#pragma once

#include "ffsm/types.hpp"

namespace ffsm {

// Per-body pose of the chain in the inertial frame.
struct ChainKinematics {
  std::array<Vec2, kNumBodies> body_cm;    // CM positions
  std::array<double, kNumBodies> body_angle;  // absolute link angles
  Vec2 end_effector;
};

// Per-body velocities from the analytic recursion (no finite differences).
struct ChainVelocities {
  std::array<Vec2, kNumBodies> body_cm_vel;
  std::array<double, kNumBodies> body_rate;  // omega_b plus joint-rate partial sums
  Vec2 end_effector_vel;
};

// Grouped coefficients of the planar chain. dyn holds the six pair
// coefficients B_kl (segment pairs (0,1),(1,2),(1,3),(2,3),(0,2),(0,3))
// followed by the four cumulative inertia sums D_0..D_3; together they make
// the angular momentum linear in the velocities:
//
//   L = D_0 w_b + sum_t D_t phidot_t + sum_{k<l} B_kl cos(th_l - th_k)(w_k + w_l)
//
// kin holds the lever coefficients g_k of the end-effector velocity relative
// to the system CM, and cm_offset the h_k expansion of (system CM - base CM).
struct GeneralizedCoefficients {
  Eigen::Matrix<double, 10, 1> dyn;
  Vec4 kin;
  Vec4 cm_offset;
};

// Segment pair ordering shared by the dynamic parameter vector, the
// regressor columns and the closed-form coupling matrices.
inline constexpr std::array<std::pair<int, int>, 6> kSegmentPairs = {
    {{0, 1}, {1, 2}, {1, 3}, {2, 3}, {0, 2}, {0, 3}}};

// Absolute angles of the four segments (base mounting arm and three links).
std::array<double, kNumBodies> link_angles(double theta_b, const Vec3& phi);

ChainKinematics forward_kinematics(const ModelParams& params, const SystemState& state);
ChainVelocities chain_velocities(const ModelParams& params, const SystemState& state);

// Body-wise momentum sum. This is the independent oracle the rest of the
// library is tested against: it never touches the grouped coefficients.
MomentumPair brute_force_momentum(const ModelParams& params, const SystemState& state);

GeneralizedCoefficients generalized_coefficients(const ModelParams& params);

// Closed-form coupling quantities from an arbitrary grouped dynamic vector
// (true coefficients or an estimate). Only joint angles enter: the planar
// angular momentum is invariant under rotations of the inertial frame.
void coupling_from_dyn(const Eigen::Matrix<double, 10, 1>& dyn, const Vec3& phi,
                       double& Hb_bar, RowVec3& Hbm_bar);

// Generalized Jacobians from an arbitrary lever-coefficient vector.
void jacobians_from_kin(const Vec4& kin, double theta_b, const Vec3& phi,
                        Vec2& Jb, Mat2x3& Jm);

CouplingMatrices coupling_matrices(const ModelParams& params, const SystemState& state);

struct BaseVelocity {
  double omega_b = 0.0;
  Vec2 base_cm_vel = Vec2::Zero();
};

// Resolves the base rates implied by momentum conservation at the given pose
// and joint rates. Throws NonpositiveBaseInertia if the (estimated or true)
// base inertia has collapsed.
BaseVelocity base_velocity_from_momentum(const GeneralizedCoefficients& coef,
                                         double total_mass, double theta_b,
                                         const Vec3& phi, const Vec3& phi_dot,
                                         const MomentumPair& momenta);
BaseVelocity base_velocity_from_momentum(const ModelParams& params, double theta_b,
                                         const Vec3& phi, const Vec3& phi_dot,
                                         const MomentumPair& momenta);

}  // namespace ffsm
