#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>

namespace ffsm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using RowVec3 = Eigen::RowVector3d;
using Mat2x3 = Eigen::Matrix<double, 2, 3>;
using Mat3x2 = Eigen::Matrix<double, 3, 2>;

// Generalized dynamic parameter vector: six pair coefficients, four
// cumulative inertia sums, and the initial angular momentum appended last.
using DynVec = Eigen::Matrix<double, 11, 1>;
// Generalized kinematic parameter vector: four lever coefficients plus the
// system CM velocity appended last.
using KinVec = Eigen::Matrix<double, 6, 1>;

using DynRegressor = Eigen::Matrix<double, 1, 11>;
using KinRegressor = Eigen::Matrix<double, 2, 6>;
using GammaD = Eigen::Matrix<double, 11, 11>;
using GammaK = Eigen::Matrix<double, 6, 6>;

inline constexpr int kNumBodies = 4;  // spacecraft + 3 links
inline constexpr int kNumJoints = 3;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonpositiveBaseInertia : std::runtime_error {
  explicit NonpositiveBaseInertia(const std::string& msg) : std::runtime_error(msg) {}
};

struct RankDeficientCoupling : std::runtime_error {
  explicit RankDeficientCoupling(const std::string& msg) : std::runtime_error(msg) {}
};

struct DynamicSingularity : std::runtime_error {
  explicit DynamicSingularity(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalDivergence : std::runtime_error {
  explicit NumericalDivergence(const std::string& msg) : std::runtime_error(msg) {}
};

// One rigid body of the planar chain. l is the distance from the inboard
// joint to the body CM along the link axis, r from the CM to the outboard
// joint. For the spacecraft (body 0) only r is used: it locates joint 1
// relative to the spacecraft CM.
struct BodyParams {
  double mass = 0.0;        // kg
  double inertia_cm = 0.0;  // kg m^2, about own CM
  double l = 0.0;           // m
  double r = 0.0;           // m

  void validate() const {
    if (!(mass > 0.0)) throw ConfigError("body mass must be > 0");
    if (!(inertia_cm > 0.0)) throw ConfigError("body inertia must be > 0");
    if (l < 0.0 || r < 0.0) throw ConfigError("body l/r must be >= 0");
  }
};

struct ModelParams {
  std::array<BodyParams, kNumBodies> bodies;

  double total_mass() const {
    double m = 0.0;
    for (const auto& b : bodies) m += b.mass;
    return m;
  }

  void validate() const {
    for (const auto& b : bodies) b.validate();
    if (!(total_mass() > 0.0)) throw ConfigError("total mass must be > 0");
  }
};

// Full kinematic state. theta_b is kept unwrapped during integration;
// wrapping is applied only when reporting attitude errors.
struct SystemState {
  double theta_b = 0.0;           // rad, spacecraft attitude
  Vec2 base_cm_pos = Vec2::Zero();  // m, spacecraft CM in the inertial frame
  Vec3 phi = Vec3::Zero();        // rad, joint angles
  double omega_b = 0.0;           // rad/s
  Vec2 base_cm_vel = Vec2::Zero();  // m/s
  Vec3 phi_dot = Vec3::Zero();    // rad/s

  bool finite() const {
    return std::isfinite(theta_b) && base_cm_pos.allFinite() && phi.allFinite() &&
           std::isfinite(omega_b) && base_cm_vel.allFinite() && phi_dot.allFinite();
  }
};

// Planar reduction of the momentum-level coupling matrices: Hb_bar and
// Hbm_bar map base/joint rates to angular momentum about the system CM,
// Jb/Jm map them to the end-effector velocity relative to the CM velocity.
struct CouplingMatrices {
  double Hb_bar = 0.0;              // kg m^2
  RowVec3 Hbm_bar = RowVec3::Zero();  // kg m^2
  Vec2 Jb = Vec2::Zero();           // m
  Mat2x3 Jm = Mat2x3::Zero();       // m
};

// Conserved momenta of a free-floating run. angular_about_cm is the scalar
// planar angular momentum taken about the (moving) system CM.
struct MomentumPair {
  Vec2 linear = Vec2::Zero();     // kg m/s
  double angular_about_cm = 0.0;  // kg m^2/s
};

inline Vec2 unit_vec(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline Vec2 unit_vec_perp(double angle) { return {-std::sin(angle), std::cos(angle)}; }

// z-component of the planar cross product
inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace ffsm
