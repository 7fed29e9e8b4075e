#pragma once

#include <optional>
#include <vector>

#include "ffsm/adapt.hpp"
#include "ffsm/control.hpp"
#include "ffsm/model.hpp"
#include "ffsm/types.hpp"

namespace ffsm {

enum class ControllerMode { AttitudeOnly, Full, ZeroMomenta, TrueParams };

const char* to_string(ControllerMode mode);
ControllerMode controller_mode_from_string(const std::string& s);

// Circular reference trajectory x_d(t) = center + radius (cos, sin)(rate t).
struct TrajectorySpec {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;  // m
  double rate = 0.0;    // rad/s

  Vec2 position(double t) const;
  Vec2 velocity(double t) const;
  void validate() const;
};

// Exploration signal used by the attitude-only law, where the component of
// the command inside the reaction null space is free.
struct ExplorationSpec {
  enum class Kind { Sine, JointCentering };
  Kind kind = Kind::Sine;
  Vec3 amplitude = Vec3(0.3, 0.3, 0.3);        // rad/s
  Vec3 frequency_hz = Vec3(0.10, 0.17, 0.23);
  Vec3 phase = Vec3(0.0, 1.0, 2.0);            // rad
  double centering_gain = 1.0;                 // 1/s
  Vec3 phi_ref = Vec3::Zero();                 // rad

  Vec3 zeta(double t, const Vec3& phi) const;
};

struct Scenario {
  ModelParams model;
  SystemState initial;
  GainSet gains;
  DynVec a_d_hat0 = DynVec::Zero();
  KinVec a_k_hat0 = KinVec::Zero();
  GammaD Gamma_d = GammaD::Identity();
  GammaK Gamma_k = GammaK::Identity();
  GuardSettings guard;
  TrajectorySpec trajectory;
  double theta_bd = 0.0;  // rad, constant desired attitude
  double dt = 0.002;      // s
  double duration = 20.0; // s
  ControllerMode mode = ControllerMode::Full;
  ExplorationSpec exploration;

  // Optional expected momentum constants checked by the verification suite.
  std::optional<double> check_p0;
  std::optional<Vec2> check_v0;
  double check_tol = 1e-3;

  void validate() const;
};

struct TraceRow {
  double t = 0.0;
  double theta_b = 0.0;
  double omega_b = 0.0;
  Vec3 phi = Vec3::Zero();
  Vec3 phi_dot_cmd = Vec3::Zero();
  Vec2 x = Vec2::Zero();       // end-effector position
  Vec2 dx = Vec2::Zero();      // tracking error
  Vec2 dx_dot = Vec2::Zero();  // tracking error rate
  double s_b = 0.0;
  Vec2 s_x = Vec2::Zero();
  double y1 = 0.0;
  Vec2 y2 = Vec2::Zero();
  DynVec a_d_hat = DynVec::Zero();
  KinVec a_k_hat = KinVec::Zero();
  double Hb_hat = 0.0;
  double momentum_drift = 0.0;  // relative drift of the conserved momenta
  long guard_h_count = 0;
  long guard_c_count = 0;
};

struct SimTrace {
  std::vector<TraceRow> rows;
  MomentumPair initial_momenta;
  double dt = 0.0;
};

// One zero-order-hold RK4 step of the kinematic states. The command is held
// constant across the step; the base rates are re-resolved from the conserved
// momenta inside every stage. Velocities in the returned state are the
// resolved values at the new pose.
SystemState integrate(const GeneralizedCoefficients& coef, double total_mass,
                      const SystemState& state, const Vec3& phi_dot_cmd,
                      const MomentumPair& momenta, double dt);

// Closed-loop engine under the ideal joint-velocity servo: the commanded
// joint rates are realized exactly, the base follows from momentum
// conservation, and the estimators are updated once per tick after the
// command of that tick.
class SimEngine {
 public:
  explicit SimEngine(const Scenario& scenario);

  // Computes the tick at time t (command, diagnostics, trace row) and
  // advances state and estimators by dt.
  TraceRow step(double t);

  const SystemState& state() const { return state_; }
  const MomentumPair& momenta() const { return momenta_; }
  const ParamEstimate& estimates() const { return estimates_; }

 private:
  Vec3 compute_command(double t, const Vec2& x, ControlOutput& out) const;

  const Scenario scenario_;
  GeneralizedCoefficients coef_;
  double total_mass_ = 0.0;
  MomentumPair momenta_;
  SystemState state_;
  ParamEstimate estimates_;
};

SimTrace run(const Scenario& scenario);

}  // namespace ffsm
