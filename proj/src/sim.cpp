#include "ffsm/sim.hpp"

#include <cmath>

#include "ffsm/regressor.hpp"

namespace ffsm {

const char* to_string(ControllerMode mode) {
  switch (mode) {
    case ControllerMode::AttitudeOnly: return "attitude-only";
    case ControllerMode::Full: return "full";
    case ControllerMode::ZeroMomenta: return "zero-momenta";
    case ControllerMode::TrueParams: return "true-params";
  }
  return "?";
}

ControllerMode controller_mode_from_string(const std::string& s) {
  if (s == "attitude-only") return ControllerMode::AttitudeOnly;
  if (s == "full") return ControllerMode::Full;
  if (s == "zero-momenta") return ControllerMode::ZeroMomenta;
  if (s == "true-params") return ControllerMode::TrueParams;
  throw ConfigError("unknown controller mode '" + s + "'");
}

Vec2 TrajectorySpec::position(double t) const {
  return center + radius * Vec2(std::cos(rate * t), std::sin(rate * t));
}

Vec2 TrajectorySpec::velocity(double t) const {
  return radius * rate * Vec2(-std::sin(rate * t), std::cos(rate * t));
}

void TrajectorySpec::validate() const {
  if (radius < 0.0) throw ConfigError("trajectory radius must be >= 0");
  if (!center.allFinite() || !std::isfinite(rate))
    throw ConfigError("trajectory parameters must be finite");
}

Vec3 ExplorationSpec::zeta(double t, const Vec3& phi) const {
  if (kind == Kind::JointCentering) return -centering_gain * (phi - phi_ref);
  Vec3 z;
  for (int i = 0; i < 3; ++i)
    z(i) = amplitude(i) * std::sin(2.0 * M_PI * frequency_hz(i) * t + phase(i));
  return z;
}

void Scenario::validate() const {
  model.validate();
  gains.validate();
  trajectory.validate();
  if (!initial.finite()) throw ConfigError("initial state must be finite");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (duration < 0.0) throw ConfigError("duration must be >= 0");
}

SystemState integrate(const GeneralizedCoefficients& coef, double total_mass,
                      const SystemState& state, const Vec3& phi_dot_cmd,
                      const MomentumPair& momenta, double dt) {
  if (!state.finite() || !phi_dot_cmd.allFinite())
    throw NumericalDivergence("non-finite state or command entering integration");
  struct Rates {
    double theta;
    Vec2 pos;
    Vec3 phi;
  };
  const auto deriv = [&](double theta_b, const Vec3& phi) -> Rates {
    const auto base =
        base_velocity_from_momentum(coef, total_mass, theta_b, phi, phi_dot_cmd, momenta);
    return {base.omega_b, base.base_cm_vel, phi_dot_cmd};
  };

  const Rates k1 = deriv(state.theta_b, state.phi);
  const Rates k2 = deriv(state.theta_b + 0.5 * dt * k1.theta, state.phi + 0.5 * dt * k1.phi);
  const Rates k3 = deriv(state.theta_b + 0.5 * dt * k2.theta, state.phi + 0.5 * dt * k2.phi);
  const Rates k4 = deriv(state.theta_b + dt * k3.theta, state.phi + dt * k3.phi);

  SystemState next = state;
  next.theta_b += dt / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
  next.base_cm_pos += dt / 6.0 * (k1.pos + 2.0 * k2.pos + 2.0 * k3.pos + k4.pos);
  next.phi += dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
  next.phi_dot = phi_dot_cmd;
  const auto base = base_velocity_from_momentum(coef, total_mass, next.theta_b, next.phi,
                                                phi_dot_cmd, momenta);
  next.omega_b = base.omega_b;
  next.base_cm_vel = base.base_cm_vel;
  if (!next.finite()) throw NumericalDivergence("non-finite state after integration step");
  return next;
}

namespace {

const Scenario& validated(const Scenario& sc) {
  sc.validate();
  return sc;
}

ParamEstimate make_estimates(const Scenario& sc, const MomentumPair& momenta) {
  if (sc.mode == ControllerMode::TrueParams) {
    const TrueParams truth = true_params(sc.model, momenta);
    return ParamEstimate(truth.dyn, truth.kin, sc.Gamma_d, sc.Gamma_k, sc.guard, false);
  }
  const bool freeze = sc.mode == ControllerMode::ZeroMomenta;
  return ParamEstimate(sc.a_d_hat0, sc.a_k_hat0, sc.Gamma_d, sc.Gamma_k, sc.guard, freeze);
}

}  // namespace

SimEngine::SimEngine(const Scenario& scenario)
    : scenario_(validated(scenario)),
      coef_(generalized_coefficients(scenario.model)),
      total_mass_(scenario.model.total_mass()),
      momenta_(brute_force_momentum(scenario.model, scenario.initial)),
      state_(scenario.initial),
      estimates_(make_estimates(scenario, momenta_)) {}

TraceRow SimEngine::step(double t) {
  const Vec2 x_d = scenario_.trajectory.position(t);
  const Vec2 x_d_dot = scenario_.trajectory.velocity(t);
  const auto kin = forward_kinematics(scenario_.model, state_);
  const Vec2 x = kin.end_effector;

  // Command from the current pose and estimates, then the ideal servo: the
  // realized joint rates are the commanded ones and the base follows from
  // the conserved momenta of the run (never from the estimates).
  const Vec3 zeta =
      scenario_.mode == ControllerMode::AttitudeOnly
          ? scenario_.exploration.zeta(t, state_.phi)
          : zeta_tracking(state_, estimates_.a_d_hat(), estimates_.a_k_hat(), x, x_d,
                          x_d_dot, scenario_.gains, scenario_.theta_bd);
  ControlOutput out = control_attitude_only(state_, estimates_.a_d_hat(), zeta,
                                            scenario_.gains, scenario_.theta_bd);
  state_.phi_dot = out.phi_dot_cmd;
  const auto base = base_velocity_from_momentum(coef_, total_mass_, state_.theta_b,
                                                state_.phi, state_.phi_dot, momenta_);
  state_.omega_b = base.omega_b;
  state_.base_cm_vel = base.base_cm_vel;

  // Diagnostics at the realized velocities.
  const Vec2 x_dot = chain_velocities(scenario_.model, state_).end_effector_vel;
  const double deps = attitude_error(state_.theta_b, scenario_.theta_bd);
  out.diag.s_b = state_.omega_b + scenario_.gains.lambda_b * deps;
  out.diag.s_x = (x_dot - x_d_dot) + scenario_.gains.Lambda_x * (x - x_d);
  out.diag.y1 = signal_y1(state_, estimates_.a_d_hat(), out.phi_dot_cmd, scenario_.gains,
                          scenario_.theta_bd);
  out.diag.y2 = signal_y2(state_, estimates_.a_k_hat(), out.phi_dot_cmd, x, x_d, x_dot,
                          x_d_dot, scenario_.gains);

  TraceRow row;
  row.t = t;
  row.theta_b = state_.theta_b;
  row.omega_b = state_.omega_b;
  row.phi = state_.phi;
  row.phi_dot_cmd = out.phi_dot_cmd;
  row.x = x;
  row.dx = x - x_d;
  row.dx_dot = x_dot - x_d_dot;
  row.s_b = out.diag.s_b;
  row.s_x = out.diag.s_x;
  row.y1 = out.diag.y1;
  row.y2 = out.diag.y2;
  row.a_d_hat = estimates_.a_d_hat();
  row.a_k_hat = estimates_.a_k_hat();
  {
    double Hb_hat = 0.0;
    RowVec3 Hbm_hat;
    coupling_from_dyn(estimates_.a_d_hat().head<10>(), state_.phi, Hb_hat, Hbm_hat);
    row.Hb_hat = Hb_hat;
  }
  {
    const MomentumPair now = brute_force_momentum(scenario_.model, state_);
    const double scale = std::max({1.0, std::abs(momenta_.angular_about_cm),
                                   momenta_.linear.norm()});
    row.momentum_drift = (std::abs(now.angular_about_cm - momenta_.angular_about_cm) +
                          (now.linear - momenta_.linear).norm()) /
                         scale;
  }

  // Estimators advance only after the tick's command has been issued.
  if (scenario_.mode != ControllerMode::TrueParams) {
    estimates_.update_dynamic(dyn_regressor(state_), out.diag.y1, scenario_.dt, state_.phi);
    if (scenario_.mode != ControllerMode::AttitudeOnly) {
      estimates_.update_kinematic(kin_regressor(state_), out.diag.y2, scenario_.dt,
                                  state_.phi);
    }
  }
  row.guard_h_count = estimates_.guard_h_count();
  row.guard_c_count = estimates_.guard_c_count();

  state_ = integrate(coef_, total_mass_, state_, out.phi_dot_cmd, momenta_, scenario_.dt);
  return row;
}

SimTrace run(const Scenario& scenario) {
  SimEngine engine(scenario);
  SimTrace trace;
  trace.initial_momenta = engine.momenta();
  trace.dt = scenario.dt;
  const long steps = std::lround(scenario.duration / scenario.dt);
  trace.rows.reserve(static_cast<size_t>(steps) + 1);
  for (long k = 0; k <= steps; ++k) {
    try {
      trace.rows.push_back(engine.step(static_cast<double>(k) * scenario.dt));
    } catch (const NumericalDivergence& e) {
      throw NumericalDivergence(std::string(e.what()) + " at t = " +
                                std::to_string(static_cast<double>(k) * scenario.dt));
    }
  }
  return trace;
}

}  // namespace ffsm
