#include "ffsm/verify.hpp"

#include <cmath>
#include <random>

#include "ffsm/regressor.hpp"

namespace ffsm {

namespace {

struct Sampler {
  std::mt19937_64 rng;
  explicit Sampler(uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }

  SystemState state() {
    SystemState s;
    s.theta_b = uniform(-M_PI, M_PI);
    for (int i = 0; i < 3; ++i) s.phi(i) = uniform(-2.0, 2.0);
    s.omega_b = uniform(-1.0, 1.0);
    for (int i = 0; i < 2; ++i) s.base_cm_vel(i) = uniform(-1.0, 1.0);
    for (int i = 0; i < 2; ++i) s.base_cm_pos(i) = uniform(-1.0, 1.0);
    for (int i = 0; i < 3; ++i) s.phi_dot(i) = uniform(-1.0, 1.0);
    return s;
  }

  DynVec dyn_perturbation(double scale) {
    DynVec d;
    for (int i = 0; i < 11; ++i) d(i) = uniform(-scale, scale);
    return d;
  }

  KinVec kin_perturbation(double scale) {
    KinVec d;
    for (int i = 0; i < 6; ++i) d(i) = uniform(-scale, scale);
    return d;
  }
};

}  // namespace

std::vector<CheckResult> run_verification(const Scenario& sc, uint64_t seed) {
  std::vector<CheckResult> results;
  Sampler sampler(seed);
  const ModelParams& model = sc.model;
  const double M = model.total_mass();
  constexpr int kSamples = 1000;

  const auto record = [&](const std::string& name, double residual, double tol) {
    results.push_back({name, residual <= tol, residual, tol});
  };

  // Closed-form coupling matrices against the body-wise momentum oracle.
  {
    double worst_ang = 0.0, worst_lin = 0.0, min_Hb = 1e300;
    for (int i = 0; i < kSamples; ++i) {
      const SystemState s = sampler.state();
      const MomentumPair mom = brute_force_momentum(model, s);
      const CouplingMatrices cm = coupling_matrices(model, s);
      min_Hb = std::min(min_Hb, cm.Hb_bar);
      const double L = cm.Hb_bar * s.omega_b + cm.Hbm_bar * s.phi_dot;
      worst_ang = std::max(worst_ang, std::abs(L - mom.angular_about_cm) /
                                          std::max(1.0, std::abs(mom.angular_about_cm)));
      const Vec2 ee = chain_velocities(model, s).end_effector_vel;
      const Vec2 ee_cf = cm.Jb * s.omega_b + cm.Jm * s.phi_dot + mom.linear / M;
      worst_lin = std::max(worst_lin, (ee_cf - ee).norm() / std::max(1.0, ee.norm()));
    }
    record("angular_coupling_identity", worst_ang, 1e-9);
    record("task_jacobian_identity", worst_lin, 1e-9);
    record("base_inertia_positive", min_Hb > 0.0 ? 0.0 : 1.0, 0.5);
  }

  // Regressors against the oracle with the true generalized parameters.
  {
    double worst_d = 0.0, worst_k = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const SystemState s = sampler.state();
      const MomentumPair mom = brute_force_momentum(model, s);
      const TrueParams truth = true_params(model, mom);
      const double resid_d = dyn_regressor(s) * truth.dyn;  // == L - p0 == 0
      worst_d = std::max(worst_d, std::abs(resid_d) /
                                      std::max(1.0, std::abs(mom.angular_about_cm)));
      const Vec2 ee = chain_velocities(model, s).end_effector_vel;
      const Vec2 resid_k = kin_regressor(s) * truth.kin - ee;
      worst_k = std::max(worst_k, resid_k.norm() / std::max(1.0, ee.norm()));
    }
    record("dyn_regressor_identity", worst_d, 1e-9);
    record("kin_regressor_identity", worst_k, 1e-9);
  }

  // Projector algebra on perturbed coupling rows.
  {
    double worst = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const SystemState s = sampler.state();
      const MomentumPair mom = brute_force_momentum(model, s);
      const DynVec a_d = true_params(model, mom).dyn + sampler.dyn_perturbation(2.0);
      double Hb = 0.0;
      RowVec3 Hbm;
      coupling_from_dyn(a_d.head<10>(), s.phi, Hb, Hbm);
      if (Hbm.norm() <= 1e-6) continue;
      const Mat3 T = rns_projector(Hbm, 1e-8);
      worst = std::max({worst, (T * T - T).norm(), (Hbm * T).norm() / Hbm.norm(),
                        (T - T.transpose()).norm()});
    }
    record("projector_algebra", worst, 1e-12);
  }

  // The command premultiplied by the estimated coupling row reproduces the
  // attitude correction exactly, for arbitrary estimates.
  {
    GainSet gains = sc.gains;
    double worst_b = 0.0, worst_x = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const SystemState s = sampler.state();
      const MomentumPair mom = brute_force_momentum(model, s);
      const TrueParams truth = true_params(model, mom);
      const DynVec a_d = truth.dyn + sampler.dyn_perturbation(2.0);
      const KinVec a_k = truth.kin + sampler.kin_perturbation(0.5);
      const double theta_bd = sampler.uniform(-1.0, 1.0);
      const Vec2 x = forward_kinematics(model, s).end_effector;
      const Vec2 x_d = x + Vec2(sampler.uniform(-0.5, 0.5), sampler.uniform(-0.5, 0.5));
      const Vec2 x_d_dot(sampler.uniform(-1.0, 1.0), sampler.uniform(-1.0, 1.0));

      double Hb = 0.0;
      RowVec3 Hbm;
      coupling_from_dyn(a_d.head<10>(), s.phi, Hb, Hbm);
      const double deps = attitude_error(s.theta_b, theta_bd);
      Vec2 Jb_hat;
      Mat2x3 Jm_hat;
      jacobians_from_kin(a_k.head<4>(), s.theta_b, s.phi, Jb_hat, Jm_hat);

      try {
        const ControlOutput out = control_full(s, a_d, a_k, x, x_d, x_d_dot,
                                               Vec2::Zero(), gains, theta_bd);
        // scale by what actually flows through the premultiplication
        const double flow = out.phi_dot_cmd.norm() + out.zeta.norm();
        const double rhs_b = a_d(10) + Hb * gains.lambda_b * deps;
        worst_b = std::max(worst_b,
                           std::abs(Hbm * out.phi_dot_cmd - rhs_b) /
                               std::max(1.0, std::abs(rhs_b) + Hbm.norm() * flow));
        const Vec2 rhs_x = x_d_dot - gains.Lambda_x * (x - x_d) - a_k.tail<2>();
        worst_x = std::max(worst_x,
                           (Jm_hat * out.phi_dot_cmd - rhs_x).norm() /
                               std::max(1.0, rhs_x.norm() + Jm_hat.norm() * flow));
      } catch (const DynamicSingularity&) {
        // random estimates may land near a singular task map; skip the draw
      }
    }
    record("attitude_command_consistency", worst_b, 1e-12);
    record("tracking_command_consistency", worst_x, 1e-12);
  }

  // Error-signal linearity in the estimation error.
  {
    GainSet gains = sc.gains;
    double worst_1 = 0.0, worst_2 = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      SystemState s = sampler.state();
      MomentumPair mom = brute_force_momentum(model, s);
      const TrueParams truth = true_params(model, mom);
      const DynVec a_d = truth.dyn + sampler.dyn_perturbation(2.0);
      const KinVec a_k = truth.kin + sampler.kin_perturbation(0.5);
      const double theta_bd = sampler.uniform(-1.0, 1.0);
      const Vec2 x = forward_kinematics(model, s).end_effector;
      const Vec2 x_d = x + Vec2(sampler.uniform(-0.5, 0.5), sampler.uniform(-0.5, 0.5));
      const Vec2 x_d_dot(sampler.uniform(-1.0, 1.0), sampler.uniform(-1.0, 1.0));
      const Vec2 x_dot = chain_velocities(model, s).end_effector_vel;

      try {
        const ControlOutput out = control_full(s, a_d, a_k, x, x_d, x_d_dot, x_dot,
                                               gains, theta_bd);
        const double y1 = signal_y1(s, a_d, out.phi_dot_cmd, gains, theta_bd);
        const double y1_lin = dyn_regressor(s) * (a_d - truth.dyn);
        double Hb = 0.0;
        RowVec3 Hbm;
        coupling_from_dyn(a_d.head<10>(), s.phi, Hb, Hbm);
        Vec2 Jb_hat;
        Mat2x3 Jm_hat;
        jacobians_from_kin(a_k.head<4>(), s.theta_b, s.phi, Jb_hat, Jm_hat);
        const double deps = attitude_error(s.theta_b, theta_bd);
        // scaled by the magnitudes flowing through each signal's terms
        const double servo_gap = (s.phi_dot - out.phi_dot_cmd).norm();
        const double scale_1 =
            std::max(1.0, std::abs(Hb) * (std::abs(s.omega_b) +
                                          gains.lambda_b * std::abs(deps)) +
                              Hbm.norm() * servo_gap);
        worst_1 = std::max(worst_1, std::abs(y1 - y1_lin) / scale_1);

        const Vec2 y2 = signal_y2(s, a_k, out.phi_dot_cmd, x, x_d, x_dot, x_d_dot, gains);
        const Vec2 y2_lin = kin_regressor(s) * (a_k - truth.kin);
        const double scale_2 =
            std::max(1.0, (gains.Lambda_x * (x - x_d)).norm() + x_dot.norm() +
                              Jb_hat.norm() * std::abs(s.omega_b) +
                              Jm_hat.norm() * servo_gap);
        worst_2 = std::max(worst_2, (y2 - y2_lin).norm() / scale_2);
      } catch (const DynamicSingularity&) {
      }
    }
    record("dyn_signal_linearity", worst_1, 1e-12);
    record("kin_signal_linearity", worst_2, 1e-12);
  }

  // Momentum round trip: drop the base rates, reconstruct them from the
  // conserved momenta, recover the originals.
  {
    double worst = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const SystemState s = sampler.state();
      const MomentumPair mom = brute_force_momentum(model, s);
      const BaseVelocity base =
          base_velocity_from_momentum(model, s.theta_b, s.phi, s.phi_dot, mom);
      worst = std::max({worst, std::abs(base.omega_b - s.omega_b),
                        (base.base_cm_vel - s.base_cm_vel).norm()});
    }
    record("momentum_round_trip", worst, 1e-10);
  }

  // Expected momentum constants of the scenario's initial state.
  if (sc.check_p0 || sc.check_v0) {
    const MomentumPair mom = brute_force_momentum(model, sc.initial);
    if (sc.check_p0) {
      record("initial_angular_momentum", std::abs(mom.angular_about_cm - *sc.check_p0),
             sc.check_tol);
    }
    if (sc.check_v0) {
      record("initial_cm_velocity", (mom.linear / M - *sc.check_v0).norm(), sc.check_tol);
    }
  }

  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace ffsm
