#include <doctest.h>

#include <cmath>

#include "ffsm/regressor.hpp"
#include "ffsm/sim.hpp"
#include "test_helpers.hpp"

using namespace ffsm;

namespace {

std::vector<double> flatten(const SimTrace& trace) {
  std::vector<double> v;
  for (const auto& r : trace.rows) {
    v.insert(v.end(), {r.t, r.theta_b, r.omega_b});
    for (int i = 0; i < 3; ++i) v.push_back(r.phi(i));
    for (int i = 0; i < 3; ++i) v.push_back(r.phi_dot_cmd(i));
    for (int i = 0; i < 2; ++i) v.push_back(r.x(i));
    for (int i = 0; i < 2; ++i) v.push_back(r.dx(i));
    for (int i = 0; i < 2; ++i) v.push_back(r.dx_dot(i));
    v.insert(v.end(), {r.s_b, r.s_x(0), r.s_x(1), r.y1, r.y2(0), r.y2(1)});
    for (int i = 0; i < 11; ++i) v.push_back(r.a_d_hat(i));
    for (int i = 0; i < 6; ++i) v.push_back(r.a_k_hat(i));
    v.insert(v.end(), {r.Hb_hat, r.momentum_drift});
  }
  return v;
}

}  // namespace

TEST_CASE("integrate: zero rates leave the pose unchanged") {
  const ModelParams m = test::reference_model();
  const auto coef = generalized_coefficients(m);
  SystemState s = test::reference_initial_state();
  s.omega_b = 0.0;
  s.base_cm_vel.setZero();
  s.phi_dot.setZero();
  const SystemState next =
      integrate(coef, m.total_mass(), s, Vec3::Zero(), MomentumPair{}, 0.002);
  CHECK(next.theta_b == s.theta_b);
  CHECK((next.base_cm_pos - s.base_cm_pos).norm() == 0.0);
  CHECK((next.phi - s.phi).norm() == 0.0);
}

TEST_CASE("integrate: held null-space command disturbs the attitude only at hold order") {
  // The command is reaction-free at the step's start pose; across the held
  // step the pose moves, so the drift is second order in dt and shrinks 4x
  // when dt halves.
  const ModelParams m = test::reference_model();
  const auto coef = generalized_coefficients(m);
  SystemState s = test::reference_initial_state();
  s.omega_b = 0.0;
  s.base_cm_vel.setZero();
  const CouplingMatrices cm = coupling_matrices(m, s);
  const Vec3 cmd = rns_projector(cm.Hbm_bar, 1e-8) * Vec3(0.5, 0.5, 0.5);

  const double drift_full =
      std::abs(integrate(coef, m.total_mass(), s, cmd, MomentumPair{}, 0.002).theta_b -
               s.theta_b);
  const double drift_half =
      std::abs(integrate(coef, m.total_mass(), s, cmd, MomentumPair{}, 0.001).theta_b -
               s.theta_b);
  CHECK(drift_full < 1e-5);
  CHECK(drift_full / drift_half == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("integrate: fourth-order convergence under a smooth held command") {
  const ModelParams m = test::reference_model();
  const auto coef = generalized_coefficients(m);
  SystemState s0 = test::reference_initial_state();
  const Vec3 cmd(1.2, -0.9, 1.0);
  s0.phi_dot = cmd;
  const MomentumPair mom = brute_force_momentum(m, s0);

  const auto propagate = [&](double dt) {
    SystemState s = s0;
    const long n = std::lround(2.0 / dt);
    for (long k = 0; k < n; ++k) s = integrate(coef, m.total_mass(), s, cmd, mom, dt);
    Eigen::Matrix<double, 6, 1> out;
    out << s.theta_b, s.base_cm_pos, s.phi;
    return out;
  };
  const auto s1 = propagate(0.2);
  const auto s2 = propagate(0.1);
  const auto s3 = propagate(0.05);
  const double ratio = (s1 - s2).norm() / (s2 - s3).norm();
  CHECK(ratio > 10.0);
  CHECK(ratio < 30.0);
}

TEST_CASE("integrate: divergence is detected, not propagated") {
  const ModelParams m = test::reference_model();
  const auto coef = generalized_coefficients(m);
  SystemState s = test::reference_initial_state();
  const Vec3 bad(std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0);
  CHECK_THROWS_AS(integrate(coef, m.total_mass(), s, bad, MomentumPair{}, 0.002),
                  NumericalDivergence);
}

TEST_CASE("run: zero duration produces the single initial row") {
  Scenario sc = test::reference_scenario();
  sc.duration = 0.0;
  const SimTrace trace = run(sc);
  CHECK(trace.rows.size() == 1);
  CHECK(trace.rows[0].t == 0.0);
}

TEST_CASE("run: row count and monotone time") {
  Scenario sc = test::reference_scenario();
  sc.duration = 0.5;
  const SimTrace trace = run(sc);
  CHECK(trace.rows.size() == 251);
  for (size_t i = 1; i < trace.rows.size(); ++i)
    CHECK(trace.rows[i].t > trace.rows[i - 1].t);
}

TEST_CASE("run: identical scenarios give bit-identical traces") {
  Scenario sc = test::reference_scenario();
  sc.duration = 1.0;
  const auto a = flatten(run(sc));
  const auto b = flatten(run(sc));
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

TEST_CASE("run: momentum stays conserved along the closed loop") {
  Scenario sc = test::reference_scenario();
  const SimTrace trace = run(sc);  // 10,000 steps
  double worst = 0.0;
  for (const auto& r : trace.rows) worst = std::max(worst, r.momentum_drift);
  CHECK(worst <= 1e-6);
}

TEST_CASE("run: command identities hold at every recorded step") {
  Scenario sc = test::reference_scenario();
  sc.duration = 4.0;
  const SimTrace trace = run(sc);
  for (const auto& r : trace.rows) {
    double Hb = 0.0;
    RowVec3 Hbm;
    coupling_from_dyn(r.a_d_hat.head<10>(), r.phi, Hb, Hbm);
    const double deps = attitude_error(r.theta_b, sc.theta_bd);
    const double rhs_b = r.a_d_hat(10) + Hb * sc.gains.lambda_b * deps;
    CHECK(std::abs(Hbm * r.phi_dot_cmd - rhs_b) <= 1e-10 * std::max(1.0, std::abs(rhs_b)));

    Vec2 Jb_hat;
    Mat2x3 Jm_hat;
    jacobians_from_kin(r.a_k_hat.head<4>(), r.theta_b, r.phi, Jb_hat, Jm_hat);
    const Vec2 rhs_x = sc.trajectory.velocity(r.t) - sc.gains.Lambda_x * r.dx -
                       r.a_k_hat.tail<2>();
    CHECK((Jm_hat * r.phi_dot_cmd - rhs_x).norm() <= 1e-10 * std::max(1.0, rhs_x.norm()));
  }
}

TEST_CASE("run: true-params zero-momenta maneuver leaves the base untouched") {
  Scenario sc = test::zero_reaction_scenario();
  sc.duration = 2.0;  // the acceptance suite runs the full horizon
  const SimTrace trace = run(sc);
  double worst_omega = 0.0, worst_dx = 0.0;
  for (const auto& r : trace.rows) {
    worst_omega = std::max(worst_omega, std::abs(r.omega_b));
    worst_dx = std::max(worst_dx, r.dx.norm());
  }
  CHECK(worst_omega <= 1e-10);
  CHECK(worst_dx <= 1e-5);
}

TEST_CASE("run: adaptation is load-bearing (near-zero gains do not converge)") {
  Scenario adaptive = test::reference_scenario();
  Scenario frozen = adaptive;
  frozen.Gamma_d = 1e-12 * GammaD::Identity();
  frozen.Gamma_k = 1e-12 * GammaK::Identity();

  const SimTrace trace_a = run(adaptive);
  const SimTrace trace_f = run(frozen);
  const auto steady = [](const SimTrace& tr) {
    double sum = 0.0;
    long n = 0;
    const double t_end = tr.rows.back().t;
    for (const auto& r : tr.rows)
      if (r.t >= t_end - 5.0) {
        sum += r.dx.norm();
        ++n;
      }
    return sum / static_cast<double>(n);
  };
  const double adaptive_err = steady(trace_a);
  const double frozen_err = steady(trace_f);
  CHECK(frozen_err > 10.0 * adaptive_err);
  CHECK(frozen_err > 1e-2);
}

TEST_CASE("run: attitude-only law regulates the base with an exploring arm") {
  Scenario sc = test::reference_scenario();
  sc.mode = ControllerMode::AttitudeOnly;
  const SimTrace trace = run(sc);
  const TraceRow& last = trace.rows.back();
  CHECK(std::abs(last.omega_b) < 1e-3);
  CHECK(std::abs(std::remainder(last.theta_b - sc.theta_bd, 2 * M_PI)) < 1e-2);
  // the exploration signal must actually move the arm
  double joint_travel = 0.0;
  for (size_t i = 1; i < trace.rows.size(); ++i)
    joint_travel += (trace.rows[i].phi - trace.rows[i - 1].phi).cwiseAbs().sum();
  CHECK(joint_travel > 0.5);
}

TEST_CASE("run: attitude-only law with the joint-centering exploration signal") {
  Scenario sc = test::reference_scenario();
  sc.mode = ControllerMode::AttitudeOnly;
  sc.exploration.kind = ExplorationSpec::Kind::JointCentering;
  sc.exploration.centering_gain = 0.5;
  sc.exploration.phi_ref = Vec3(0.8, -1.6, 0.8);
  sc.duration = 10.0;
  const SimTrace trace = run(sc);
  const TraceRow& last = trace.rows.back();
  CHECK(std::abs(last.omega_b) < 1e-3);
  CHECK(std::abs(std::remainder(last.theta_b - sc.theta_bd, 2 * M_PI)) < 1e-2);
}

TEST_CASE("run: truth-initialized estimates also satisfy the convergence targets") {
  Scenario sc = test::reference_scenario();
  const MomentumPair mom = brute_force_momentum(sc.model, sc.initial);
  const TrueParams truth = true_params(sc.model, mom);
  sc.a_d_hat0 = truth.dyn;
  sc.a_k_hat0 = truth.kin;
  const SimTrace trace = run(sc);
  const TraceRow& last = trace.rows.back();
  CHECK(std::abs(last.omega_b) < 1e-3);
  CHECK(std::abs(std::remainder(last.theta_b - sc.theta_bd, 2 * M_PI)) < 1e-2);
  CHECK(last.dx.norm() < 5e-3);
  CHECK(last.dx_dot.norm() < 2e-2);
}

TEST_CASE("run: estimate entries stay inside a 10x envelope of their start") {
  Scenario sc = test::reference_scenario();
  const MomentumPair mom = brute_force_momentum(sc.model, sc.initial);
  const TrueParams truth = true_params(sc.model, mom);
  const SimTrace trace = run(sc);
  DynVec env_d = (sc.a_d_hat0 - truth.dyn).cwiseAbs();
  KinVec env_k = (sc.a_k_hat0 - truth.kin).cwiseAbs();
  for (const auto& r : trace.rows) {
    for (int i = 0; i < 11; ++i)
      CHECK(std::abs(r.a_d_hat(i) - truth.dyn(i)) <= 10.0 * std::max(env_d(i), 1.0));
    for (int i = 0; i < 6; ++i)
      CHECK(std::abs(r.a_k_hat(i) - truth.kin(i)) <= 10.0 * std::max(env_k(i), 1.0));
  }
}
