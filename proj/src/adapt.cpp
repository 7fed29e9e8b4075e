#include "ffsm/adapt.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "ffsm/model.hpp"

namespace ffsm {

namespace {

template <typename Mat>
void check_spd(const Mat& G, const char* name) {
  if ((G - G.transpose()).norm() > 1e-12 * (1.0 + G.norm()))
    throw ConfigError(std::string(name) + " must be symmetric");
  Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success)
    throw ConfigError(std::string(name) + " must be positive definite");
}

double base_inertia_of(const DynVec& a_d, const Vec3& phi) {
  double Hb = 0.0;
  RowVec3 Hbm;
  coupling_from_dyn(a_d.head<10>(), phi, Hb, Hbm);
  return Hb;
}

RowVec3 coupling_row_of(const DynVec& a_d, const Vec3& phi) {
  double Hb = 0.0;
  RowVec3 Hbm;
  coupling_from_dyn(a_d.head<10>(), phi, Hb, Hbm);
  return Hbm;
}

}  // namespace

ParamEstimate::ParamEstimate(const DynVec& a_d0, const KinVec& a_k0, const GammaD& Gamma_d,
                             const GammaK& Gamma_k, const GuardSettings& guard,
                             bool freeze_momentum_entries)
    : a_d_hat_(a_d0),
      a_k_hat_(a_k0),
      Gamma_d_(Gamma_d),
      Gamma_k_(Gamma_k),
      guard_(guard),
      freeze_momentum_(freeze_momentum_entries) {
  check_spd(Gamma_d_, "Gamma_d");
  check_spd(Gamma_k_, "Gamma_k");
  if (!(guard_.h_min > 0.0) || !(guard_.c_min > 0.0))
    throw ConfigError("guard bounds must be > 0");
  if (freeze_momentum_) {
    a_d_hat_(10) = 0.0;
    a_k_hat_.tail<2>().setZero();
  }
  last_valid_a_d_ = a_d_hat_;
}

void ParamEstimate::set_estimates(const DynVec& a_d, const KinVec& a_k) {
  a_d_hat_ = a_d;
  a_k_hat_ = a_k;
  last_valid_a_d_ = a_d;
}

void ParamEstimate::apply_freeze_mask(DynVec& delta_d) const {
  if (freeze_momentum_) delta_d(10) = 0.0;
}

void ParamEstimate::apply_freeze_mask(KinVec& delta_k) const {
  if (freeze_momentum_) delta_k.tail<2>().setZero();
}

void ParamEstimate::update_dynamic(const DynRegressor& Y_d_bar, double y1, double dt,
                                   const Vec3& phi) {
  DynVec delta = -dt * (Gamma_d_ * (Y_d_bar.transpose() * y1));
  apply_freeze_mask(delta);
  a_d_hat_ += delta;
  guard(phi);
}

void ParamEstimate::update_kinematic(const KinRegressor& Y_k_bar, const Vec2& y2,
                                     double dt, const Vec3& phi) {
  KinVec delta = -dt * (Gamma_k_ * (Y_k_bar.transpose() * y2));
  apply_freeze_mask(delta);
  a_k_hat_ += delta;
  guard(phi);
}

void ParamEstimate::guard(const Vec3& phi) {
  // Repair loop: each clamp can disturb the other bound, so recheck both.
  for (int pass = 0; pass < 3; ++pass) {
    bool dirty = false;

    // Base-inertia clamp. Hb is linear in the estimate, so the smallest
    // correction restoring Hb = h_min lies along its gradient.
    const double Hb = base_inertia_of(a_d_hat_, phi);
    if (Hb < guard_.h_min) {
      const auto th = link_angles(0.0, phi);
      DynVec grad = DynVec::Zero();
      for (size_t j = 0; j < kSegmentPairs.size(); ++j) {
        const auto [k, l] = kSegmentPairs[j];
        grad(static_cast<int>(j)) = 2.0 * std::cos(th[l] - th[k]);
      }
      grad(6) = 1.0;
      a_d_hat_ += grad * ((guard_.h_min - Hb) / grad.squaredNorm());
      ++guard_h_count_;
      dirty = true;
    }

    // Coupling-row clamp.
    const RowVec3 Hbm = coupling_row_of(a_d_hat_, phi);
    if (Hbm.norm() < guard_.c_min) {
      ++guard_c_count_;
      dirty = true;
      bool repaired = false;
      if (coupling_row_of(last_valid_a_d_, phi).norm() >= guard_.c_min) {
        // smallest blend toward the last valid estimate restoring the norm
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          const DynVec cand = (1.0 - mid) * a_d_hat_ + mid * last_valid_a_d_;
          (coupling_row_of(cand, phi).norm() >= guard_.c_min ? hi : lo) = mid;
        }
        a_d_hat_ = (1.0 - hi) * a_d_hat_ + hi * last_valid_a_d_;
        repaired = coupling_row_of(a_d_hat_, phi).norm() >= guard_.c_min;
      }
      if (!repaired) {
        // Direct repair through the D entries, which enter the coupling row
        // as an identity block and leave Hb untouched.
        RowVec3 dir = coupling_row_of(last_valid_a_d_, phi);
        if (dir.norm() < 1e-12) dir = RowVec3(0.0, 0.0, 1.0);
        const RowVec3 target = guard_.c_min * dir / dir.norm();
        a_d_hat_.segment<3>(7) += (target - Hbm).transpose();
      }
    }

    if (!dirty) break;
  }

  if (base_inertia_of(a_d_hat_, phi) >= guard_.h_min &&
      coupling_row_of(a_d_hat_, phi).norm() >= guard_.c_min) {
    last_valid_a_d_ = a_d_hat_;
  }
}

}  // namespace ffsm
