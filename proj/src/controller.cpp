#include "neucf/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

namespace neucf {

PolicyProblem PolicyProblem::reach(const Vec2& target, int T, double dt, const CostWeights& w) {
  PolicyProblem p;
  p.dt = dt;
  p.T = T;
  p.target = target;
  p.A.topRightCorner<2, 2>() = dt * Mat2::Identity();
  p.B.topRows<2>() = dt * dt * Mat2::Identity();
  p.B.bottomRows<2>() = dt * Mat2::Identity();
  p.Qp = w.q_p * Mat2::Identity();
  p.Qv.bottomRightCorner<2, 2>() = w.q_v * Mat2::Identity();
  p.R = w.r * Mat2::Identity();
  p.D.leftCols<2>() = Mat2::Identity();
  return p;
}

namespace {

template <typename M>
bool symmetric(const M& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

template <typename M>
double min_eig(const M& m) {
  return Eigen::SelfAdjointEigenSolver<M>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

void PolicyProblem::validate() const {
  auto fail = [](const std::string& m) { throw InvalidParameter("policy problem: " + m); };
  if (T < 2) fail("horizon T must be at least 2");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!symmetric(Qp) || !symmetric(Qv) || !symmetric(R)) fail("cost matrices must be symmetric");
  if (min_eig(Qp) < -1e-12 || min_eig(Qv) < -1e-12) fail("terminal costs must be positive semidefinite");
  if (!(min_eig(R) > 0.0)) fail("R must be positive definite");
}

GainSchedule::GainSchedule(const PolicyProblem& prob, int max_steps_to_go) : dt_(prob.dt) {
  if (max_steps_to_go < 1) throw InvalidParameter("gain schedule needs at least one step");
  const int n = max_steps_to_go;
  L_.resize(n + 1, Mat24::Zero());
  G_.resize(n + 1, Mat2::Zero());
  P_.resize(n + 1);
  M_.resize(n + 1);
  C_.resize(n + 1);

  const Mat4& A = prob.A;
  const Mat42& B = prob.B;
  P_[0] = prob.D.transpose() * prob.Qp * prob.D + prob.Qv;
  M_[0] = prob.D.transpose() * prob.Qp;
  C_[0] = prob.Qp;

  for (int k = 1; k <= n; ++k) {
    const Mat4& P = P_[k - 1];
    const Mat2 S = prob.R + B.transpose() * P * B;
    const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Mat2>(S, Eigen::EigenvaluesOnly).eigenvalues();
    if (!(ev.minCoeff() > 0.0) || ev.maxCoeff() / ev.minCoeff() > 1e12) {
      throw IllConditioned("Riccati step " + std::to_string(k) + " is ill-conditioned");
    }
    const Eigen::LLT<Mat2> llt(S);
    L_[k] = llt.solve(B.transpose() * P * A);
    G_[k] = llt.solve(B.transpose() * M_[k - 1]);
    const Mat4 Acl = A - B * L_[k];
    Mat4 Pn = A.transpose() * P * Acl;
    P_[k] = 0.5 * (Pn + Pn.transpose());
    M_[k] = Acl.transpose() * M_[k - 1];
    C_[k] = C_[k - 1] - G_[k].transpose() * S * G_[k];
    if (!P_[k].allFinite() || !L_[k].allFinite()) {
      throw IllConditioned("Riccati step " + std::to_string(k) + " produced non-finite values");
    }
  }
}

ReachPolicy::ReachPolicy(std::shared_ptr<const GainSchedule> schedule, const Vec2& target, int T)
    : schedule_(std::move(schedule)), target_(target), T_(T) {
  if (T < 2) throw InvalidParameter("horizon T must be at least 2");
  if (T - 1 > schedule_->max_steps_to_go()) {
    throw InvalidParameter("horizon " + std::to_string(T) + " exceeds the gain schedule");
  }
}

void ReachPolicy::check(int t, int hi) const {
  if (t < 1 || t > hi) {
    throw HorizonExceeded("step " + std::to_string(t) + " outside [1, " + std::to_string(hi) + "]");
  }
}

Mat24 ReachPolicy::L(int t) const {
  check(t, T_ - 1);
  return schedule_->L(T_ - t);
}

Vec2 ReachPolicy::l(int t) const {
  check(t, T_ - 1);
  return schedule_->G(T_ - t) * target_;
}

double ReachPolicy::cost_to_go(const Vec4& x, int t) const {
  check(t, T_);
  const int k = T_ - t;
  return x.dot(schedule_->P(k) * x) - 2.0 * (schedule_->M(k) * target_).dot(x) +
         target_.dot(schedule_->C(k) * target_);
}

ReachPolicy solve_policy(const PolicyProblem& prob) {
  prob.validate();
  return ReachPolicy(std::make_shared<const GainSchedule>(prob, prob.T - 1), prob.target, prob.T);
}

Vec2 eval_policy(const ReachPolicy& policy, const Vec4& x, int t) { return -policy.L(t) * x + policy.l(t); }

Vec2 neuron_direction(int j) {
  const double a = j * std::numbers::pi / 180.0;
  return {std::cos(a), std::sin(a)};
}

void BankParams::validate() const {
  auto fail = [](const std::string& m) { throw InvalidParameter("controller bank: " + m); };
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(v_nom > 0.0)) fail("v_nom must be positive");
  if (min_steps < 2) fail("min_steps must be at least 2");
  if (max_steps < min_steps) fail("max_steps must be at least min_steps");
  if (replan_tol_cm < 0.0 || brake_gain < 0.0 || min_reach_cm < 0.0) fail("tolerances must be non-negative");
  if (!(weights.r > 0.0) || weights.q_p < 0.0 || weights.q_v < 0.0) fail("invalid cost weights");
}

Vec2 blend_commands(std::span<const std::pair<double, Vec2>> weighted, const Vec2& v, double brake_gain) {
  if (weighted.empty()) return -brake_gain * v;
  Vec2 u = Vec2::Zero();
  for (const auto& [w, cmd] : weighted) u += w * cmd;
  return u;
}

ControllerBank::ControllerBank(BankParams params, std::shared_ptr<const GainSchedule> schedule)
    : params_(params), schedule_(std::move(schedule)) {
  params_.validate();
  if (schedule_->max_steps_to_go() < params_.max_steps - 1) {
    throw InvalidParameter("gain schedule shorter than the bank's maximum horizon");
  }
}

ControllerBank::ControllerBank(BankParams params)
    : ControllerBank(params, std::make_shared<const GainSchedule>(
                                 PolicyProblem::reach(Vec2::Zero(), params.max_steps, params.dt, params.weights),
                                 params.max_steps - 1)) {}

void ControllerBank::clear() {
  ctrl_.clear();
  deadline_.clear();
}

Vec2 ControllerBank::command(const ActiveController& c, const Vec4& x) const {
  if (c.braking()) return -params_.brake_gain * x.tail<2>();
  const int k = c.T - c.t;
  return -schedule_->L(k) * x + schedule_->G(k) * c.target;
}

Vec2 ControllerBank::update(long k, const Desirability& d, std::optional<int> win, std::span<const BankCue> cues,
                            const Vec4& x) {
  if (d.active.empty()) {
    clear();
    return -params_.brake_gain * x.tail<2>();
  }

  const Vec2 p = x.head<2>();
  std::map<int, ActiveController> next;
  for (int j : d.active) {
    if (cues.empty()) {
      next[j] = ActiveController{};
      continue;
    }
    const BankCue* cue = &cues[0];
    for (const BankCue& c : cues) {
      if (std::abs(c.theta_deg - j) < std::abs(cue->theta_deg - j)) cue = &c;
    }
    const Vec2 target = p + cue->r_cm * neuron_direction(j);

    const auto it = ctrl_.find(j);
    if (it != ctrl_.end()) {
      ActiveController c = it->second;
      if (!c.braking() && c.beacon_id == cue->beacon_id && (c.target - target).norm() <= params_.replan_tol_cm &&
          c.t < c.T - 1) {
        ++c.t;
        next[j] = c;
        continue;
      }
    }
    if (cue->r_cm < params_.min_reach_cm) {
      next[j] = ActiveController{};
      continue;
    }

    int T = static_cast<int>(std::ceil(cue->r_cm / params_.v_nom / params_.dt));
    T = std::clamp(T, params_.min_steps, params_.max_steps);
    const auto dl = deadline_.find(cue->beacon_id);
    if (dl == deadline_.end() || dl->second - k < 2) {
      deadline_[cue->beacon_id] = k + T;
    } else {
      T = static_cast<int>(dl->second - k);
    }
    next[j] = ActiveController{cue->beacon_id, target, T, 1};
    ++rebuilds_;
  }
  ctrl_ = std::move(next);

  std::erase_if(deadline_, [&](const auto& entry) {
    return std::none_of(ctrl_.begin(), ctrl_.end(),
                        [&](const auto& c) { return c.second.beacon_id == entry.first; });
  });

  std::vector<std::pair<double, Vec2>> weighted;
  if (params_.wta_only && win) {
    weighted.emplace_back(1.0, command(ctrl_.at(*win), x));
  } else {
    for (int j : d.active) weighted.emplace_back(d.d[j], command(ctrl_.at(j), x));
  }
  return blend_commands(weighted, x.tail<2>(), params_.brake_gain);
}

}  // namespace neucf
