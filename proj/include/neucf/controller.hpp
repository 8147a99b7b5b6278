#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "neucf/field.hpp"
#include "neucf/types.hpp"

namespace neucf {

/// Plant state [p_x, p_y, v_x, v_y] in cm and cm/s.
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat42 = Eigen::Matrix<double, 4, 2>;
using Mat24 = Eigen::Matrix<double, 2, 4>;

struct CostWeights {
  double q_p = 1e6;  // terminal position error
  double q_v = 1e5;  // terminal velocity
  double r = 1e-2;   // control effort
};

/// Finite-horizon reach problem:
///   min  sum_{t=1}^{T-1} u_t' R u_t + (D x_T - p)' Qp (D x_T - p) + x_T' Qv x_T
///   s.t. x_{t+1} = A x_t + B u_t
struct PolicyProblem {
  Mat4 A = Mat4::Identity();
  Mat42 B = Mat42::Zero();
  Mat2 Qp = Mat2::Identity();
  Mat4 Qv = Mat4::Zero();
  Mat2 R = Mat2::Identity();
  Mat24 D = Mat24::Zero();
  Vec2 target = Vec2::Zero();
  int T = 2;
  double dt = 0.01;

  /// Double integrator matching the semi-implicit Euler plant with the given weights.
  static PolicyProblem reach(const Vec2& target, int T, double dt, const CostWeights& w = {});

  /// Throws InvalidParameter.
  void validate() const;
};

/// Riccati solution indexed by steps-to-go k = T - t. The feedback gain and
/// value matrices do not depend on the target; the affine terms are linear in it.
class GainSchedule {
 public:
  /// Solves the recursion for k = 1 .. max_steps_to_go. Throws IllConditioned
  /// when the matrix inverted at some step has condition number above 1e12.
  GainSchedule(const PolicyProblem& shape, int max_steps_to_go);

  int max_steps_to_go() const { return static_cast<int>(L_.size()) - 1; }
  double dt() const { return dt_; }

  const Mat24& L(int k) const { return L_.at(k); }
  /// Feedforward map: l = G(k) p.
  const Mat2& G(int k) const { return G_.at(k); }
  /// Value function V_k(x) = x'P x - 2 (M p)' x + p' C p, for k = 0 .. max.
  const Mat4& P(int k) const { return P_.at(k); }
  const Mat42& M(int k) const { return M_.at(k); }
  const Mat2& C(int k) const { return C_.at(k); }

 private:
  double dt_;
  std::vector<Mat24> L_;
  std::vector<Mat2> G_;
  std::vector<Mat4> P_;
  std::vector<Mat42> M_;
  std::vector<Mat2> C_;
};

/// Time-indexed feedback policy u_t = -L_t x + l_t for t in [1, T-1].
class ReachPolicy {
 public:
  ReachPolicy(std::shared_ptr<const GainSchedule> schedule, const Vec2& target, int T);

  int horizon() const { return T_; }
  const Vec2& target() const { return target_; }
  Mat24 L(int t) const;
  Vec2 l(int t) const;
  /// Optimal cost-to-go from state x at step t in [1, T].
  double cost_to_go(const Vec4& x, int t) const;

 private:
  void check(int t, int hi) const;

  std::shared_ptr<const GainSchedule> schedule_;
  Vec2 target_;
  int T_;
};

ReachPolicy solve_policy(const PolicyProblem& prob);

/// Throws HorizonExceeded for t outside [1, T-1].
Vec2 eval_policy(const ReachPolicy& policy, const Vec4& x, int t);

/// Direction of neuron j as a unit vector.
Vec2 neuron_direction(int j);

struct BankParams {
  double dt = 0.01;
  CostWeights weights;
  double v_nom = 12.5;
  int max_steps = 2000;
  /// Shortest horizon given to a fresh plan.
  int min_steps = 30;
  double replan_tol_cm = 0.5;
  double brake_gain = 5.0;
  double min_reach_cm = 0.1;
  bool wta_only = false;

  void validate() const;
};

/// Orange target direction as represented on the field.
struct BankCue {
  int beacon_id = 0;
  double theta_deg = 0.0;
  double r_cm = 0.0;
};

struct ActiveController {
  int beacon_id = -1;  // -1 when the neuron only brakes
  Vec2 target = Vec2::Zero();
  int T = 0;
  int t = 0;
  bool braking() const { return beacon_id < 0; }
};

/// Weighted sum of per-neuron commands. Empty active set gives -brake_gain * v.
Vec2 blend_commands(std::span<const std::pair<double, Vec2>> weighted, const Vec2& v, double brake_gain);

/// Per-neuron controllers for the suprathreshold part of the field.
class ControllerBank {
 public:
  ControllerBank(BankParams params, std::shared_ptr<const GainSchedule> schedule);
  explicit ControllerBank(BankParams params);

  /// Activates, re-plans and retires controllers for tick `k`, then returns the blended command.
  Vec2 update(long k, const Desirability& d, std::optional<int> win, std::span<const BankCue> cues,
              const Vec4& x);

  const std::map<int, ActiveController>& controllers() const { return ctrl_; }
  const BankParams& params() const { return params_; }
  const std::shared_ptr<const GainSchedule>& schedule() const { return schedule_; }
  long rebuilds() const { return rebuilds_; }
  void clear();

 private:
  Vec2 command(const ActiveController& c, const Vec4& x) const;

  BankParams params_;
  std::shared_ptr<const GainSchedule> schedule_;
  std::map<int, ActiveController> ctrl_;
  std::map<int, long> deadline_;  // beacon id -> tick at which its reach ends
  long rebuilds_ = 0;
};

}  // namespace neucf
