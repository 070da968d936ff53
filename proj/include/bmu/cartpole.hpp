#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>

#include "bmu/error.hpp"
#include "bmu/random.hpp"

namespace bmu {

// x: cart position (m), x_dot: cart velocity (m/s),
// theta: pole angle from upright (rad), theta_dot: angular velocity (rad/s),
// t: elapsed steps.
struct CartState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  std::int64_t t = 0;

  std::array<double, 4> components() const { return {x, x_dot, theta, theta_dot}; }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(x_dot) && std::isfinite(theta) &&
           std::isfinite(theta_dot);
  }

  friend bool operator==(const CartState&, const CartState&) = default;
};

// Push direction. Right applies +F, Left applies -F.
enum class Push : int { Left = 0, Right = 1 };

struct EnvParams {
  double gravity = 9.8;
  double mass_cart = 1.0;
  double mass_pole = 0.1;
  double pole_half_length = 0.5;
  double force_mag = 10.0;
  double dt = 0.02;
  std::int64_t max_steps = 250;
  double theta_limit = 0.418;
  double x_limit = 2.4;
  double fail_reward = -10.0;
  double step_reward = 1.0;

  // Twelve-degree threshold used by the reference gym environment.
  static constexpr double kReferenceThetaLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string("EnvParams.") + name + " must be strictly positive");
      }
    };
    positive(gravity, "gravity");
    positive(mass_cart, "mass_cart");
    positive(mass_pole, "mass_pole");
    positive(pole_half_length, "pole_half_length");
    positive(force_mag, "force_mag");
    positive(dt, "dt");
    positive(theta_limit, "theta_limit");
    positive(x_limit, "x_limit");
    if (max_steps < 200) throw DomainError("EnvParams.max_steps must be >= 200");
    if (!std::isfinite(fail_reward) || !std::isfinite(step_reward)) {
      throw DomainError("EnvParams rewards must be finite");
    }
  }
};

struct StepOutcome {
  CartState next_state;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

inline bool is_terminal(const CartState& s, const EnvParams& p) {
  return std::abs(s.theta) > p.theta_limit || std::abs(s.x) > p.x_limit;
}

// Initial state: each component i.i.d. uniform in [-0.05, 0.05).
inline CartState sample_initial_state(Rng& rng) {
  CartState s;
  s.x = rng.uniform(-0.05, 0.05);
  s.x_dot = rng.uniform(-0.05, 0.05);
  s.theta = rng.uniform(-0.05, 0.05);
  s.theta_dot = rng.uniform(-0.05, 0.05);
  return s;
}

inline CartState reset(std::uint64_t seed) {
  Rng rng(seed);
  return sample_initial_state(rng);
}

// One explicit-Euler step of the frictionless cart-pole. Action 1 pushes
// right, anything else pushes left.
inline StepOutcome step(const CartState& s, int action, const EnvParams& p) {
  if (is_terminal(s, p)) throw PreconditionError("step called on a terminal cart-pole state");
  if (action != 0 && action != 1) throw PreconditionError("cart-pole action must be 0 or 1");

  const double force = action == 1 ? p.force_mag : -p.force_mag;
  const double total_mass = p.mass_cart + p.mass_pole;
  const double polemass_length = p.mass_pole * p.pole_half_length;
  const double cos_theta = std::cos(s.theta);
  const double sin_theta = std::sin(s.theta);

  const double temp =
      (force + polemass_length * s.theta_dot * s.theta_dot * sin_theta) / total_mass;
  const double theta_acc =
      (p.gravity * sin_theta - cos_theta * temp) /
      (p.pole_half_length * (4.0 / 3.0 - p.mass_pole * cos_theta * cos_theta / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_theta / total_mass;

  StepOutcome out;
  CartState& n = out.next_state;
  n.x = s.x + p.dt * s.x_dot;
  n.x_dot = s.x_dot + p.dt * x_acc;
  n.theta = s.theta + p.dt * s.theta_dot;
  n.theta_dot = s.theta_dot + p.dt * theta_acc;
  n.t = s.t + 1;

  out.terminated = is_terminal(n, p);
  out.truncated = !out.terminated && n.t >= p.max_steps;
  out.reward = out.terminated ? p.fail_reward : p.step_reward;
  return out;
}

// Stateful wrapper holding the current state and an RNG for resets.
class CartPoleEnv {
 public:
  explicit CartPoleEnv(EnvParams params = {}, std::uint64_t seed = 0)
      : params_(params), rng_(seed) {
    params_.validate();
  }

  // Reseed, then sample a fresh initial state.
  CartState reset(std::uint64_t seed) {
    rng_.reseed(seed);
    return reset();
  }

  CartState reset() {
    state_ = sample_initial_state(rng_);
    return state_;
  }

  StepOutcome step(int action) {
    StepOutcome out = bmu::step(state_, action, params_);
    state_ = out.next_state;
    return out;
  }

  const CartState& state() const { return state_; }
  const EnvParams& params() const { return params_; }

 private:
  EnvParams params_;
  Rng rng_;
  CartState state_;
};

// One row per step of the trajectory CSV.
struct TrajectoryRow {
  CartState state;  // state the action was taken from
  int action = 0;
  double reward = 0.0;
  bool terminated = false;
};

inline void write_trajectory_header(std::ostream& os) {
  os << "t,x,x_dot,theta,theta_dot,action,reward,terminated\n";
}

inline void write_trajectory_row(std::ostream& os, const TrajectoryRow& row) {
  const auto old = os.precision(17);
  os << row.state.t << ',' << row.state.x << ',' << row.state.x_dot << ',' << row.state.theta
     << ',' << row.state.theta_dot << ',' << row.action << ',' << row.reward << ','
     << (row.terminated ? 1 : 0) << '\n';
  os.precision(old);
}

}  // namespace bmu
