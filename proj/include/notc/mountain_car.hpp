// Continuous-action mountain car with optional observation noise and an
// "unstable weather" mode that alternates the velocity cap between trials.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace notc {

inline constexpr double kPosMin = -1.2;
inline constexpr double kPosGoal = 0.6;
inline constexpr double kStartPos = -0.5;
inline constexpr double kStartVel = 0.0;
inline constexpr double kForce = 0.001;
inline constexpr double kGravity = -0.0025;

enum class EnvKind { Mc, McNoisy, McWeather };

inline std::string to_string(EnvKind k) {
  switch (k) {
    case EnvKind::Mc: return "mc";
    case EnvKind::McNoisy: return "mc-noisy";
    case EnvKind::McWeather: return "mc-weather";
  }
  return "?";
}

inline std::optional<EnvKind> parse_env_kind(const std::string& s) {
  if (s == "mc") return EnvKind::Mc;
  if (s == "mc-noisy") return EnvKind::McNoisy;
  if (s == "mc-weather") return EnvKind::McWeather;
  return std::nullopt;
}

struct EnvConfig {
  double noise_pos_sigma = 0.0;
  double noise_vel_sigma = 0.0;
  std::optional<std::size_t> weather_period;
  double reduced_v_max = 0.04;
  double base_v_max = 0.07;
  std::size_t step_cap = 1000;
  double action_min = -1.0;
  double action_max = 1.0;

  static EnvConfig preset(EnvKind kind) {
    EnvConfig c;
    if (kind == EnvKind::McNoisy) {
      c.noise_pos_sigma = 0.06;
      c.noise_vel_sigma = 0.009;
    } else if (kind == EnvKind::McWeather) {
      c.weather_period = 10000;
    }
    return c;
  }

  void validate() const {
    if (noise_pos_sigma < 0.0 || noise_vel_sigma < 0.0) throw std::invalid_argument("EnvConfig: negative noise sigma");
    if (!(reduced_v_max > 0.0 && reduced_v_max < base_v_max))
      throw std::invalid_argument("EnvConfig: need 0 < reduced_v_max < base_v_max");
    if (step_cap == 0) throw std::invalid_argument("EnvConfig: step_cap must be positive");
    if (weather_period && *weather_period == 0) throw std::invalid_argument("EnvConfig: weather_period must be positive");
    if (!(action_min < action_max)) throw std::invalid_argument("EnvConfig: empty action range");
  }

  /// Velocity cap in force during trial `trial_index`.
  double v_max_for(std::size_t trial_index) const {
    if (!weather_period) return base_v_max;
    return (trial_index / *weather_period) % 2 == 0 ? base_v_max : reduced_v_max;
  }
};

struct MountainCarState {
  double pos = kStartPos;
  double vel = kStartVel;
  std::size_t step_index = 0;
};

using Observation = std::array<double, 2>;

struct StepResult {
  Observation observation{};
  double reward = -1.0;
  bool terminal = false;
  bool goal = false;
};

class MountainCar {
 public:
  explicit MountainCar(EnvConfig config = {}) : config_(config) { config_.validate(); }

  const EnvConfig& config() const noexcept { return config_; }
  const MountainCarState& state() const noexcept { return state_; }
  double v_max() const noexcept { return v_max_; }
  bool terminal() const noexcept { return terminal_; }

  template <class Rng>
  Observation reset(std::size_t trial_index, Rng& rng) {
    state_ = {};
    terminal_ = false;
    v_max_ = config_.v_max_for(trial_index);
    return observe(rng);
  }

  /// Observation of the current state; noise is drawn fresh on every call
  /// (position first, then velocity) and never feeds back into the state.
  template <class Rng>
  Observation observe(Rng& rng) const {
    Observation o{state_.pos, state_.vel};
    if (config_.noise_pos_sigma > 0.0) o[0] += std::normal_distribution<double>(0.0, config_.noise_pos_sigma)(rng);
    if (config_.noise_vel_sigma > 0.0) o[1] += std::normal_distribution<double>(0.0, config_.noise_vel_sigma)(rng);
    return o;
  }

  template <class Rng>
  StepResult step(double action, Rng& rng) {
    if (terminal_) throw std::logic_error("MountainCar::step on a terminated trial");
    const double a = std::clamp(action, config_.action_min, config_.action_max);
    double vel = state_.vel + a * kForce + std::cos(3.0 * state_.pos) * kGravity;
    vel = std::clamp(vel, -v_max_, v_max_);
    double pos = state_.pos + vel;
    if (vel < 0.0 && pos <= kPosMin) {
      pos = kPosMin;
      vel = 0.0;
    }
    state_.pos = pos;
    state_.vel = vel;
    ++state_.step_index;

    StepResult r;
    if (pos >= kPosGoal) {
      r.reward = 0.0;
      r.terminal = r.goal = true;
    } else {
      r.reward = -1.0;
      r.terminal = state_.step_index >= config_.step_cap;
    }
    terminal_ = r.terminal;
    r.observation = observe(rng);
    return r;
  }

  /// Linear rescale of an observation to [0, 1] per coordinate using the
  /// declared position range and the base velocity range.
  Observation normalize(const Observation& o) const {
    return {(o[0] - kPosMin) / (kPosGoal - kPosMin),
            (o[1] + config_.base_v_max) / (2.0 * config_.base_v_max)};
  }

 private:
  EnvConfig config_;
  MountainCarState state_{};
  double v_max_ = 0.07;
  bool terminal_ = false;
};

struct TrialOutcome {
  double accumulated_reward = 0.0;
  std::size_t steps = 0;
  bool goal = false;
};

/// Runs one trial under `policy(observation) -> action`.
template <class Rng, class Policy>
TrialOutcome run_policy_trial(MountainCar& env, std::size_t trial_index, Policy&& policy, Rng& rng) {
  TrialOutcome out;
  Observation obs = env.reset(trial_index, rng);
  for (;;) {
    const StepResult r = env.step(policy(obs), rng);
    out.accumulated_reward += r.reward;
    ++out.steps;
    if (r.terminal) {
      out.goal = r.goal;
      return out;
    }
    obs = r.observation;
  }
}

/// Mean accumulated reward of a policy drawing actions uniformly from the
/// action range.
template <class Rng>
double random_policy_baseline(const EnvConfig& config, std::size_t n_trials, Rng& rng) {
  if (n_trials == 0) throw std::invalid_argument("random_policy_baseline: n_trials must be positive");
  MountainCar env(config);
  std::uniform_real_distribution<double> action(config.action_min, config.action_max);
  double sum = 0.0;
  for (std::size_t t = 0; t < n_trials; ++t) {
    sum += run_policy_trial(env, t, [&](const Observation&) { return action(rng); }, rng).accumulated_reward;
  }
  return sum / static_cast<double>(n_trials);
}

}  // namespace notc
