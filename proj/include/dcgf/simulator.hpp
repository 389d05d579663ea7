#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcgf/hybrid.hpp"

namespace dcgf {

/// One day when time is measured in years.
inline constexpr double kDefaultStep = 1.0 / 365.0;

struct ScheduleSegment {
  double start = 0.0;
  std::size_t mode = 0;
};

/// Piecewise-constant mode signal over [0, duration]. Segment starts are
/// strictly increasing, the first at 0.
struct ModeSchedule {
  std::vector<ScheduleSegment> segments;
  double duration = 0.0;

  static ModeSchedule constant(std::size_t mode, double duration) { return {{{0.0, mode}}, duration}; }
};

enum class Method { euler, rk4 };

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct Trajectory {
  std::vector<std::string> state_names;
  std::vector<std::string> output_names;
  std::vector<std::string> mode_names;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::size_t> modes;
  std::vector<std::vector<double>> outputs;
  std::vector<bool> clamped;
  /// Set when integration stopped early; the trajectory holds the samples
  /// computed up to that point.
  std::optional<std::string> failure;

  std::size_t size() const { return times.size(); }
  void append(const SwitchedSystem& system, double t, std::vector<double> x, std::size_t mode, bool was_clamped);
};

/// Componentwise clamp; `fired` reports whether any component moved.
std::vector<double> clamp_policy(std::span<const double> state, std::span<const Interval> bounds, bool* fired = nullptr);

std::vector<double> euler_step(const SwitchedSystem& system, std::size_t mode, std::span<const double> x, double dt);
std::vector<double> rk4_step(const SwitchedSystem& system, std::size_t mode, std::span<const double> x, double dt);
std::vector<double> step(const SwitchedSystem& system, std::size_t mode, std::span<const double> x, double dt,
                         Method method);

/// Number of grid steps covering `duration`; throws Error(argument) unless
/// duration is a nonnegative multiple of dt.
std::size_t step_count(double duration, double dt);

/// Fixed-step integration under `schedule`. Switches must sit on the grid.
/// A non-finite state stops integration and is reported in
/// Trajectory::failure. With `clamp` set, every new state is clamped and the
/// sample flagged when that changed it.
Trajectory integrate(const SwitchedSystem& system, const ModeSchedule& schedule, std::span<const double> x0,
                     double dt = kDefaultStep, Method method = Method::euler,
                     std::optional<std::vector<Interval>> clamp = std::nullopt);

/// `t,<states...>,mode,<outputs...>` header, one row per sample.
std::string trajectory_to_csv(const Trajectory& trajectory);
std::string trajectory_to_json(const Trajectory& trajectory);

}  // namespace dcgf
