#include "dcgf/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace dcgf {

namespace {

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

// Index of the grid point at time t; rejects times off the grid.
std::size_t grid_index(double t, double dt, const char* what) {
  double k = t / dt;
  double nearest = std::round(k);
  if (std::abs(k - nearest) > 1e-9 * std::max(1.0, nearest)) {
    throw Error(ErrorKind::argument, fmt::format("{} {} is not a multiple of dt = {}", what, t, dt));
  }
  return static_cast<std::size_t>(nearest);
}

}  // namespace

void Trajectory::append(const SwitchedSystem& system, double t, std::vector<double> x, std::size_t mode,
                        bool was_clamped) {
  times.push_back(t);
  outputs.push_back(system.output(mode, x));
  states.push_back(std::move(x));
  modes.push_back(mode);
  clamped.push_back(was_clamped);
}

std::vector<double> clamp_policy(std::span<const double> state, std::span<const Interval> bounds, bool* fired) {
  std::vector<double> out(state.begin(), state.end());
  bool moved = false;
  for (std::size_t i = 0; i < out.size() && i < bounds.size(); ++i) {
    double v = std::clamp(out[i], bounds[i].lo, bounds[i].hi);
    if (v != out[i]) moved = true;
    out[i] = v;
  }
  if (fired) *fired = moved;
  return out;
}

std::vector<double> euler_step(const SwitchedSystem& system, std::size_t mode, std::span<const double> x, double dt) {
  auto dx = system.rhs(mode, x);
  std::vector<double> next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] + dt * dx[i];
  return next;
}

std::vector<double> rk4_step(const SwitchedSystem& system, std::size_t mode, std::span<const double> x, double dt) {
  const std::size_t n = x.size();
  std::vector<double> tmp(n);
  auto k1 = system.rhs(mode, x);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  auto k2 = system.rhs(mode, tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  auto k3 = system.rhs(mode, tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  auto k4 = system.rhs(mode, tmp);
  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return next;
}

std::vector<double> step(const SwitchedSystem& system, std::size_t mode, std::span<const double> x, double dt,
                         Method method) {
  return method == Method::euler ? euler_step(system, mode, x, dt) : rk4_step(system, mode, x, dt);
}

std::size_t step_count(double duration, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::argument, "dt must be positive");
  if (!(duration >= 0.0)) throw Error(ErrorKind::argument, "duration must be nonnegative");
  return grid_index(duration, dt, "duration");
}

Trajectory integrate(const SwitchedSystem& system, const ModeSchedule& schedule, std::span<const double> x0, double dt,
                     Method method, std::optional<std::vector<Interval>> clamp) {
  if (x0.size() != system.state_dim()) {
    throw Error(ErrorKind::argument, fmt::format("initial state has {} entries, expected {}", x0.size(), system.state_dim()));
  }
  const std::size_t steps = step_count(schedule.duration, dt);
  if (schedule.segments.empty() || schedule.segments.front().start != 0.0) {
    throw Error(ErrorKind::argument, "schedule gap: the first segment must start at t = 0");
  }
  std::vector<std::size_t> switch_at;
  for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
    const auto& seg = schedule.segments[i];
    if (seg.mode >= system.mode_count()) {
      throw Error(ErrorKind::argument, fmt::format("schedule uses mode {} but the system has {}", seg.mode + 1, system.mode_count()));
    }
    if (i > 0 && !(seg.start > schedule.segments[i - 1].start)) {
      throw Error(ErrorKind::argument, "schedule segment starts must be strictly increasing");
    }
    switch_at.push_back(grid_index(seg.start, dt, "switch time"));
  }

  Trajectory traj;
  traj.state_names = system.state_names;
  traj.output_names = system.output_names;
  traj.mode_names = system.mode_names;

  auto mode_at = [&](std::size_t k) {
    std::size_t seg = 0;
    while (seg + 1 < switch_at.size() && switch_at[seg + 1] <= k) ++seg;
    return schedule.segments[seg].mode;
  };

  std::vector<double> x(x0.begin(), x0.end());
  traj.append(system, 0.0, x, mode_at(0), false);
  for (std::size_t k = 0; k < steps; ++k) {
    auto next = step(system, mode_at(k), x, dt, method);
    bool fired = false;
    if (clamp) next = clamp_policy(next, *clamp, &fired);
    if (!all_finite(next)) {
      traj.failure = fmt::format("non-finite state at step {} (t = {})", k + 1, static_cast<double>(k + 1) * dt);
      break;
    }
    x = std::move(next);
    traj.append(system, static_cast<double>(k + 1) * dt, x, mode_at(k + 1), fired);
  }
  return traj;
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
  std::string out = "t";
  for (const auto& n : trajectory.state_names) out += "," + n;
  out += ",mode";
  for (const auto& n : trajectory.output_names) out += ",y_" + n;
  out += "\n";
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    out += fmt::format("{}", trajectory.times[i]);
    for (double v : trajectory.states[i]) out += fmt::format(",{}", v);
    out += "," + trajectory.mode_names[trajectory.modes[i]];
    for (double v : trajectory.outputs[i]) out += fmt::format(",{}", v);
    out += "\n";
  }
  return out;
}

std::string trajectory_to_json(const Trajectory& trajectory) {
  nlohmann::json j;
  j["state_names"] = trajectory.state_names;
  j["output_names"] = trajectory.output_names;
  j["t"] = trajectory.times;
  j["states"] = trajectory.states;
  std::vector<std::string> modes;
  for (auto m : trajectory.modes) modes.push_back(trajectory.mode_names[m]);
  j["mode"] = modes;
  j["outputs"] = trajectory.outputs;
  j["clamped"] = trajectory.clamped;
  j["failure"] = trajectory.failure ? nlohmann::json(*trajectory.failure) : nlohmann::json();
  return j.dump(2);
}

}  // namespace dcgf
