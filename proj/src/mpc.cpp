#include "dcgf/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace dcgf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs_residual(std::span<const double> a, std::span<const double> b, double lambda) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - lambda * b[j]));
  return worst;
}

// Minimises max_j |a_j - lambda*b_j| over lambda in [0,1]. The function is
// convex piecewise linear, so the minimum sits at an endpoint, a zero of one
// residual, or a crossing of two residuals.
double segment_distance(std::span<const double> x, std::span<const double> v1, std::span<const double> v2) {
  const std::size_t n = x.size();
  std::vector<double> a(n), b(n);
  for (std::size_t j = 0; j < n; ++j) {
    a[j] = x[j] - v2[j];
    b[j] = v1[j] - v2[j];
  }
  std::vector<double> candidates = {0.0, 1.0};
  for (std::size_t j = 0; j < n; ++j) {
    if (b[j] != 0.0) candidates.push_back(a[j] / b[j]);
    for (std::size_t k = j + 1; k < n; ++k) {
      if (b[j] != b[k]) candidates.push_back((a[j] - a[k]) / (b[j] - b[k]));
      if (b[j] != -b[k]) candidates.push_back((a[j] + a[k]) / (b[j] + b[k]));
    }
  }
  double best = kInf;
  for (double lambda : candidates) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) continue;
    best = std::min(best, max_abs_residual(a, b, lambda));
  }
  return best;
}

// Dense tableau simplex for max c^T z, A z <= rhs, z >= 0 with rhs >= 0.
// Bland's rule keeps degenerate pivots from cycling.
double simplex_max(std::vector<std::vector<double>> A, std::vector<double> rhs, const std::vector<double>& c) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  const double eps = 1e-13;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(n + m + 1, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][n + m] = rhs[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) T[m][j] = -c[j];

  while (true) {
    std::size_t enter = n + m;
    for (std::size_t j = 0; j < n + m; ++j) {
      if (T[m][j] < -eps) {
        enter = j;
        break;
      }
    }
    if (enter == n + m) break;
    std::size_t leave = m;
    double best_ratio = kInf;
    for (std::size_t i = 0; i < m; ++i) {
      if (T[i][enter] <= eps) continue;
      double ratio = T[i][n + m] / T[i][enter];
      if (ratio < best_ratio - eps || (std::abs(ratio - best_ratio) <= eps && leave < m && basis[i] < basis[leave])) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave == m) return kInf;  // unbounded; cannot happen for the hull program
    double pivot = T[leave][enter];
    for (auto& v : T[leave]) v /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave || T[i][enter] == 0.0) continue;
      double factor = T[i][enter];
      for (std::size_t j = 0; j <= n + m; ++j) T[i][j] -= factor * T[leave][j];
    }
    basis[leave] = enter;
  }
  return T[m][n + m];
}

bool within_box(std::span<const double> x, const std::vector<Interval>& box, double tol) {
  for (std::size_t i = 0; i < box.size() && i < x.size(); ++i) {
    if (!(x[i] >= box[i].lo - tol && x[i] <= box[i].hi + tol)) return false;
  }
  return true;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

void CftocProblem::validate(const SwitchedSystem& system) const {
  const auto n = static_cast<Eigen::Index>(system.state_dim());
  const auto m = static_cast<Eigen::Index>(system.input_dim());
  if (horizon == 0) throw Error(ErrorKind::argument, "horizon must be at least one step");
  if (!(dt > 0.0)) throw Error(ErrorKind::argument, "dt must be positive");
  if (Q.cols() != n) throw Error(ErrorKind::argument, fmt::format("Q has {} columns, state has {} entries", Q.cols(), n));
  if (R.cols() != m) throw Error(ErrorKind::argument, fmt::format("R has {} columns, input has {} entries", R.cols(), m));
  if (!state_box.empty() && state_box.size() != system.state_dim()) {
    throw Error(ErrorKind::argument, "state box dimension does not match the state");
  }
  for (const auto& v : terminal_vertices) {
    if (v.size() != system.state_dim()) throw Error(ErrorKind::argument, "terminal vertex dimension does not match the state");
  }
  for (const auto& u : input_alphabet) system.mode_for_input(u);
}

double stage_cost(std::span<const double> x, std::span<const int> u, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd uv(static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i) uv[static_cast<Eigen::Index>(i)] = u[i];
  return (R * uv).lpNorm<1>() + (Q * xv).lpNorm<1>();
}

std::vector<std::vector<double>> predict(const SwitchedSystem& system, std::span<const double> x0,
                                         const InputSequence& inputs, double dt) {
  std::vector<std::vector<double>> xs;
  xs.emplace_back(x0.begin(), x0.end());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto next = euler_step(system, system.mode_for_input(inputs[k]), xs.back(), dt);
    if (!all_finite(next)) throw Error(ErrorKind::runtime, fmt::format("non-finite prediction at step {}", k + 1));
    xs.push_back(std::move(next));
  }
  return xs;
}

double hull_distance_lp(std::span<const double> x, const std::vector<std::vector<double>>& vertices) {
  if (vertices.empty()) throw Error(ErrorKind::argument, "terminal set needs at least one vertex");
  const std::size_t d = x.size();
  const std::size_t k = vertices.size();
  const auto& v1 = vertices.front();
  std::vector<double> a(d);
  double t0 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    a[j] = x[j] - v1[j];
    t0 = std::max(t0, std::abs(a[j]));
  }
  // Variables: weights of vertices 2..k, then s = t0 - t.
  const std::size_t n = k;
  std::vector<std::vector<double>> A;
  std::vector<double> rhs;
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> up(n, 0.0), down(n, 0.0);
    for (std::size_t i = 1; i < k; ++i) {
      double dij = vertices[i][j] - v1[j];
      up[i - 1] = -dij;
      down[i - 1] = dij;
    }
    up[n - 1] = 1.0;
    down[n - 1] = 1.0;
    A.push_back(up);
    rhs.push_back(t0 - a[j]);
    A.push_back(down);
    rhs.push_back(t0 + a[j]);
  }
  std::vector<double> simplex_row(n, 1.0);
  simplex_row[n - 1] = 0.0;
  A.push_back(simplex_row);
  rhs.push_back(1.0);
  std::vector<double> cap(n, 0.0);
  cap[n - 1] = 1.0;
  A.push_back(cap);
  rhs.push_back(t0);
  for (auto& r : rhs) r = std::max(r, 0.0);

  std::vector<double> objective(n, 0.0);
  objective[n - 1] = 1.0;
  double s = simplex_max(A, rhs, objective);
  return std::max(0.0, t0 - s);
}

TerminalCheck terminal_membership(std::span<const double> x, const std::vector<std::vector<double>>& vertices,
                                  double epsilon) {
  if (vertices.empty()) throw Error(ErrorKind::argument, "terminal set needs at least one vertex");
  for (const auto& v : vertices) {
    if (v.size() != x.size()) throw Error(ErrorKind::argument, "terminal vertex dimension does not match the state");
  }
  double distance = 0.0;
  if (vertices.size() == 1) {
    for (std::size_t j = 0; j < x.size(); ++j) distance = std::max(distance, std::abs(x[j] - vertices[0][j]));
  } else if (vertices.size() == 2) {
    distance = segment_distance(x, vertices[0], vertices[1]);
  } else {
    distance = hull_distance_lp(x, vertices);
  }
  return {distance <= epsilon, distance};
}

std::vector<InputVector> input_alphabet(const SwitchedSystem& system) {
  std::vector<InputVector> out = system.mode_inputs;
  std::sort(out.begin(), out.end());
  return out;
}

CftocSolution solve_cftoc(const CftocProblem& problem, const SwitchedSystem& system, std::span<const double> x0,
                          bool keep_table) {
  problem.validate(system);
  if (x0.size() != system.state_dim()) throw Error(ErrorKind::argument, "initial state dimension does not match the system");

  auto alphabet = problem.input_alphabet.empty() ? input_alphabet(system) : problem.input_alphabet;
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  std::vector<std::size_t> alphabet_modes;
  for (const auto& u : alphabet) alphabet_modes.push_back(system.mode_for_input(u));

  const std::size_t base = alphabet.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < problem.horizon; ++k) {
    if (total > problem.enumeration_cap / std::max<std::size_t>(base, 1)) {
      throw Error(ErrorKind::runtime, fmt::format("{}^{} input sequences exceed the enumeration cap of {}", base,
                                                  problem.horizon, problem.enumeration_cap));
    }
    total *= base;
  }

  const bool has_terminal = !problem.terminal_vertices.empty();
  const bool soft = problem.terminal_mode == TerminalMode::soft;
  CftocSolution best;
  best.cost = kInf;
  CftocSolution fallback;
  fallback.cost = kInf;

  std::vector<std::size_t> digits(problem.horizon, 0);
  std::vector<double> x(x0.begin(), x0.end());
  for (std::size_t index = 0; index < total; ++index) {
    std::size_t rest = index;
    for (std::size_t k = problem.horizon; k-- > 0;) {
      digits[k] = rest % base;
      rest /= base;
    }

    std::copy(x0.begin(), x0.end(), x.begin());
    double cost = 0.0;
    bool box_ok = true;
    bool finite = true;
    for (std::size_t k = 0; k < problem.horizon; ++k) {
      const auto& u = alphabet[digits[k]];
      cost += stage_cost(x, u, problem.Q, problem.R);
      x = euler_step(system, alphabet_modes[digits[k]], x, problem.dt);
      if (!all_finite(x)) {
        finite = false;
        break;
      }
      if (!within_box(x, problem.state_box, problem.box_tolerance)) box_ok = false;
    }

    bool terminal_ok = true;
    if (finite && has_terminal) {
      auto check = terminal_membership(x, problem.terminal_vertices, problem.terminal_epsilon);
      if (soft) {
        cost += problem.terminal_penalty * check.distance;
      } else {
        terminal_ok = check.member;
      }
    }
    if (!finite) cost = kInf;
    const bool feasible = finite && box_ok && terminal_ok;

    InputSequence seq;
    if (keep_table || (feasible && cost < best.cost) || (!feasible && finite && terminal_ok && cost < fallback.cost)) {
      for (auto dgt : digits) seq.push_back(alphabet[dgt]);
    }
    if (keep_table) best.table.push_back({seq, cost, feasible});
    if (feasible && cost < best.cost) {
      best.cost = cost;
      best.inputs = seq;
      best.feasible = true;
    } else if (!feasible && finite && terminal_ok && cost < fallback.cost) {
      fallback.cost = cost;
      fallback.inputs = seq;
    }
  }

  best.candidates = total;
  if (best.feasible) return best;
  if (!soft) {
    throw Error(ErrorKind::infeasible, "no input sequence reaches the terminal set within the state bounds");
  }
  if (fallback.inputs.empty()) throw Error(ErrorKind::infeasible, "every predicted trajectory leaves the state box or diverges");
  fallback.candidates = total;
  fallback.feasible = false;
  fallback.table = std::move(best.table);
  return fallback;
}

ControlRun run_receding_horizon(const CftocProblem& problem, const SwitchedSystem& system, std::span<const double> x0,
                                double duration, std::string label, std::optional<std::vector<Interval>> plant_clamp) {
  problem.validate(system);
  const std::size_t samples = step_count(duration, problem.dt);

  ControlRun run;
  run.label = std::move(label);
  run.input_names = system.input_names;
  auto& traj = run.trajectory;
  traj.state_names = system.state_names;
  traj.output_names = system.output_names;
  traj.mode_names = system.mode_names;

  std::vector<double> x(x0.begin(), x0.end());
  std::size_t mode = system.initial_mode;
  traj.append(system, 0.0, x, mode, false);
  for (std::size_t k = 0; k < samples; ++k) {
    ControlStep s;
    s.sample = k;
    s.time = static_cast<double>(k) * problem.dt;
    s.measured_state = x;
    s.output = system.output(mode, x);

    CftocSolution solution;
    try {
      solution = solve_cftoc(problem, system, x);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::infeasible) throw;
      run.failure = fmt::format("sample {}: {}", k, e.what());
      break;
    }
    s.input = solution.inputs.front();
    s.mode = system.mode_for_input(s.input);
    s.predicted_cost = solution.cost;
    s.feasible = solution.feasible;
    s.candidates = solution.candidates;
    mode = s.mode;
    traj.modes[k] = mode;
    traj.outputs[k] = system.output(mode, x);
    run.steps.push_back(std::move(s));

    auto next = euler_step(system, mode, x, problem.dt);
    bool fired = false;
    if (plant_clamp) next = clamp_policy(next, *plant_clamp, &fired);
    if (!all_finite(next)) {
      run.failure = fmt::format("non-finite plant state at step {}", k + 1);
      break;
    }
    x = std::move(next);
    traj.append(system, static_cast<double>(k + 1) * problem.dt, x, mode, fired);
  }
  return run;
}

std::string control_run_to_csv(const ControlRun& run) {
  std::string out = "sample,t";
  for (const auto& n : run.trajectory.state_names) out += "," + n;
  for (const auto& n : run.input_names) out += "," + n;
  out += ",mode,cost,feasible,candidates\n";
  for (const auto& s : run.steps) {
    out += fmt::format("{},{}", s.sample, s.time);
    for (double v : s.measured_state) out += fmt::format(",{}", v);
    for (int u : s.input) out += fmt::format(",{}", u);
    out += fmt::format(",{},{},{},{}\n", run.trajectory.mode_names[s.mode], s.predicted_cost, s.feasible ? 1 : 0,
                       s.candidates);
  }
  return out;
}

std::string control_run_summary_json(const ControlRun& run, const CftocProblem& problem) {
  nlohmann::json j;
  j["label"] = run.label;
  j["horizon"] = problem.horizon;
  j["dt"] = problem.dt;
  j["samples"] = run.steps.size();
  auto matrix = [](const Eigen::MatrixXd& M) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(M.rows()));
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      for (Eigen::Index c = 0; c < M.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(M(r, c));
    }
    return rows;
  };
  j["Q"] = matrix(problem.Q);
  j["R"] = matrix(problem.R);
  j["terminal"] = {{"mode", problem.terminal_mode == TerminalMode::soft ? "soft" : "hard"},
                   {"penalty", problem.terminal_penalty},
                   {"epsilon", problem.terminal_epsilon},
                   {"vertices", problem.terminal_vertices}};
  j["inputs"] = run.input_names;

  std::vector<std::size_t> on_counts(run.input_names.size(), 0);
  std::size_t infeasible = 0;
  auto schedule = nlohmann::json::array();
  for (std::size_t k = 0; k < run.steps.size(); ++k) {
    const auto& s = run.steps[k];
    for (std::size_t i = 0; i < s.input.size(); ++i) {
      if (s.input[i] != 0) ++on_counts[i];
    }
    if (!s.feasible) ++infeasible;
    if (k == 0 || s.input != run.steps[k - 1].input) schedule.push_back({{"from_sample", k}, {"input", s.input}});
  }
  j["steps_with_input_on"] = on_counts;
  j["infeasible_samples"] = infeasible;
  j["schedule"] = schedule;
  if (!run.trajectory.states.empty()) j["final_state"] = run.trajectory.states.back();
  j["failure"] = run.failure ? nlohmann::json(*run.failure) : nlohmann::json();
  return j.dump(2);
}

}  // namespace dcgf
