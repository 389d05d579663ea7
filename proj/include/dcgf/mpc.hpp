#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dcgf/hybrid.hpp"
#include "dcgf/simulator.hpp"

namespace dcgf {

using InputVector = std::vector<int>;
using InputSequence = std::vector<InputVector>;

enum class TerminalMode { hard, soft };

/// Finite-horizon problem
///
///   min  sum_{k<T} |R u(k)|_1 + |Q x(k)|_1  (+ penalty * dist(x(T)) when soft)
///   s.t. x(k) in state_box,  u(k) in input_alphabet,  x(T) in conv(terminal_vertices)
///
/// with x(k+1) the Euler step of the mode selected by u(k).
struct CftocProblem {
  std::size_t horizon = 3;
  double dt = kDefaultStep;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  std::vector<Interval> state_box;  // empty: unconstrained
  double box_tolerance = 1e-9;
  /// Empty means every input vector of the system, in lexicographic order.
  std::vector<InputVector> input_alphabet;
  std::vector<std::vector<double>> terminal_vertices;  // empty: no terminal condition
  TerminalMode terminal_mode = TerminalMode::soft;
  double terminal_penalty = 1e3;
  double terminal_epsilon = 1e-6;
  std::size_t enumeration_cap = 4096;

  /// Throws Error(argument) when dimensions disagree with `system`.
  void validate(const SwitchedSystem& system) const;
};

/// |R u|_1 + |Q x|_1.
double stage_cost(std::span<const double> x, std::span<const int> u, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// x(0..T) under the given inputs, one Euler step per input. Throws
/// Error(runtime) on a non-finite prediction.
std::vector<std::vector<double>> predict(const SwitchedSystem& system, std::span<const double> x0,
                                         const InputSequence& inputs, double dt);

struct TerminalCheck {
  bool member = false;
  double distance = 0.0;  // max-norm residual to the hull
};

/// Distance from x to conv(vertices) in the max norm; member when that is at
/// most epsilon. Two vertices are handled in closed form, larger sets by a
/// small linear program.
TerminalCheck terminal_membership(std::span<const double> x, const std::vector<std::vector<double>>& vertices,
                                  double epsilon);

/// The linear-program route of terminal_membership for any vertex count:
/// min t s.t. |x - V*lambda|_inf <= t, lambda in the unit simplex.
double hull_distance_lp(std::span<const double> x, const std::vector<std::vector<double>>& vertices);

struct CandidateRecord {
  InputSequence inputs;
  double cost = 0.0;
  bool feasible = false;
};

struct CftocSolution {
  InputSequence inputs;
  double cost = 0.0;
  /// False when no sequence satisfied the state box; with a soft terminal
  /// the cheapest finite sequence is returned anyway.
  bool feasible = false;
  std::size_t candidates = 0;
  std::vector<CandidateRecord> table;  // filled on request
};

/// All input alphabets in lexicographic order (first component most significant).
std::vector<InputVector> input_alphabet(const SwitchedSystem& system);

/// Exhaustive search over alphabet^T. Ties go to the lexicographically
/// smallest sequence, earlier steps first. Throws Error(infeasible) in hard
/// mode when nothing is admissible and Error(runtime) past the enumeration cap.
CftocSolution solve_cftoc(const CftocProblem& problem, const SwitchedSystem& system, std::span<const double> x0,
                          bool keep_table = false);

struct ControlStep {
  std::size_t sample = 0;
  double time = 0.0;
  std::vector<double> measured_state;
  std::vector<double> output;
  InputVector input;
  std::size_t mode = 0;
  double predicted_cost = 0.0;
  bool feasible = false;
  std::size_t candidates = 0;
};

struct ControlRun {
  std::string label;
  std::vector<std::string> input_names;
  std::vector<ControlStep> steps;
  Trajectory trajectory;
  std::optional<std::string> failure;
};

/// Receding-horizon loop: measure, solve from the measured state, apply the
/// first input for one Euler step of the plant, repeat for duration/dt samples.
/// `plant_clamp` clamps plant states after each step when set.
ControlRun run_receding_horizon(const CftocProblem& problem, const SwitchedSystem& system, std::span<const double> x0,
                                double duration, std::string label = {},
                                std::optional<std::vector<Interval>> plant_clamp = std::nullopt);

/// Per-sample rows: `sample,t,<states...>,<inputs...>,mode,cost,feasible,candidates`.
std::string control_run_to_csv(const ControlRun& run);
std::string control_run_summary_json(const ControlRun& run, const CftocProblem& problem);

}  // namespace dcgf
