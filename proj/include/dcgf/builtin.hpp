#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcgf/ast.hpp"
#include "dcgf/mpc.hpp"

namespace dcgf {

/// Embedded `.dcgf` text for `builtin:sir` and `builtin:sir-therapy`;
/// nullopt for any other name. The name may carry the `builtin:` prefix.
std::optional<std::string_view> builtin_source(std::string_view name);

/// Names accepted after `builtin:`, including the non-textual osteomyelitis model.
std::vector<std::string> builtin_names();

/// Parses a textual built-in through the regular parser. Throws Error(argument)
/// for unknown names.
Model builtin_model(std::string_view name);

/// Sampling step of the scenario presets: one day expressed in the time unit
/// of the rates, divided into 365 controller samples.
inline constexpr double kScenarioStep = 1.0 / (365.0 * 365.0);

/// Scenario presets 1..3 for the SIR therapy model: Q = diag(1, 10, 0.5),
/// R from the scenario, T = 3, state box [0,1]^3 and the infection-free
/// terminal segment. Throws Error(argument) for other numbers.
CftocProblem scenario_problem(int scenario);

}  // namespace dcgf
