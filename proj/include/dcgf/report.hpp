#pragma once

#include <string>

#include "dcgf/ast.hpp"
#include "dcgf/hybrid.hpp"
#include "dcgf/stoichiometry.hpp"
#include "dcgf/therapy.hpp"

namespace dcgf {

enum class Emit { all, matrix, phi, ode, css };
enum class TextFormat { json, text };

/// Parses `all|matrix|phi|ode|css`; throws Error(argument) otherwise.
Emit parse_emit(std::string_view name);

std::string analysis_json(const TherapyAnalysis& analysis);
std::string analysis_text(const TherapyAnalysis& analysis);
std::string st_graph_dot(const StGraph& graph);
std::string mode_graph_dot(const ModeGraph& graph);

/// Compiled artifacts of a model. `ode` needs a therapy-free model and `css`
/// well-formed therapies; `all` includes whichever of the two applies.
std::string compile_report(const Model& model, Emit emit, TextFormat format);

std::string matrix_text(const StoichiometricMatrix& matrix);

}  // namespace dcgf
