#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcgf/ast.hpp"
#include "dcgf/error.hpp"

namespace dcgf {

/// Outcome of parsing a `.dcgf` document. `model` is set only when no error
/// was reported; warnings may accompany a model.
struct ParseResult {
  std::optional<Model> model;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return model.has_value(); }
};

/// Line-oriented concrete syntax:
///
///     # comment
///     param beta = 1800
///     species S = tau<b>.(S|S) + tau<mu>.0 + ?i<beta>.I
///     population S: 0.3, I: 0.7
///     therapy T1_off = tau[1on]<r1_on>.T1_on
///     init T1_off | T2_off
///
/// A declaration ends at the end of its line unless the line ends in `+`.
/// Rates are sums of literals, names and `literal*name` products.
ParseResult parse(std::string_view source, std::string_view file = "<input>");

/// Inverse of parse(): parse(render(m)).model == m for every valid m.
std::string render(const Model& model);

}  // namespace dcgf
