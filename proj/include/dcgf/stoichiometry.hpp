#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcgf/ast.hpp"

namespace dcgf {

/// Term x action matrix of net changes. Rows are species (declaration order)
/// followed by therapies; columns follow elaborate_actions().
struct StoichiometricMatrix {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::size_t species_count = 0;
  std::vector<int> entries;  // row-major

  std::size_t row_count() const { return rows.size(); }
  std::size_t column_count() const { return columns.size(); }
  int at(std::size_t row, std::size_t column) const { return entries[row * columns.size() + column]; }
  /// Throws Error(argument) for unknown names.
  int at(std::string_view row, std::string_view column) const;
  std::optional<std::size_t> row_index(std::string_view name) const;
  std::optional<std::size_t> column_index(std::string_view label) const;

  bool is_species_row(std::size_t row) const { return row < species_count; }
  /// M restricted to species rows (M|S) and to therapy rows (M|T).
  StoichiometricMatrix species_rows() const;
  StoichiometricMatrix therapy_rows() const;
  /// True when every species row of `column` is zero.
  bool species_inert(std::size_t column) const;
};

StoichiometricMatrix build_matrix(const std::vector<GlobalAction>& actions, const Model& model);

/// Shape of a rate-vector entry. `constant` only appears after therapy
/// factors have been substituted by 1.
enum class RateForm { zero, constant, unary, binary, homodimer };

/// phi[a]: 0, r, r*X, r*X*Y or r*X*(X-1).
struct RateExpression {
  RateForm form = RateForm::zero;
  Rate rate;
  std::vector<std::string> factors;

  std::string to_string() const;
  bool operator==(const RateExpression&) const = default;
};

/// Keyed on react(a); throws Error(model) for more than two reactants.
RateExpression rate_expression(const GlobalAction& action);
std::vector<RateExpression> build_rate_vector(const std::vector<GlobalAction>& actions);

/// One signed summand M[X,a] * phi[a] of a right-hand side.
struct Monomial {
  int coefficient = 0;
  RateExpression phi;
  std::string action;

  bool operator==(const Monomial&) const = default;
};

/// `coefficient * symbol * factors...` after splitting rate sums and the
/// falling factorial X(X-1). `symbol` empty means a bare literal.
struct ExpandedMonomial {
  double coefficient = 0.0;
  std::string symbol;
  std::vector<std::string> factors;  // sorted

  auto operator<=>(const ExpandedMonomial&) const = default;
};

/// Expands and merges like terms, dropping the ones that cancel. The result
/// is sorted, so two right-hand sides are equal iff their expansions are.
std::vector<ExpandedMonomial> expand(const std::vector<Monomial>& terms);
std::string format_monomials(const std::vector<Monomial>& terms);

struct OdeSystem {
  std::vector<std::string> state_names;
  std::vector<std::vector<Monomial>> rhs;  // one list per state
  ParameterTable parameters;
};

/// rhs[X] = sum_a M|S[X,a] * phi[a], zero terms dropped. Throws Error(model)
/// when a species-changing action is gated by a therapy term; such models
/// go through the switched-system path.
OdeSystem derive_ode(const StoichiometricMatrix& matrix, const std::vector<RateExpression>& phi,
                     ParameterTable parameters = {});

/// Numeric form of a list of monomial right-hand sides with parameters bound.
class CompiledRhs {
 public:
  CompiledRhs() = default;
  CompiledRhs(const std::vector<std::vector<Monomial>>& rhs, const std::vector<std::string>& state_names,
              const ParameterTable& params);

  std::size_t dimension() const { return dimension_; }
  void operator()(std::span<const double> x, std::span<double> dx) const;

 private:
  struct Term {
    std::size_t row;
    double weight;  // coefficient * rate
    RateForm form;
    std::size_t first;
    std::size_t second;
  };
  std::size_t dimension_ = 0;
  std::vector<Term> terms_;
};

/// Throws Error(runtime) on an unbound symbol.
std::vector<double> evaluate_rhs(const OdeSystem& ode, std::span<const double> state, const ParameterTable& params);

}  // namespace dcgf
