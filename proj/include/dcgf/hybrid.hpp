#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dcgf/ast.hpp"
#include "dcgf/stoichiometry.hpp"
#include "dcgf/therapy.hpp"

namespace dcgf {

/// Per-mode continuous dynamics and output map of a switched system.
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual void rhs(std::size_t mode, std::span<const double> x, std::span<double> dx) const = 0;
  virtual void output(std::size_t mode, std::span<const double> x, std::span<double> y) const = 0;
};

/// Controlled switched system x' = f_q(x), y = g_q(x) with the mode q chosen
/// from outside. Immutable once built; rhs/output are reentrant.
struct SwitchedSystem {
  std::string name;
  std::vector<std::string> state_names;
  std::vector<std::string> output_names;
  std::vector<std::string> mode_names;
  std::vector<std::vector<std::string>> mode_terms;  // active therapy terms, one per input
  std::vector<std::vector<int>> mode_inputs;         // input vector selecting each mode
  std::vector<std::string> input_names;
  std::vector<int> input_arity;                      // alphabet size per input coordinate
  /// Symbolic right-hand side per mode and state; empty for built-in plants.
  std::vector<std::vector<std::vector<Monomial>>> mode_rhs;
  ParameterTable parameters;
  std::vector<double> initial_state;
  std::size_t initial_mode = 0;
  std::shared_ptr<const VectorField> field;

  std::size_t state_dim() const { return state_names.size(); }
  std::size_t output_dim() const { return output_names.size(); }
  std::size_t mode_count() const { return mode_names.size(); }
  std::size_t input_dim() const { return input_names.size(); }
  /// Every input coordinate takes values in {0, 1}.
  bool binary_inputs() const;

  void rhs(std::size_t mode, std::span<const double> x, std::span<double> dx) const { field->rhs(mode, x, dx); }
  std::vector<double> rhs(std::size_t mode, std::span<const double> x) const;
  std::vector<double> output(std::size_t mode, std::span<const double> x) const;
  /// Throws Error(argument) when `input` is not in the input alphabet.
  std::size_t mode_for_input(std::span<const int> input) const;
};

/// phi with therapy factors resolved for one mode: a factor in the mode is
/// replaced by 1, an entry with a factor outside the mode becomes zero, and
/// actions without species effect (pure therapy switches) are zeroed.
struct ModeRateVector {
  std::vector<std::string> active_terms;
  std::vector<std::string> labels;
  std::vector<RateExpression> entries;
};

ModeRateVector specialize_rate_vector(const StoichiometricMatrix& matrix, const std::vector<RateExpression>& phi,
                                      const std::vector<std::string>& active_terms);

/// f_q = M|S * phi_q for every mode of `modes`. Inputs are the coordinate
/// indices of each switching therapy, which for two-term therapies is the
/// 0/1 encoding (first declared term = 0).
SwitchedSystem build_switched_system(const StoichiometricMatrix& matrix, const std::vector<RateExpression>& phi,
                                     const ModeGraph& modes, const Model& model);

/// Parse-free shortcut: elaborate, analyze and build. Throws Error(model) when
/// the therapies are not well-formed.
SwitchedSystem compile_switched_system(const Model& model);

/// Bone remodelling under S. aureus infection with antibiotic (T1) and
/// anti-inflammatory (T2) inputs. State (Oc, Ob, B), output bone density
/// y = -k1*Oc + k2*Ob. Missing parameters take the built-in defaults; unknown
/// names throw Error(argument).
SwitchedSystem osteomyelitis_system(const ParameterTable& overrides = {});
ParameterTable osteomyelitis_defaults();

}  // namespace dcgf
