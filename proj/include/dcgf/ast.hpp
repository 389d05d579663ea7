#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcgf/error.hpp"

namespace dcgf {

using ParameterTable = std::map<std::string, double, std::less<>>;

/// Multiset of term names. Element order is kept for rendering; equality
/// between multisets in the semantics goes through count().
using Multiset = std::vector<std::string>;

/// Multiplicity of `term` in `collection`.
std::size_t count(std::string_view term, const Multiset& collection);

/// One summand of a rate: `coefficient * symbol`, or a bare literal when
/// `symbol` is empty.
struct RateTerm {
  double coefficient = 1.0;
  std::string symbol;

  bool operator==(const RateTerm&) const = default;
};

/// Rate annotation `<...>`: a sum of literals, parameter names and
/// literal*name products. Kept symbolic until evaluated against a table.
struct Rate {
  std::vector<RateTerm> terms;

  static Rate literal(double value);
  static Rate symbol(std::string name, double coefficient = 1.0);

  bool is_literal() const;
  /// Merges literals and repeated symbols; symbols sorted by name.
  Rate canonical() const;
  /// Throws Error(runtime) on an unbound symbol or a negative result.
  double evaluate(const ParameterTable& params) const;
  std::vector<std::string> symbols() const;
  std::string to_string() const;

  bool operator==(const Rate&) const = default;
};

/// Sum of two rates, as used when distinct actions contribute the same
/// monomial shape.
Rate operator+(const Rate& a, const Rate& b);

enum class ActionKind { internal, input, output };

struct Action {
  ActionKind kind = ActionKind::internal;
  std::string channel;  // empty for internal actions
  Rate rate;
  std::string label;    // explicit label of an internal action, else empty

  bool operator==(const Action&) const = default;
};

struct Branch {
  Action action;
  Multiset continuation;
  SourceSpan span;

  // Spans are presentation only.
  bool operator==(const Branch& o) const { return action == o.action && continuation == o.continuation; }
};

enum class TermKind { species, therapy };

/// `X = pi.P + ...` (species) or `U = pi.C + ...` (therapy).
struct TermDef {
  std::string name;
  std::vector<Branch> branches;
  SourceSpan span;

  bool operator==(const TermDef& o) const { return name == o.name && branches == o.branches; }
};

using SpeciesDef = TermDef;
using TherapyDef = TermDef;

struct Parameter {
  std::string name;
  double value = 0.0;
  SourceSpan span;

  bool operator==(const Parameter& o) const { return name == o.name && value == o.value; }
};

struct PopulationEntry {
  std::string species;
  double concentration = 0.0;
  SourceSpan span;

  bool operator==(const PopulationEntry& o) const {
    return species == o.species && concentration == o.concentration;
  }
};

/// A D-CGF model (S, P, T, C) plus its parameter table.
struct Model {
  std::vector<Parameter> parameters;
  std::vector<SpeciesDef> species;
  std::vector<PopulationEntry> population;
  std::vector<TherapyDef> therapies;
  Multiset initial_combination;
  SourceSpan init_span;

  bool operator==(const Model& o) const {
    return parameters == o.parameters && species == o.species && population == o.population &&
           therapies == o.therapies && initial_combination == o.initial_combination;
  }

  std::optional<TermKind> kind_of(std::string_view name) const;
  bool is_species(std::string_view name) const { return kind_of(name) == TermKind::species; }
  bool is_therapy(std::string_view name) const { return kind_of(name) == TermKind::therapy; }
  const TermDef* find_term(std::string_view name) const;
  std::vector<std::string> species_names() const;
  std::vector<std::string> therapy_names() const;
  /// Species rows first, then therapy rows, both in declaration order.
  std::vector<std::string> term_names() const;
  ParameterTable parameter_table() const;
  /// Concentrations in species declaration order; unlisted species are 0.
  std::vector<double> initial_state() const;
  /// Replaces the value of a declared parameter; throws Error(argument) otherwise.
  void set_parameter(std::string_view name, double value);
};

enum class Synthesis { internal, channel };

/// An action of the whole system, with reactant/product multisets over
/// species and therapy names.
struct GlobalAction {
  std::string label;
  Multiset reactants;
  Multiset products;
  Rate rate;
  Synthesis synthesis = Synthesis::internal;
  std::string owner;        // term of an internal action
  std::string channel;      // channel of a synchronisation
  std::string input_term;   // term offering ?channel
  std::string output_term;  // term offering !channel

  bool is_internal() const { return synthesis == Synthesis::internal; }
};

/// Name resolution, duplicate definitions and channel complementarity.
/// Returns every problem found; empty means elaborate_actions will succeed.
std::vector<Diagnostic> validate(const Model& model);

/// Internal actions first, emitted in rounds: round k takes the k-th internal
/// action of every species in declaration order, then of every therapy. Channel
/// synchronisations follow, channels in order of first use, each pairing all
/// inputs with all outputs (input-major). Throws Error(model) on the first
/// problem validate() would report.
std::vector<GlobalAction> elaborate_actions(const Model& model);

/// #(term, products) - #(term, reactants).
int net_change(const GlobalAction& action, std::string_view term);
/// As above, rejecting names not declared in `model`.
int net_change(const Model& model, const GlobalAction& action, std::string_view term);

}  // namespace dcgf
