#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dcgf/ast.hpp"
#include "dcgf/error.hpp"
#include "dcgf/stoichiometry.hpp"

namespace dcgf {

/// Outcome of one necessary condition. Witnesses are action labels, or
/// `term@action` cells for the entry-range condition.
struct ConditionResult {
  bool passed = true;
  std::vector<std::string> witnesses;
};

/// Matrix-level conditions that every well-formed therapy set satisfies:
/// therapy entries in {-1,0,1}, conservation of therapy terms, at most one
/// consumed therapy term per action, and consuming actions being internal
/// with no species effect.
struct NecessaryConditionsReport {
  ConditionResult entries_in_range;
  ConditionResult conservation;
  ConditionResult exclusive_switch_1;
  ConditionResult exclusive_switch_2;

  bool passed() const {
    return entries_in_range.passed && conservation.passed && exclusive_switch_1.passed && exclusive_switch_2.passed;
  }
};

NecessaryConditionsReport check_necessary_conditions(const StoichiometricMatrix& matrix,
                                                     const std::vector<GlobalAction>& actions);

struct StEdge {
  std::string from;
  std::string to;
  std::vector<std::string> actions;  // witnesses
};

/// Edge (U1, U2) iff some action has M[U1,a] = -1 and M|T[U2,a] = +1.
struct StGraph {
  std::vector<std::string> vertices;
  std::vector<StEdge> edges;  // sorted by (from, to) vertex index
};

StGraph build_st_graph(const StoichiometricMatrix& matrix);

struct SwitchingTherapy {
  std::vector<std::string> terms;  // declaration order
  std::string initially_active;
  std::vector<std::string> switch_actions;
};

struct Partition {
  std::vector<SwitchingTherapy> therapies;
  std::vector<Diagnostic> diagnostics;  // errors mean T is not well-formed

  bool ok() const { return !has_errors(diagnostics); }
};

/// Weakly connected components of the ST-graph, checked for exactly one
/// initially active term and at most one reactant per component. Each
/// accepted component is also re-checked against the switching-therapy
/// definition; disagreements are reported as warnings.
Partition partition_switching_therapies(const StGraph& graph, const Model& model,
                                        const std::vector<GlobalAction>& actions);

/// Clause-by-clause switching-therapy check of one term set.
std::vector<Diagnostic> verify_switching_therapy(const std::vector<std::string>& terms, const Model& model,
                                                 const std::vector<GlobalAction>& actions);

/// Cartesian product of the switching therapies. Modes are numbered with the
/// first component varying fastest, so for two binary therapies
/// q1=(off,off), q2=(on,off), q3=(off,on), q4=(on,on).
struct ModeGraph {
  std::vector<SwitchingTherapy> components;
  std::vector<std::vector<std::size_t>> modes;  // coordinate = index into components[i].terms
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t initial_mode = 0;

  std::size_t mode_count() const { return modes.size(); }
  std::vector<std::string> mode_terms(std::size_t mode) const;
  std::string mode_name(std::size_t mode) const { return "q" + std::to_string(mode + 1); }
  std::optional<std::size_t> find_mode(const std::vector<std::size_t>& coordinates) const;
  std::size_t out_degree(std::size_t mode) const;
};

ModeGraph build_mode_graph(const std::vector<SwitchingTherapy>& partition, const StGraph& graph);

/// Everything the analyze step produces for a model.
struct TherapyAnalysis {
  std::vector<GlobalAction> actions;
  StoichiometricMatrix matrix;
  NecessaryConditionsReport conditions;
  StGraph st_graph;
  Partition partition;
  std::optional<ModeGraph> mode_graph;  // set when T is well-formed

  bool well_formed() const { return conditions.passed() && partition.ok() && mode_graph.has_value(); }
};

TherapyAnalysis analyze(const Model& model);

}  // namespace dcgf
