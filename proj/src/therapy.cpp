#include "dcgf/therapy.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace dcgf {

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

void add_witness(ConditionResult& result, std::string witness) {
  result.passed = false;
  result.witnesses.push_back(std::move(witness));
}

std::size_t count_in(const std::vector<std::string>& terms, const Multiset& collection) {
  std::size_t n = 0;
  for (const auto& t : terms) n += count(t, collection);
  return n;
}

// Union-find over vertex indices.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;  // smallest index stays the root
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

NecessaryConditionsReport check_necessary_conditions(const StoichiometricMatrix& matrix,
                                                     const std::vector<GlobalAction>& actions) {
  NecessaryConditionsReport report;
  for (std::size_t c = 0; c < matrix.column_count(); ++c) {
    int sum = 0;
    std::size_t consumed = 0;
    for (std::size_t r = matrix.species_count; r < matrix.row_count(); ++r) {
      int v = matrix.at(r, c);
      if (v < -1 || v > 1) add_witness(report.entries_in_range, matrix.rows[r] + "@" + matrix.columns[c]);
      sum += v;
      if (v == -1) ++consumed;
    }
    if (sum != 0) add_witness(report.conservation, matrix.columns[c]);
    if (consumed > 1) add_witness(report.exclusive_switch_1, matrix.columns[c]);
    if (consumed > 0) {
      bool internal = c < actions.size() && actions[c].is_internal();
      if (!internal || !matrix.species_inert(c)) add_witness(report.exclusive_switch_2, matrix.columns[c]);
    }
  }
  return report;
}

StGraph build_st_graph(const StoichiometricMatrix& matrix) {
  StGraph g;
  g.vertices.assign(matrix.rows.begin() + static_cast<std::ptrdiff_t>(matrix.species_count), matrix.rows.end());
  std::size_t n = g.vertices.size();
  std::vector<std::vector<std::string>> witnesses(n * n);
  for (std::size_t c = 0; c < matrix.column_count(); ++c) {
    for (std::size_t u1 = 0; u1 < n; ++u1) {
      if (matrix.at(matrix.species_count + u1, c) != -1) continue;
      for (std::size_t u2 = 0; u2 < n; ++u2) {
        if (matrix.at(matrix.species_count + u2, c) == 1) witnesses[u1 * n + u2].push_back(matrix.columns[c]);
      }
    }
  }
  for (std::size_t u1 = 0; u1 < n; ++u1) {
    for (std::size_t u2 = 0; u2 < n; ++u2) {
      auto& w = witnesses[u1 * n + u2];
      if (!w.empty()) g.edges.push_back({g.vertices[u1], g.vertices[u2], std::move(w)});
    }
  }
  return g;
}

std::vector<Diagnostic> verify_switching_therapy(const std::vector<std::string>& terms, const Model& model,
                                                 const std::vector<GlobalAction>& actions) {
  std::vector<Diagnostic> out;
  auto set_name = "{" + join(terms) + "}";
  auto report = [&](std::string code, std::string message) {
    out.push_back({Severity::error, std::move(code), std::move(message), model.init_span});
  };

  std::size_t initial = count_in(terms, model.initial_combination);
  if (initial != 1) {
    report("st-initial", fmt::format("{} has {} initially active terms (expected exactly 1)", set_name, initial));
  }
  auto in_set = [&](const std::string& name) { return std::find(terms.begin(), terms.end(), name) != terms.end(); };
  for (const auto& a : actions) {
    std::size_t consumed = count_in(terms, a.reactants);
    std::size_t produced = count_in(terms, a.products);
    if (consumed != produced || consumed > 1) {
      report("st-conservation",
             fmt::format("action '{}' consumes {} and produces {} terms of {}", a.label, consumed, produced, set_name));
    }
    for (const auto& u1 : a.reactants) {
      if (!in_set(u1)) continue;
      for (const auto& u2 : a.products) {
        if (!in_set(u2) || u1 == u2) continue;
        bool pure = a.reactants == Multiset{u1} && a.products == Multiset{u2};
        if (!pure) {
          report("st-switch", fmt::format("action '{}' switches {} to {} but is not an internal action of {}", a.label,
                                          u1, u2, u1));
        }
      }
    }
  }
  return out;
}

Partition partition_switching_therapies(const StGraph& graph, const Model& model,
                                        const std::vector<GlobalAction>& actions) {
  Partition result;
  const auto& vertices = graph.vertices;
  auto index_of = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(vertices.begin(), vertices.end(), name) - vertices.begin());
  };

  DisjointSets sets(vertices.size());
  for (const auto& e : graph.edges) sets.unite(index_of(e.from), index_of(e.to));

  std::vector<std::vector<std::string>> components;
  std::vector<std::size_t> slot(vertices.size(), vertices.size());
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    auto root = sets.find(v);
    if (slot[root] == vertices.size()) {
      slot[root] = components.size();
      components.emplace_back();
    }
    components[slot[root]].push_back(vertices[v]);
  }

  for (const auto& terms : components) {
    auto set_name = "{" + join(terms) + "}";
    SwitchingTherapy st;
    st.terms = terms;
    bool accepted = true;

    std::size_t initial = count_in(terms, model.initial_combination);
    if (initial != 1) {
      accepted = false;
      result.diagnostics.push_back({Severity::error, "initial-count",
                                    fmt::format("component {} has initial count {} in the initial combination "
                                                "(expected exactly 1)",
                                                set_name, initial),
                                    model.init_span});
    } else {
      for (const auto& t : terms) {
        if (count(t, model.initial_combination) == 1) st.initially_active = t;
      }
    }

    for (const auto& a : actions) {
      std::size_t consumed = count_in(terms, a.reactants);
      if (consumed > 1) {
        accepted = false;
        const auto* def = model.find_term(a.reactants.front());
        result.diagnostics.push_back(
            {Severity::error, "multiple-reactants",
             fmt::format("action '{}' has {} reactants from component {} (at most 1 allowed)", a.label, consumed,
                         set_name),
             def ? def->span : SourceSpan{}});
      }
      bool switches = false;
      for (const auto& r : a.reactants) {
        if (std::find(terms.begin(), terms.end(), r) != terms.end() && net_change(a, r) == -1) switches = true;
      }
      if (switches) st.switch_actions.push_back(a.label);
    }

    if (accepted) {
      for (auto d : verify_switching_therapy(terms, model, actions)) {
        d.severity = Severity::warning;
        d.message = "component accepted but the switching-therapy definition does not hold: " + d.message;
        result.diagnostics.push_back(std::move(d));
      }
    }
    result.therapies.push_back(std::move(st));
  }
  return result;
}

std::vector<std::string> ModeGraph::mode_terms(std::size_t mode) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < components.size(); ++i) out.push_back(components[i].terms[modes[mode][i]]);
  return out;
}

std::optional<std::size_t> ModeGraph::find_mode(const std::vector<std::size_t>& coordinates) const {
  if (coordinates.size() != components.size()) return std::nullopt;
  std::size_t index = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (coordinates[i] >= components[i].terms.size()) return std::nullopt;
    index += coordinates[i] * stride;
    stride *= components[i].terms.size();
  }
  return index;
}

std::size_t ModeGraph::out_degree(std::size_t mode) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const auto& e) { return e.first == mode; }));
}

ModeGraph build_mode_graph(const std::vector<SwitchingTherapy>& partition, const StGraph& graph) {
  ModeGraph mg;
  mg.components = partition;
  std::size_t total = 1;
  for (const auto& c : partition) total *= c.terms.size();

  for (std::size_t q = 0; q < total; ++q) {
    std::vector<std::size_t> coords(partition.size());
    std::size_t rest = q;
    for (std::size_t i = 0; i < partition.size(); ++i) {
      coords[i] = rest % partition[i].terms.size();
      rest /= partition[i].terms.size();
    }
    mg.modes.push_back(std::move(coords));
  }

  auto position = [](const SwitchingTherapy& st, const std::string& term) -> std::optional<std::size_t> {
    auto it = std::find(st.terms.begin(), st.terms.end(), term);
    if (it == st.terms.end()) return std::nullopt;
    return static_cast<std::size_t>(it - st.terms.begin());
  };
  for (std::size_t q = 0; q < total; ++q) {
    for (std::size_t i = 0; i < partition.size(); ++i) {
      const auto& current = partition[i].terms[mg.modes[q][i]];
      for (const auto& e : graph.edges) {
        if (e.from != current) continue;
        auto target = position(partition[i], e.to);
        if (!target) continue;
        auto coords = mg.modes[q];
        coords[i] = *target;
        mg.edges.emplace_back(q, *mg.find_mode(coords));
      }
    }
  }
  std::sort(mg.edges.begin(), mg.edges.end());

  std::vector<std::size_t> initial(partition.size(), 0);
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (auto p = position(partition[i], partition[i].initially_active)) initial[i] = *p;
  }
  mg.initial_mode = *mg.find_mode(initial);
  return mg;
}

TherapyAnalysis analyze(const Model& model) {
  TherapyAnalysis a;
  a.actions = elaborate_actions(model);
  a.matrix = build_matrix(a.actions, model);
  a.conditions = check_necessary_conditions(a.matrix, a.actions);
  a.st_graph = build_st_graph(a.matrix);
  if (!a.conditions.passed()) return a;
  a.partition = partition_switching_therapies(a.st_graph, model, a.actions);
  if (a.partition.ok()) a.mode_graph = build_mode_graph(a.partition.therapies, a.st_graph);
  return a;
}

}  // namespace dcgf
