#include "dcgf/report.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace dcgf {

using nlohmann::json;

namespace {

json condition_json(const ConditionResult& c) { return {{"passed", c.passed}, {"witnesses", c.witnesses}}; }

json conditions_json(const NecessaryConditionsReport& r) {
  return {{"entries_in_range", condition_json(r.entries_in_range)},
          {"conservation", condition_json(r.conservation)},
          {"exclusive_switch_1", condition_json(r.exclusive_switch_1)},
          {"exclusive_switch_2", condition_json(r.exclusive_switch_2)},
          {"passed", r.passed()}};
}

json matrix_json(const StoichiometricMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    std::vector<int> row(m.entries.begin() + static_cast<std::ptrdiff_t>(r * m.column_count()),
                         m.entries.begin() + static_cast<std::ptrdiff_t>((r + 1) * m.column_count()));
    rows.push_back(row);
  }
  return {{"rows", m.rows}, {"columns", m.columns}, {"species_count", m.species_count}, {"entries", rows}};
}

json phi_json(const StoichiometricMatrix& m, const std::vector<RateExpression>& phi) {
  json out = json::array();
  for (std::size_t c = 0; c < phi.size(); ++c) out.push_back({{"action", m.columns[c]}, {"rate", phi[c].to_string()}});
  return out;
}

json rhs_json(const std::vector<std::string>& names, const std::vector<std::vector<Monomial>>& rhs) {
  json out = json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    json terms = json::array();
    for (const auto& e : expand(rhs[i])) {
      terms.push_back({{"coefficient", e.coefficient}, {"symbol", e.symbol}, {"factors", e.factors}});
    }
    out.push_back({{"state", names[i]}, {"rhs", format_monomials(rhs[i])}, {"monomials", terms}});
  }
  return out;
}

std::string rhs_text(const std::vector<std::string>& names, const std::vector<std::vector<Monomial>>& rhs,
                     const std::string& indent) {
  std::size_t width = 0;
  for (const auto& n : names) width = std::max(width, n.size());
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += fmt::format("{}d{}/dt{} = {}\n", indent, names[i], std::string(width - names[i].size(), ' '),
                       format_monomials(rhs[i]));
  }
  return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Emit parse_emit(std::string_view name) {
  if (name == "all") return Emit::all;
  if (name == "matrix") return Emit::matrix;
  if (name == "phi") return Emit::phi;
  if (name == "ode") return Emit::ode;
  if (name == "css") return Emit::css;
  throw Error(ErrorKind::argument, fmt::format("unknown emit target '{}' (all, matrix, phi, ode, css)", name));
}

std::string analysis_json(const TherapyAnalysis& a) {
  json j;
  std::vector<std::string> labels;
  for (const auto& act : a.actions) labels.push_back(act.label);
  j["actions"] = labels;
  j["necessary_conditions"] = conditions_json(a.conditions);
  json edges = json::array();
  for (const auto& e : a.st_graph.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"actions", e.actions}});
  j["st_graph"] = {{"vertices", a.st_graph.vertices}, {"edges", edges}};
  json parts = json::array();
  for (const auto& st : a.partition.therapies) {
    parts.push_back(
        {{"terms", st.terms}, {"initially_active", st.initially_active}, {"switch_actions", st.switch_actions}});
  }
  j["switching_therapies"] = parts;
  j["diagnostics"] = json::parse(diagnostics_to_json(a.partition.diagnostics));
  if (a.mode_graph) {
    const auto& g = *a.mode_graph;
    json modes = json::array();
    for (std::size_t q = 0; q < g.mode_count(); ++q) modes.push_back({{"name", g.mode_name(q)}, {"terms", g.mode_terms(q)}});
    json medges = json::array();
    for (const auto& [from, to] : g.edges) medges.push_back({g.mode_name(from), g.mode_name(to)});
    j["mode_graph"] = {{"modes", modes}, {"edges", medges}, {"initial_mode", g.mode_name(g.initial_mode)}};
  } else {
    j["mode_graph"] = nullptr;
  }
  j["well_formed"] = a.well_formed();
  return j.dump(2);
}

std::string analysis_text(const TherapyAnalysis& a) {
  std::string out;
  auto line = [&](const char* name, const ConditionResult& c) {
    out += fmt::format("{:<20} {}", name, c.passed ? "pass" : "FAIL");
    if (!c.witnesses.empty()) out += "  [" + join(c.witnesses, ", ") + "]";
    out += "\n";
  };
  line("entries_in_range", a.conditions.entries_in_range);
  line("conservation", a.conditions.conservation);
  line("exclusive_switch_1", a.conditions.exclusive_switch_1);
  line("exclusive_switch_2", a.conditions.exclusive_switch_2);
  for (const auto& st : a.partition.therapies) {
    out += fmt::format("switching therapy {{{}}} initially {}\n", join(st.terms, ", "), st.initially_active);
  }
  if (!a.partition.diagnostics.empty()) out += format_diagnostics(a.partition.diagnostics);
  if (a.mode_graph) {
    const auto& g = *a.mode_graph;
    out += fmt::format("{} modes, initial {}\n", g.mode_count(), g.mode_name(g.initial_mode));
    for (std::size_t q = 0; q < g.mode_count(); ++q) {
      out += fmt::format("  {} = ({})\n", g.mode_name(q), join(g.mode_terms(q), ", "));
    }
  }
  out += a.well_formed() ? "well-formed\n" : "not well-formed\n";
  return out;
}

std::string st_graph_dot(const StGraph& graph) {
  std::string out = "digraph st_graph {\n";
  for (const auto& v : graph.vertices) out += fmt::format("  {};\n", quote(v));
  for (const auto& e : graph.edges) {
    out += fmt::format("  {} -> {} [label={}];\n", quote(e.from), quote(e.to), quote(join(e.actions, ",")));
  }
  return out + "}\n";
}

std::string mode_graph_dot(const ModeGraph& graph) {
  std::string out = "digraph mode_graph {\n";
  for (std::size_t q = 0; q < graph.mode_count(); ++q) {
    out += fmt::format("  {} [label={}{}];\n", graph.mode_name(q), quote(join(graph.mode_terms(q), " | ")),
                       q == graph.initial_mode ? ", peripheries=2" : "");
  }
  for (const auto& [from, to] : graph.edges) out += fmt::format("  {} -> {};\n", graph.mode_name(from), graph.mode_name(to));
  return out + "}\n";
}

std::string matrix_text(const StoichiometricMatrix& m) {
  std::size_t row_width = 0;
  for (const auto& r : m.rows) row_width = std::max(row_width, r.size());
  std::vector<std::size_t> widths;
  for (const auto& c : m.columns) widths.push_back(std::max<std::size_t>(c.size(), 2));
  std::string out(row_width, ' ');
  for (std::size_t c = 0; c < m.column_count(); ++c) out += fmt::format(" {:>{}}", m.columns[c], widths[c]);
  out += "\n";
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    out += fmt::format("{:<{}}", m.rows[r], row_width);
    for (std::size_t c = 0; c < m.column_count(); ++c) out += fmt::format(" {:>{}}", m.at(r, c), widths[c]);
    out += "\n";
  }
  return out;
}

std::string compile_report(const Model& model, Emit emit, TextFormat format) {
  auto actions = elaborate_actions(model);
  auto matrix = build_matrix(actions, model);
  auto phi = build_rate_vector(actions);
  const bool has_therapies = !model.therapies.empty();
  const bool want_ode = emit == Emit::ode || (emit == Emit::all && !has_therapies);
  const bool want_css = emit == Emit::css || (emit == Emit::all && has_therapies);

  std::optional<OdeSystem> ode;
  if (want_ode) ode = derive_ode(matrix, phi, model.parameter_table());
  std::optional<SwitchedSystem> css;
  if (want_css) css = compile_switched_system(model);

  if (format == TextFormat::json) {
    json j;
    if (emit == Emit::all || emit == Emit::matrix) j["matrix"] = matrix_json(matrix);
    if (emit == Emit::all || emit == Emit::phi) j["phi"] = phi_json(matrix, phi);
    if (ode) j["ode"] = rhs_json(ode->state_names, ode->rhs);
    if (css) {
      json modes = json::array();
      for (std::size_t q = 0; q < css->mode_count(); ++q) {
        modes.push_back({{"name", css->mode_names[q]},
                         {"terms", css->mode_terms[q]},
                         {"input", css->mode_inputs[q]},
                         {"rhs", rhs_json(css->state_names, css->mode_rhs[q])}});
      }
      j["css"] = {{"states", css->state_names},
                  {"inputs", css->input_names},
                  {"initial_mode", css->mode_names[css->initial_mode]},
                  {"modes", modes}};
    }
    return j.dump(2) + "\n";
  }

  std::string out;
  if (emit == Emit::all || emit == Emit::matrix) out += matrix_text(matrix);
  if (emit == Emit::all || emit == Emit::phi) {
    if (!out.empty()) out += "\n";
    std::size_t width = 0;
    for (const auto& c : matrix.columns) width = std::max(width, c.size());
    for (std::size_t c = 0; c < phi.size(); ++c) out += fmt::format("{:<{}} : {}\n", matrix.columns[c], width, phi[c].to_string());
  }
  if (ode) {
    if (!out.empty()) out += "\n";
    out += rhs_text(ode->state_names, ode->rhs, "");
  }
  if (css) {
    for (std::size_t q = 0; q < css->mode_count(); ++q) {
      std::vector<std::string> input;
      for (int u : css->mode_inputs[q]) input.push_back(std::to_string(u));
      if (!out.empty()) out += "\n";
      out += fmt::format("{} ({})  {} = ({})\n", css->mode_names[q], join(css->mode_terms[q], ", "),
                         join(css->input_names, ","), join(input, ","));
      out += rhs_text(css->state_names, css->mode_rhs[q], "  ");
    }
  }
  return out;
}

}  // namespace dcgf
