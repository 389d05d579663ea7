#include "dcgf/ast.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include <fmt/format.h>

namespace dcgf {

std::size_t count(std::string_view term, const Multiset& collection) {
  return static_cast<std::size_t>(std::count(collection.begin(), collection.end(), term));
}

Rate Rate::literal(double value) { return Rate{{RateTerm{value, {}}}}; }

Rate Rate::symbol(std::string name, double coefficient) {
  return Rate{{RateTerm{coefficient, std::move(name)}}};
}

bool Rate::is_literal() const {
  return std::all_of(terms.begin(), terms.end(), [](const RateTerm& t) { return t.symbol.empty(); });
}

Rate Rate::canonical() const {
  double literal_sum = 0.0;
  bool has_literal = false;
  std::map<std::string, double> by_symbol;
  for (const auto& t : terms) {
    if (t.symbol.empty()) {
      literal_sum += t.coefficient;
      has_literal = true;
    } else {
      by_symbol[t.symbol] += t.coefficient;
    }
  }
  Rate out;
  for (const auto& [name, coefficient] : by_symbol) {
    if (coefficient != 0.0) out.terms.push_back({coefficient, name});
  }
  if (has_literal && (literal_sum != 0.0 || out.terms.empty())) out.terms.push_back({literal_sum, {}});
  return out;
}

double Rate::evaluate(const ParameterTable& params) const {
  double value = 0.0;
  for (const auto& t : terms) {
    if (t.symbol.empty()) {
      value += t.coefficient;
      continue;
    }
    auto it = params.find(t.symbol);
    if (it == params.end()) throw Error(ErrorKind::runtime, "unbound rate symbol '" + t.symbol + "'");
    value += t.coefficient * it->second;
  }
  if (value < 0.0) throw Error(ErrorKind::runtime, "rate " + to_string() + " evaluates to a negative value");
  return value;
}

std::vector<std::string> Rate::symbols() const {
  std::vector<std::string> out;
  for (const auto& t : terms) {
    if (!t.symbol.empty() && std::find(out.begin(), out.end(), t.symbol) == out.end()) out.push_back(t.symbol);
  }
  return out;
}

std::string Rate::to_string() const {
  if (terms.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if (i > 0) out += " + ";
    if (t.symbol.empty()) {
      out += fmt::format("{}", t.coefficient);
    } else if (t.coefficient == 1.0) {
      out += t.symbol;
    } else {
      out += fmt::format("{}*{}", t.coefficient, t.symbol);
    }
  }
  return out;
}

Rate operator+(const Rate& a, const Rate& b) {
  Rate out = a;
  out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
  return out;
}

std::optional<TermKind> Model::kind_of(std::string_view name) const {
  for (const auto& s : species) {
    if (s.name == name) return TermKind::species;
  }
  for (const auto& t : therapies) {
    if (t.name == name) return TermKind::therapy;
  }
  return std::nullopt;
}

const TermDef* Model::find_term(std::string_view name) const {
  for (const auto& s : species) {
    if (s.name == name) return &s;
  }
  for (const auto& t : therapies) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<std::string> Model::species_names() const {
  std::vector<std::string> out;
  for (const auto& s : species) out.push_back(s.name);
  return out;
}

std::vector<std::string> Model::therapy_names() const {
  std::vector<std::string> out;
  for (const auto& t : therapies) out.push_back(t.name);
  return out;
}

std::vector<std::string> Model::term_names() const {
  auto out = species_names();
  auto t = therapy_names();
  out.insert(out.end(), t.begin(), t.end());
  return out;
}

ParameterTable Model::parameter_table() const {
  ParameterTable table;
  for (const auto& p : parameters) table[p.name] = p.value;
  return table;
}

std::vector<double> Model::initial_state() const {
  std::vector<double> x(species.size(), 0.0);
  for (const auto& entry : population) {
    for (std::size_t i = 0; i < species.size(); ++i) {
      if (species[i].name == entry.species) x[i] = entry.concentration;
    }
  }
  return x;
}

void Model::set_parameter(std::string_view name, double value) {
  for (auto& p : parameters) {
    if (p.name == name) {
      p.value = value;
      return;
    }
  }
  throw Error(ErrorKind::argument, fmt::format("unknown parameter '{}'", name));
}

namespace {

struct ChannelUse {
  const TermDef* term;
  const Branch* branch;
};

struct ChannelTable {
  std::vector<std::string> order;  // first use
  std::map<std::string, std::pair<std::vector<ChannelUse>, std::vector<ChannelUse>>> uses;  // inputs, outputs
};

template <typename Fn>
void for_each_term(const Model& model, Fn&& fn) {
  for (const auto& s : model.species) fn(s, TermKind::species);
  for (const auto& t : model.therapies) fn(t, TermKind::therapy);
}

ChannelTable collect_channels(const Model& model) {
  ChannelTable table;
  for_each_term(model, [&](const TermDef& def, TermKind) {
    for (const auto& branch : def.branches) {
      const auto& a = branch.action;
      if (a.kind == ActionKind::internal) continue;
      auto [it, inserted] = table.uses.try_emplace(a.channel);
      if (inserted) table.order.push_back(a.channel);
      auto& side = a.kind == ActionKind::input ? it->second.first : it->second.second;
      side.push_back({&def, &branch});
    }
  });
  return table;
}

std::string internal_label(const TermDef& def, std::size_t ordinal, const Action& action) {
  if (!action.label.empty()) return action.label;
  return fmt::format("{}_{}", def.name, ordinal);
}

}  // namespace

std::vector<Diagnostic> validate(const Model& model) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string code, std::string message, const SourceSpan& span) {
    out.push_back({Severity::error, std::move(code), std::move(message), span});
  };

  std::set<std::string, std::less<>> params;
  for (const auto& p : model.parameters) {
    if (!params.insert(p.name).second) error("duplicate-definition", "parameter '" + p.name + "' defined twice", p.span);
  }

  std::set<std::string, std::less<>> names;
  for_each_term(model, [&](const TermDef& def, TermKind) {
    if (!names.insert(def.name).second) {
      error("duplicate-definition", "term '" + def.name + "' defined twice", def.span);
    }
  });

  for_each_term(model, [&](const TermDef& def, TermKind kind) {
    for (const auto& branch : def.branches) {
      for (const auto& sym : branch.action.rate.symbols()) {
        if (!params.contains(sym)) error("undeclared-parameter", "undeclared parameter '" + sym + "'", branch.span);
      }
      for (const auto& target : branch.continuation) {
        auto target_kind = model.kind_of(target);
        if (!target_kind) {
          error("undeclared-name", "undeclared term '" + target + "'", branch.span);
        } else if (*target_kind != kind) {
          out.push_back({Severity::warning, "mixed-continuation",
                         fmt::format("continuation of {} '{}' references {} '{}'",
                                     kind == TermKind::species ? "species" : "therapy", def.name,
                                     *target_kind == TermKind::species ? "species" : "therapy", target),
                         branch.span});
        }
      }
    }
  });

  std::set<std::string, std::less<>> populated;
  for (const auto& entry : model.population) {
    if (!model.is_species(entry.species)) {
      error("undeclared-name", "population entry for undeclared species '" + entry.species + "'", entry.span);
    }
    if (!populated.insert(entry.species).second) {
      error("duplicate-definition", "population of '" + entry.species + "' given twice", entry.span);
    }
    if (!(entry.concentration >= 0.0)) {
      error("negative-population", "population of '" + entry.species + "' must be nonnegative", entry.span);
    }
  }
  for (const auto& name : model.initial_combination) {
    if (!model.is_therapy(name)) {
      error("undeclared-name", "initial combination references undeclared therapy '" + name + "'", model.init_span);
    }
  }

  auto channels = collect_channels(model);
  for (const auto& channel : channels.order) {
    const auto& [inputs, outputs] = channels.uses.at(channel);
    if (inputs.empty() || outputs.empty()) {
      const auto& use = inputs.empty() ? outputs.front() : inputs.front();
      error("unmatched-channel",
            fmt::format("unmatched channel {}: {} has no matching {}", channel,
                        inputs.empty() ? "output !" + channel : "input ?" + channel,
                        inputs.empty() ? "input" : "output"),
            use.branch->span);
      continue;
    }
    for (const auto& in : inputs) {
      for (const auto& o : outputs) {
        if (in.branch->action.rate.canonical() != o.branch->action.rate.canonical()) {
          error("rate-mismatch",
                fmt::format("rate mismatch on channel {}: ?{}<{}> in '{}' vs !{}<{}> in '{}'", channel, channel,
                            in.branch->action.rate.to_string(), in.term->name, channel,
                            o.branch->action.rate.to_string(), o.term->name),
                o.branch->span);
        }
      }
    }
  }

  // Labels must be unique across internal and channel actions.
  std::map<std::string, const SourceSpan*> labels;
  for_each_term(model, [&](const TermDef& def, TermKind) {
    std::size_t ordinal = 0;
    for (const auto& branch : def.branches) {
      if (branch.action.kind != ActionKind::internal) continue;
      auto label = internal_label(def, ++ordinal, branch.action);
      if (!labels.emplace(label, &branch.span).second) {
        error("duplicate-label", "action label '" + label + "' used twice", branch.span);
      }
    }
  });
  for (const auto& channel : channels.order) {
    const auto& [inputs, outputs] = channels.uses.at(channel);
    std::size_t pairs = inputs.size() * outputs.size();
    for (std::size_t k = 1; k <= pairs; ++k) {
      auto label = pairs == 1 ? channel : fmt::format("{}_{}", channel, k);
      if (labels.contains(label)) {
        error("duplicate-label", "action label '" + label + "' collides with channel " + channel,
              inputs.front().branch->span);
      }
    }
  }
  return out;
}

std::vector<GlobalAction> elaborate_actions(const Model& model) {
  auto diags = validate(model);
  for (const auto& d : diags) {
    if (d.severity == Severity::error) throw Error(ErrorKind::model, d.message);
  }

  std::vector<GlobalAction> actions;
  auto emit_rounds = [&](const std::vector<TermDef>& defs) {
    std::vector<std::vector<const Branch*>> internals;
    std::size_t rounds = 0;
    for (const auto& def : defs) {
      auto& list = internals.emplace_back();
      for (const auto& b : def.branches) {
        if (b.action.kind == ActionKind::internal) list.push_back(&b);
      }
      rounds = std::max(rounds, list.size());
    }
    for (std::size_t k = 0; k < rounds; ++k) {
      for (std::size_t d = 0; d < defs.size(); ++d) {
        if (k >= internals[d].size()) continue;
        const auto& branch = *internals[d][k];
        GlobalAction a;
        a.label = internal_label(defs[d], k + 1, branch.action);
        a.reactants = {defs[d].name};
        a.products = branch.continuation;
        a.rate = branch.action.rate;
        a.synthesis = Synthesis::internal;
        a.owner = defs[d].name;
        actions.push_back(std::move(a));
      }
    }
  };
  emit_rounds(model.species);
  emit_rounds(model.therapies);

  auto channels = collect_channels(model);
  for (const auto& channel : channels.order) {
    const auto& [inputs, outputs] = channels.uses.at(channel);
    std::size_t pairs = inputs.size() * outputs.size();
    std::size_t k = 0;
    for (const auto& in : inputs) {
      for (const auto& o : outputs) {
        ++k;
        GlobalAction a;
        a.label = pairs == 1 ? channel : fmt::format("{}_{}", channel, k);
        a.reactants = {in.term->name, o.term->name};
        a.products = in.branch->continuation;
        a.products.insert(a.products.end(), o.branch->continuation.begin(), o.branch->continuation.end());
        a.rate = in.branch->action.rate;
        a.synthesis = Synthesis::channel;
        a.channel = channel;
        a.input_term = in.term->name;
        a.output_term = o.term->name;
        actions.push_back(std::move(a));
      }
    }
  }
  return actions;
}

int net_change(const GlobalAction& action, std::string_view term) {
  return static_cast<int>(count(term, action.products)) - static_cast<int>(count(term, action.reactants));
}

int net_change(const Model& model, const GlobalAction& action, std::string_view term) {
  if (!model.kind_of(term)) throw Error(ErrorKind::argument, fmt::format("undeclared term '{}'", term));
  return net_change(action, term);
}

}  // namespace dcgf
