#include "dcgf/stoichiometry.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

namespace dcgf {

int StoichiometricMatrix::at(std::string_view row, std::string_view column) const {
  auto r = row_index(row);
  auto c = column_index(column);
  if (!r) throw Error(ErrorKind::argument, fmt::format("no matrix row '{}'", row));
  if (!c) throw Error(ErrorKind::argument, fmt::format("no matrix column '{}'", column));
  return at(*r, *c);
}

std::optional<std::size_t> StoichiometricMatrix::row_index(std::string_view name) const {
  auto it = std::find(rows.begin(), rows.end(), name);
  if (it == rows.end()) return std::nullopt;
  return static_cast<std::size_t>(it - rows.begin());
}

std::optional<std::size_t> StoichiometricMatrix::column_index(std::string_view label) const {
  auto it = std::find(columns.begin(), columns.end(), label);
  if (it == columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns.begin());
}

namespace {

StoichiometricMatrix slice_rows(const StoichiometricMatrix& m, std::size_t first, std::size_t last,
                                std::size_t species_count) {
  StoichiometricMatrix out;
  out.rows.assign(m.rows.begin() + static_cast<std::ptrdiff_t>(first), m.rows.begin() + static_cast<std::ptrdiff_t>(last));
  out.columns = m.columns;
  out.species_count = species_count;
  out.entries.assign(m.entries.begin() + static_cast<std::ptrdiff_t>(first * m.column_count()),
                     m.entries.begin() + static_cast<std::ptrdiff_t>(last * m.column_count()));
  return out;
}

}  // namespace

StoichiometricMatrix StoichiometricMatrix::species_rows() const {
  return slice_rows(*this, 0, species_count, species_count);
}

StoichiometricMatrix StoichiometricMatrix::therapy_rows() const {
  return slice_rows(*this, species_count, rows.size(), 0);
}

bool StoichiometricMatrix::species_inert(std::size_t column) const {
  for (std::size_t r = 0; r < species_count; ++r) {
    if (at(r, column) != 0) return false;
  }
  return true;
}

StoichiometricMatrix build_matrix(const std::vector<GlobalAction>& actions, const Model& model) {
  StoichiometricMatrix m;
  m.rows = model.term_names();
  m.species_count = model.species.size();
  for (const auto& a : actions) m.columns.push_back(a.label);
  m.entries.resize(m.rows.size() * m.columns.size());
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    for (std::size_t c = 0; c < actions.size(); ++c) m.entries[r * m.columns.size() + c] = net_change(actions[c], m.rows[r]);
  }
  return m;
}

RateExpression rate_expression(const GlobalAction& action) {
  const auto& react = action.reactants;
  RateExpression e;
  e.rate = action.rate;
  switch (react.size()) {
    case 0:
      e.form = RateForm::zero;
      e.rate = {};
      break;
    case 1:
      e.form = RateForm::unary;
      e.factors = react;
      break;
    case 2:
      if (react[0] == react[1]) {
        e.form = RateForm::homodimer;
        e.factors = {react[0]};
      } else {
        e.form = RateForm::binary;
        e.factors = react;
      }
      break;
    default:
      throw Error(ErrorKind::model, fmt::format("action '{}' has {} reactants; at most two are supported",
                                                action.label, react.size()));
  }
  return e;
}

std::vector<RateExpression> build_rate_vector(const std::vector<GlobalAction>& actions) {
  std::vector<RateExpression> phi;
  phi.reserve(actions.size());
  for (const auto& a : actions) phi.push_back(rate_expression(a));
  return phi;
}

std::string RateExpression::to_string() const {
  if (form == RateForm::zero) return "0";
  std::string r = rate.to_string();
  if (rate.terms.size() > 1) r = "(" + r + ")";
  switch (form) {
    case RateForm::constant:
      return r;
    case RateForm::unary:
    case RateForm::binary: {
      for (const auto& f : factors) r += "*" + f;
      return r;
    }
    case RateForm::homodimer:
      return fmt::format("{}*{}*({} - 1)", r, factors.front(), factors.front());
    case RateForm::zero:
      break;
  }
  return "0";
}

std::vector<ExpandedMonomial> expand(const std::vector<Monomial>& terms) {
  std::map<std::pair<std::string, std::vector<std::string>>, double> merged;
  for (const auto& m : terms) {
    if (m.phi.form == RateForm::zero || m.coefficient == 0) continue;
    auto factors = m.phi.factors;
    std::sort(factors.begin(), factors.end());
    for (const auto& t : m.phi.rate.terms) {
      double c = m.coefficient * t.coefficient;
      if (m.phi.form == RateForm::homodimer) {
        merged[{t.symbol, {factors[0], factors[0]}}] += c;
        merged[{t.symbol, {factors[0]}}] -= c;
      } else {
        merged[{t.symbol, factors}] += c;
      }
    }
  }
  std::vector<ExpandedMonomial> out;
  for (const auto& [key, c] : merged) {
    if (c != 0.0) out.push_back({c, key.first, key.second});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string format_monomials(const std::vector<Monomial>& terms) {
  if (terms.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& m = terms[i];
    int mag = m.coefficient < 0 ? -m.coefficient : m.coefficient;
    if (i == 0) {
      if (m.coefficient < 0) out += "-";
    } else {
      out += m.coefficient < 0 ? " - " : " + ";
    }
    if (mag != 1) out += fmt::format("{}*", mag);
    out += m.phi.to_string();
  }
  return out;
}

OdeSystem derive_ode(const StoichiometricMatrix& matrix, const std::vector<RateExpression>& phi,
                     ParameterTable parameters) {
  if (phi.size() != matrix.column_count()) {
    throw Error(ErrorKind::argument, "rate vector and matrix disagree on the number of actions");
  }
  OdeSystem ode;
  ode.parameters = std::move(parameters);
  ode.state_names.assign(matrix.rows.begin(), matrix.rows.begin() + static_cast<std::ptrdiff_t>(matrix.species_count));
  ode.rhs.resize(matrix.species_count);
  for (std::size_t r = 0; r < matrix.species_count; ++r) {
    for (std::size_t c = 0; c < matrix.column_count(); ++c) {
      int coefficient = matrix.at(r, c);
      if (coefficient == 0 || phi[c].form == RateForm::zero) continue;
      for (const auto& f : phi[c].factors) {
        if (std::find(ode.state_names.begin(), ode.state_names.end(), f) == ode.state_names.end()) {
          throw Error(ErrorKind::model, fmt::format("action '{}' depends on therapy term '{}'; derive the switched "
                                                    "system instead of a plain ODE",
                                                    matrix.columns[c], f));
        }
      }
      ode.rhs[r].push_back({coefficient, phi[c], matrix.columns[c]});
    }
  }
  return ode;
}

CompiledRhs::CompiledRhs(const std::vector<std::vector<Monomial>>& rhs, const std::vector<std::string>& state_names,
                         const ParameterTable& params)
    : dimension_(state_names.size()) {
  auto index_of = [&](const std::string& name) {
    auto it = std::find(state_names.begin(), state_names.end(), name);
    if (it == state_names.end()) throw Error(ErrorKind::runtime, "unbound state symbol '" + name + "'");
    return static_cast<std::size_t>(it - state_names.begin());
  };
  for (std::size_t row = 0; row < rhs.size(); ++row) {
    for (const auto& m : rhs[row]) {
      if (m.phi.form == RateForm::zero) continue;
      Term t{row, m.coefficient * m.phi.rate.evaluate(params), m.phi.form, 0, 0};
      if (!m.phi.factors.empty()) t.first = index_of(m.phi.factors[0]);
      if (m.phi.factors.size() > 1) t.second = index_of(m.phi.factors[1]);
      terms_.push_back(t);
    }
  }
}

void CompiledRhs::operator()(std::span<const double> x, std::span<double> dx) const {
  std::fill(dx.begin(), dx.end(), 0.0);
  for (const auto& t : terms_) {
    double v = t.weight;
    switch (t.form) {
      case RateForm::zero:
        v = 0.0;
        break;
      case RateForm::constant:
        break;
      case RateForm::unary:
        v *= x[t.first];
        break;
      case RateForm::binary:
        v *= x[t.first] * x[t.second];
        break;
      case RateForm::homodimer:
        v *= x[t.first] * (x[t.first] - 1.0);
        break;
    }
    dx[t.row] += v;
  }
}

std::vector<double> evaluate_rhs(const OdeSystem& ode, std::span<const double> state, const ParameterTable& params) {
  if (state.size() != ode.state_names.size()) {
    throw Error(ErrorKind::argument, fmt::format("state has {} entries, expected {}", state.size(), ode.state_names.size()));
  }
  CompiledRhs f(ode.rhs, ode.state_names, params);
  std::vector<double> dx(state.size());
  f(state, dx);
  return dx;
}

}  // namespace dcgf
