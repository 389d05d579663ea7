#include "dcgf/hybrid.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace dcgf {

bool SwitchedSystem::binary_inputs() const {
  return std::all_of(input_arity.begin(), input_arity.end(), [](int n) { return n == 2; });
}

std::vector<double> SwitchedSystem::rhs(std::size_t mode, std::span<const double> x) const {
  std::vector<double> dx(state_dim());
  field->rhs(mode, x, dx);
  return dx;
}

std::vector<double> SwitchedSystem::output(std::size_t mode, std::span<const double> x) const {
  std::vector<double> y(output_dim());
  field->output(mode, x, y);
  return y;
}

std::size_t SwitchedSystem::mode_for_input(std::span<const int> input) const {
  if (input.size() != input_dim()) {
    throw Error(ErrorKind::argument, fmt::format("input has {} components, expected {}", input.size(), input_dim()));
  }
  std::size_t index = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input[i] < 0 || input[i] >= input_arity[i]) {
      throw Error(ErrorKind::argument, fmt::format("input {} = {} outside 0..{}", input_names[i], input[i], input_arity[i] - 1));
    }
    index += static_cast<std::size_t>(input[i]) * stride;
    stride *= static_cast<std::size_t>(input_arity[i]);
  }
  return index;
}

ModeRateVector specialize_rate_vector(const StoichiometricMatrix& matrix, const std::vector<RateExpression>& phi,
                                      const std::vector<std::string>& active_terms) {
  ModeRateVector out;
  out.active_terms = active_terms;
  out.labels = matrix.columns;
  const auto species = std::vector<std::string>(matrix.rows.begin(),
                                                matrix.rows.begin() + static_cast<std::ptrdiff_t>(matrix.species_count));
  auto is_species = [&](const std::string& n) { return std::find(species.begin(), species.end(), n) != species.end(); };
  auto is_active = [&](const std::string& n) {
    return std::find(active_terms.begin(), active_terms.end(), n) != active_terms.end();
  };

  for (std::size_t c = 0; c < phi.size(); ++c) {
    const auto& e = phi[c];
    RateExpression s;
    if (e.form == RateForm::zero || matrix.species_inert(c)) {
      out.entries.push_back(s);
      continue;
    }
    bool vanishes = false;
    std::vector<std::string> kept;
    for (const auto& f : e.factors) {
      if (is_species(f)) {
        kept.push_back(f);
      } else if (!is_active(f) || e.form == RateForm::homodimer) {
        // U*(U-1) is 0 for U in {0,1}
        vanishes = true;
      }
    }
    if (!vanishes) {
      s.rate = e.rate;
      s.factors = kept;
      if (e.form == RateForm::homodimer) {
        s.form = RateForm::homodimer;
      } else if (kept.empty()) {
        s.form = RateForm::constant;
      } else {
        s.form = kept.size() == 1 ? RateForm::unary : RateForm::binary;
      }
    }
    out.entries.push_back(std::move(s));
  }
  return out;
}

namespace {

class MassActionField final : public VectorField {
 public:
  explicit MassActionField(std::vector<CompiledRhs> modes) : modes_(std::move(modes)) {}

  void rhs(std::size_t mode, std::span<const double> x, std::span<double> dx) const override { modes_.at(mode)(x, dx); }

  void output(std::size_t, std::span<const double> x, std::span<double> y) const override {
    std::copy(x.begin(), x.end(), y.begin());
  }

 private:
  std::vector<CompiledRhs> modes_;
};

std::string input_name(const SwitchingTherapy& st, std::size_t index) {
  // T1_off / T1_on -> T1
  if (st.terms.size() >= 2) {
    std::string prefix = st.terms.front();
    for (const auto& t : st.terms) {
      std::size_t n = 0;
      while (n < prefix.size() && n < t.size() && prefix[n] == t[n]) ++n;
      prefix.resize(n);
    }
    bool at_boundary = std::all_of(st.terms.begin(), st.terms.end(), [&](const std::string& t) {
      return t.size() == prefix.size() || t[prefix.size()] == '_' || t[prefix.size()] == '-';
    });
    if (!at_boundary) {
      auto cut = prefix.find_last_of("_-");
      if (cut != std::string::npos) prefix.resize(cut);
    }
    while (!prefix.empty() && (prefix.back() == '_' || prefix.back() == '-')) prefix.pop_back();
    if (!prefix.empty()) return prefix;
  }
  return st.terms.size() == 1 ? st.terms.front() : fmt::format("u{}", index + 1);
}

}  // namespace

SwitchedSystem build_switched_system(const StoichiometricMatrix& matrix, const std::vector<RateExpression>& phi,
                                     const ModeGraph& modes, const Model& model) {
  SwitchedSystem sys;
  sys.name = "dcgf";
  sys.state_names = model.species_names();
  sys.output_names = sys.state_names;
  sys.parameters = model.parameter_table();
  sys.initial_state = model.initial_state();
  sys.initial_mode = modes.initial_mode;
  for (std::size_t i = 0; i < modes.components.size(); ++i) {
    sys.input_names.push_back(input_name(modes.components[i], i));
    sys.input_arity.push_back(static_cast<int>(modes.components[i].terms.size()));
  }

  std::vector<CompiledRhs> compiled;
  for (std::size_t q = 0; q < modes.mode_count(); ++q) {
    sys.mode_names.push_back(modes.mode_name(q));
    sys.mode_terms.push_back(modes.mode_terms(q));
    std::vector<int> input;
    for (auto c : modes.modes[q]) input.push_back(static_cast<int>(c));
    sys.mode_inputs.push_back(std::move(input));

    auto phi_q = specialize_rate_vector(matrix, phi, sys.mode_terms.back());
    std::vector<std::vector<Monomial>> rhs(matrix.species_count);
    for (std::size_t r = 0; r < matrix.species_count; ++r) {
      for (std::size_t c = 0; c < matrix.column_count(); ++c) {
        int coefficient = matrix.at(r, c);
        if (coefficient == 0 || phi_q.entries[c].form == RateForm::zero) continue;
        rhs[r].push_back({coefficient, phi_q.entries[c], matrix.columns[c]});
      }
    }
    compiled.emplace_back(rhs, sys.state_names, sys.parameters);
    sys.mode_rhs.push_back(std::move(rhs));
  }
  sys.field = std::make_shared<MassActionField>(std::move(compiled));
  return sys;
}

SwitchedSystem compile_switched_system(const Model& model) {
  auto analysis = analyze(model);
  if (!analysis.well_formed()) {
    std::string why = analysis.conditions.passed() ? format_diagnostics(analysis.partition.diagnostics)
                                                   : "necessary well-formedness conditions fail";
    throw Error(ErrorKind::model, "therapies are not well-formed: " + why);
  }
  auto phi = build_rate_vector(analysis.actions);
  return build_switched_system(analysis.matrix, phi, *analysis.mode_graph, model);
}

namespace {

struct OsteomyelitisParams {
  double alpha1, alpha2, beta1, beta2;
  double g11, g12, g21, g22;
  double f11, f12, f21, f22;
  double s, gamma_b, k_i, k1, k2;
};

class OsteomyelitisField final : public VectorField {
 public:
  explicit OsteomyelitisField(OsteomyelitisParams p) : p_(p) {}

  void rhs(std::size_t mode, std::span<const double> x, std::span<double> dx) const override {
    const double t1 = static_cast<double>(mode % 2);
    const double t2 = static_cast<double>(mode / 2);
    const double oc = x[0];
    const double ob = x[1];
    const double b = x[2];
    const double load = b / p_.s;
    dx[0] = p_.alpha1 * std::pow(oc, p_.g11 * (1.0 + p_.f11 * load)) *
                std::pow(ob, p_.g21 * (1.0 + t2 * p_.k_i - p_.f21 * load)) -
            p_.beta1 * oc;
    dx[1] = p_.alpha2 * std::pow(oc, p_.g12 / (1.0 + p_.f12 * load)) * std::pow(ob, p_.g22 - p_.f22 * load) -
            p_.beta2 * ob;
    dx[2] = (1.0 - t1) * p_.gamma_b * b * std::log(p_.s / b);
  }

  void output(std::size_t, std::span<const double> x, std::span<double> y) const override {
    y[0] = -p_.k1 * x[0] + p_.k2 * x[1];
  }

 private:
  OsteomyelitisParams p_;
};

}  // namespace

ParameterTable osteomyelitis_defaults() {
  return {
      {"alpha1", 3.0},   {"alpha2", 4.0},   {"beta1", 0.2},    {"beta2", 0.02},   {"g11", 1.1},
      {"g12", 1.0},      {"g21", -0.5},     {"g22", 0.0},      {"f11", 0.005},    {"f12", 0.005},
      {"f21", 0.005},    {"f22", 0.005},    {"s", 100.0},      {"gamma_B", 0.004}, {"k_i", 0.1},
      {"k1", 0.0748},    {"k2", 0.0006395}, {"Oc0", 5.0},      {"Ob0", 300.0},    {"B0", 1.0},
  };
}

SwitchedSystem osteomyelitis_system(const ParameterTable& overrides) {
  auto params = osteomyelitis_defaults();
  for (const auto& [name, value] : overrides) {
    auto it = params.find(name);
    if (it == params.end()) throw Error(ErrorKind::argument, "unknown osteomyelitis parameter '" + name + "'");
    it->second = value;
  }
  auto get = [&](const char* n) { return params.at(n); };
  OsteomyelitisParams p{get("alpha1"), get("alpha2"), get("beta1"), get("beta2"), get("g11"), get("g12"),
                        get("g21"),    get("g22"),    get("f11"),   get("f12"),   get("f21"), get("f22"),
                        get("s"),      get("gamma_B"), get("k_i"),  get("k1"),    get("k2")};
  if (!(p.s > 0.0)) throw Error(ErrorKind::argument, "carrying capacity s must be positive");
  for (const char* n : {"Oc0", "Ob0", "B0"}) {
    if (!(params.at(n) > 0.0)) throw Error(ErrorKind::argument, fmt::format("initial {} must be positive", n));
  }

  SwitchedSystem sys;
  sys.name = "osteomyelitis";
  sys.state_names = {"Oc", "Ob", "B"};
  sys.output_names = {"y"};
  sys.input_names = {"T1", "T2"};
  sys.input_arity = {2, 2};
  for (int q = 0; q < 4; ++q) {
    int t1 = q % 2;
    int t2 = q / 2;
    sys.mode_names.push_back(fmt::format("q{}", q + 1));
    sys.mode_terms.push_back({t1 ? "T1_on" : "T1_off", t2 ? "T2_on" : "T2_off"});
    sys.mode_inputs.push_back({t1, t2});
  }
  sys.parameters = params;
  sys.initial_state = {params.at("Oc0"), params.at("Ob0"), params.at("B0")};
  sys.initial_mode = 0;
  sys.field = std::make_shared<OsteomyelitisField>(p);
  return sys;
}

}  // namespace dcgf
