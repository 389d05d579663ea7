#include "doctest.h"

#include <cmath>
#include <random>

#include "dcgf/builtin.hpp"
#include "dcgf/parser.hpp"
#include "dcgf/stoichiometry.hpp"

using namespace dcgf;

namespace {

struct Compiled {
  Model model;
  std::vector<GlobalAction> actions;
  StoichiometricMatrix matrix;
  std::vector<RateExpression> phi;
};

Compiled compile(Model model) {
  Compiled c{std::move(model), {}, {}, {}};
  c.actions = elaborate_actions(c.model);
  c.matrix = build_matrix(c.actions, c.model);
  c.phi = build_rate_vector(c.actions);
  return c;
}

std::vector<std::vector<int>> rows_of(const StoichiometricMatrix& m) {
  std::vector<std::vector<int>> out(m.row_count());
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    for (std::size_t c = 0; c < m.column_count(); ++c) out[r].push_back(m.at(r, c));
  }
  return out;
}

}  // namespace

TEST_CASE("SIR stoichiometric matrix") {
  auto c = compile(builtin_model("sir"));
  CHECK(c.matrix.rows == std::vector<std::string>{"S", "I", "R"});
  CHECK(rows_of(c.matrix) == std::vector<std::vector<int>>{
                                 {1, 1, 1, -1, 0, 0, 0, -1},
                                 {0, 0, 0, 0, -1, 0, -1, 1},
                                 {0, 0, 0, 0, 0, -1, 1, 0},
                             });
  CHECK(c.matrix.at("I", "I_3") == -1);
  CHECK_THROWS_AS(c.matrix.at("Q", "i"), Error);
  CHECK_FALSE(c.matrix.column_index("zz").has_value());
}

TEST_CASE("SIR rate vector") {
  auto c = compile(builtin_model("sir"));
  std::vector<std::string> got;
  for (const auto& e : c.phi) got.push_back(e.to_string());
  CHECK(got == std::vector<std::string>{"b*S", "b*I", "b*R", "mu*S", "mu*I", "mu*R", "nu*I", "beta*S*I"});
  CHECK(c.phi[7].form == RateForm::binary);
  CHECK(c.phi[0].form == RateForm::unary);
}

TEST_CASE("rate forms by reactant multiset") {
  GlobalAction a;
  a.rate = Rate::symbol("r");
  CHECK(rate_expression(a).form == RateForm::zero);
  a.reactants = {"X"};
  CHECK(rate_expression(a).to_string() == "r*X");
  a.reactants = {"X", "Y"};
  CHECK(rate_expression(a).to_string() == "r*X*Y");
  a.reactants = {"X", "X"};
  CHECK(rate_expression(a).form == RateForm::homodimer);
  CHECK(rate_expression(a).to_string() == "r*X*(X - 1)");
  a.reactants = {"X", "Y", "Z"};
  CHECK_THROWS_AS(rate_expression(a), Error);
}

TEST_CASE("homodimer expansion and cancellation") {
  RateExpression dimer{RateForm::homodimer, Rate::symbol("r"), {"X", "X"}};
  auto e = expand({{-2, dimer, "a"}});
  REQUIRE(e.size() == 2);
  CHECK(e[0] == ExpandedMonomial{-2.0, "r", {"X", "X"}});
  CHECK(e[1] == ExpandedMonomial{2.0, "r", {"X"}});

  RateExpression unary{RateForm::unary, Rate::symbol("r"), {"X"}};
  CHECK(expand({{1, unary, "a"}, {-1, unary, "b"}}).empty());
  RateExpression sum{RateForm::unary, Rate::symbol("nu") + Rate::symbol("k"), {"I"}};
  auto s = expand({{-1, sum, "a"}});
  CHECK(s == std::vector<ExpandedMonomial>{{-1.0, "k", {"I"}}, {-1.0, "nu", {"I"}}});
}

TEST_CASE("SIR ODE and its value at the initial state") {
  auto c = compile(builtin_model("sir"));
  auto ode = derive_ode(c.matrix, c.phi, c.model.parameter_table());
  CHECK(format_monomials(ode.rhs[0]) == "b*S + b*I + b*R - mu*S - beta*S*I");
  CHECK(format_monomials(ode.rhs[1]) == "-mu*I - nu*I + beta*S*I");
  CHECK(format_monomials(ode.rhs[2]) == "-mu*R + nu*I");
  std::vector<double> x{0.3, 0.7, 0.0};
  auto dx = evaluate_rhs(ode, x, ode.parameters);
  CHECK(dx[0] == doctest::Approx(-377.986).epsilon(1e-12));
  CHECK(dx[1] == doctest::Approx(378.0 - 0.014 - 70.0).epsilon(1e-12));
  CHECK(dx[2] == doctest::Approx(70.0).epsilon(1e-12));
}

TEST_CASE("compiled rhs agrees with a direct M*phi product at random states") {
  auto c = compile(builtin_model("sir"));
  auto params = c.model.parameter_table();
  auto ode = derive_ode(c.matrix, c.phi, params);
  CompiledRhs fast(ode.rhs, ode.state_names, params);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x{u(rng), u(rng), u(rng)};
    const double S = x[0], I = x[1], R = x[2];
    const double b = params.at("b"), mu = params.at("mu"), beta = params.at("beta"), nu = params.at("nu");
    std::vector<double> phi{b * S, b * I, b * R, mu * S, mu * I, mu * R, nu * I, beta * S * I};
    std::vector<double> expected(3, 0.0);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t k = 0; k < phi.size(); ++k) expected[r] += c.matrix.at(r, k) * phi[k];
    }
    std::vector<double> dx(3);
    fast(x, dx);
    for (std::size_t r = 0; r < 3; ++r) CHECK(dx[r] == doctest::Approx(expected[r]).epsilon(1e-12));
  }
}

TEST_CASE("with b = mu the SIR right-hand sides sum to zero on the simplex") {
  auto c = compile(builtin_model("sir"));
  auto ode = derive_ode(c.matrix, c.phi, c.model.parameter_table());
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double s = u(rng), i = u(rng) * (1 - s);
    std::vector<double> x{s, i, 1 - s - i};
    auto dx = evaluate_rhs(ode, x, ode.parameters);
    CHECK(std::abs(dx[0] + dx[1] + dx[2]) < 1e-10);
  }
}

TEST_CASE("homodimer dynamics use the falling factorial") {
  auto r = parse("param k = 2\nspecies A = ?d<k>.B + !d<k>.B\nspecies B = tau<k>.0\n");
  REQUIRE(r.ok());
  auto c = compile(*r.model);
  CHECK(c.matrix.at("A", "d") == -2);
  CHECK(c.matrix.at("B", "d") == 2);
  auto ode = derive_ode(c.matrix, c.phi, c.model.parameter_table());
  std::vector<double> x{3.0, 0.0};
  auto dx = evaluate_rhs(ode, x, ode.parameters);
  CHECK(dx[0] == doctest::Approx(-2 * 2 * 3 * 2));
  CHECK(dx[1] == doctest::Approx(2 * 2 * 3 * 2));
}

TEST_CASE("the therapy model has no plain ODE") {
  auto c = compile(builtin_model("sir-therapy"));
  CHECK(c.matrix.species_count == 3);
  CHECK(c.matrix.species_rows().rows == std::vector<std::string>{"S", "I", "R"});
  CHECK(c.matrix.therapy_rows().row_count() == 4);
  CHECK(c.matrix.species_inert(*c.matrix.column_index("1on")));
  CHECK_FALSE(c.matrix.species_inert(*c.matrix.column_index("j")));
  CHECK_THROWS_AS(derive_ode(c.matrix, c.phi), Error);
}

TEST_CASE("unbound parameters surface at evaluation time") {
  auto c = compile(builtin_model("sir"));
  auto ode = derive_ode(c.matrix, c.phi);
  std::vector<double> x{0.3, 0.7, 0.0};
  CHECK_THROWS_AS(evaluate_rhs(ode, x, {}), Error);
}
