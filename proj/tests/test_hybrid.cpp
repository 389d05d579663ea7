#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "dcgf/builtin.hpp"
#include "dcgf/hybrid.hpp"
#include "dcgf/parser.hpp"
#include "dcgf/simulator.hpp"
#include "dcgf/stoichiometry.hpp"

using namespace dcgf;

namespace {

using Expanded = std::vector<ExpandedMonomial>;

Expanded sorted(Expanded e) {
  std::sort(e.begin(), e.end());
  return e;
}

// Hand-expanded SIR-with-therapy right-hand sides for inputs (t1, t2).
std::vector<Expanded> expected_rhs(bool t1, bool t2) {
  Expanded s{{1, "b", {"S"}}, {1, "b", {"I"}}, {1, "b", {"R"}}, {-1, "mu", {"S"}}, {-1, "beta", {"I", "S"}}};
  Expanded i{{-1, "mu", {"I"}}, {-1, "nu", {"I"}}, {1, "beta", {"I", "S"}}};
  Expanded r{{-1, "mu", {"R"}}, {1, "nu", {"I"}}};
  if (t1) {
    s.push_back({-1, "rho", {"S"}});
    r.push_back({1, "rho", {"S"}});
  }
  if (t2) {
    i.push_back({-1, "k", {"I"}});
    r.push_back({1, "k", {"I"}});
  }
  return {sorted(s), sorted(i), sorted(r)};
}

struct TherapyPieces {
  Model model;
  std::vector<GlobalAction> actions;
  StoichiometricMatrix matrix;
  std::vector<RateExpression> phi;
};

TherapyPieces pieces() {
  TherapyPieces p{builtin_model("sir-therapy"), {}, {}, {}};
  p.actions = elaborate_actions(p.model);
  p.matrix = build_matrix(p.actions, p.model);
  p.phi = build_rate_vector(p.actions);
  return p;
}

std::string entry(const ModeRateVector& v, const std::string& label) {
  auto it = std::find(v.labels.begin(), v.labels.end(), label);
  REQUIRE(it != v.labels.end());
  return v.entries[static_cast<std::size_t>(it - v.labels.begin())].to_string();
}

}  // namespace

TEST_CASE("phi specialised to the all-off and all-on modes") {
  auto p = pieces();
  auto q1 = specialize_rate_vector(p.matrix, p.phi, {"T1_off", "T2_off"});
  CHECK(entry(q1, "j") == "0");
  CHECK(entry(q1, "h") == "0");
  CHECK(entry(q1, "i") == "beta*S*I");
  CHECK(entry(q1, "1on") == "0");
  CHECK(entry(q1, "S_1") == "b*S");

  auto q4 = specialize_rate_vector(p.matrix, p.phi, {"T1_on", "T2_on"});
  CHECK(entry(q4, "j") == "rho*S");
  CHECK(entry(q4, "h") == "k*I");
  CHECK(entry(q4, "2off") == "0");
}

TEST_CASE("per-mode right-hand sides match the hand expansion") {
  auto sys = compile_switched_system(builtin_model("sir-therapy"));
  REQUIRE(sys.mode_count() == 4);
  CHECK(sys.input_names == std::vector<std::string>{"T1", "T2"});
  CHECK(sys.binary_inputs());
  for (std::size_t q = 0; q < 4; ++q) {
    INFO(sys.mode_names[q]);
    const bool t1 = sys.mode_inputs[q][0] == 1;
    const bool t2 = sys.mode_inputs[q][1] == 1;
    auto want = expected_rhs(t1, t2);
    for (std::size_t r = 0; r < 3; ++r) CHECK(expand(sys.mode_rhs[q][r]) == want[r]);
  }
  CHECK(sys.mode_inputs[1] == std::vector<int>{1, 0});
  CHECK(sys.mode_inputs[2] == std::vector<int>{0, 1});
}

TEST_CASE("mode rhs equals the restricted product M|S * phi_q at random states") {
  auto p = pieces();
  auto sys = compile_switched_system(p.model);
  auto params = p.model.parameter_table();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t q = 0; q < sys.mode_count(); ++q) {
    auto phi_q = specialize_rate_vector(p.matrix, p.phi, sys.mode_terms[q]);
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<double> x{u(rng), u(rng), u(rng)};
      std::vector<double> phi(p.matrix.column_count(), 0.0);
      for (std::size_t c = 0; c < phi.size(); ++c) {
        const auto& e = phi_q.entries[c];
        if (e.form == RateForm::zero) continue;
        double v = e.rate.evaluate(params);
        for (const auto& f : e.factors) {
          auto at = std::find(sys.state_names.begin(), sys.state_names.end(), f);
          REQUIRE(at != sys.state_names.end());
          v *= x[static_cast<std::size_t>(at - sys.state_names.begin())];
        }
        phi[c] = v;
      }
      auto dx = sys.rhs(q, x);
      for (std::size_t r = 0; r < 3; ++r) {
        double want = 0.0;
        for (std::size_t c = 0; c < phi.size(); ++c) want += p.matrix.at(r, c) * phi[c];
        CHECK(dx[r] == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("with both therapies off the switched system is the plain SIR model") {
  auto sys = compile_switched_system(builtin_model("sir-therapy"));
  auto plain = builtin_model("sir");
  auto actions = elaborate_actions(plain);
  auto ode = derive_ode(build_matrix(actions, plain), build_rate_vector(actions), plain.parameter_table());
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x{u(rng), u(rng), u(rng)};
    auto a = sys.rhs(0, x);
    auto b = evaluate_rhs(ode, x, ode.parameters);
    for (std::size_t r = 0; r < 3; ++r) CHECK(a[r] == doctest::Approx(b[r]).epsilon(1e-12));
  }
  for (std::size_t r = 0; r < 3; ++r) CHECK(expand(sys.mode_rhs[0][r]) == expand(ode.rhs[r]));
}

TEST_CASE("binary inputs select modes, first coordinate fastest") {
  auto sys = compile_switched_system(builtin_model("sir-therapy"));
  CHECK(sys.mode_for_input(std::vector<int>{0, 0}) == 0);
  CHECK(sys.mode_for_input(std::vector<int>{1, 0}) == 1);
  CHECK(sys.mode_for_input(std::vector<int>{0, 1}) == 2);
  CHECK(sys.mode_for_input(std::vector<int>{1, 1}) == 3);
  CHECK_THROWS_AS(sys.mode_for_input(std::vector<int>{2, 0}), Error);
  CHECK_THROWS_AS(sys.mode_for_input(std::vector<int>{1}), Error);
  CHECK(sys.mode_terms[3] == std::vector<std::string>{"T1_on", "T2_on"});
  CHECK(sys.initial_mode == 0);
  CHECK(sys.output(2, std::vector<double>{0.1, 0.2, 0.3}) == std::vector<double>{0.1, 0.2, 0.3});
}

TEST_CASE("mode rhs equals the formulation with T1, T2 as 0/1 multipliers") {
  auto sys = compile_switched_system(builtin_model("sir-therapy"));
  const auto& p = sys.parameters;
  const double b = p.at("b"), mu = p.at("mu"), beta = p.at("beta"), nu = p.at("nu"), rho = p.at("rho"), k = p.at("k");
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t q = 0; q < 4; ++q) {
    const double t1 = sys.mode_inputs[q][0], t2 = sys.mode_inputs[q][1];
    for (int trial = 0; trial < 25; ++trial) {
      const double S = u(rng), I = u(rng), R = u(rng);
      auto dx = sys.rhs(q, std::vector<double>{S, I, R});
      CHECK(dx[0] == doctest::Approx(b * (S + I + R) - beta * S * I - mu * S - t1 * rho * S).epsilon(1e-12));
      CHECK(dx[1] == doctest::Approx(beta * S * I - mu * I - nu * I - t2 * k * I).epsilon(1e-12));
      CHECK(dx[2] == doctest::Approx(nu * I - mu * R + t1 * rho * S + t2 * k * I).epsilon(1e-12));
    }
  }
}

TEST_CASE("ill-formed therapies cannot be compiled") {
  auto src = std::string(*builtin_source("sir-therapy"));
  auto at = src.find("init T1_off | T2_off");
  src.replace(at, std::string("init T1_off | T2_off").size(), "init T1_off | T1_on | T2_off");
  auto r = parse(src);
  REQUIRE(r.ok());
  try {
    compile_switched_system(*r.model);
    FAIL("expected a model error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::model);
  }
}

TEST_CASE("osteomyelitis output and fixed points") {
  auto sys = osteomyelitis_system({{"k1", 0.3}, {"k2", 0.1}});
  CHECK(sys.state_names == std::vector<std::string>{"Oc", "Ob", "B"});
  CHECK(sys.mode_count() == 4);
  std::vector<double> x{2.0, 10.0, 30.0};
  CHECK(sys.output(0, x)[0] == doctest::Approx(0.4));

  auto base = osteomyelitis_system();
  const double s = base.parameters.at("s");
  for (double b : {1.0, 17.0, 80.0}) {
    std::vector<double> z{5.0, 300.0, b};
    CHECK(base.rhs(1, z)[2] == 0.0);  // T1 on
    CHECK(base.rhs(3, z)[2] == 0.0);
    CHECK(base.rhs(0, z)[2] > 0.0);
  }
  std::vector<double> at_capacity{5.0, 300.0, s};
  for (std::size_t q = 0; q < 4; ++q) CHECK(base.rhs(q, at_capacity)[2] == doctest::Approx(0.0));
}

TEST_CASE("the anti-inflammatory input only touches the osteoclast equation") {
  auto sys = osteomyelitis_system();
  std::vector<double> x{5.0, 300.0, 10.0};
  auto off = sys.rhs(0, x);
  auto on = sys.rhs(2, x);
  CHECK(off[0] != on[0]);
  CHECK(off[1] == on[1]);
  CHECK(off[2] == on[2]);
}

TEST_CASE("osteomyelitis parameter errors") {
  CHECK_THROWS_AS(osteomyelitis_system({{"nope", 1.0}}), Error);
  CHECK_THROWS_AS(osteomyelitis_system({{"s", 0.0}}), Error);
  CHECK_THROWS_AS(osteomyelitis_system({{"B0", -1.0}}), Error);
}

TEST_CASE("osteomyelitis states stay positive under every mode at the default step") {
  auto sys = osteomyelitis_system();
  for (std::size_t q = 0; q < 4; ++q) {
    auto traj = integrate(sys, ModeSchedule::constant(q, 1.0), sys.initial_state, kDefaultStep, Method::euler);
    REQUIRE_FALSE(traj.failure.has_value());
    for (const auto& x : traj.states) {
      for (double v : x) CHECK(v > 0.0);
    }
  }
}
