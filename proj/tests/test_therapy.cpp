#include "doctest.h"

#include <algorithm>
#include <set>

#include "dcgf/builtin.hpp"
#include "dcgf/therapy.hpp"
#include "mutants.hpp"

using namespace dcgf;

namespace {

bool has_code(const std::vector<Diagnostic>& ds, std::string_view code) {
  return std::any_of(ds.begin(), ds.end(),
                     [&](const Diagnostic& d) { return d.code == code && d.severity == Severity::error; });
}

}  // namespace

TEST_CASE("the SIR therapy model meets the necessary conditions") {
  auto a = analyze(builtin_model("sir-therapy"));
  CHECK(a.conditions.passed());
  CHECK(a.conditions.entries_in_range.witnesses.empty());
  CHECK(a.well_formed());
}

TEST_CASE("ST-graph of the SIR therapy model") {
  auto a = analyze(builtin_model("sir-therapy"));
  CHECK(a.st_graph.vertices == std::vector<std::string>{"T1_off", "T1_on", "T2_off", "T2_on"});
  REQUIRE(a.st_graph.edges.size() == 4);
  CHECK(a.st_graph.edges[0].from == "T1_off");
  CHECK(a.st_graph.edges[0].to == "T1_on");
  CHECK(a.st_graph.edges[0].actions == std::vector<std::string>{"1on"});
  CHECK(a.st_graph.edges[1].from == "T1_on");
  CHECK(a.st_graph.edges[1].to == "T1_off");
  CHECK(a.st_graph.edges[3].actions == std::vector<std::string>{"2off"});
}

TEST_CASE("partition into switching therapies") {
  auto a = analyze(builtin_model("sir-therapy"));
  REQUIRE(a.partition.ok());
  REQUIRE(a.partition.therapies.size() == 2);
  CHECK(a.partition.therapies[0].terms == std::vector<std::string>{"T1_off", "T1_on"});
  CHECK(a.partition.therapies[0].initially_active == "T1_off");
  CHECK(a.partition.therapies[0].switch_actions == std::vector<std::string>{"1on", "1off"});
  CHECK(a.partition.therapies[1].terms == std::vector<std::string>{"T2_off", "T2_on"});
  CHECK(a.partition.diagnostics.empty());
}

TEST_CASE("accepted components satisfy the switching-therapy definition clause by clause") {
  auto model = builtin_model("sir-therapy");
  auto actions = elaborate_actions(model);
  CHECK(verify_switching_therapy({"T1_off", "T1_on"}, model, actions).empty());
  CHECK(verify_switching_therapy({"T2_off", "T2_on"}, model, actions).empty());
  auto whole = verify_switching_therapy(model.therapy_names(), model, actions);
  CHECK(has_code(whole, "st-initial"));
}

TEST_CASE("mode graph is the product of the two switches") {
  auto a = analyze(builtin_model("sir-therapy"));
  REQUIRE(a.mode_graph);
  const auto& g = *a.mode_graph;
  REQUIRE(g.mode_count() == 4);
  CHECK(g.mode_terms(0) == std::vector<std::string>{"T1_off", "T2_off"});
  CHECK(g.mode_terms(1) == std::vector<std::string>{"T1_on", "T2_off"});
  CHECK(g.mode_terms(2) == std::vector<std::string>{"T1_off", "T2_on"});
  CHECK(g.mode_terms(3) == std::vector<std::string>{"T1_on", "T2_on"});
  CHECK(g.initial_mode == 0);
  std::set<std::pair<std::size_t, std::size_t>> edges(g.edges.begin(), g.edges.end());
  std::set<std::pair<std::size_t, std::size_t>> expected{{0, 1}, {1, 0}, {0, 2}, {2, 0},
                                                         {1, 3}, {3, 1}, {2, 3}, {3, 2}};
  CHECK(edges == expected);
  for (std::size_t q = 0; q < 4; ++q) CHECK(g.out_degree(q) == 2);
  CHECK(g.find_mode({1, 1}) == std::optional<std::size_t>(3));
  CHECK_FALSE(g.find_mode({2, 0}).has_value());
  CHECK(g.mode_name(3) == "q4");
}

TEST_CASE("a model without therapies has a single empty mode") {
  auto a = analyze(builtin_model("sir"));
  CHECK(a.well_formed());
  REQUIRE(a.mode_graph);
  CHECK(a.mode_graph->mode_count() == 1);
  CHECK(a.mode_graph->edges.empty());
}

TEST_CASE("each mutant fails exactly its condition") {
  for (const auto& m : mutants::all()) {
    INFO(m.name);
    auto a = analyze(mutants::model_of(m));
    const auto& c = a.conditions;
    CHECK_FALSE(a.well_formed());
    auto contains = [&](const ConditionResult& r) {
      return std::find(r.witnesses.begin(), r.witnesses.end(), m.witness) != r.witnesses.end();
    };
    switch (m.broken) {
      case mutants::Broken::entries_in_range:
        CHECK_FALSE(c.entries_in_range.passed);
        CHECK(contains(c.entries_in_range));
        CHECK(c.conservation.passed);
        CHECK(c.exclusive_switch_1.passed);
        CHECK(c.exclusive_switch_2.passed);
        break;
      case mutants::Broken::conservation:
        CHECK(c.entries_in_range.passed);
        CHECK_FALSE(c.conservation.passed);
        CHECK(c.conservation.witnesses == std::vector<std::string>{m.witness});
        CHECK(c.exclusive_switch_1.passed);
        CHECK(c.exclusive_switch_2.passed);
        break;
      case mutants::Broken::exclusive_switch_1:
        // Two consumed therapy terms need a synchronisation, which is never
        // internal, so condition 4 fires on the same column.
        CHECK(c.entries_in_range.passed);
        CHECK(c.conservation.passed);
        CHECK(c.exclusive_switch_1.witnesses == std::vector<std::string>{m.witness});
        CHECK(c.exclusive_switch_2.witnesses == std::vector<std::string>{m.witness});
        break;
      case mutants::Broken::exclusive_switch_2:
        CHECK(c.entries_in_range.passed);
        CHECK(c.conservation.passed);
        CHECK(c.exclusive_switch_1.passed);
        CHECK(c.exclusive_switch_2.witnesses == std::vector<std::string>{m.witness});
        break;
      case mutants::Broken::initial_count:
        CHECK(c.passed());
        REQUIRE(a.partition.diagnostics.size() == 1);
        CHECK(a.partition.diagnostics[0].code == "initial-count");
        CHECK(a.partition.diagnostics[0].message.find(m.witness) != std::string::npos);
        break;
      case mutants::Broken::multiple_reactants:
        CHECK(c.passed());
        REQUIRE(a.partition.diagnostics.size() == 1);
        CHECK(a.partition.diagnostics[0].code == "multiple-reactants");
        CHECK(a.partition.diagnostics[0].message.find("'" + m.witness + "'") != std::string::npos);
        CHECK(a.partition.diagnostics[0].message.find("{T1_off, T1_on}") != std::string::npos);
        break;
    }
  }
}

TEST_CASE("a component with no active term is rejected") {
  auto src = mutants::replace_once(std::string(*builtin_source("sir-therapy")), "init T1_off | T2_off", "init T1_off");
  auto a = analyze(*parse(src).model);
  CHECK(a.conditions.passed());
  CHECK(has_code(a.partition.diagnostics, "initial-count"));
  CHECK(a.partition.diagnostics[0].message.find("{T2_off, T2_on}") != std::string::npos);
  CHECK_FALSE(a.mode_graph.has_value());
}
