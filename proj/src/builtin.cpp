#include "dcgf/builtin.hpp"

#include <fmt/format.h>

#include "dcgf/parser.hpp"

namespace dcgf {

namespace {

constexpr std::string_view kSir = R"(# SIR with births, deaths and recovery
param b = 0.02
param mu = 0.02
param beta = 1800
param nu = 100

species S = tau<b>.(S|S) + tau<mu>.0 + ?i<beta>.I
species I = tau<b>.(I|S) + tau<mu>.0 + !i<beta>.I + tau<nu>.R
species R = tau<b>.(R|S) + tau<mu>.0

population S: 0.3, I: 0.7, R: 0
)";

constexpr std::string_view kSirTherapy = R"(# SIR with vaccination (T1) and treatment (T2)
param b = 0.02
param mu = 0.02
param beta = 1800
param nu = 100
param rho = 0.5
param k = 50
param r1_on = 1
param r1_off = 1
param r2_on = 1
param r2_off = 1

species S = tau<b>.(S|S) + tau<mu>.0 + ?i<beta>.I + ?j<rho>.R
species I = tau<b>.(I|S) + tau<mu>.0 + tau<nu>.R + !i<beta>.I + ?h<k>.R
species R = tau<b>.(R|S) + tau<mu>.0

population S: 0.3, I: 0.7, R: 0

therapy T1_off = tau[1on]<r1_on>.T1_on
therapy T1_on = !j<rho>.T1_on + tau[1off]<r1_off>.T1_off
therapy T2_off = tau[2on]<r2_on>.T2_on
therapy T2_on = !h<k>.T2_on + tau[2off]<r2_off>.T2_off

init T1_off | T2_off
)";

std::string_view strip_prefix(std::string_view name) {
  constexpr std::string_view prefix = "builtin:";
  if (name.starts_with(prefix)) name.remove_prefix(prefix.size());
  return name;
}

}  // namespace

std::optional<std::string_view> builtin_source(std::string_view name) {
  name = strip_prefix(name);
  if (name == "sir") return kSir;
  if (name == "sir-therapy") return kSirTherapy;
  return std::nullopt;
}

std::vector<std::string> builtin_names() { return {"sir", "sir-therapy", "osteomyelitis"}; }

Model builtin_model(std::string_view name) {
  auto source = builtin_source(name);
  if (!source) throw Error(ErrorKind::argument, fmt::format("no textual built-in model named '{}'", name));
  auto result = parse(*source, fmt::format("builtin:{}", strip_prefix(name)));
  if (!result.ok()) throw Error(ErrorKind::model, format_diagnostics(result.diagnostics));
  return std::move(*result.model);
}

CftocProblem scenario_problem(int scenario) {
  CftocProblem p;
  p.horizon = 3;
  p.dt = kScenarioStep;
  p.Q = Eigen::Vector3d(1.0, 10.0, 0.5).asDiagonal();
  switch (scenario) {
    case 1: p.R = Eigen::Vector2d(0.1, 0.1).asDiagonal(); break;
    case 2: p.R = Eigen::Vector2d(100.0, 0.1).asDiagonal(); break;
    case 3: p.R = Eigen::Vector2d(0.1, 100.0).asDiagonal(); break;
    default: throw Error(ErrorKind::argument, fmt::format("scenario must be 1, 2 or 3, got {}", scenario));
  }
  p.state_box.assign(3, Interval{0.0, 1.0});
  p.terminal_vertices = {{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
  return p;
}

}  // namespace dcgf
