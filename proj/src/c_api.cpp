#include "dcgf/dcgf.h"

#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "dcgf/builtin.hpp"
#include "dcgf/mpc.hpp"
#include "dcgf/parser.hpp"
#include "dcgf/report.hpp"
#include "dcgf/simulator.hpp"
#include "dcgf/therapy.hpp"

struct dcgf_buffer {
  std::string data;
};

struct dcgf_model {
  dcgf::Model model;
};

struct dcgf_system {
  dcgf::SwitchedSystem system;
};

struct dcgf_trajectory {
  dcgf::Trajectory trajectory;
};

struct dcgf_control_run {
  dcgf::ControlRun run;
  dcgf::CftocProblem problem;
};

namespace {

thread_local std::string last_error;

dcgf_status status_of(dcgf::ErrorKind kind) {
  switch (kind) {
    case dcgf::ErrorKind::model: return DCGF_ERR_MODEL;
    case dcgf::ErrorKind::infeasible: return DCGF_ERR_INFEASIBLE;
    case dcgf::ErrorKind::runtime: return DCGF_ERR_RUNTIME;
    case dcgf::ErrorKind::argument: return DCGF_ERR_ARGUMENT;
    case dcgf::ErrorKind::io: return DCGF_ERR_IO;
  }
  return DCGF_ERR_INTERNAL;
}

dcgf_status fail(dcgf_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <class F>
dcgf_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return DCGF_OK;
  } catch (const dcgf::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DCGF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DCGF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DCGF_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw dcgf::Error(dcgf::ErrorKind::argument, fmt::format("{} must not be null", what));
}

dcgf_buffer* make_buffer(std::string data) { return new dcgf_buffer{std::move(data)}; }

dcgf_status parse_into(const std::string& source, const char* filename, dcgf_model** out, dcgf_buffer** diagnostics) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto result = dcgf::parse(source, filename ? filename : "<input>");
    if (diagnostics) *diagnostics = make_buffer(dcgf::format_diagnostics(result.diagnostics));
    if (!result.ok()) {
      std::string first;
      for (const auto& d : result.diagnostics) {
        if (d.severity == dcgf::Severity::error) {
          first = dcgf::format_diagnostics({d});
          break;
        }
      }
      while (!first.empty() && first.back() == '\n') first.pop_back();
      throw dcgf::Error(dcgf::ErrorKind::model, first.empty() ? "model has errors" : first);
    }
    *out = new dcgf_model{std::move(*result.model)};
  });
}

Eigen::MatrixXd read_matrix(const double* data, std::size_t rows, std::size_t cols, const char* what) {
  require(data, what);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r * cols + c];
  }
  return m;
}

dcgf::CftocProblem problem_from(const dcgf::SwitchedSystem& sys, const dcgf_control_options* o) {
  require(o, "options");
  const std::size_t n = sys.state_dim();
  const std::size_t m = sys.input_dim();
  dcgf::CftocProblem p;
  p.horizon = o->horizon;
  p.dt = o->dt;
  p.Q = read_matrix(o->Q, n, n, "Q");
  p.R = read_matrix(o->R, m, m, "R");
  for (std::size_t v = 0; o->terminal_vertices && v < o->vertex_count; ++v) {
    p.terminal_vertices.emplace_back(o->terminal_vertices + v * n, o->terminal_vertices + (v + 1) * n);
  }
  p.terminal_mode = o->hard_terminal ? dcgf::TerminalMode::hard : dcgf::TerminalMode::soft;
  p.terminal_penalty = o->terminal_penalty;
  p.terminal_epsilon = o->terminal_epsilon;
  p.state_box.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.state_box[i] = {o->box_lo ? o->box_lo[i] : 0.0, o->box_hi ? o->box_hi[i] : 1.0};
  p.enumeration_cap = o->enumeration_cap;
  if (!(p.terminal_penalty >= 0.0)) throw dcgf::Error(dcgf::ErrorKind::argument, "terminal penalty must be nonnegative");
  if (!(p.terminal_epsilon >= 0.0)) throw dcgf::Error(dcgf::ErrorKind::argument, "terminal epsilon must be nonnegative");
  return p;
}

std::vector<double> initial_or(const dcgf::SwitchedSystem& sys, const double* x0) {
  return x0 ? std::vector<double>(x0, x0 + sys.state_dim()) : sys.initial_state;
}

template <class T>
const char* name_at(const T* holder, const std::vector<std::string>& names, std::size_t index) {
  if (!holder || index >= names.size()) return nullptr;
  return names[index].c_str();
}

// Preset storage referenced by dcgf_control_options_scenario.
constexpr double kScenarioQ[9] = {1, 0, 0, 0, 10, 0, 0, 0, 0.5};
constexpr double kScenarioR[3][4] = {{0.1, 0, 0, 0.1}, {100, 0, 0, 0.1}, {0.1, 0, 0, 100}};
constexpr double kScenarioVertices[6] = {1, 0, 0, 0, 0, 1};
constexpr const char* kScenarioLabels[3] = {"scenario-1", "scenario-2", "scenario-3"};

}  // namespace

extern "C" {

const char* dcgf_last_error(void) { return last_error.c_str(); }
const char* dcgf_version(void) { return "0.1.0"; }

const char* dcgf_buffer_data(const dcgf_buffer* buffer) { return buffer ? buffer->data.c_str() : ""; }
size_t dcgf_buffer_size(const dcgf_buffer* buffer) { return buffer ? buffer->data.size() : 0; }
void dcgf_buffer_free(dcgf_buffer* buffer) { delete buffer; }

dcgf_status dcgf_model_parse(const char* source, const char* filename, dcgf_model** out, dcgf_buffer** diagnostics) {
  if (!source) return fail(DCGF_ERR_ARGUMENT, "source must not be null");
  return parse_into(source, filename, out, diagnostics);
}

dcgf_status dcgf_model_load_file(const char* path, dcgf_model** out, dcgf_buffer** diagnostics) {
  if (!path) return fail(DCGF_ERR_ARGUMENT, "path must not be null");
  std::ifstream in(path, std::ios::binary);
  if (!in) return fail(DCGF_ERR_IO, fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_into(ss.str(), path, out, diagnostics);
}

dcgf_status dcgf_model_builtin(const char* name, dcgf_model** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = new dcgf_model{dcgf::builtin_model(name)};
  });
}

dcgf_status dcgf_model_set_param(dcgf_model* model, const char* name, double value) {
  return guarded([&] {
    require(model, "model");
    require(name, "name");
    model->model.set_parameter(name, value);
  });
}

dcgf_status dcgf_model_render(const dcgf_model* model, dcgf_buffer** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = make_buffer(dcgf::render(model->model));
  });
}

size_t dcgf_model_species_count(const dcgf_model* model) { return model ? model->model.species.size() : 0; }
size_t dcgf_model_therapy_count(const dcgf_model* model) { return model ? model->model.therapies.size() : 0; }
void dcgf_model_free(dcgf_model* model) { delete model; }

dcgf_status dcgf_model_analyze(const dcgf_model* model, dcgf_format format, dcgf_buffer** report, int* well_formed) {
  return guarded([&] {
    require(model, "model");
    require(report, "report");
    auto analysis = dcgf::analyze(model->model);
    *report = make_buffer(format == DCGF_FORMAT_JSON ? dcgf::analysis_json(analysis) + "\n" : dcgf::analysis_text(analysis));
    if (well_formed) *well_formed = analysis.well_formed() ? 1 : 0;
  });
}

dcgf_status dcgf_model_st_graph_dot(const dcgf_model* model, dcgf_buffer** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = make_buffer(dcgf::st_graph_dot(dcgf::analyze(model->model).st_graph));
  });
}

dcgf_status dcgf_model_mode_graph_dot(const dcgf_model* model, dcgf_buffer** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    auto analysis = dcgf::analyze(model->model);
    if (!analysis.mode_graph) throw dcgf::Error(dcgf::ErrorKind::model, "therapies are not well-formed; no mode graph");
    *out = make_buffer(dcgf::mode_graph_dot(*analysis.mode_graph));
  });
}

dcgf_status dcgf_model_matrix(const dcgf_model* model, size_t* rows, size_t* columns, int* entries) {
  return guarded([&] {
    require(model, "model");
    auto matrix = dcgf::build_matrix(dcgf::elaborate_actions(model->model), model->model);
    if (rows) *rows = matrix.row_count();
    if (columns) *columns = matrix.column_count();
    if (entries) std::copy(matrix.entries.begin(), matrix.entries.end(), entries);
  });
}

dcgf_status dcgf_model_compile(const dcgf_model* model, const char* emit, dcgf_format format, dcgf_buffer** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    auto target = dcgf::parse_emit(emit ? emit : "all");
    auto fmt_kind = format == DCGF_FORMAT_JSON ? dcgf::TextFormat::json : dcgf::TextFormat::text;
    *out = make_buffer(dcgf::compile_report(model->model, target, fmt_kind));
  });
}

dcgf_status dcgf_system_from_model(const dcgf_model* model, dcgf_system** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = new dcgf_system{dcgf::compile_switched_system(model->model)};
  });
}

dcgf_status dcgf_system_builtin(const char* name, const char* const* keys, const double* values, size_t count,
                                dcgf_system** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    if (count) {
      require(keys, "keys");
      require(values, "values");
    }
    std::string_view n = name;
    if (n.starts_with("builtin:")) n.remove_prefix(8);
    if (n == "osteomyelitis") {
      dcgf::ParameterTable overrides;
      for (std::size_t i = 0; i < count; ++i) overrides[keys[i]] = values[i];
      *out = new dcgf_system{dcgf::osteomyelitis_system(overrides)};
      return;
    }
    auto model = dcgf::builtin_model(n);
    for (std::size_t i = 0; i < count; ++i) model.set_parameter(keys[i], values[i]);
    *out = new dcgf_system{dcgf::compile_switched_system(model)};
  });
}

size_t dcgf_system_state_dim(const dcgf_system* s) { return s ? s->system.state_dim() : 0; }
size_t dcgf_system_output_dim(const dcgf_system* s) { return s ? s->system.output_dim() : 0; }
size_t dcgf_system_input_dim(const dcgf_system* s) { return s ? s->system.input_dim() : 0; }
size_t dcgf_system_mode_count(const dcgf_system* s) { return s ? s->system.mode_count() : 0; }
const char* dcgf_system_state_name(const dcgf_system* s, size_t i) { return s ? name_at(s, s->system.state_names, i) : nullptr; }
const char* dcgf_system_output_name(const dcgf_system* s, size_t i) { return s ? name_at(s, s->system.output_names, i) : nullptr; }
const char* dcgf_system_input_name(const dcgf_system* s, size_t i) { return s ? name_at(s, s->system.input_names, i) : nullptr; }
const char* dcgf_system_mode_name(const dcgf_system* s, size_t i) { return s ? name_at(s, s->system.mode_names, i) : nullptr; }
size_t dcgf_system_initial_mode(const dcgf_system* s) { return s ? s->system.initial_mode : 0; }

dcgf_status dcgf_system_initial_state(const dcgf_system* s, double* x) {
  return guarded([&] {
    require(s, "system");
    require(x, "x");
    std::copy(s->system.initial_state.begin(), s->system.initial_state.end(), x);
  });
}

dcgf_status dcgf_system_rhs(const dcgf_system* s, size_t mode, const double* x, double* dx) {
  return guarded([&] {
    require(s, "system");
    require(x, "x");
    require(dx, "dx");
    if (mode >= s->system.mode_count()) throw dcgf::Error(dcgf::ErrorKind::argument, "mode out of range");
    const auto n = s->system.state_dim();
    s->system.rhs(mode, std::span<const double>(x, n), std::span<double>(dx, n));
  });
}

dcgf_status dcgf_system_output(const dcgf_system* s, size_t mode, const double* x, double* y) {
  return guarded([&] {
    require(s, "system");
    require(x, "x");
    require(y, "y");
    if (mode >= s->system.mode_count()) throw dcgf::Error(dcgf::ErrorKind::argument, "mode out of range");
    auto out = s->system.output(mode, std::span<const double>(x, s->system.state_dim()));
    std::copy(out.begin(), out.end(), y);
  });
}

dcgf_status dcgf_system_mode_for_input(const dcgf_system* s, const int* input, size_t* mode) {
  return guarded([&] {
    require(s, "system");
    require(input, "input");
    require(mode, "mode");
    *mode = s->system.mode_for_input(std::span<const int>(input, s->system.input_dim()));
  });
}

dcgf_status dcgf_system_find_mode(const dcgf_system* s, const char* name, size_t* mode) {
  return guarded([&] {
    require(s, "system");
    require(name, "name");
    require(mode, "mode");
    const auto& names = s->system.mode_names;
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw dcgf::Error(dcgf::ErrorKind::argument, fmt::format("no mode named '{}'", name));
    *mode = static_cast<std::size_t>(it - names.begin());
  });
}

void dcgf_system_free(dcgf_system* s) { delete s; }

void dcgf_simulate_options_init(dcgf_simulate_options* o) {
  if (!o) return;
  *o = dcgf_simulate_options{};
  o->dt = dcgf::kDefaultStep;
  o->method = DCGF_EULER;
  o->clamp_lo = 0.0;
  o->clamp_hi = 1.0;
}

dcgf_status dcgf_simulate(const dcgf_system* s, const dcgf_simulate_options* o, dcgf_trajectory** out) {
  return guarded([&] {
    require(s, "system");
    require(o, "options");
    require(out, "out");
    dcgf::ModeSchedule schedule;
    schedule.duration = o->duration;
    if (o->switch_times) {
      require(o->switch_modes, "switch_modes");
      for (std::size_t i = 0; i < o->switch_count; ++i) schedule.segments.push_back({o->switch_times[i], o->switch_modes[i]});
    } else {
      schedule.segments.push_back({0.0, o->mode});
    }
    std::optional<std::vector<dcgf::Interval>> clamp;
    if (o->clamp) clamp = std::vector<dcgf::Interval>(s->system.state_dim(), dcgf::Interval{o->clamp_lo, o->clamp_hi});
    auto method = o->method == DCGF_RK4 ? dcgf::Method::rk4 : dcgf::Method::euler;
    *out = new dcgf_trajectory{dcgf::integrate(s->system, schedule, initial_or(s->system, o->x0), o->dt, method, clamp)};
  });
}

size_t dcgf_trajectory_size(const dcgf_trajectory* t) { return t ? t->trajectory.size() : 0; }

double dcgf_trajectory_time(const dcgf_trajectory* t, size_t k) {
  return t && k < t->trajectory.size() ? t->trajectory.times[k] : 0.0;
}

dcgf_status dcgf_trajectory_state(const dcgf_trajectory* t, size_t k, double* x) {
  return guarded([&] {
    require(t, "trajectory");
    require(x, "x");
    if (k >= t->trajectory.size()) throw dcgf::Error(dcgf::ErrorKind::argument, "sample out of range");
    std::copy(t->trajectory.states[k].begin(), t->trajectory.states[k].end(), x);
  });
}

size_t dcgf_trajectory_mode(const dcgf_trajectory* t, size_t k) {
  return t && k < t->trajectory.size() ? t->trajectory.modes[k] : 0;
}

const char* dcgf_trajectory_failure(const dcgf_trajectory* t) {
  return t && t->trajectory.failure ? t->trajectory.failure->c_str() : nullptr;
}

dcgf_status dcgf_trajectory_write(const dcgf_trajectory* t, dcgf_format format, dcgf_buffer** out) {
  return guarded([&] {
    require(t, "trajectory");
    require(out, "out");
    *out = make_buffer(format == DCGF_FORMAT_JSON ? dcgf::trajectory_to_json(t->trajectory) + "\n"
                                                  : dcgf::trajectory_to_csv(t->trajectory));
  });
}

void dcgf_trajectory_free(dcgf_trajectory* t) { delete t; }

void dcgf_control_options_init(dcgf_control_options* o) {
  if (!o) return;
  *o = dcgf_control_options{};
  o->horizon = 3;
  o->dt = dcgf::kDefaultStep;
  o->terminal_penalty = 1e3;
  o->terminal_epsilon = 1e-6;
  o->enumeration_cap = 4096;
}

dcgf_status dcgf_control_options_scenario(dcgf_control_options* o, int scenario) {
  return guarded([&] {
    require(o, "options");
    if (scenario < 1 || scenario > 3) {
      throw dcgf::Error(dcgf::ErrorKind::argument, fmt::format("scenario must be 1, 2 or 3, got {}", scenario));
    }
    auto preset = dcgf::scenario_problem(scenario);
    o->horizon = preset.horizon;
    o->dt = preset.dt;
    o->Q = kScenarioQ;
    o->R = kScenarioR[scenario - 1];
    o->terminal_vertices = kScenarioVertices;
    o->vertex_count = 2;
    o->label = kScenarioLabels[scenario - 1];
  });
}

dcgf_status dcgf_control(const dcgf_system* s, const dcgf_control_options* o, dcgf_control_run** out) {
  return guarded([&] {
    require(s, "system");
    require(out, "out");
    auto problem = problem_from(s->system, o);
    std::optional<std::vector<dcgf::Interval>> clamp;
    if (o->clamp_plant) clamp = problem.state_box;
    auto run = dcgf::run_receding_horizon(problem, s->system, initial_or(s->system, o->x0), o->duration,
                                          o->label ? o->label : "", clamp);
    *out = new dcgf_control_run{std::move(run), std::move(problem)};
  });
}

dcgf_status dcgf_solve_cftoc(const dcgf_system* s, const dcgf_control_options* o, const double* x0, int* inputs,
                             double* cost, int* feasible) {
  return guarded([&] {
    require(s, "system");
    auto problem = problem_from(s->system, o);
    auto solution = dcgf::solve_cftoc(problem, s->system, initial_or(s->system, x0));
    if (inputs) {
      for (const auto& u : solution.inputs) inputs = std::copy(u.begin(), u.end(), inputs);
    }
    if (cost) *cost = solution.cost;
    if (feasible) *feasible = solution.feasible ? 1 : 0;
  });
}

size_t dcgf_control_run_size(const dcgf_control_run* r) { return r ? r->run.steps.size() : 0; }

dcgf_status dcgf_control_run_input(const dcgf_control_run* r, size_t k, int* input) {
  return guarded([&] {
    require(r, "run");
    require(input, "input");
    if (k >= r->run.steps.size()) throw dcgf::Error(dcgf::ErrorKind::argument, "sample out of range");
    std::copy(r->run.steps[k].input.begin(), r->run.steps[k].input.end(), input);
  });
}

double dcgf_control_run_cost(const dcgf_control_run* r, size_t k) {
  return r && k < r->run.steps.size() ? r->run.steps[k].predicted_cost : 0.0;
}

int dcgf_control_run_feasible(const dcgf_control_run* r, size_t k) {
  return r && k < r->run.steps.size() && r->run.steps[k].feasible ? 1 : 0;
}

const char* dcgf_control_run_failure(const dcgf_control_run* r) {
  return r && r->run.failure ? r->run.failure->c_str() : nullptr;
}

dcgf_status dcgf_control_run_csv(const dcgf_control_run* r, dcgf_buffer** out) {
  return guarded([&] {
    require(r, "run");
    require(out, "out");
    *out = make_buffer(dcgf::control_run_to_csv(r->run));
  });
}

dcgf_status dcgf_control_run_summary(const dcgf_control_run* r, dcgf_buffer** out) {
  return guarded([&] {
    require(r, "run");
    require(out, "out");
    *out = make_buffer(dcgf::control_run_summary_json(r->run, r->problem) + "\n");
  });
}

dcgf_status dcgf_control_run_trajectory(const dcgf_control_run* r, dcgf_format format, dcgf_buffer** out) {
  return guarded([&] {
    require(r, "run");
    require(out, "out");
    *out = make_buffer(format == DCGF_FORMAT_JSON ? dcgf::trajectory_to_json(r->run.trajectory) + "\n"
                                                  : dcgf::trajectory_to_csv(r->run.trajectory));
  });
}

void dcgf_control_run_free(dcgf_control_run* r) { delete r; }

}  // extern "C"
