// Command-line front end; talks to the library only through dcgf.h.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcgf/dcgf.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitModel = 1;
constexpr int kExitFailure = 2;
constexpr double kDaysPerYear = 365.0;

struct Failure {
  int code;
  std::string message;
};

int exit_code(dcgf_status status) { return status == DCGF_ERR_MODEL ? kExitModel : kExitFailure; }

void check(dcgf_status status, const std::string& context = {}) {
  if (status == DCGF_OK) return;
  std::string msg = dcgf_last_error();
  throw Failure{exit_code(status), context.empty() ? msg : context + ": " + msg};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Buffer = std::unique_ptr<dcgf_buffer, Deleter<dcgf_buffer, dcgf_buffer_free>>;
using ModelPtr = std::unique_ptr<dcgf_model, Deleter<dcgf_model, dcgf_model_free>>;
using SystemPtr = std::unique_ptr<dcgf_system, Deleter<dcgf_system, dcgf_system_free>>;
using TrajectoryPtr = std::unique_ptr<dcgf_trajectory, Deleter<dcgf_trajectory, dcgf_trajectory_free>>;
using RunPtr = std::unique_ptr<dcgf_control_run, Deleter<dcgf_control_run, dcgf_control_run_free>>;

std::string text(const Buffer& b) { return std::string(dcgf_buffer_data(b.get()), dcgf_buffer_size(b.get())); }

struct Common {
  std::string source;
  std::vector<std::string> sets;
  std::string out_dir;
  std::string format;
};

std::vector<std::pair<std::string, double>> parse_overrides(const std::vector<std::string>& sets) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw Failure{kExitFailure, "--set expects name=value, got '" + s + "'"};
    std::string value = s.substr(eq + 1);
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0') throw Failure{kExitFailure, "--set value is not a number: '" + s + "'"};
    out.emplace_back(s.substr(0, eq), v);
  }
  return out;
}

bool is_osteomyelitis(const std::string& source) {
  return source == "builtin:osteomyelitis" || source == "osteomyelitis";
}

ModelPtr load_model(const Common& c) {
  if (is_osteomyelitis(c.source)) {
    throw Failure{kExitFailure, "builtin:osteomyelitis is a compiled switched system; use simulate or control"};
  }
  dcgf_model* raw = nullptr;
  if (c.source.rfind("builtin:", 0) == 0) {
    check(dcgf_model_builtin(c.source.c_str(), &raw));
  } else {
    dcgf_buffer* diag = nullptr;
    dcgf_status st = dcgf_model_load_file(c.source.c_str(), &raw, &diag);
    Buffer diagnostics(diag);
    if (diagnostics && dcgf_buffer_size(diagnostics.get()) > 0) std::cerr << text(diagnostics);
    if (st == DCGF_ERR_MODEL) throw Failure{kExitModel, "model has errors"};
    check(st);
  }
  ModelPtr model(raw);
  for (const auto& [name, value] : parse_overrides(c.sets)) check(dcgf_model_set_param(model.get(), name.c_str(), value));
  return model;
}

SystemPtr load_system(const Common& c) {
  dcgf_system* raw = nullptr;
  if (c.source.rfind("builtin:", 0) == 0) {
    auto overrides = parse_overrides(c.sets);
    std::vector<const char*> keys;
    std::vector<double> values;
    for (const auto& [k, v] : overrides) {
      keys.push_back(k.c_str());
      values.push_back(v);
    }
    check(dcgf_system_builtin(c.source.c_str(), keys.data(), values.data(), keys.size(), &raw));
  } else {
    auto model = load_model(c);
    check(dcgf_system_from_model(model.get(), &raw));
  }
  return SystemPtr(raw);
}

std::string output_dir(const Common& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv("DCGF_OUT_DIR"); env && *env) return env;
  return {};
}

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kExitFailure, "cannot write " + path.string()};
  out << content;
}

void write_sidecar(const fs::path& dir, const std::string& command, const Common& c, json extra) {
  json meta = {{"command", command}, {"model", c.source}, {"overrides", c.sets}, {"library_version", dcgf_version()}};
  for (auto& [k, v] : extra.items()) meta[k] = v;
  write_file(dir / "run.json", meta.dump(2) + "\n");
}

dcgf_format text_or_json(const std::string& format, const char* fallback) {
  std::string f = format.empty() ? fallback : format;
  if (f == "json") return DCGF_FORMAT_JSON;
  if (f == "text" || f == "csv") return DCGF_FORMAT_TEXT;
  throw Failure{kExitFailure, "unsupported --format '" + f + "'"};
}

// "diag:a,b,c", a JSON file holding a square matrix, or inline JSON.
std::vector<double> parse_weight(const std::string& spec, std::size_t n, const char* what) {
  std::vector<double> out(n * n, 0.0);
  if (spec.rfind("diag:", 0) == 0) {
    std::stringstream ss(spec.substr(5));
    std::string item;
    std::size_t i = 0;
    while (std::getline(ss, item, ',')) {
      if (i >= n) break;
      out[i * n + i] = std::stod(item);
      ++i;
    }
    if (i != n || ss.rdbuf()->in_avail() > 0) {
      throw Failure{kExitFailure, std::string(what) + " needs " + std::to_string(n) + " diagonal entries"};
    }
    return out;
  }
  json j;
  try {
    if (fs::exists(spec)) {
      std::ifstream in(spec);
      j = json::parse(in);
    } else {
      j = json::parse(spec);
    }
  } catch (const std::exception& e) {
    throw Failure{kExitFailure, std::string("cannot read ") + what + ": " + e.what()};
  }
  if (!j.is_array() || j.size() != n) throw Failure{kExitFailure, std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n)};
  for (std::size_t r = 0; r < n; ++r) {
    if (!j[r].is_array() || j[r].size() != n) throw Failure{kExitFailure, std::string(what) + " rows must have " + std::to_string(n) + " entries"};
    for (std::size_t col = 0; col < n; ++col) out[r * n + col] = j[r][col].get<double>();
  }
  return out;
}

// "1,0,0;0,0,1"
std::vector<double> parse_vertices(const std::string& spec, std::size_t n, std::size_t* count) {
  std::vector<double> out;
  std::stringstream rows(spec);
  std::string row;
  *count = 0;
  while (std::getline(rows, row, ';')) {
    std::stringstream cells(row);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(cells, cell, ',')) {
      out.push_back(std::stod(cell));
      ++k;
    }
    if (k != n) throw Failure{kExitFailure, "terminal vertex '" + row + "' needs " + std::to_string(n) + " entries"};
    ++*count;
  }
  return out;
}

int cmd_check(const Common& c) {
  if (is_osteomyelitis(c.source)) {
    auto system = load_system(c);
    std::cout << "ok: builtin switched system with " << dcgf_system_state_dim(system.get()) << " states and "
              << dcgf_system_mode_count(system.get()) << " modes\n";
    return kExitOk;
  }
  auto model = load_model(c);
  std::cout << "ok: " << dcgf_model_species_count(model.get()) << " species, " << dcgf_model_therapy_count(model.get())
            << " therapy terms\n";
  return kExitOk;
}

int cmd_analyze(const Common& c) {
  auto model = load_model(c);
  int well_formed = 0;
  dcgf_format format = text_or_json(c.format == "dot" ? "json" : c.format, "text");
  dcgf_buffer* raw = nullptr;
  check(dcgf_model_analyze(model.get(), format, &raw, &well_formed));
  Buffer report(raw);
  check(dcgf_model_st_graph_dot(model.get(), &raw));
  Buffer st_dot(raw);
  Buffer mode_dot;
  if (well_formed) {
    check(dcgf_model_mode_graph_dot(model.get(), &raw));
    mode_dot.reset(raw);
  }

  auto dir = output_dir(c);
  if (dir.empty()) {
    std::cout << (c.format == "dot" ? text(st_dot) + (mode_dot ? "\n" + text(mode_dot) : "") : text(report));
  } else {
    check(dcgf_model_analyze(model.get(), DCGF_FORMAT_JSON, &raw, nullptr));
    Buffer json_report(raw);
    write_file(fs::path(dir) / "analysis.json", text(json_report));
    write_file(fs::path(dir) / "st_graph.dot", text(st_dot));
    if (mode_dot) write_file(fs::path(dir) / "mode_graph.dot", text(mode_dot));
    write_sidecar(dir, "analyze", c, {{"well_formed", well_formed != 0}});
    std::cout << text(report);
  }
  if (!well_formed) {
    std::cerr << "error: therapy definitions are not well-formed\n";
    return kExitModel;
  }
  return kExitOk;
}

int cmd_compile(const Common& c, const std::string& emit) {
  auto model = load_model(c);
  dcgf_format format = text_or_json(c.format, "json");
  dcgf_buffer* raw = nullptr;
  check(dcgf_model_compile(model.get(), emit.c_str(), format, &raw));
  Buffer out(raw);
  auto dir = output_dir(c);
  if (dir.empty()) {
    std::cout << text(out);
  } else {
    write_file(fs::path(dir) / (format == DCGF_FORMAT_JSON ? "compile.json" : "compile.txt"), text(out));
    write_sidecar(dir, "compile", c, {{"emit", emit}});
  }
  return kExitOk;
}

struct SimulateArgs {
  double days = 15.0;
  double dt = 1.0 / kDaysPerYear;
  std::string method = "euler";
  std::string mode;
  std::string schedule;
  std::string clamp;
};

std::pair<double, double> parse_range(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw Failure{kExitFailure, "expected LO:HI, got '" + spec + "'"};
  auto bound = [&](const std::string& s, double inf) { return s.empty() ? inf : std::stod(s); };
  return {bound(spec.substr(0, colon), -std::numeric_limits<double>::infinity()),
          bound(spec.substr(colon + 1), std::numeric_limits<double>::infinity())};
}

std::size_t resolve_mode(const dcgf_system* system, const std::string& spec) {
  std::size_t mode = 0;
  if (spec.find(',') != std::string::npos || (spec.size() == 1 && std::isdigit(static_cast<unsigned char>(spec[0])))) {
    std::vector<int> input;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) input.push_back(std::stoi(item));
    if (input.size() != dcgf_system_input_dim(system)) {
      throw Failure{kExitFailure, "input '" + spec + "' needs " + std::to_string(dcgf_system_input_dim(system)) + " components"};
    }
    check(dcgf_system_mode_for_input(system, input.data(), &mode));
  } else {
    check(dcgf_system_find_mode(system, spec.c_str(), &mode));
  }
  return mode;
}

int cmd_simulate(const Common& c, const SimulateArgs& a) {
  auto system = load_system(c);
  dcgf_simulate_options opts;
  dcgf_simulate_options_init(&opts);
  opts.dt = a.dt;
  opts.duration = a.days / kDaysPerYear;
  if (a.method == "rk4") {
    opts.method = DCGF_RK4;
  } else if (a.method != "euler") {
    throw Failure{kExitFailure, "unknown method '" + a.method + "'"};
  }
  opts.mode = a.mode.empty() ? dcgf_system_initial_mode(system.get()) : resolve_mode(system.get(), a.mode);

  std::vector<double> times;
  std::vector<std::size_t> modes;
  if (!a.schedule.empty()) {
    std::stringstream ss(a.schedule);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto at = item.find('@');
      if (at == std::string::npos) throw Failure{kExitFailure, "schedule entries look like MODE@DAY, got '" + item + "'"};
      modes.push_back(resolve_mode(system.get(), item.substr(0, at)));
      times.push_back(std::stod(item.substr(at + 1)) / kDaysPerYear);
    }
    opts.switch_times = times.data();
    opts.switch_modes = modes.data();
    opts.switch_count = times.size();
  }
  if (!a.clamp.empty()) {
    auto [lo, hi] = parse_range(a.clamp);
    opts.clamp = 1;
    opts.clamp_lo = lo;
    opts.clamp_hi = hi;
  }

  dcgf_trajectory* raw = nullptr;
  check(dcgf_simulate(system.get(), &opts, &raw));
  TrajectoryPtr traj(raw);
  dcgf_buffer* buf = nullptr;
  dcgf_format format = text_or_json(c.format, "csv");
  check(dcgf_trajectory_write(traj.get(), format, &buf));
  Buffer out(buf);

  auto dir = output_dir(c);
  if (dir.empty()) {
    std::cout << text(out);
  } else {
    write_file(fs::path(dir) / (format == DCGF_FORMAT_JSON ? "trajectory.json" : "trajectory.csv"), text(out));
    write_sidecar(dir, "simulate", c,
                  {{"days", a.days}, {"dt", a.dt}, {"method", a.method}, {"schedule", a.schedule}, {"mode", a.mode}});
  }
  if (const char* why = dcgf_trajectory_failure(traj.get())) {
    std::cerr << "error: " << why << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

struct ControlArgs {
  int scenario = 0;
  double days = 15.0;
  double dt = 0.0;
  std::size_t horizon = 0;
  std::string Q;
  std::string R;
  std::string terminal;
  bool hard = false;
  bool soft = false;
  double lambda = -1.0;
  double epsilon = -1.0;
  std::string box;
  bool clamp = false;
  std::size_t cap = 0;
  std::string label;
};

int cmd_control(const Common& c, const ControlArgs& a) {
  auto system = load_system(c);
  const std::size_t n = dcgf_system_state_dim(system.get());
  const std::size_t m = dcgf_system_input_dim(system.get());
  if (m == 0) throw Failure{kExitModel, "the model has no switching therapies to control"};

  dcgf_control_options opts;
  dcgf_control_options_init(&opts);
  if (a.scenario != 0) check(dcgf_control_options_scenario(&opts, a.scenario));
  std::vector<double> Q, R, vertices, box_lo, box_hi;
  if (!a.Q.empty()) {
    Q = parse_weight(a.Q, n, "Q");
    opts.Q = Q.data();
  }
  if (!a.R.empty()) {
    R = parse_weight(a.R, m, "R");
    opts.R = R.data();
  }
  if (!opts.Q || !opts.R) throw Failure{kExitFailure, "Q and R are required unless --scenario is given"};
  if (!a.terminal.empty()) {
    if (a.terminal == "none") {
      opts.terminal_vertices = nullptr;
      opts.vertex_count = 0;
    } else {
      vertices = parse_vertices(a.terminal, n, &opts.vertex_count);
      opts.terminal_vertices = vertices.data();
    }
  }
  if (!a.box.empty()) {
    auto [lo, hi] = parse_range(a.box);
    box_lo.assign(n, lo);
    box_hi.assign(n, hi);
    opts.box_lo = box_lo.data();
    opts.box_hi = box_hi.data();
  }
  if (a.hard && a.soft) throw Failure{kExitFailure, "--hard and --soft are exclusive"};
  opts.hard_terminal = a.hard ? 1 : 0;
  if (a.lambda >= 0.0) opts.terminal_penalty = a.lambda;
  if (a.epsilon >= 0.0) opts.terminal_epsilon = a.epsilon;
  if (a.dt > 0.0) opts.dt = a.dt;
  if (a.horizon > 0) opts.horizon = a.horizon;
  if (a.cap > 0) opts.enumeration_cap = a.cap;
  opts.clamp_plant = a.clamp ? 1 : 0;
  opts.duration = a.days / kDaysPerYear;
  std::string label = a.label.empty() ? (opts.label ? opts.label : "custom") : a.label;
  opts.label = label.c_str();

  dcgf_control_run* raw = nullptr;
  check(dcgf_control(system.get(), &opts, &raw));
  RunPtr run(raw);
  dcgf_buffer* buf = nullptr;
  check(dcgf_control_run_csv(run.get(), &buf));
  Buffer csv(buf);
  check(dcgf_control_run_summary(run.get(), &buf));
  Buffer summary(buf);
  check(dcgf_control_run_trajectory(run.get(), DCGF_FORMAT_TEXT, &buf));
  Buffer trajectory(buf);

  auto dir = output_dir(c);
  if (dir.empty()) {
    std::cout << (c.format == "csv" ? text(csv) : text(summary));
  } else {
    write_file(fs::path(dir) / "control.csv", text(csv));
    write_file(fs::path(dir) / "control_summary.json", text(summary));
    write_file(fs::path(dir) / "trajectory.csv", text(trajectory));
    write_sidecar(dir, "control", c, {{"scenario", a.scenario}, {"days", a.days}, {"dt", opts.dt}, {"label", label}});
    std::cout << text(summary);
  }
  if (const char* why = dcgf_control_run_failure(run.get())) {
    std::cerr << "error: " << why << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool with_format) {
  sub->add_option("model", c.source, "Model file or builtin:sir | builtin:sir-therapy | builtin:osteomyelitis")->required();
  sub->add_option("--set", c.sets, "Parameter override name=value (repeatable)");
  sub->add_option("-o,--out", c.out_dir, "Output directory (default: $DCGF_OUT_DIR, else stdout)");
  if (with_format) sub->add_option("--format", c.format, "Output format");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D-CGF disease models: analysis, compilation, simulation and therapy scheduling"};
  app.require_subcommand(1);

  Common common;
  std::string emit = "all";
  SimulateArgs sim;
  ControlArgs ctl;

  auto* check_cmd = app.add_subcommand("check", "Parse and validate a model");
  add_common(check_cmd, common, false);

  auto* analyze_cmd = app.add_subcommand("analyze", "Therapy well-formedness, ST-graph and mode graph");
  add_common(analyze_cmd, common, true);

  auto* compile_cmd = app.add_subcommand("compile", "Stoichiometric matrix, rate vector, ODEs and switched system");
  add_common(compile_cmd, common, true);
  compile_cmd->add_option("--emit", emit, "all | matrix | phi | ode | css");

  auto* simulate_cmd = app.add_subcommand("simulate", "Fixed-step simulation under a mode schedule");
  add_common(simulate_cmd, common, true);
  simulate_cmd->add_option("--days", sim.days, "Duration in days");
  simulate_cmd->add_option("--dt", sim.dt, "Step in years (default 1/365)");
  simulate_cmd->add_option("--method", sim.method, "euler | rk4");
  simulate_cmd->add_option("--mode", sim.mode, "Constant mode: name (q3) or input vector (1,0)");
  simulate_cmd->add_option("--schedule", sim.schedule, "Switches MODE@DAY,... starting at day 0");
  simulate_cmd->add_option("--clamp", sim.clamp, "Clamp states to LO:HI after every step");

  auto* control_cmd = app.add_subcommand("control", "Receding-horizon therapy scheduling");
  add_common(control_cmd, common, true);
  control_cmd->add_option("--scenario", ctl.scenario, "Preset 1, 2 or 3 (Q, R, terminal set, dt)");
  control_cmd->add_option("--days", ctl.days, "Duration in days");
  control_cmd->add_option("--dt", ctl.dt, "Sampling step in years");
  control_cmd->add_option("--horizon", ctl.horizon, "Prediction horizon in steps");
  control_cmd->add_option("--Q", ctl.Q, "State weight: diag:a,b,... or JSON matrix/file");
  control_cmd->add_option("--R", ctl.R, "Input weight: diag:a,b,... or JSON matrix/file");
  control_cmd->add_option("--terminal", ctl.terminal, "Terminal vertices v1;v2;... or none");
  control_cmd->add_flag("--hard", ctl.hard, "Hard terminal constraint");
  control_cmd->add_flag("--soft", ctl.soft, "Soft terminal penalty (default)");
  control_cmd->add_option("--lambda", ctl.lambda, "Soft terminal penalty weight");
  control_cmd->add_option("--epsilon", ctl.epsilon, "Terminal membership tolerance");
  control_cmd->add_option("--box", ctl.box, "State box LO:HI for every coordinate (default 0:1)");
  control_cmd->add_flag("--clamp", ctl.clamp, "Clamp plant states to the state box");
  control_cmd->add_option("--cap", ctl.cap, "Enumeration cap");
  control_cmd->add_option("--label", ctl.label, "Run label");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check_cmd->parsed()) return cmd_check(common);
    if (analyze_cmd->parsed()) return cmd_analyze(common);
    if (compile_cmd->parsed()) return cmd_compile(common, emit);
    if (simulate_cmd->parsed()) return cmd_simulate(common, sim);
    if (control_cmd->parsed()) return cmd_control(common, ctl);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
