#include "dcgf/error.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace dcgf {

namespace {
const char* severity_name(Severity s) { return s == Severity::error ? "error" : "warning"; }
}  // namespace

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::error; });
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    out += fmt::format("{}:{}:{}: {}[{}]: {}\n", d.span.file.empty() ? "<input>" : d.span.file, d.span.line,
                       d.span.column, severity_name(d.severity), d.code, d.message);
  }
  return out;
}

std::string diagnostics_to_json(const std::vector<Diagnostic>& diags) {
  auto arr = nlohmann::json::array();
  for (const auto& d : diags) {
    arr.push_back({{"file", d.span.file},
                   {"line", d.span.line},
                   {"column", d.span.column},
                   {"length", d.span.length},
                   {"severity", severity_name(d.severity)},
                   {"code", d.code},
                   {"message", d.message}});
  }
  return arr.dump(2);
}

}  // namespace dcgf
