#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcgf {

/// Broad failure classes. Values line up with the C API status codes.
enum class ErrorKind {
  model = 1,       // parse, validation, well-formedness
  infeasible = 2,  // no admissible control sequence
  runtime = 3,     // non-finite state, enumeration cap, unbound symbol
  argument = 4,
  io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct SourceSpan {
  std::string file;
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based
  std::size_t length = 0;

  bool operator==(const SourceSpan&) const = default;
};

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  SourceSpan span;

  bool operator==(const Diagnostic&) const = default;
};

bool has_errors(const std::vector<Diagnostic>& diags);

/// `file:line:col: severity[code]: message`, one per line.
std::string format_diagnostics(const std::vector<Diagnostic>& diags);
std::string diagnostics_to_json(const std::vector<Diagnostic>& diags);

}  // namespace dcgf
