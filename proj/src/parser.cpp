#include "dcgf/parser.hpp"

#include <array>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace dcgf {

namespace {

constexpr std::array kReserved = {"tau", "param", "species", "therapy", "population", "init"};

bool is_reserved(std::string_view word) {
  for (const auto* r : kReserved) {
    if (word == r) return true;
  }
  return false;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct SyntaxError {
  Diagnostic diagnostic;
};

class Parser {
 public:
  Parser(std::string_view source, std::string_view file) : src_(source), file_(file) {}

  ParseResult run() {
    while (true) {
      skip_blank(true);
      if (at_end()) break;
      try {
        declaration();
      } catch (const SyntaxError& e) {
        diags_.push_back(e.diagnostic);
        recover();
      }
    }
    ParseResult result;
    result.diagnostics = std::move(diags_);
    auto semantic = validate(model_);
    result.diagnostics.insert(result.diagnostics.end(), semantic.begin(), semantic.end());
    if (!has_errors(result.diagnostics)) result.model = std::move(model_);
    return result;
  }

 private:
  std::string_view src_;
  std::string file_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  Model model_;
  std::vector<Diagnostic> diags_;
  bool init_seen_ = false;

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return at_end() ? '\0' : src_[pos_]; }

  void advance() {
    if (at_end()) return;
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  SourceSpan here(std::size_t length = 1) const { return {file_, line_, col_, length}; }

  SourceSpan span_from(const SourceSpan& start) const {
    SourceSpan s = start;
    s.length = line_ == start.line ? col_ - start.column : 1;
    return s;
  }

  [[noreturn]] void fail(const std::string& message, std::string code = "syntax") const {
    std::size_t length = at_end() || peek() == '\n' ? 0 : 1;
    throw SyntaxError{{Severity::error, std::move(code), message, here(length)}};
  }

  // Spaces, tabs and comments; newlines too when `newlines` is set.
  void skip_blank(bool newlines) {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == '\n' && newlines) {
        advance();
      } else {
        break;
      }
    }
  }

  void recover() {
    while (!at_end() && peek() != '\n') advance();
  }

  std::string describe_next() const {
    if (at_end()) return "end of input";
    if (peek() == '\n') return "end of line";
    return fmt::format("'{}'", peek());
  }

  void expect(char c) {
    skip_blank(false);
    if (peek() != c) fail(fmt::format("expected '{}' but found {}", c, describe_next()));
    advance();
  }

  bool accept(char c) {
    skip_blank(false);
    if (peek() != c) return false;
    advance();
    return true;
  }

  void check_lexeme() const {
    char c = peek();
    if (at_end() || c == '\n') return;
    static constexpr std::string_view kPunct = "=+-.()|<>?!,:*[]#";
    if (!ident_char(c) && kPunct.find(c) == std::string_view::npos && c != ' ' && c != '\t' && c != '\r') {
      throw SyntaxError{{Severity::error, "lex", fmt::format("unexpected character '{}'", c), here(1)}};
    }
  }

  std::string word() {
    std::string out;
    while (!at_end() && ident_char(peek())) {
      out += peek();
      advance();
    }
    return out;
  }

  std::string identifier(const char* what) {
    skip_blank(false);
    check_lexeme();
    if (!ident_start(peek())) fail(fmt::format("expected {} but found {}", what, describe_next()));
    auto start = here();
    auto name = word();
    if (is_reserved(name)) {
      throw SyntaxError{{Severity::error, "syntax", fmt::format("'{}' is a reserved word", name), span_from(start)}};
    }
    return name;
  }

  double number(bool allow_sign) {
    skip_blank(false);
    check_lexeme();
    auto start_pos = pos_;
    auto start = here();
    if (allow_sign && (peek() == '-' || peek() == '+')) advance();
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) advance();
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      advance();
      if (peek() == '-' || peek() == '+') advance();
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    auto text = src_.substr(start_pos, pos_ - start_pos);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      throw SyntaxError{{Severity::error, "syntax", fmt::format("expected a number but found {}",
                                                                  text.empty() ? describe_next() : "'" + std::string(text) + "'"),
                         span_from(start)}};
    }
    return value;
  }

  bool digit_next() {
    skip_blank(false);
    return std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.';
  }

  void declaration() {
    check_lexeme();
    if (!ident_start(peek())) fail(fmt::format("expected a declaration but found {}", describe_next()));
    auto start = here();
    auto keyword = word();
    if (keyword == "param") {
      param(start);
    } else if (keyword == "species") {
      model_.species.push_back(term_definition(start));
    } else if (keyword == "therapy") {
      model_.therapies.push_back(term_definition(start));
    } else if (keyword == "population") {
      population();
    } else if (keyword == "init") {
      init(start);
    } else {
      throw SyntaxError{{Severity::error, "syntax",
                         fmt::format("unknown declaration '{}' (expected param, species, therapy, population or init)",
                                     keyword),
                         span_from(start)}};
    }
    end_of_declaration();
  }

  void end_of_declaration() {
    skip_blank(false);
    if (!at_end() && peek() != '\n') {
      check_lexeme();
      fail(fmt::format("expected end of line but found {}", describe_next()));
    }
  }

  void param(const SourceSpan& start) {
    Parameter p;
    p.name = identifier("a parameter name");
    expect('=');
    p.value = number(true);
    p.span = span_from(start);
    model_.parameters.push_back(std::move(p));
  }

  TermDef term_definition(const SourceSpan& start) {
    TermDef def;
    def.name = identifier("a term name");
    def.span = span_from(start);
    expect('=');
    skip_blank(false);
    if (peek() == '0' && !ident_char(src_.size() > pos_ + 1 ? src_[pos_ + 1] : ' ')) {
      advance();
      return def;
    }
    while (true) {
      def.branches.push_back(branch());
      skip_blank(false);
      if (peek() != '+') break;
      advance();
      skip_blank(true);
    }
    return def;
  }

  Branch branch() {
    skip_blank(false);
    check_lexeme();
    Branch b;
    auto start = here();
    if (peek() == '?' || peek() == '!') {
      b.action.kind = peek() == '?' ? ActionKind::input : ActionKind::output;
      advance();
      b.action.channel = identifier("a channel name");
    } else if (ident_start(peek())) {
      auto prefix_start = here();
      auto w = word();
      if (w != "tau") {
        throw SyntaxError{{Severity::error, "syntax",
                           fmt::format("expected an action prefix (tau, ?x or !x) but found '{}'", w),
                           span_from(prefix_start)}};
      }
      b.action.kind = ActionKind::internal;
      if (accept('[')) {
        skip_blank(false);
        if (!ident_char(peek())) fail("expected an action label");
        b.action.label = word();
        expect(']');
      }
    } else {
      fail(fmt::format("expected an action prefix (tau, ?x or !x) but found {}", describe_next()));
    }
    b.action.rate = rate();
    expect('.');
    b.continuation = continuation();
    b.span = span_from(start);
    return b;
  }

  Rate rate() {
    expect('<');
    Rate r;
    while (true) {
      skip_blank(true);
      RateTerm t;
      if (digit_next()) {
        t.coefficient = number(false);
        if (accept('*')) t.symbol = identifier("a parameter name");
      } else {
        t.symbol = identifier("a rate (number or parameter name)");
      }
      r.terms.push_back(std::move(t));
      skip_blank(true);
      if (peek() != '+') break;
      advance();
    }
    skip_blank(true);
    expect('>');
    return r;
  }

  Multiset continuation() {
    skip_blank(false);
    if (peek() == '0' && !ident_char(src_.size() > pos_ + 1 ? src_[pos_ + 1] : ' ')) {
      advance();
      return {};
    }
    bool parenthesised = accept('(');
    if (parenthesised) skip_blank(true);
    Multiset out;
    if (parenthesised && peek() == '0') {
      advance();
    } else {
      out.push_back(identifier("a term name or 0"));
      while (true) {
        skip_blank(parenthesised);
        if (peek() != '|') break;
        advance();
        skip_blank(parenthesised);
        out.push_back(identifier("a term name"));
      }
    }
    if (parenthesised) {
      skip_blank(true);
      expect(')');
    }
    return out;
  }

  void population() {
    skip_blank(false);
    if (at_end() || peek() == '\n' || peek() == '#') return;
    while (true) {
      skip_blank(false);
      auto start = here();
      PopulationEntry e;
      e.species = identifier("a species name");
      expect(':');
      e.concentration = number(true);
      e.span = span_from(start);
      model_.population.push_back(std::move(e));
      if (!accept(',')) break;
    }
  }

  void init(const SourceSpan& start) {
    if (init_seen_) {
      throw SyntaxError{{Severity::error, "duplicate-definition", "initial combination given twice", start}};
    }
    init_seen_ = true;
    model_.initial_combination = continuation();
    model_.init_span = span_from(start);
  }
};

std::string render_continuation(const Multiset& m) {
  if (m.empty()) return "0";
  if (m.size() == 1) return m.front();
  std::string out = "(";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i > 0) out += '|';
    out += m[i];
  }
  return out + ")";
}

std::string render_branch(const Branch& b) {
  std::string out;
  switch (b.action.kind) {
    case ActionKind::internal:
      out = "tau";
      if (!b.action.label.empty()) out += "[" + b.action.label + "]";
      break;
    case ActionKind::input:
      out = "?" + b.action.channel;
      break;
    case ActionKind::output:
      out = "!" + b.action.channel;
      break;
  }
  return out + "<" + b.action.rate.to_string() + ">." + render_continuation(b.continuation);
}

std::string render_term(const char* keyword, const TermDef& def) {
  std::string out = fmt::format("{} {} = ", keyword, def.name);
  if (def.branches.empty()) return out + "0\n";
  for (std::size_t i = 0; i < def.branches.size(); ++i) {
    if (i > 0) out += " + ";
    out += render_branch(def.branches[i]);
  }
  return out + "\n";
}

}  // namespace

ParseResult parse(std::string_view source, std::string_view file) { return Parser(source, file).run(); }

std::string render(const Model& model) {
  std::string out;
  for (const auto& p : model.parameters) out += fmt::format("param {} = {}\n", p.name, p.value);
  for (const auto& s : model.species) out += render_term("species", s);
  if (!model.population.empty()) {
    out += "population ";
    for (std::size_t i = 0; i < model.population.size(); ++i) {
      if (i > 0) out += ", ";
      out += fmt::format("{}: {}", model.population[i].species, model.population[i].concentration);
    }
    out += "\n";
  }
  for (const auto& t : model.therapies) out += render_term("therapy", t);
  if (!model.initial_combination.empty()) {
    out += "init ";
    for (std::size_t i = 0; i < model.initial_combination.size(); ++i) {
      if (i > 0) out += " | ";
      out += model.initial_combination[i];
    }
    out += "\n";
  }
  return out;
}

}  // namespace dcgf
