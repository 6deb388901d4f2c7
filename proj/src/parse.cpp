#include "amcmc/parse.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <unordered_map>
#include <vector>

#include "amcmc/errors.hpp"

namespace amcmc {
namespace {

enum class Tok { Atom, QuotedAtom, Var, Int, Real, Open, OpenCall, Close, OpenList, CloseList, Bar, Comma, End, Eof };

struct Token {
  Tok kind;
  std::string text;
  std::int64_t ival = 0;
  double rval = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t begin = 0;
  std::size_t end = 0;
};

constexpr std::string_view kSymbolChars = "+-*/\\^<>=~:.?@#&$";

bool is_symbol_char(char c) { return kSymbolChars.find(c) != std::string_view::npos; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_layout();
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::Eof) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_layout() {
    for (;;) {
      if (pos_ >= src_.size()) return;
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '%') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        advance();
        advance();
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
        if (pos_ >= src_.size()) fail("unterminated block comment");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  Token next() {
    Token t;
    t.line = line_;
    t.column = col_;
    t.begin = pos_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::Eof;
      t.end = pos_;
      return t;
    }
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      number(t);
    } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && is_alnum(peek())) t.text.push_back(take());
      t.kind = Tok::Var;
    } else if (std::islower(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && is_alnum(peek())) t.text.push_back(take());
      t.kind = Tok::Atom;
    } else if (c == '\'') {
      quoted(t);
    } else if (c == '(') {
      advance();
      bool call = !prev_was_layout_ && prev_functor_;
      t.kind = call ? Tok::OpenCall : Tok::Open;
    } else if (c == ')') {
      advance();
      t.kind = Tok::Close;
    } else if (c == '[') {
      advance();
      if (peek() == ']') {
        advance();
        t.kind = Tok::Atom;
        t.text = "[]";
      } else {
        t.kind = Tok::OpenList;
      }
    } else if (c == ']') {
      advance();
      t.kind = Tok::CloseList;
    } else if (c == '|') {
      advance();
      t.kind = Tok::Bar;
    } else if (c == ',') {
      advance();
      t.kind = Tok::Comma;
    } else if (c == '!' || c == ';') {
      advance();
      t.kind = Tok::Atom;
      t.text = std::string(1, c);
    } else if (c == '.' && (pos_ + 1 >= src_.size() || std::isspace(static_cast<unsigned char>(peek(1))) ||
                            peek(1) == '%')) {
      advance();
      t.kind = Tok::End;
    } else if (is_symbol_char(c)) {
      while (pos_ < src_.size() && is_symbol_char(peek())) t.text.push_back(take());
      t.kind = Tok::Atom;
    } else {
      fail(std::string("unexpected character '") + c + "'");
    }
    t.end = pos_;
    prev_functor_ = t.kind == Tok::Atom || t.kind == Tok::QuotedAtom;
    prev_was_layout_ = false;
    if (pos_ < src_.size() && (std::isspace(static_cast<unsigned char>(peek())) || peek() == '%')) {
      prev_was_layout_ = true;
    }
    return t;
  }

  char take() {
    char c = peek();
    advance();
    return c;
  }

  void number(Token& t) {
    std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    bool real = false;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      real = true;
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '-' || peek(1) == '+') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      real = true;
      advance();
      if (peek() == '-' || peek() == '+') advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    std::string_view text = src_.substr(start, pos_ - start);
    t.text = std::string(text);
    if (real) {
      t.kind = Tok::Real;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), t.rval);
      if (ec != std::errc()) fail("malformed number " + t.text);
    } else {
      t.kind = Tok::Int;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), t.ival);
      if (ec != std::errc()) fail("integer out of range " + t.text);
    }
  }

  void quoted(Token& t) {
    advance();
    for (;;) {
      if (pos_ >= src_.size()) fail("unterminated quoted atom");
      char c = take();
      if (c == '\'') {
        if (peek() == '\'') {
          advance();
          t.text.push_back('\'');
          continue;
        }
        break;
      }
      if (c == '\\') {
        if (pos_ >= src_.size()) fail("unterminated quoted atom");
        char e = take();
        switch (e) {
          case 'n':
            t.text.push_back('\n');
            break;
          case 't':
            t.text.push_back('\t');
            break;
          default:
            t.text.push_back(e);
        }
        continue;
      }
      t.text.push_back(c);
    }
    t.kind = Tok::QuotedAtom;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  bool prev_functor_ = false;
  bool prev_was_layout_ = true;
};

enum class Assoc { XFX, XFY, YFX };

struct InfixOp {
  int prec;
  Assoc assoc;
};

const InfixOp* infix_op(std::string_view name) {
  static const std::unordered_map<std::string_view, InfixOp> ops = {
      {":-", {1200, Assoc::XFX}}, {",", {1000, Assoc::XFY}},  {"=", {700, Assoc::XFX}},
      {"is", {700, Assoc::XFX}},  {"<", {700, Assoc::XFX}},   {">", {700, Assoc::XFX}},
      {"=<", {700, Assoc::XFX}},  {">=", {700, Assoc::XFX}},  {"=:=", {700, Assoc::XFX}},
      {"=\\=", {700, Assoc::XFX}}, {"+", {500, Assoc::YFX}},  {"-", {500, Assoc::YFX}},
      {"*", {400, Assoc::YFX}},   {"//", {400, Assoc::YFX}},  {"mod", {400, Assoc::YFX}}};
  auto it = ops.find(name);
  return it == ops.end() ? nullptr : &it->second;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

  bool at_eof() const { return peek().kind == Tok::Eof; }

  /// One clause or directive, terminated by '.'.
  Term clause() {
    vars_.clear();
    Term t = parse(1200);
    expect(Tok::End, "expected '.' at end of clause");
    return t;
  }

  Term lone_term() {
    vars_.clear();
    Term t = parse(1200);
    if (peek().kind == Tok::End) ++pos_;
    if (!at_eof()) fail_at(peek(), "unexpected trailing input");
    return t;
  }

  const Token& last() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }
  const Token& clause_start(std::size_t idx) const { return toks_[idx]; }
  std::size_t position() const { return pos_; }

  [[noreturn]] void fail_at(const Token& t, const std::string& msg) const {
    throw ParseError(msg, t.line, t.column);
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& take() { return toks_[pos_++]; }

  void expect(Tok kind, const char* msg) {
    if (peek().kind != kind) fail_at(peek(), msg);
    ++pos_;
  }

  static bool starts_term(const Token& t) {
    switch (t.kind) {
      case Tok::Atom:
      case Tok::QuotedAtom:
      case Tok::Var:
      case Tok::Int:
      case Tok::Real:
      case Tok::Open:
      case Tok::OpenList:
        return true;
      default:
        return false;
    }
  }

  Term variable(const std::string& name) {
    if (name == "_") return Term::var(next_var_++);
    auto it = vars_.find(name);
    if (it != vars_.end()) return Term::var(it->second);
    VarId id = next_var_++;
    vars_.emplace(name, id);
    return Term::var(id);
  }

  Term primary(int max_prec, int& prec) {
    prec = 0;
    const Token& t = take();
    switch (t.kind) {
      case Tok::Int:
        return Term::integer(t.ival);
      case Tok::Real:
        return Term::real(t.rval);
      case Tok::Var:
        return variable(t.text);
      case Tok::Open: {
        Term inner = parse(1200);
        expect(Tok::Close, "expected ')'");
        return inner;
      }
      case Tok::OpenList:
        return list_rest();
      case Tok::Atom:
      case Tok::QuotedAtom: {
        if (peek().kind == Tok::OpenCall) {
          ++pos_;
          std::vector<Term> args;
          args.push_back(parse(999));
          while (peek().kind == Tok::Comma) {
            ++pos_;
            args.push_back(parse(999));
          }
          expect(Tok::Close, "expected ',' or ')' in argument list");
          return Term::compound(t.text, std::move(args));
        }
        if (t.kind == Tok::Atom && t.text == "-" && peek().begin == t.end &&
            (peek().kind == Tok::Int || peek().kind == Tok::Real)) {
          const Token& n = take();
          return n.kind == Tok::Int ? Term::integer(-n.ival) : Term::real(-n.rval);
        }
        if (t.kind == Tok::Atom && (t.text == "-" || t.text == ":-") && starts_term(peek()) &&
            !(peek().kind == Tok::Atom && infix_op(peek().text))) {
          int p = t.text == "-" ? 200 : 1200;
          if (p <= max_prec) {
            Term arg = parse(t.text == "-" ? 200 : 1199);
            prec = p;
            return Term::compound(t.text, {arg});
          }
        }
        if (t.kind == Tok::Atom && infix_op(t.text)) prec = std::min(infix_op(t.text)->prec, max_prec);
        return Term::atom(t.text);
      }
      default:
        fail_at(t, "unexpected token");
    }
  }

  Term list_rest() {
    std::vector<Term> items;
    items.push_back(parse(999));
    while (peek().kind == Tok::Comma) {
      ++pos_;
      items.push_back(parse(999));
    }
    Term tail = Term::nil();
    if (peek().kind == Tok::Bar) {
      ++pos_;
      tail = parse(999);
    }
    expect(Tok::CloseList, "expected ']' to close list");
    return Term::list(std::move(items), tail);
  }

  Term parse(int max_prec) {
    int left_prec = 0;
    Term left = primary(max_prec, left_prec);
    for (;;) {
      const Token& t = peek();
      std::string name;
      if (t.kind == Tok::Comma) {
        name = ",";
      } else if (t.kind == Tok::Atom) {
        name = t.text;
      } else {
        break;
      }
      const InfixOp* op = infix_op(name);
      if (!op || op->prec > max_prec) break;
      int left_max = op->assoc == Assoc::YFX ? op->prec : op->prec - 1;
      int right_max = op->assoc == Assoc::XFY ? op->prec : op->prec - 1;
      if (left_prec > left_max) break;
      ++pos_;
      Term right = parse(right_max);
      left = Term::compound(name, {left, right});
      left_prec = op->prec;
    }
    return left;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::unordered_map<std::string, VarId> vars_;
  VarId next_var_ = 0;

 public:
  void reset_vars() { next_var_ = 0; }
};

void flatten_conj(const Term& t, std::vector<Term>& out) {
  if (t.is_functor(",", 2)) {
    flatten_conj(t.arg(0), out);
    flatten_conj(t.arg(1), out);
  } else {
    out.push_back(t);
  }
}

std::vector<Term> list_or_fail(const Parser& p, const Token& at, const Term& t, const char* what) {
  auto items = t.list_items();
  if (!items) p.fail_at(at, std::string(what) + " must be a proper list");
  return *items;
}

}  // namespace

Program parse_program(std::string_view text) {
  Parser p(text);
  std::vector<Clause> clauses;
  std::vector<ValuesDecl> values;
  std::vector<SwitchDist> dists;
  while (!p.at_eof()) {
    std::size_t start = p.position();
    p.reset_vars();
    Term t = p.clause();
    const Token& at = p.clause_start(start);
    if (t.is_functor(":-", 1)) {
      const Term& d = t.arg(0);
      if (d.is_functor("set_sw", 2)) {
        std::vector<double> probs;
        for (const auto& x : list_or_fail(p, at, d.arg(1), "set_sw probabilities")) {
          if (x.is_int()) {
            probs.push_back(static_cast<double>(x.int_value()));
          } else if (x.is_real()) {
            probs.push_back(x.real_value());
          } else {
            p.fail_at(at, "set_sw probabilities must be numbers, got " + to_string(x));
          }
        }
        if (!d.arg(0).is_ground()) p.fail_at(at, "set_sw switch name must be ground");
        dists.push_back({d.arg(0), 0, std::move(probs)});
      } else if (d.is_functor("values", 2)) {
        values.push_back({d.arg(0), list_or_fail(p, at, d.arg(1), "values outcomes")});
      } else {
        p.fail_at(at, "unsupported directive " + to_string(d));
      }
    } else if (t.is_functor("values", 2)) {
      values.push_back({t.arg(0), list_or_fail(p, at, t.arg(1), "values outcomes")});
    } else if (t.is_functor("set_sw", 2)) {
      p.fail_at(at, "set_sw must be written as a directive ':- set_sw(...)'");
    } else if (t.is_functor(":-", 2)) {
      Clause c{t.arg(0), {}};
      flatten_conj(t.arg(1), c.body);
      if (!c.head.is_callable()) p.fail_at(at, "clause head must be an atom or compound");
      for (const auto& g : c.body) {
        if (!g.is_callable()) p.fail_at(at, "body goal " + to_string(g) + " is not callable");
      }
      clauses.push_back(std::move(c));
    } else {
      if (!t.is_callable()) p.fail_at(at, "clause must be an atom or compound, got " + to_string(t));
      clauses.push_back({t, {}});
    }
  }
  return Program::build(std::move(clauses), std::move(values), std::move(dists));
}

Term parse_term(std::string_view text) {
  Parser p(text);
  return p.lone_term();
}

Term parse_goal(std::string_view text) {
  Term t = parse_term(text);
  if (!t.is_callable()) throw ParseError("goal " + to_string(t) + " is not callable", 1, 1);
  if (!t.is_ground()) throw ParseError("goal " + to_string(t) + " is not ground", 1, 1);
  static const Symbol msw = Symbol::intern("msw");
  std::vector<Term> parts;
  flatten_conj(t, parts);
  for (auto& g : parts) {
    if (!g.is_callable()) throw ParseError("goal " + to_string(g) + " is not callable", 1, 1);
    if (g.is_functor("msw", 2)) g = Term::compound(msw, {g.arg(0), Term::integer(0), g.arg(1)});
  }
  Term out = parts.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;) out = Term::compound(",", {parts[i], out});
  return out;
}

}  // namespace amcmc
