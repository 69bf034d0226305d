#include "qpflow/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "qpflow/error.hpp"
#include "qpflow/io.hpp"

namespace qpflow {

namespace {

constexpr double kRowMergeTol = 1e-12;
constexpr double kCancelTol = 1e-14;
constexpr int kMaxExpandPower = 64;

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Number, Prime, LParen, RParen, Plus, Minus, Star, Slash, Caret, Equals,
                 Separator, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line;
  int column;
};

[[noreturn]] void fail(ErrorCode code, int line, int column, const std::string& what) {
  throw Error(code, fmt::format("line {}, column {}: {}", line, column, what));
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t p = 0;
  auto push = [&](Tok k, std::string text, int c) { out.push_back({k, std::move(text), 0.0, line, c}); };

  while (p < src.size()) {
    const char ch = src[p];
    if (ch == '\n') {
      push(Tok::Separator, "\n", col);
      ++p;
      ++line;
      col = 1;
      continue;
    }
    if (ch == '#') {
      while (p < src.size() && src[p] != '\n') ++p;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++p;
      ++col;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      const std::size_t start = p;
      while (p < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[p])) || src[p] == '_')) {
        ++p;
      }
      push(Tok::Ident, std::string(src.substr(start, p - start)), col);
      col += static_cast<int>(p - start);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      const std::size_t start = p;
      while (p < src.size() && (std::isdigit(static_cast<unsigned char>(src[p])) || src[p] == '.')) ++p;
      if (p < src.size() && (src[p] == 'e' || src[p] == 'E')) {
        std::size_t q = p + 1;
        if (q < src.size() && (src[q] == '+' || src[q] == '-')) ++q;
        if (q < src.size() && std::isdigit(static_cast<unsigned char>(src[q]))) {
          p = q;
          while (p < src.size() && std::isdigit(static_cast<unsigned char>(src[p]))) ++p;
        }
      }
      const std::string text(src.substr(start, p - start));
      double value = 0.0;
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || end != text.data() + text.size()) {
        fail(ErrorCode::SyntaxError, line, col, "malformed number '" + text + "'");
      }
      out.push_back({Tok::Number, text, value, line, col});
      col += static_cast<int>(p - start);
      continue;
    }
    Tok k;
    switch (ch) {
      case '\'': k = Tok::Prime; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '^': k = Tok::Caret; break;
      case '=': k = Tok::Equals; break;
      case ';': k = Tok::Separator; break;
      default:
        fail(ErrorCode::SyntaxError, line, col, fmt::format("unexpected character '{}'", ch));
    }
    push(k, std::string(1, ch), col);
    ++p;
    ++col;
  }
  out.push_back({Tok::End, "", 0.0, line, col});
  return out;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser producing the source AST

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SystemSource run() {
    std::vector<std::string> names;
    std::vector<ExprPtr> rhs;
    std::vector<Token> name_tokens;
    std::map<std::string, std::pair<double, Token>> initial;

    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Separator) {
        ++pos_;
        continue;
      }
      const Token id = expect(Tok::Ident, "a variable name");
      if (peek().kind == Tok::Prime) {
        ++pos_;
        expect(Tok::Equals, "'='");
        if (std::find(names.begin(), names.end(), id.text) != names.end()) {
          fail(ErrorCode::SyntaxError, id.line, id.column,
               "duplicate equation for '" + id.text + "'");
        }
        names.push_back(id.text);
        name_tokens.push_back(id);
        rhs.push_back(expr());
      } else if (peek().kind == Tok::LParen) {
        ++pos_;
        const Token zero = expect(Tok::Number, "0");
        if (zero.number != 0.0) {
          fail(ErrorCode::SyntaxError, zero.line, zero.column,
               "initial conditions are given at t = 0");
        }
        expect(Tok::RParen, "')'");
        expect(Tok::Equals, "'='");
        double sign = 1.0;
        while (peek().kind == Tok::Minus || peek().kind == Tok::Plus) {
          if (peek().kind == Tok::Minus) sign = -sign;
          ++pos_;
        }
        const Token num = expect(Tok::Number, "a number");
        if (initial.count(id.text) != 0) {
          fail(ErrorCode::SyntaxError, id.line, id.column,
               "duplicate initial condition for '" + id.text + "'");
        }
        initial.emplace(id.text, std::make_pair(sign * num.number, id));
      } else {
        fail(ErrorCode::SyntaxError, peek().line, peek().column,
             "expected ' or ( after '" + id.text + "'");
      }
      if (peek().kind != Tok::Separator && peek().kind != Tok::End) {
        fail(ErrorCode::SyntaxError, peek().line, peek().column,
             "expected end of statement, found '" + peek().text + "'");
      }
    }

    if (names.empty()) fail(ErrorCode::SyntaxError, 1, 1, "no equations");

    SystemSource src;
    src.initial.resize(static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
      auto it = initial.find(names[i]);
      if (it == initial.end()) {
        fail(ErrorCode::SyntaxError, name_tokens[i].line, name_tokens[i].column,
             "missing initial condition " + names[i] + "(0)");
      }
      const double v = it->second.first;
      if (!(v > 0.0) || !std::isfinite(v)) {
        fail(ErrorCode::NonPositiveInitial, it->second.second.line, it->second.second.column,
             fmt::format("initial value {}(0) = {} is not strictly positive", names[i], v));
      }
      src.initial[static_cast<Eigen::Index>(i)] = v;
    }
    for (const auto& [name, entry] : initial) {
      if (std::find(names.begin(), names.end(), name) == names.end()) {
        fail(ErrorCode::UndeclaredVariable, entry.second.line, entry.second.column,
             "initial condition for undeclared variable '" + name + "'");
      }
    }
    src.names = std::move(names);
    src.rhs.reserve(rhs.size());
    for (const auto& e : rhs) src.rhs.push_back(resolve(e, src.names));
    return src;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }

  Token expect(Tok kind, const char* what) {
    const Token& t = peek();
    if (t.kind != kind) {
      fail(ErrorCode::SyntaxError, t.line, t.column,
           fmt::format("expected {}, found '{}'", what,
                       t.kind == Tok::End ? "end of input"
                                          : (t.kind == Tok::Separator ? "end of statement" : t.text)));
    }
    return toks_[pos_++];
  }

  static ExprPtr node(Expr::Kind kind, const Token& at, ExprPtr lhs, ExprPtr rhs = nullptr) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    e->line = at.line;
    e->column = at.column;
    return e;
  }

  ExprPtr expr() {
    ExprPtr left = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Token op = toks_[pos_++];
      left = node(op.kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub, op, left, term());
    }
    return left;
  }

  ExprPtr term() {
    ExprPtr left = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const Token op = toks_[pos_++];
      left = node(op.kind == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div, op, left, unary());
    }
    return left;
  }

  ExprPtr unary() {
    if (peek().kind == Tok::Minus) {
      const Token op = toks_[pos_++];
      return node(Expr::Kind::Neg, op, unary());
    }
    if (peek().kind == Tok::Plus) {
      ++pos_;
      return unary();
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (peek().kind == Tok::Caret) {
      const Token op = toks_[pos_++];
      return node(Expr::Kind::Pow, op, base, unary());
    }
    return base;
  }

  ExprPtr primary() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Number: {
        ++pos_;
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Number;
        e->value = t.number;
        e->line = t.line;
        e->column = t.column;
        return e;
      }
      case Tok::Ident: {
        ++pos_;
        if (peek().kind == Tok::LParen) {
          fail(ErrorCode::NotQuasiPolynomial, t.line, t.column,
               "function call '" + t.text + "(...)' is not a quasi-monomial");
        }
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Variable;
        e->name = t.text;
        e->line = t.line;
        e->column = t.column;
        return e;
      }
      case Tok::LParen: {
        ++pos_;
        ExprPtr inner = expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default:
        fail(ErrorCode::SyntaxError, t.line, t.column,
             t.kind == Tok::End || t.kind == Tok::Separator
                 ? std::string("unexpected end of expression")
                 : "unexpected '" + t.text + "'");
    }
  }

  static ExprPtr resolve(const ExprPtr& e, const std::vector<std::string>& names) {
    if (!e) return e;
    auto copy = std::make_shared<Expr>(*e);
    if (e->kind == Expr::Kind::Variable) {
      auto it = std::find(names.begin(), names.end(), e->name);
      if (it == names.end()) {
        fail(ErrorCode::UndeclaredVariable, e->line, e->column,
             "variable '" + e->name + "' has no equation");
      }
      copy->var = static_cast<int>(std::distance(names.begin(), it));
      return copy;
    }
    copy->lhs = resolve(e->lhs, names);
    copy->rhs = resolve(e->rhs, names);
    return copy;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

double evaluate(const Expr& e, const Vector& x) {
  switch (e.kind) {
    case Expr::Kind::Number: return e.value;
    case Expr::Kind::Variable: return x[e.var];
    case Expr::Kind::Add: return evaluate(*e.lhs, x) + evaluate(*e.rhs, x);
    case Expr::Kind::Sub: return evaluate(*e.lhs, x) - evaluate(*e.rhs, x);
    case Expr::Kind::Mul: return evaluate(*e.lhs, x) * evaluate(*e.rhs, x);
    case Expr::Kind::Div: return evaluate(*e.lhs, x) / evaluate(*e.rhs, x);
    case Expr::Kind::Pow: return std::pow(evaluate(*e.lhs, x), evaluate(*e.rhs, x));
    case Expr::Kind::Neg: return -evaluate(*e.lhs, x);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Expansion into sums of power products

struct PowerTerm {
  double coef;
  std::vector<double> exps;
};
using TermSum = std::vector<PowerTerm>;

// Merges terms with bitwise-equal exponent vectors and drops zero
// coefficients.
TermSum combine(TermSum terms) {
  std::map<std::vector<double>, double> acc;
  for (auto& t : terms) acc[t.exps] += t.coef;
  TermSum out;
  for (auto& [exps, coef] : acc) {
    if (coef != 0.0) out.push_back({coef, exps});
  }
  return out;
}

TermSum multiply(const TermSum& a, const TermSum& b) {
  TermSum out;
  out.reserve(a.size() * b.size());
  for (const auto& s : a) {
    for (const auto& t : b) {
      PowerTerm p{s.coef * t.coef, s.exps};
      for (std::size_t k = 0; k < p.exps.size(); ++k) p.exps[k] += t.exps[k];
      out.push_back(std::move(p));
    }
  }
  return combine(std::move(out));
}

bool is_constant(const TermSum& s) {
  return s.empty() || (s.size() == 1 &&
                       std::all_of(s[0].exps.begin(), s[0].exps.end(),
                                   [](double e) { return e == 0.0; }));
}

double constant_value(const TermSum& s) { return s.empty() ? 0.0 : s[0].coef; }

TermSum expand(const Expr& e, std::size_t n) {
  switch (e.kind) {
    case Expr::Kind::Number:
      if (e.value == 0.0) return {};
      return {PowerTerm{e.value, std::vector<double>(n, 0.0)}};
    case Expr::Kind::Variable: {
      PowerTerm t{1.0, std::vector<double>(n, 0.0)};
      t.exps[static_cast<std::size_t>(e.var)] = 1.0;
      return {t};
    }
    case Expr::Kind::Neg: {
      TermSum s = expand(*e.lhs, n);
      for (auto& t : s) t.coef = -t.coef;
      return s;
    }
    case Expr::Kind::Add:
    case Expr::Kind::Sub: {
      TermSum s = expand(*e.lhs, n);
      TermSum r = expand(*e.rhs, n);
      for (auto& t : r) {
        if (e.kind == Expr::Kind::Sub) t.coef = -t.coef;
        s.push_back(std::move(t));
      }
      return combine(std::move(s));
    }
    case Expr::Kind::Mul:
      return multiply(expand(*e.lhs, n), expand(*e.rhs, n));
    case Expr::Kind::Div: {
      const TermSum d = expand(*e.rhs, n);
      if (d.empty()) fail(ErrorCode::NotQuasiPolynomial, e.line, e.column, "division by zero");
      if (d.size() != 1) {
        fail(ErrorCode::NotQuasiPolynomial, e.line, e.column,
             "division by a sum is not a quasi-monomial");
      }
      PowerTerm inv{1.0 / d[0].coef, d[0].exps};
      for (auto& x : inv.exps) x = -x;
      return multiply(expand(*e.lhs, n), {inv});
    }
    case Expr::Kind::Pow: {
      const TermSum p = expand(*e.rhs, n);
      if (!is_constant(p)) {
        fail(ErrorCode::NotQuasiPolynomial, e.line, e.column,
             "exponent must be a numeric constant");
      }
      const double q = constant_value(p);
      const TermSum base = expand(*e.lhs, n);
      if (q == 0.0) return {PowerTerm{1.0, std::vector<double>(n, 0.0)}};
      if (base.empty()) {
        if (q < 0.0) fail(ErrorCode::NotQuasiPolynomial, e.line, e.column, "division by zero");
        return {};
      }
      if (base.size() == 1) {
        const double c = base[0].coef;
        if (c < 0.0 && q != std::floor(q)) {
          fail(ErrorCode::NotQuasiPolynomial, e.line, e.column,
               "negative coefficient raised to a non-integer power");
        }
        PowerTerm t{std::pow(c, q), base[0].exps};
        for (auto& x : t.exps) x *= q;
        return {t};
      }
      if (q < 0.0 || q != std::floor(q) || q > kMaxExpandPower) {
        fail(ErrorCode::NotQuasiPolynomial, e.line, e.column,
             "a sum may only be raised to a small non-negative integer power");
      }
      TermSum r{PowerTerm{1.0, std::vector<double>(n, 0.0)}};
      for (int m = 0; m < static_cast<int>(q); ++m) r = multiply(r, base);
      return r;
    }
  }
  return {};
}

bool rows_close(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) >= kRowMergeTol) return false;
  }
  return true;
}

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

Vector SystemSource::evaluate_rhs(const Vector& x) const {
  if (x.size() != static_cast<Eigen::Index>(rhs.size())) {
    throw Error(ErrorCode::DimensionMismatch, "state length does not match the system");
  }
  Vector out(x.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) out[static_cast<Eigen::Index>(i)] = evaluate(*rhs[i], x);
  return out;
}

SystemSource parse_source(std::string_view text) { return Parser(tokenize(text)).run(); }

ParsedSystem to_qp_system(const SystemSource& source) {
  const std::size_t n = source.names.size();

  // Representative exponent rows with the terms contributing to each
  // (equation, coefficient) pair.
  struct Row {
    std::vector<double> exps;
    std::vector<std::vector<double>> contributions;  // per equation
  };
  std::vector<Row> rows;

  for (std::size_t i = 0; i < n; ++i) {
    for (PowerTerm& t : expand(*source.rhs[i], n)) {
      t.exps[i] -= 1.0;
      auto it = std::find_if(rows.begin(), rows.end(),
                             [&](const Row& r) { return rows_close(r.exps, t.exps); });
      if (it == rows.end()) {
        rows.push_back({t.exps, std::vector<std::vector<double>>(n)});
        it = rows.end() - 1;
      }
      it->contributions[i].push_back(t.coef);
    }
  }

  // Accumulate, cancel near-exact zeros, drop rows without any coefficient.
  struct Column {
    std::vector<double> exps;
    std::vector<double> coefs;
  };
  std::vector<Column> cols;
  for (const Row& r : rows) {
    Column c{r.exps, std::vector<double>(n, 0.0)};
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      double mag = 0.0;
      for (double v : r.contributions[i]) {
        sum += v;
        mag += std::abs(v);
      }
      if (std::abs(sum) <= kCancelTol * mag) sum = 0.0;
      c.coefs[i] = sum;
      any = any || sum != 0.0;
    }
    if (any) cols.push_back(std::move(c));
  }
  if (cols.empty()) cols.push_back({std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)});
  std::sort(cols.begin(), cols.end(),
            [](const Column& a, const Column& b) { return a.exps < b.exps; });

  const auto nn = static_cast<Eigen::Index>(n);
  const auto NN = static_cast<Eigen::Index>(cols.size());
  Matrix A(nn, NN);
  Matrix B(NN, nn);
  for (Eigen::Index j = 0; j < NN; ++j) {
    const auto& c = cols[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < nn; ++i) {
      // + 0.0 normalizes negative zeros
      A(i, j) = c.coefs[static_cast<std::size_t>(i)] + 0.0;
      B(j, i) = c.exps[static_cast<std::size_t>(i)] + 0.0;
    }
  }
  return ParsedSystem{source.names, QpSystem(std::move(A), std::move(B), source.initial)};
}

ParsedSystem parse_named_system(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    QpSystem sys = system_from_json(text);
    return ParsedSystem{default_names(sys.n()), std::move(sys)};
  }
  return to_qp_system(parse_source(text));
}

QpSystem parse_system(std::string_view text) { return parse_named_system(text).system; }

std::vector<std::string> default_names(int n) {
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

std::string serialize_system(const QpSystem& sys, const std::vector<std::string>& names_in) {
  const std::vector<std::string> names =
      names_in.empty() ? default_names(sys.n()) : names_in;
  if (static_cast<int>(names.size()) != sys.n()) {
    throw Error(ErrorCode::DimensionMismatch, "one name per state variable expected");
  }
  std::string out;
  for (int i = 0; i < sys.n(); ++i) {
    out += names[static_cast<std::size_t>(i)] + "' =";
    bool first = true;
    for (int j = 0; j < sys.N(); ++j) {
      const double c = sys.A()(i, j);
      if (c == 0.0) continue;
      std::string term = format_number(std::abs(c));
      for (int k = 0; k < sys.n(); ++k) {
        const double e = sys.B()(j, k) + (k == i ? 1.0 : 0.0);
        if (e == 0.0) continue;
        term += "*" + names[static_cast<std::size_t>(k)];
        if (e != 1.0) term += "^" + format_number(e);
      }
      if (first) {
        out += c < 0.0 ? " -" : " ";
      } else {
        out += c < 0.0 ? " - " : " + ";
      }
      out += term;
      first = false;
    }
    if (first) out += " 0";
    out += "\n";
  }
  for (int i = 0; i < sys.n(); ++i) {
    out += names[static_cast<std::size_t>(i)] + "(0) = " + format_number(sys.x0()[i]) + "\n";
  }
  return out;
}

}  // namespace qpflow
