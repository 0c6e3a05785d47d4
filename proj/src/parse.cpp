#include "ctmctail/parse.hpp"

#include "ctmctail/errors.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace ctmc {

namespace {

enum class Tok {
  end,
  newline,
  number,
  ident,
  lparen,
  rparen,
  lbrace,
  rbrace,
  comma,
  colon,
  semicolon,
  plus,
  minus,
  star,
  slash,
  caret,
  arrow, // ->
  dotdot,
  at,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double num = 0;
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string &text) : text_(text) { advance(); }

  const Token &peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n')
          ++pos_;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
        ++col_;
        continue;
      }
      break;
    }
    cur_ = {};
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= text_.size()) {
      cur_.kind = Tok::end;
      return;
    }
    char c = text_[pos_];
    auto single = [&](Tok k) {
      cur_.kind = k;
      cur_.text = std::string(1, c);
      ++pos_;
      ++col_;
    };
    if (c == '\n') {
      cur_.kind = Tok::newline;
      ++pos_;
      ++line_;
      col_ = 1;
      return;
    }
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      cur_.kind = Tok::arrow;
      cur_.text = "->";
      pos_ += 2;
      col_ += 2;
      return;
    }
    if (c == '.' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '.') {
      cur_.kind = Tok::dotdot;
      cur_.text = "..";
      pos_ += 2;
      col_ += 2;
      return;
    }
    switch (c) {
    case '(':
      return single(Tok::lparen);
    case ')':
      return single(Tok::rparen);
    case '{':
      return single(Tok::lbrace);
    case '}':
      return single(Tok::rbrace);
    case ',':
      return single(Tok::comma);
    case ':':
      return single(Tok::colon);
    case ';':
      return single(Tok::semicolon);
    case '+':
      return single(Tok::plus);
    case '-':
      return single(Tok::minus);
    case '*':
      return single(Tok::star);
    case '/':
      return single(Tok::slash);
    case '^':
      return single(Tok::caret);
    case '@':
      return single(Tok::at);
    default:
      break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '.')) {
        // leave '..' to the range operator
        if (text_[pos_] == '.' && pos_ + 1 < text_.size() &&
            text_[pos_ + 1] == '.')
          break;
        ++pos_;
      }
      if (pos_ < text_.size() &&
          (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
          ++pos_;
        if (pos_ < text_.size() &&
            std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          while (pos_ < text_.size() &&
                 std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        } else {
          pos_ = save;
        }
      }
      cur_.kind = Tok::number;
      cur_.text = text_.substr(start, pos_ - start);
      cur_.num = std::stod(cur_.text);
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        ++pos_;
      cur_.kind = Tok::ident;
      cur_.text = text_.substr(start, pos_ - start);
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    fail(errc::syntax, "SyntaxError",
         "line " + std::to_string(line_) + ", col " + std::to_string(col_) +
             ": unexpected character '" + std::string(1, c) + "'");
  }

  const std::string &text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token cur_;
};

[[noreturn]] void syntax_error(const Token &t, const std::string &expected) {
  fail(errc::syntax, "SyntaxError",
       "line " + std::to_string(t.line) + ", col " + std::to_string(t.col) +
           ": expected " + expected +
           (t.kind == Tok::end ? " (got end of input)"
                               : " (got '" + t.text + "')"));
}

// Intermediate value of a rate expression.  Gamma ratios and polynomial
// quotients combine only with constant factors.
struct ExprVal {
  enum class Kind { poly, gamma, ratio } kind = Kind::poly;
  std::vector<Term> poly;           // Kind::poly
  double kappa = 1.0, xi = 0.0;     // Kind::gamma
  std::vector<Term> num, den;       // Kind::ratio

  bool is_constant() const {
    return kind == Kind::poly &&
           (poly.empty() || (poly.size() == 1 && poly[0].exponent == 0.0));
  }
  double constant() const { return poly.empty() ? 0.0 : poly[0].coeff; }
};

class Parser {
public:
  Parser(const ModelSource &src) : lex_(src.text), origin_(src.origin) {}

  JumpModel parse() {
    JumpModel model;
    bool statemin_seen = false;
    for (;;) {
      skip_separators();
      if (lex_.peek().kind == Tok::end)
        break;
      Token t = lex_.peek();
      if (t.kind == Tok::ident && t.text == "statemin") {
        lex_.take();
        model.state_min = expect_int("state minimum");
        statemin_seen = true;
      } else if (t.kind == Tok::ident && t.text == "absorbing") {
        lex_.take();
        expect(Tok::lbrace, "'{'");
        for (;;) {
          model.absorbing.insert(expect_int("absorbing state"));
          if (lex_.peek().kind == Tok::comma) {
            lex_.take();
            continue;
          }
          break;
        }
        expect(Tok::rbrace, "'}'");
      } else if (t.kind == Tok::ident && t.text == "jump") {
        parse_jump(model);
      } else if (t.kind == Tok::ident && t.text == "burst") {
        parse_burst(model);
      } else if (t.kind == Tok::number ||
                 (t.kind == Tok::ident && t.text == "S")) {
        parse_reaction(model);
      } else if (t.kind == Tok::ident) {
        fail(errc::syntax, "SyntaxError",
             "line " + std::to_string(t.line) + ": unknown statement '" +
                 t.text +
                 "'; only the single species 'S' is supported (the state "
                 "space is one-dimensional)");
      } else {
        syntax_error(t, "a statement (statemin, absorbing, jump, burst or a "
                        "reaction)");
      }
    }
    (void)statemin_seen;
    validate(model);
    return model;
  }

private:
  void skip_separators() {
    while (lex_.peek().kind == Tok::newline ||
           lex_.peek().kind == Tok::semicolon)
      lex_.take();
  }

  void expect(Tok k, const std::string &what) {
    if (lex_.peek().kind != k)
      syntax_error(lex_.peek(), what);
    lex_.take();
  }

  long long expect_int(const std::string &what) {
    bool neg = false;
    if (lex_.peek().kind == Tok::minus || lex_.peek().kind == Tok::plus) {
      neg = lex_.take().kind == Tok::minus;
    }
    Token t = lex_.peek();
    if (t.kind != Tok::number || t.num != std::floor(t.num))
      syntax_error(t, "an integer (" + what + ")");
    lex_.take();
    long long v = static_cast<long long>(t.num);
    return neg ? -v : v;
  }

  double expect_number(const std::string &what) {
    bool neg = false;
    if (lex_.peek().kind == Tok::minus || lex_.peek().kind == Tok::plus)
      neg = lex_.take().kind == Tok::minus;
    Token t = lex_.peek();
    if (t.kind != Tok::number)
      syntax_error(t, "a number (" + what + ")");
    lex_.take();
    return neg ? -t.num : t.num;
  }

  void add_jump(JumpModel &model, long long omega, PowerSum rate) {
    if (omega == 0)
      fail(errc::validation, "ValidationError", "jump of size zero");
    auto it = model.jumps.find(omega);
    if (it == model.jumps.end())
      model.jumps.emplace(omega, std::move(rate));
    else
      it->second = it->second.plus(rate);
  }

  void parse_jump(JumpModel &model) {
    lex_.take(); // 'jump'
    long long omega = expect_int("jump size");
    std::optional<long long> range_hi;
    bool unbounded = false;
    if (lex_.peek().kind == Tok::dotdot) {
      lex_.take();
      if (lex_.peek().kind == Tok::ident && lex_.peek().text == "inf") {
        lex_.take();
        unbounded = true;
      } else {
        range_hi = expect_int("range end");
      }
    }
    if (unbounded)
      fail(errc::validation, "UnboundedJumpSet",
           "jump set must be finite ((A1)); unbounded jump range declared");
    expect(Tok::colon, "':'");
    PowerSum rate = parse_rate();
    if (range_hi) {
      for (long long w = omega; w <= *range_hi; ++w)
        if (w != 0)
          add_jump(model, w, rate);
    } else {
      add_jump(model, omega, std::move(rate));
    }
  }

  PowerSum parse_rate() {
    std::map<long long, double> overrides;
    if (lex_.peek().kind == Tok::ident && lex_.peek().text == "override") {
      lex_.take();
      for (;;) {
        long long key = expect_int("override state");
        expect(Tok::arrow, "'->'");
        double val = expect_number("override value");
        if (val < 0)
          fail(errc::validation, "NegativeRate",
               "override value at x = " + std::to_string(key) +
                   " is negative");
        overrides[key] = val;
        if (lex_.peek().kind == Tok::comma) {
          lex_.take();
          continue;
        }
        break;
      }
      expect(Tok::semicolon, "';' after overrides");
    }
    ExprVal v = parse_polyexpr();
    long long valid_from = -1;
    if (lex_.peek().kind == Tok::ident && lex_.peek().text == "from") {
      lex_.take();
      valid_from = expect_int("cutoff");
      if (valid_from < 0)
        fail(errc::validation, "ValidationError", "cutoff must be >= 0");
    }
    if (valid_from < 0)
      valid_from =
          overrides.empty() ? 0 : overrides.rbegin()->first + 1;
    for (const auto &[k, val] : overrides)
      if (k >= valid_from)
        fail(errc::validation, "ValidationError",
             "override state " + std::to_string(k) +
                 " is not below the formula cutoff " +
                 std::to_string(valid_from));
    switch (v.kind) {
    case ExprVal::Kind::poly:
      return PowerSum::from_terms(std::move(v.poly), valid_from,
                                  std::move(overrides));
    case ExprVal::Kind::gamma:
      return PowerSum::gamma_ratio(v.kappa, v.xi, valid_from,
                                   std::move(overrides));
    case ExprVal::Kind::ratio:
      return PowerSum::quotient(std::move(v.num), std::move(v.den),
                                valid_from, std::move(overrides));
    }
    fail(errc::internal, "Internal", "unreachable");
  }

  ExprVal parse_polyexpr() {
    ExprVal acc = parse_term();
    for (;;) {
      Tok k = lex_.peek().kind;
      if (k != Tok::plus && k != Tok::minus)
        break;
      bool minus = lex_.take().kind == Tok::minus;
      ExprVal rhs = parse_term();
      if (acc.kind != ExprVal::Kind::poly || rhs.kind != ExprVal::Kind::poly)
        fail(errc::syntax, "SyntaxError",
             "gammaratio/ratio terms cannot be combined with '+'/'-'");
      for (auto t : rhs.poly)
        acc.poly.push_back({minus ? -t.coeff : t.coeff, t.exponent});
      canonicalize(acc.poly);
    }
    return acc;
  }

  ExprVal parse_term() {
    ExprVal acc = parse_factor();
    for (;;) {
      Tok k = lex_.peek().kind;
      if (k != Tok::star && k != Tok::slash)
        break;
      bool div = lex_.take().kind == Tok::slash;
      ExprVal rhs = parse_factor();
      acc = div ? combine_div(acc, rhs) : combine_mul(acc, rhs);
    }
    return acc;
  }

  ExprVal combine_mul(const ExprVal &a, const ExprVal &b) {
    if (a.kind == ExprVal::Kind::poly && b.kind == ExprVal::Kind::poly) {
      ExprVal out;
      for (const auto &ta : a.poly)
        for (const auto &tb : b.poly)
          out.poly.push_back({ta.coeff * tb.coeff,
                              ta.exponent + tb.exponent});
      canonicalize(out.poly);
      return out;
    }
    const ExprVal *special = a.kind == ExprVal::Kind::poly ? &b : &a;
    const ExprVal *other = special == &a ? &b : &a;
    if (other->kind != ExprVal::Kind::poly || !other->is_constant())
      fail(errc::syntax, "SyntaxError",
           "gammaratio/ratio can only be scaled by a constant");
    double c = other->constant();
    ExprVal out = *special;
    if (out.kind == ExprVal::Kind::gamma) {
      out.kappa *= c;
    } else {
      for (auto &t : out.num)
        t.coeff *= c;
    }
    return out;
  }

  ExprVal combine_div(const ExprVal &a, const ExprVal &b) {
    if (b.kind != ExprVal::Kind::poly || b.poly.size() != 1)
      fail(errc::syntax, "SyntaxError",
           "division only by a single term; use ratio(p ; q) for polynomial "
           "quotients");
    if (a.kind != ExprVal::Kind::poly)
      fail(errc::syntax, "SyntaxError",
           "gammaratio/ratio cannot be divided");
    Term d = b.poly[0];
    if (d.coeff == 0.0)
      fail(errc::syntax, "SyntaxError", "division by zero");
    ExprVal out;
    for (const auto &t : a.poly)
      out.poly.push_back({t.coeff / d.coeff, t.exponent - d.exponent});
    canonicalize(out.poly);
    return out;
  }

  ExprVal parse_factor() {
    Token t = lex_.peek();
    if (t.kind == Tok::minus) {
      lex_.take();
      ExprVal v = parse_factor();
      if (v.kind != ExprVal::Kind::poly)
        fail(errc::syntax, "SyntaxError",
             "cannot negate gammaratio/ratio rates (rates are non-negative)");
      for (auto &term : v.poly)
        term.coeff = -term.coeff;
      return v;
    }
    if (t.kind == Tok::number) {
      lex_.take();
      ExprVal v;
      v.poly = {{t.num, 0.0}};
      canonicalize(v.poly);
      return v;
    }
    if (t.kind == Tok::lparen) {
      lex_.take();
      ExprVal v = parse_polyexpr();
      expect(Tok::rparen, "')'");
      return v;
    }
    if (t.kind == Tok::ident && t.text == "x") {
      lex_.take();
      double e = 1.0;
      if (lex_.peek().kind == Tok::caret) {
        lex_.take();
        e = expect_number("exponent");
      }
      ExprVal v;
      v.poly = {{1.0, e}};
      return v;
    }
    if (t.kind == Tok::ident && t.text == "ff") {
      lex_.take();
      expect(Tok::lparen, "'('");
      Token xt = lex_.peek();
      if (xt.kind != Tok::ident || xt.text != "x")
        syntax_error(xt, "'x' in ff(x, n)");
      lex_.take();
      expect(Tok::comma, "','");
      long long n = expect_int("falling factorial order");
      if (n < 0)
        fail(errc::validation, "ValidationError",
             "falling factorial order must be >= 0");
      expect(Tok::rparen, "')'");
      ExprVal v;
      v.poly = {{1.0, 0.0}};
      for (long long i = 0; i < n; ++i) {
        // multiply by (x - i)
        std::vector<Term> next;
        for (const auto &term : v.poly) {
          next.push_back({term.coeff, term.exponent + 1.0});
          next.push_back({-static_cast<double>(i) * term.coeff,
                          term.exponent});
        }
        canonicalize(next);
        v.poly = std::move(next);
      }
      return v;
    }
    if (t.kind == Tok::ident && t.text == "gammaratio") {
      lex_.take();
      expect(Tok::lparen, "'('");
      double xi = expect_number("gammaratio index");
      expect(Tok::rparen, "')'");
      ExprVal v;
      v.kind = ExprVal::Kind::gamma;
      v.kappa = 1.0;
      v.xi = xi;
      return v;
    }
    if (t.kind == Tok::ident && t.text == "ratio") {
      lex_.take();
      expect(Tok::lparen, "'('");
      ExprVal num = parse_polyexpr();
      expect(Tok::semicolon, "';' between ratio numerator and denominator");
      ExprVal den = parse_polyexpr();
      expect(Tok::rparen, "')'");
      if (num.kind != ExprVal::Kind::poly || den.kind != ExprVal::Kind::poly)
        fail(errc::syntax, "SyntaxError",
             "ratio arguments must be polynomials");
      ExprVal v;
      v.kind = ExprVal::Kind::ratio;
      v.num = std::move(num.poly);
      v.den = std::move(den.poly);
      return v;
    }
    syntax_error(t, "a number, 'x', ff(x,n), gammaratio(a), ratio(p ; q) or "
                    "'('");
  }

  void parse_reaction(JumpModel &model) {
    long long n = 1;
    if (lex_.peek().kind == Tok::number)
      n = expect_int("reactant count");
    Token st = lex_.peek();
    if (st.kind != Tok::ident || st.text != "S") {
      if (st.kind == Tok::ident)
        fail(errc::syntax, "SyntaxError",
             "line " + std::to_string(st.line) +
                 ": only the single species 'S' is supported (the state "
                 "space is one-dimensional)");
      syntax_error(st, "'S'");
    }
    lex_.take();
    if (lex_.peek().kind == Tok::plus)
      fail(errc::syntax, "SyntaxError",
           "line " + std::to_string(st.line) +
               ": multi-species reactions are not supported (the state "
               "space is one-dimensional)");
    expect(Tok::arrow, "'->'");
    long long m = 1;
    if (lex_.peek().kind == Tok::number)
      m = expect_int("product count");
    else if (lex_.peek().kind == Tok::lparen)
      syntax_error(lex_.peek(), "an integer product count");
    Token st2 = lex_.peek();
    if (st2.kind != Tok::ident || st2.text != "S")
      syntax_error(st2, "'S'");
    lex_.take();
    expect(Tok::at, "'@'");
    double kappa = expect_number("rate constant");
    if (n == m)
      fail(errc::validation, "SelfLoopReaction",
           "reaction with equal reactant and product counts (n = m = " +
               std::to_string(n) + ")");
    if (!(kappa > 0))
      fail(errc::validation, "NonPositiveRateConstant",
           "rate constant must be positive");
    // mass action: kappa * x (x-1) ... (x-n+1)
    std::vector<Term> poly = {{kappa, 0.0}};
    for (long long i = 0; i < n; ++i) {
      std::vector<Term> next;
      for (const auto &term : poly) {
        next.push_back({term.coeff, term.exponent + 1.0});
        next.push_back({-static_cast<double>(i) * term.coeff, term.exponent});
      }
      canonicalize(next);
      poly = std::move(next);
    }
    add_jump(model, m - n, PowerSum::from_terms(std::move(poly)));
  }

  void parse_burst(JumpModel &model) {
    lex_.take(); // 'burst'
    expect(Tok::at, "'@'");
    double c = expect_number("burst rate");
    if (!(c > 0))
      fail(errc::validation, "NonPositiveRateConstant",
           "burst rate must be positive");
    Token w = lex_.peek();
    if (w.kind != Tok::ident || w.text != "with")
      syntax_error(w, "'with'");
    lex_.take();
    expect(Tok::lbrace, "'{'");
    double total = 0;
    std::map<long long, double> weights;
    for (;;) {
      long long k = expect_int("burst size");
      if (k < 1)
        fail(errc::validation, "ValidationError",
             "burst sizes must be positive integers");
      expect(Tok::colon, "':'");
      double p = expect_number("burst weight");
      if (p < 0)
        fail(errc::validation, "ValidationError",
             "burst weights must be non-negative");
      weights[k] += p;
      total += p;
      if (lex_.peek().kind == Tok::comma) {
        lex_.take();
        continue;
      }
      break;
    }
    expect(Tok::rbrace, "'}'");
    if (total > 1.0 + 1e-12)
      fail(errc::validation, "ValidationError",
           "burst weights sum to " + std::to_string(total) +
               " > 1; truncate the distribution so the weights sum to at "
               "most 1");
    for (const auto &[k, p] : weights)
      if (p > 0)
        add_jump(model, k,
                 PowerSum::from_terms({{c * p, 1.0}}));
  }

  Lexer lex_;
  std::string origin_;
};

} // namespace

JumpModel parse_model(const ModelSource &src) { return Parser(src).parse(); }

JumpModel parse_reactions(const ModelSource &src) {
  return Parser(src).parse();
}

std::string pretty_print(const JumpModel &model) {
  std::ostringstream os;
  os << "statemin " << model.state_min << "\n";
  if (!model.absorbing.empty()) {
    os << "absorbing {";
    bool first = true;
    for (long long a : model.absorbing) {
      if (!first)
        os << ", ";
      first = false;
      os << a;
    }
    os << "}\n";
  }
  for (const auto &[omega, rate] : model.jumps)
    os << "jump " << (omega > 0 ? "+" : "") << omega << ": " << rate.to_dsl()
       << "\n";
  return os.str();
}

} // namespace ctmc
