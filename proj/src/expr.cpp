#include "hfq/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace hfq {

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string text;
  double number = 0.0;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ >= s_.size()) {
        out.push_back({Tok::End, s_.size(), ""});
        return out;
      }
      char c = s_[pos_];
      std::size_t start = pos_;
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        out.push_back(number(start));
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        out.push_back({Tok::Ident, start, std::string(s_.substr(start, pos_ - start))});
        continue;
      }
      Tok k;
      switch (c) {
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '/': k = Tok::Slash; break;
        case '^': k = Tok::Caret; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        default: throw ParseError(start, "a number, identifier, operator or parenthesis", "'" + std::string(1, c) + "'");
      }
      ++pos_;
      out.push_back({k, start, std::string(1, c)});
    }
  }

 private:
  Token number(std::size_t start) {
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t nd = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) throw ParseError(start, "a digit", "'.'");
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    std::string text(s_.substr(start, pos_ - start));
    Token t{Tok::Number, start, text};
    t.number = std::strtod(text.c_str(), nullptr);
    return t;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

NodePtr make(Expr::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, int n, Bundle bundle) : t_(std::move(toks)), n_(n), bundle_(bundle) {}

  NodePtr run() {
    NodePtr e = expr();
    if (peek().kind != Tok::End) throw ParseError(peek().offset, "an operator or end of input", describe(peek()));
    return e;
  }

 private:
  const Token& peek() const { return t_[i_]; }
  const Token& next() { return t_[i_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++i_;
    return true;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) throw ParseError(peek().offset, what, describe(peek()));
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (true) {
      if (accept(Tok::Plus)) lhs = make(Expr::Kind::Add, lhs, term());
      else if (accept(Tok::Minus)) lhs = make(Expr::Kind::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (true) {
      if (accept(Tok::Star)) lhs = make(Expr::Kind::Mul, lhs, unary());
      else if (accept(Tok::Slash)) lhs = make(Expr::Kind::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept(Tok::Minus)) return make(Expr::Kind::Neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (!accept(Tok::Caret)) return base;
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Kind::Pow;
    n->a = base;
    n->value = exponent();
    return n;
  }

  double exponent() {
    bool neg = accept(Tok::Minus);
    if (peek().kind != Tok::Number) throw ParseError(peek().offset, "a numeric exponent", describe(peek()));
    double v = next().number;
    if (neg) v = -v;
    if (accept(Tok::Caret)) v = std::pow(v, exponent());
    return v;
  }

  NodePtr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        ++i_;
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Kind::Const;
        n->value = t.number;
        return n;
      }
      case Tok::LParen: {
        ++i_;
        NodePtr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: return ident();
      default: throw ParseError(t.offset, "a number, identifier or '('", describe(t));
    }
  }

  NodePtr ident() {
    const Token& t = next();
    static const std::pair<const char*, Func> funcs[] = {
        {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp}, {"log", Func::Log}, {"sqrt", Func::Sqrt}};
    for (const auto& [name, f] : funcs) {
      if (t.text != name) continue;
      expect(Tok::LParen, "'(' after function name");
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Kind::Call;
      n->func = f;
      n->a = expr();
      expect(Tok::RParen, "')'");
      return n;
    }
    if (peek().kind == Tok::LParen) throw ParseError(t.offset, "a known function (sin, cos, exp, log, sqrt)", describe(t));
    int slot = variable_slot(t.text);
    if (slot < 0) throw UnknownVariable(t.offset, t.text);
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Kind::Var;
    n->var = slot;
    return n;
  }

  int variable_slot(const std::string& s) const {
    if (s.size() < 2) return -1;
    char c = s[0];
    int offset;
    if (c == 'x') offset = 0;
    else if (c == fiber_letter(bundle_)) offset = n_;
    else return -1;
    if (s[1] == '0') return -1;
    int idx = 0;
    for (std::size_t k = 1; k < s.size(); ++k) {
      if (!std::isdigit(static_cast<unsigned char>(s[k]))) return -1;
      idx = idx * 10 + (s[k] - '0');
      if (idx > n_) return -1;
    }
    if (idx < 1) return -1;
    return offset + idx - 1;
  }

  std::vector<Token> t_;
  std::size_t i_ = 0;
  int n_;
  Bundle bundle_;
};

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

void print(const Expr::Node& e, int n, Bundle b, std::string& out) {
  auto bin = [&](const char* op) {
    out += '(';
    print(*e.a, n, b, out);
    out += op;
    print(*e.b, n, b, out);
    out += ')';
  };
  switch (e.kind) {
    case Expr::Kind::Const:
      if (e.value < 0) out += "(-" + format_number(-e.value) + ")";
      else out += format_number(e.value);
      break;
    case Expr::Kind::Var: out += variable_name(e.var, n, b); break;
    case Expr::Kind::Neg:
      out += "(-";
      print(*e.a, n, b, out);
      out += ')';
      break;
    case Expr::Kind::Add: bin(" + "); break;
    case Expr::Kind::Sub: bin(" - "); break;
    case Expr::Kind::Mul: bin(" * "); break;
    case Expr::Kind::Div: bin(" / "); break;
    case Expr::Kind::Pow:
      out += '(';
      print(*e.a, n, b, out);
      out += ")^" + format_number(e.value);
      break;
    case Expr::Kind::Call:
      out += func_name(e.func);
      out += '(';
      print(*e.a, n, b, out);
      out += ')';
      break;
  }
}

bool equal(const Expr::Node& a, const Expr::Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Const: return a.value == b.value;
    case Expr::Kind::Var: return a.var == b.var;
    case Expr::Kind::Pow: return a.value == b.value && equal(*a.a, *b.a);
    case Expr::Kind::Call: return a.func == b.func && equal(*a.a, *b.a);
    case Expr::Kind::Neg: return equal(*a.a, *b.a);
    default: return equal(*a.a, *b.a) && equal(*a.b, *b.b);
  }
}

RJet eval(const Expr::Node& e, const std::vector<RJet>& vars) {
  const int dim = vars[0].dim();
  const int K = vars[0].order();
  switch (e.kind) {
    case Expr::Kind::Const: return RJet::constant(dim, K, e.value);
    case Expr::Kind::Var: return vars[e.var];
    case Expr::Kind::Neg: return -eval(*e.a, vars);
    case Expr::Kind::Add: return eval(*e.a, vars) + eval(*e.b, vars);
    case Expr::Kind::Sub: return eval(*e.a, vars) - eval(*e.b, vars);
    case Expr::Kind::Mul: return eval(*e.a, vars) * eval(*e.b, vars);
    case Expr::Kind::Div: return eval(*e.a, vars) / eval(*e.b, vars);
    case Expr::Kind::Pow: return pow(eval(*e.a, vars), e.value);
    case Expr::Kind::Call: {
      RJet x = eval(*e.a, vars);
      switch (e.func) {
        case Func::Sin: return sin(x);
        case Func::Cos: return cos(x);
        case Func::Exp: return exp(x);
        case Func::Log: return log(x);
        case Func::Sqrt: return sqrt(x);
      }
    }
  }
  throw Error("corrupt expression node");
}

}  // namespace

Expr parse(std::string_view src, int n, Bundle bundle) {
  if (n < 1) throw InputError("base dimension must be at least 1");
  Lexer lex(src);
  Parser p(lex.run(), n, bundle);
  return Expr(p.run(), n, bundle);
}

std::string variable_name(int slot, int n, Bundle bundle) {
  if (slot < n) return "x" + std::to_string(slot + 1);
  return std::string(1, fiber_letter(bundle)) + std::to_string(slot - n + 1);
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e.root(), e.n(), e.bundle(), out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  return a.n() == b.n() && a.bundle() == b.bundle() && equal(a.root(), b.root());
}

RJet eval_jet(const Expr& e, const PhasePoint& pt, int order) {
  if (pt.bundle != e.bundle()) throw InputError("expression and point live on different bundles");
  if (pt.n() != e.n()) throw InputError("expression and point have different base dimensions");
  Eigen::VectorXd u = pt.coords();
  std::vector<RJet> vars;
  vars.reserve(u.size());
  for (int i = 0; i < u.size(); ++i) vars.push_back(RJet::variable(pt.dim(), order, i, u[i]));
  return eval(e.root(), vars);
}

}  // namespace hfq
