#include "regulie/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace regulie {

struct ExprNode {
  enum Kind {
    Number,
    Variable,
    Basis,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,
    Sin,
    Cos,
    Exp
  } kind;
  double number = 0.0;
  int index = 0;  // variable index, 0-based basis index, or integer exponent
  ExprNodePtr a, b;
};

namespace {

constexpr double kPi = 3.14159265358979323846;

ExprNodePtr make_num(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Number;
  n->number = v;
  return n;
}

ExprNodePtr make_node(ExprNode::Kind k, ExprNodePtr a, ExprNodePtr b = nullptr,
                      int index = 0) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  n->index = index;
  return n;
}

// ---- tokenizer ---------------------------------------------------------------

struct Token {
  enum Kind { Number, Ident, Op, End } kind;
  double number = 0.0;
  std::string ident;
  char op = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) { advance(); }
  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ >= s_.size()) {
      tok_ = {Token::End, 0.0, "", 0};
      return;
    }
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) throw UsageError("expression: bad numeric literal near '" + s_.substr(pos_) + "'");
      pos_ += static_cast<std::size_t>(end - begin);
      tok_ = {Token::Number, v, "", 0};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      tok_ = {Token::Ident, 0.0, s_.substr(start, pos_ - start), 0};
      return;
    }
    if (std::string("+-*/^()").find(c) != std::string::npos) {
      ++pos_;
      tok_ = {Token::Op, 0.0, "", c};
      return;
    }
    throw UsageError(std::string("expression: unexpected character '") + c + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
  Token tok_;
};

// ---- parser (recursive descent) -------------------------------------------------

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars,
         int basis_dim)
      : lex_(text), vars_(vars), basis_dim_(basis_dim) {}

  ExprNodePtr run() {
    ExprNodePtr e = sum();
    if (lex_.peek().kind != Token::End)
      throw UsageError("expression: trailing input after a complete expression");
    return e;
  }

 private:
  bool is_op(char c) const {
    return lex_.peek().kind == Token::Op && lex_.peek().op == c;
  }

  ExprNodePtr sum() {
    ExprNodePtr e = product();
    while (is_op('+') || is_op('-')) {
      char op = lex_.take().op;
      ExprNodePtr rhs = product();
      e = make_node(op == '+' ? ExprNode::Add : ExprNode::Sub, e, rhs);
    }
    return e;
  }

  ExprNodePtr product() {
    ExprNodePtr e = unary();
    while (is_op('*') || is_op('/')) {
      char op = lex_.take().op;
      ExprNodePtr rhs = unary();
      e = make_node(op == '*' ? ExprNode::Mul : ExprNode::Div, e, rhs);
    }
    return e;
  }

  ExprNodePtr unary() {
    if (is_op('-')) {
      lex_.take();
      return make_node(ExprNode::Neg, unary());
    }
    if (is_op('+')) {
      lex_.take();
      return unary();
    }
    return power();
  }

  ExprNodePtr power() {
    ExprNodePtr base = atom();
    if (is_op('^')) {
      lex_.take();
      Token t = lex_.take();
      if (t.kind != Token::Number || t.number != std::floor(t.number) ||
          t.number < 0 || t.number > 64)
        throw UsageError("expression: '^' needs a plain nonnegative integer exponent");
      base = make_node(ExprNode::Pow, base, nullptr, static_cast<int>(t.number));
    }
    return base;
  }

  ExprNodePtr atom() {
    Token t = lex_.take();
    if (t.kind == Token::Number) return make_num(t.number);
    if (t.kind == Token::Op && t.op == '(') {
      ExprNodePtr e = sum();
      if (!is_op(')')) throw UsageError("expression: missing ')'");
      lex_.take();
      return e;
    }
    if (t.kind == Token::Ident) return ident_atom(t.ident);
    throw UsageError("expression: expected a value");
  }

  ExprNodePtr ident_atom(const std::string& name) {
    if (name == "pi") return make_num(kPi);
    if (name == "sin" || name == "cos" || name == "exp") {
      if (!is_op('(')) throw UsageError("expression: '" + name + "' needs '(...)'");
      lex_.take();
      ExprNodePtr arg = sum();
      if (!is_op(')')) throw UsageError("expression: missing ')'");
      lex_.take();
      ExprNode::Kind k = name == "sin"   ? ExprNode::Sin
                         : name == "cos" ? ExprNode::Cos
                                         : ExprNode::Exp;
      return make_node(k, arg);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name)
        return make_node(ExprNode::Variable, nullptr, nullptr, static_cast<int>(i));
    if (name.size() >= 2 && name[0] == 'e' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      int k = std::atoi(name.c_str() + 1);
      if (basis_dim_ <= 0)
        throw UsageError("expression: basis atom '" + name + "' not allowed in a scalar expression");
      if (k < 1 || k > basis_dim_) {
        std::ostringstream os;
        os << "expression: basis atom '" << name << "' out of range 1.." << basis_dim_;
        throw UsageError(os.str());
      }
      return make_node(ExprNode::Basis, nullptr, nullptr, k - 1);
    }
    throw UsageError("expression: unknown name '" + name + "'");
  }

  Lexer lex_;
  const std::vector<std::string>& vars_;
  int basis_dim_;
};

// ---- static shape check (scalar vs algebra-valued) -------------------------------

bool check_vectorness(const ExprNodePtr& n) {
  switch (n->kind) {
    case ExprNode::Number:
    case ExprNode::Variable:
      return false;
    case ExprNode::Basis:
      return true;
    case ExprNode::Add:
    case ExprNode::Sub: {
      bool va = check_vectorness(n->a), vb = check_vectorness(n->b);
      if (va != vb)
        throw UsageError("expression: cannot add scalars and algebra elements");
      return va;
    }
    case ExprNode::Mul: {
      bool va = check_vectorness(n->a), vb = check_vectorness(n->b);
      if (va && vb)
        throw UsageError("expression: cannot multiply two algebra elements");
      return va || vb;
    }
    case ExprNode::Div: {
      bool va = check_vectorness(n->a);
      if (check_vectorness(n->b))
        throw UsageError("expression: cannot divide by an algebra element");
      return va;
    }
    case ExprNode::Neg:
      return check_vectorness(n->a);
    case ExprNode::Pow:
    case ExprNode::Sin:
    case ExprNode::Cos:
    case ExprNode::Exp:
      if (check_vectorness(n->a))
        throw UsageError("expression: functions and powers apply to scalars only");
      return false;
  }
  throw UsageError("expression: corrupt syntax tree");
}

// ---- evaluation -----------------------------------------------------------------

struct Value {
  bool isv = false;
  double s = 0.0;
  Vec v;
};

Value eval_node(const ExprNodePtr& n, const Vec& vars, int dim) {
  switch (n->kind) {
    case ExprNode::Number:
      return {false, n->number, {}};
    case ExprNode::Variable:
      if (n->index >= vars.size())
        throw UsageError("expression: variable index out of range at evaluation");
      return {false, vars[n->index], {}};
    case ExprNode::Basis: {
      Vec v = Vec::Zero(dim);
      v[n->index] = 1.0;
      return {true, 0.0, std::move(v)};
    }
    case ExprNode::Add:
    case ExprNode::Sub: {
      Value a = eval_node(n->a, vars, dim), b = eval_node(n->b, vars, dim);
      double sgn = n->kind == ExprNode::Add ? 1.0 : -1.0;
      if (a.isv) return {true, 0.0, Vec(a.v + sgn * b.v)};
      return {false, a.s + sgn * b.s, {}};
    }
    case ExprNode::Mul: {
      Value a = eval_node(n->a, vars, dim), b = eval_node(n->b, vars, dim);
      if (a.isv) return {true, 0.0, Vec(b.s * a.v)};
      if (b.isv) return {true, 0.0, Vec(a.s * b.v)};
      return {false, a.s * b.s, {}};
    }
    case ExprNode::Div: {
      Value a = eval_node(n->a, vars, dim), b = eval_node(n->b, vars, dim);
      if (a.isv) return {true, 0.0, Vec(a.v / b.s)};
      return {false, a.s / b.s, {}};
    }
    case ExprNode::Neg: {
      Value a = eval_node(n->a, vars, dim);
      if (a.isv) return {true, 0.0, Vec(-a.v)};
      return {false, -a.s, {}};
    }
    case ExprNode::Pow:
      return {false, std::pow(eval_node(n->a, vars, dim).s, n->index), {}};
    case ExprNode::Sin:
      return {false, std::sin(eval_node(n->a, vars, dim).s), {}};
    case ExprNode::Cos:
      return {false, std::cos(eval_node(n->a, vars, dim).s), {}};
    case ExprNode::Exp:
      return {false, std::exp(eval_node(n->a, vars, dim).s), {}};
  }
  throw UsageError("expression: corrupt syntax tree");
}

// ---- symbolic derivative ----------------------------------------------------------

ExprNodePtr d(const ExprNodePtr& n, int var) {
  switch (n->kind) {
    case ExprNode::Number:
      return make_num(0.0);
    case ExprNode::Basis:
      // Keep the derivative vector-shaped so sums stay well-typed.
      return make_node(ExprNode::Mul, make_num(0.0), n);
    case ExprNode::Variable:
      return make_num(n->index == var ? 1.0 : 0.0);
    case ExprNode::Add:
      return make_node(ExprNode::Add, d(n->a, var), d(n->b, var));
    case ExprNode::Sub:
      return make_node(ExprNode::Sub, d(n->a, var), d(n->b, var));
    case ExprNode::Mul:
      return make_node(ExprNode::Add,
                       make_node(ExprNode::Mul, d(n->a, var), n->b),
                       make_node(ExprNode::Mul, n->a, d(n->b, var)));
    case ExprNode::Div:
      // (a/b)' = a'/b - a b' / b^2
      return make_node(
          ExprNode::Sub, make_node(ExprNode::Div, d(n->a, var), n->b),
          make_node(ExprNode::Div, make_node(ExprNode::Mul, n->a, d(n->b, var)),
                    make_node(ExprNode::Pow, n->b, nullptr, 2)));
    case ExprNode::Neg:
      return make_node(ExprNode::Neg, d(n->a, var));
    case ExprNode::Pow: {
      if (n->index == 0) return make_num(0.0);
      ExprNodePtr lower = n->index == 1
                              ? make_num(1.0)
                              : make_node(ExprNode::Pow, n->a, nullptr, n->index - 1);
      return make_node(
          ExprNode::Mul, make_num(static_cast<double>(n->index)),
          make_node(ExprNode::Mul, lower, d(n->a, var)));
    }
    case ExprNode::Sin:
      return make_node(ExprNode::Mul, make_node(ExprNode::Cos, n->a), d(n->a, var));
    case ExprNode::Cos:
      return make_node(ExprNode::Neg, make_node(ExprNode::Mul,
                                                make_node(ExprNode::Sin, n->a),
                                                d(n->a, var)));
    case ExprNode::Exp:
      return make_node(ExprNode::Mul, make_node(ExprNode::Exp, n->a), d(n->a, var));
  }
  throw UsageError("expression: corrupt syntax tree");
}

bool contains_variables(const ExprNodePtr& n) {
  if (!n) return false;
  if (n->kind == ExprNode::Variable || n->kind == ExprNode::Basis) return true;
  return contains_variables(n->a) || contains_variables(n->b);
}

bool is_polynomial(const ExprNodePtr& n) {
  switch (n->kind) {
    case ExprNode::Number:
    case ExprNode::Variable:
    case ExprNode::Basis:
      return true;
    case ExprNode::Add:
    case ExprNode::Sub:
    case ExprNode::Mul:
      return is_polynomial(n->a) && is_polynomial(n->b);
    case ExprNode::Div:
      return is_polynomial(n->a) && !contains_variables(n->b);
    case ExprNode::Neg:
      return is_polynomial(n->a);
    case ExprNode::Pow:
      return is_polynomial(n->a);
    case ExprNode::Sin:
    case ExprNode::Cos:
    case ExprNode::Exp:
      return false;
  }
  return false;
}

}  // namespace

Expr Expr::parse(const std::string& text, const std::vector<std::string>& vars,
                 int basis_dim) {
  Parser p(text, vars, basis_dim);
  Expr e;
  e.root_ = p.run();
  e.nvars_ = static_cast<int>(vars.size());
  e.basis_dim_ = basis_dim;
  e.text_ = text;
  (void)check_vectorness(e.root_);
  return e;
}

bool Expr::vector_valued() const { return check_vectorness(root_); }

double Expr::eval_scalar(const Vec& vars) const {
  Value v = eval_node(root_, vars, std::max(basis_dim_, 1));
  if (v.isv)
    throw UsageError("expression: expected a scalar but got an algebra element: " + text_);
  return v.s;
}

Vec Expr::eval_coeffs(const Vec& vars, int dim) const {
  Value v = eval_node(root_, vars, dim);
  if (v.isv) return v.v;
  if (v.s == 0.0) return Vec::Zero(dim);
  throw UsageError(
      "expression: algebra-valued input must combine basis atoms e1..eN: " + text_);
}

Expr Expr::derivative(int var) const {
  Expr e;
  e.root_ = d(root_, var);
  e.nvars_ = nvars_;
  e.basis_dim_ = basis_dim_;
  e.text_ = "d/d" + std::to_string(var) + "(" + text_ + ")";
  return e;
}

bool Expr::polynomial() const { return is_polynomial(root_); }

std::vector<std::string> split_top_level(const std::string& text, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  auto push = [&out](std::string piece) {
    std::size_t b = piece.find_first_not_of(" \t\n");
    std::size_t e = piece.find_last_not_of(" \t\n");
    out.push_back(b == std::string::npos ? std::string() : piece.substr(b, e - b + 1));
  };
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      push(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  push(cur);
  return out;
}

AlgebraCurve curve_from_expression(const GroupPtr& g, const std::string& text) {
  Expr e = Expr::parse(text, {"t"}, g->alg_dim);
  int dim = g->alg_dim;
  return curve_from_function(g, [e, dim](double t) {
    Vec v(1);
    v[0] = t;
    return e.eval_coeffs(v, dim);
  });
}

PathInBase path_from_expressions(const std::string& text) {
  std::vector<std::string> pieces = split_top_level(text, ',');
  if (pieces.empty()) throw UsageError("path expression: empty input");
  std::vector<Expr> comps, vels;
  for (const auto& p : pieces) {
    Expr e = Expr::parse(p, {"t"});
    vels.push_back(e.derivative(0));
    comps.push_back(std::move(e));
  }
  const int dim = static_cast<int>(comps.size());
  auto eval = [comps, dim](double t) {
    Vec arg(1);
    arg[0] = t;
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = comps[static_cast<std::size_t>(i)].eval_scalar(arg);
    return v;
  };
  auto vel = [vels, dim](double t) {
    Vec arg(1);
    arg[0] = t;
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = vels[static_cast<std::size_t>(i)].eval_scalar(arg);
    return v;
  };
  return base_path(dim, eval, vel);
}

}  // namespace regulie
