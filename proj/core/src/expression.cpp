#include "xyfit/expression.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace xyfit {

struct Expression::Node {
  enum class Op { num, var_x, param, add, sub, mul, div, pow, neg, exp, log, sqrt };
  Op op;
  double value = 0.0;  // num
  int index = -1;      // param
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using P = std::shared_ptr<const Node>;

P make(Node::Op op, P a = nullptr, P b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

P num(double v) {
  auto n = std::make_shared<Node>();
  n->op = Node::Op::num;
  n->value = v;
  return n;
}

P param(int idx) {
  auto n = std::make_shared<Node>();
  n->op = Node::Op::param;
  n->index = idx;
  return n;
}

bool is_num(const P& n, double v) {
  return n->op == Node::Op::num && n->value == v;
}

// light simplification: constant folding and identity elimination
P simplify(P n);

P add(P a, P b) {
  a = simplify(std::move(a));
  b = simplify(std::move(b));
  if (is_num(a, 0)) return b;
  if (is_num(b, 0)) return a;
  if (a->op == Node::Op::num && b->op == Node::Op::num)
    return num(a->value + b->value);
  return make(Node::Op::add, a, b);
}

P sub(P a, P b) {
  a = simplify(std::move(a));
  b = simplify(std::move(b));
  if (is_num(b, 0)) return a;
  if (a->op == Node::Op::num && b->op == Node::Op::num)
    return num(a->value - b->value);
  if (is_num(a, 0)) return make(Node::Op::neg, b);
  return make(Node::Op::sub, a, b);
}

P mul(P a, P b) {
  a = simplify(std::move(a));
  b = simplify(std::move(b));
  if (is_num(a, 0) || is_num(b, 0)) return num(0);
  if (is_num(a, 1)) return b;
  if (is_num(b, 1)) return a;
  if (a->op == Node::Op::num && b->op == Node::Op::num)
    return num(a->value * b->value);
  return make(Node::Op::mul, a, b);
}

P div(P a, P b) {
  a = simplify(std::move(a));
  b = simplify(std::move(b));
  if (is_num(a, 0)) return num(0);
  if (is_num(b, 1)) return a;
  if (a->op == Node::Op::num && b->op == Node::Op::num && b->value != 0)
    return num(a->value / b->value);
  return make(Node::Op::div, a, b);
}

P pow_node(P a, P b) {
  a = simplify(std::move(a));
  b = simplify(std::move(b));
  if (is_num(b, 1)) return a;
  if (is_num(b, 0)) return num(1);
  if (a->op == Node::Op::num && b->op == Node::Op::num)
    return num(std::pow(a->value, b->value));
  return make(Node::Op::pow, a, b);
}

P simplify(P n) { return n; }

double eval_node(const Node* n, double x, const Eigen::VectorXd& th) {
  switch (n->op) {
    case Node::Op::num: return n->value;
    case Node::Op::var_x: return x;
    case Node::Op::param: return th[n->index];
    case Node::Op::add: return eval_node(n->a.get(), x, th) + eval_node(n->b.get(), x, th);
    case Node::Op::sub: return eval_node(n->a.get(), x, th) - eval_node(n->b.get(), x, th);
    case Node::Op::mul: return eval_node(n->a.get(), x, th) * eval_node(n->b.get(), x, th);
    case Node::Op::div: return eval_node(n->a.get(), x, th) / eval_node(n->b.get(), x, th);
    case Node::Op::pow: return std::pow(eval_node(n->a.get(), x, th), eval_node(n->b.get(), x, th));
    case Node::Op::neg: return -eval_node(n->a.get(), x, th);
    case Node::Op::exp: return std::exp(eval_node(n->a.get(), x, th));
    case Node::Op::log: return std::log(eval_node(n->a.get(), x, th));
    case Node::Op::sqrt: return std::sqrt(eval_node(n->a.get(), x, th));
  }
  throw std::logic_error("expression: bad node");
}

// d(node)/d(target) where target is either x (param_index = -1) or one theta.
P diff(const P& n, int param_index) {
  switch (n->op) {
    case Node::Op::num: return num(0);
    case Node::Op::var_x: return num(param_index == -1 ? 1 : 0);
    case Node::Op::param: return num(n->index == param_index ? 1 : 0);
    case Node::Op::add: return add(diff(n->a, param_index), diff(n->b, param_index));
    case Node::Op::sub: return sub(diff(n->a, param_index), diff(n->b, param_index));
    case Node::Op::mul:
      return add(mul(diff(n->a, param_index), n->b),
                 mul(n->a, diff(n->b, param_index)));
    case Node::Op::div:
      return div(sub(mul(diff(n->a, param_index), n->b),
                     mul(n->a, diff(n->b, param_index))),
                 mul(n->b, n->b));
    case Node::Op::pow: {
      const P& u = n->a;
      const P& v = n->b;
      const P du = diff(u, param_index);
      const P dv = diff(v, param_index);
      if (is_num(dv, 0)) {
        // d(u^c) = c * u^(c-1) * u'
        return mul(mul(v, pow_node(u, sub(v, num(1)))), du);
      }
      // general: u^v * (v' log u + v u' / u)
      return mul(pow_node(u, v),
                 add(mul(dv, make(Node::Op::log, u)), mul(v, div(du, u))));
    }
    case Node::Op::neg: return make(Node::Op::neg, diff(n->a, param_index));
    case Node::Op::exp: return mul(make(Node::Op::exp, n->a), diff(n->a, param_index));
    case Node::Op::log: return div(diff(n->a, param_index), n->a);
    case Node::Op::sqrt:
      return div(diff(n->a, param_index),
                 mul(num(2), make(Node::Op::sqrt, n->a)));
  }
  throw std::logic_error("expression: bad node");
}

std::string render(const Node* n) {
  switch (n->op) {
    case Node::Op::num: {
      char buf[64];
      snprintf(buf, sizeof(buf), "%g", n->value);
      return buf;
    }
    case Node::Op::var_x: return "x";
    case Node::Op::param: return "p" + std::to_string(n->index);
    case Node::Op::add: return "(" + render(n->a.get()) + " + " + render(n->b.get()) + ")";
    case Node::Op::sub: return "(" + render(n->a.get()) + " - " + render(n->b.get()) + ")";
    case Node::Op::mul: return "(" + render(n->a.get()) + " * " + render(n->b.get()) + ")";
    case Node::Op::div: return "(" + render(n->a.get()) + " / " + render(n->b.get()) + ")";
    case Node::Op::pow: return "(" + render(n->a.get()) + " ^ " + render(n->b.get()) + ")";
    case Node::Op::neg: return "(-" + render(n->a.get()) + ")";
    case Node::Op::exp: return "exp(" + render(n->a.get()) + ")";
    case Node::Op::log: return "log(" + render(n->a.get()) + ")";
    case Node::Op::sqrt: return "sqrt(" + render(n->a.get()) + ")";
  }
  return "?";
}

class Parser {
 public:
  Parser(const std::string& src, std::vector<std::string>& params)
      : src_(src), params_(params) {}

  P parse() {
    P e = parse_expr();
    skip_ws();
    if (pos_ != src_.size())
      throw std::invalid_argument("expression: trailing input at '" +
                                  src_.substr(pos_) + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  P parse_expr() {
    P e = parse_term();
    for (;;) {
      if (eat('+'))
        e = add(e, parse_term());
      else if (eat('-'))
        e = sub(e, parse_term());
      else
        return e;
    }
  }

  P parse_term() {
    P e = parse_unary();
    for (;;) {
      if (eat('*'))
        e = mul(e, parse_unary());
      else if (eat('/'))
        e = div(e, parse_unary());
      else
        return e;
    }
  }

  P parse_unary() {
    if (eat('-')) return make(Node::Op::neg, parse_unary());
    if (eat('+')) return parse_unary();
    return parse_power();
  }

  P parse_power() {
    P base = parse_primary();
    if (eat('^')) return pow_node(base, parse_unary());  // right-assoc
    return base;
  }

  P parse_primary() {
    skip_ws();
    if (pos_ >= src_.size())
      throw std::invalid_argument("expression: unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      const double v = std::stod(src_.substr(pos_), &used);
      pos_ += used;
      return num(v);
    }
    if (c == '(') {
      ++pos_;
      P e = parse_expr();
      if (!eat(')')) throw std::invalid_argument("expression: missing ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        name += src_[pos_++];
      if (peek() == '(') {
        ++pos_;
        P arg = parse_expr();
        if (!eat(')')) throw std::invalid_argument("expression: missing ')'");
        if (name == "exp") return make(Node::Op::exp, arg);
        if (name == "log") return make(Node::Op::log, arg);
        if (name == "sqrt") return make(Node::Op::sqrt, arg);
        throw std::invalid_argument("expression: unknown function '" + name + "'");
      }
      if (name == "x") return make(Node::Op::var_x);
      for (size_t i = 0; i < params_.size(); ++i)
        if (params_[i] == name) return param(static_cast<int>(i));
      params_.push_back(name);
      return param(static_cast<int>(params_.size() - 1));
    }
    throw std::invalid_argument(std::string("expression: unexpected '") + c + "'");
  }

  const std::string& src_;
  std::vector<std::string>& params_;
  size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& source) {
  Expression e;
  Parser p(source, e.params_);
  e.root_ = p.parse();
  return e;
}

double Expression::eval(double x, const Eigen::VectorXd& theta) const {
  return eval_node(root_.get(), x, theta);
}

Expression Expression::deriv_x() const {
  Expression e;
  e.params_ = params_;
  e.root_ = diff(root_, -1);
  return e;
}

Expression Expression::deriv_param(int j) const {
  Expression e;
  e.params_ = params_;
  e.root_ = diff(root_, j);
  return e;
}

std::string Expression::to_string() const { return render(root_.get()); }

ModelFunction expression_model(const std::string& source,
                               bool use_symbolic_derivatives) {
  const Expression f = Expression::parse(source);
  const int np = static_cast<int>(f.param_names().size());

  ModelFunction m;
  m.n_params = np;
  m.param_names = f.param_names();
  m.eval = [f](const Eigen::VectorXd& x, const Eigen::VectorXd& th) {
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = f.eval(x[i], th);
    return out;
  };

  if (use_symbolic_derivatives) {
    const Expression fx = f.deriv_x();
    std::vector<Expression> fp, fxp;
    for (int j = 0; j < np; ++j) {
      fp.push_back(f.deriv_param(j));
      fxp.push_back(fx.deriv_param(j));
    }
    m.deriv = [fx](const Eigen::VectorXd& x, const Eigen::VectorXd& th) {
      Eigen::VectorXd out(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = fx.eval(x[i], th);
      return out;
    };
    m.param_jac = [fp, np](const Eigen::VectorXd& x, const Eigen::VectorXd& th) {
      Eigen::MatrixXd J(x.size(), np);
      for (int j = 0; j < np; ++j)
        for (Eigen::Index i = 0; i < x.size(); ++i)
          J(i, j) = fp[static_cast<size_t>(j)].eval(x[i], th);
      return J;
    };
    m.slope_param_jac = [fxp, np](const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& th) {
      Eigen::MatrixXd J(x.size(), np);
      for (int j = 0; j < np; ++j)
        for (Eigen::Index i = 0; i < x.size(); ++i)
          J(i, j) = fxp[static_cast<size_t>(j)].eval(x[i], th);
      return J;
    };
  } else {
    // finite-difference derivatives
    m.deriv = [f](const Eigen::VectorXd& x, const Eigen::VectorXd& th) {
      Eigen::VectorXd out(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * (1.0 + std::abs(x[i]));
        out[i] = (f.eval(x[i] + h, th) - f.eval(x[i] - h, th)) / (2.0 * h);
      }
      return out;
    };
  }
  return m;
}

}  // namespace xyfit
