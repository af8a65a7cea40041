#include "quasisl/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>
#include <vector>

#include "quasisl/errors.hpp"

namespace quasisl {
namespace detail {

enum class Op { Add, Sub, Mul, Div, Pow, Neg };
enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Sign };

struct ExprNode {
  enum class Kind { Number, Const, Var, Unary, Binary, Call } kind;
  double number = 0;                 // Kind::Number
  std::string const_name;            // Kind::Const ("pi", "e", "i")
  Complex const_value;               // Kind::Const
  Op op = Op::Add;                   // Unary/Binary
  Func func = Func::Sin;             // Call
  std::string func_name;             // Call
  std::shared_ptr<const ExprNode> lhs, rhs;  // children (Unary/Call use lhs)
};

using NodePtr = std::shared_ptr<const ExprNode>;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kE = 2.71828182845904523536028747135266250;

struct Token {
  enum class Kind { Number, Ident, Punct, End } kind;
  std::string text;
  double number = 0;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::End;
      tok_.text.clear();
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t begin = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        ++pos_;
      tok_.kind = Token::Kind::Ident;
      tok_.text.assign(src_.substr(begin, pos_ - begin));
      return;
    }
    if (std::string_view("+-*/^(),").find(c) != std::string_view::npos) {
      tok_.kind = Token::Kind::Punct;
      tok_.text.assign(1, c);
      ++pos_;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  void lex_number() {
    std::size_t begin = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
        ++pos_;
      if (pos_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // bare 'e' belongs to the next token
      }
    }
    std::string text(src_.substr(begin, pos_ - begin));
    tok_.kind = Token::Kind::Number;
    tok_.text = text;
    tok_.number = std::strtod(text.c_str(), nullptr);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

bool lookup_func(const std::string& name, Func& out) {
  if (name == "sin") out = Func::Sin;
  else if (name == "cos") out = Func::Cos;
  else if (name == "tan") out = Func::Tan;
  else if (name == "exp") out = Func::Exp;
  else if (name == "log") out = Func::Log;
  else if (name == "sqrt") out = Func::Sqrt;
  else if (name == "abs") out = Func::Abs;
  else if (name == "sign") out = Func::Sign;
  else return false;
  return true;
}

class Parser {
 public:
  Parser(std::string_view src, bool allow_imaginary)
      : lex_(src), allow_imaginary_(allow_imaginary) {}

  NodePtr parse() {
    NodePtr e = parse_expr();
    if (lex_.peek().kind != Token::Kind::End)
      throw ParseError("trailing input after expression", lex_.peek().offset);
    return e;
  }

 private:
  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (is_punct("+") || is_punct("-")) {
      Token t = lex_.take();
      NodePtr rhs = parse_term();
      lhs = binary(t.text == "+" ? Op::Add : Op::Sub, lhs, rhs);
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    while (is_punct("*") || is_punct("/")) {
      Token t = lex_.take();
      NodePtr rhs = parse_factor();
      lhs = binary(t.text == "*" ? Op::Mul : Op::Div, lhs, rhs);
    }
    return lhs;
  }

  // '^' binds tighter than unary minus: -t^2 parses as -(t^2), and the
  // exponent may itself carry a sign (t^-1).
  NodePtr parse_factor() {
    if (is_punct("-")) {
      lex_.take();
      return unary(Op::Neg, parse_factor());
    }
    NodePtr base = parse_atom();
    if (is_punct("^")) {
      lex_.take();
      return binary(Op::Pow, base, parse_factor());
    }
    return base;
  }

  NodePtr parse_atom() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Number) {
      Token n = lex_.take();
      auto node = std::make_shared<ExprNode>();
      node->kind = ExprNode::Kind::Number;
      node->number = n.number;
      return node;
    }
    if (t.kind == Token::Kind::Ident) {
      Token id = lex_.take();
      if (is_punct("(")) {
        Func f;
        if (!lookup_func(id.text, f))
          throw ParseError("unknown function '" + id.text + "'", id.offset);
        lex_.take();
        std::vector<NodePtr> args;
        if (!is_punct(")")) {
          args.push_back(parse_expr());
          while (is_punct(",")) {
            lex_.take();
            args.push_back(parse_expr());
          }
        }
        expect(")");
        if (args.size() != 1)
          throw ParseError("function '" + id.text + "' takes 1 argument, got " +
                               std::to_string(args.size()),
                           id.offset);
        auto node = std::make_shared<ExprNode>();
        node->kind = ExprNode::Kind::Call;
        node->func = f;
        node->func_name = id.text;
        node->lhs = args[0];
        return node;
      }
      if (id.text == "t") {
        auto node = std::make_shared<ExprNode>();
        node->kind = ExprNode::Kind::Var;
        return node;
      }
      if (id.text == "pi") return constant("pi", kPi);
      if (id.text == "e") return constant("e", kE);
      if (id.text == "i") {
        if (!allow_imaginary_)
          throw ParseError(
              "imaginary unit 'i' is not allowed in a real coefficient",
              id.offset);
        return constant("i", Complex(0, 1));
      }
      Func f;
      if (lookup_func(id.text, f))
        throw ParseError("function '" + id.text + "' used without arguments",
                         id.offset);
      throw ParseError("unknown identifier '" + id.text + "'", id.offset);
    }
    if (is_punct("(")) {
      lex_.take();
      NodePtr e = parse_expr();
      expect(")");
      return e;
    }
    throw ParseError("expected a number, identifier or '('", t.offset);
  }

  static NodePtr constant(const char* name, Complex value) {
    auto node = std::make_shared<ExprNode>();
    node->kind = ExprNode::Kind::Const;
    node->const_name = name;
    node->const_value = value;
    return node;
  }

  static NodePtr unary(Op op, NodePtr child) {
    auto node = std::make_shared<ExprNode>();
    node->kind = ExprNode::Kind::Unary;
    node->op = op;
    node->lhs = std::move(child);
    return node;
  }

  static NodePtr binary(Op op, NodePtr lhs, NodePtr rhs) {
    auto node = std::make_shared<ExprNode>();
    node->kind = ExprNode::Kind::Binary;
    node->op = op;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    return node;
  }

  bool is_punct(const char* p) const {
    return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p;
  }

  void expect(const char* p) {
    if (!is_punct(p))
      throw ParseError(std::string("expected '") + p + "'",
                       lex_.peek().offset);
    lex_.take();
  }

  Lexer lex_;
  bool allow_imaginary_;
};

bool near_integer(double x, long long& out) {
  if (std::abs(x) > 1e15) return false;
  double r = std::nearbyint(x);
  if (std::abs(x - r) > 1e-12 * (1.0 + std::abs(x))) return false;
  out = static_cast<long long>(r);
  return true;
}

Complex pow_int(Complex base, long long n) {
  if (n < 0) return 1.0 / pow_int(base, -n);
  Complex acc(1, 0);
  while (n > 0) {
    if (n & 1) acc *= base;
    base *= base;
    n >>= 1;
  }
  return acc;
}

Complex eval_node(const ExprNode& node, double t) {
  switch (node.kind) {
    case ExprNode::Kind::Number:
      return node.number;
    case ExprNode::Kind::Const:
      return node.const_value;
    case ExprNode::Kind::Var:
      return t;
    case ExprNode::Kind::Unary:
      return -eval_node(*node.lhs, t);
    case ExprNode::Kind::Binary: {
      Complex a = eval_node(*node.lhs, t);
      Complex b = eval_node(*node.rhs, t);
      switch (node.op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div: return a / b;
        case Op::Pow: {
          long long n;
          if (b.imag() == 0.0 && near_integer(b.real(), n))
            return pow_int(a, n);
          return std::pow(a, b);
        }
        default: break;
      }
      return {};
    }
    case ExprNode::Kind::Call: {
      Complex a = eval_node(*node.lhs, t);
      switch (node.func) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Tan: return std::tan(a);
        case Func::Exp: return std::exp(a);
        case Func::Log: return std::log(a);
        case Func::Sqrt: return std::sqrt(a);
        case Func::Abs: return std::abs(a);
        case Func::Sign: {
          double m = std::abs(a);
          if (m == 0.0) return 0.0;
          if (a.imag() == 0.0) return a.real() > 0 ? 1.0 : -1.0;
          return a / m;
        }
      }
      return {};
    }
  }
  return {};
}

// Precedence used for printing with minimal parentheses.
int precedence(const ExprNode& node) {
  switch (node.kind) {
    case ExprNode::Kind::Binary:
      switch (node.op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Pow: return 4;
        default: return 0;
      }
    case ExprNode::Kind::Unary:
      return 3;
    default:
      return 9;
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_node(const ExprNode& node, std::string& out);

void print_child(const ExprNode& child, int min_prec, std::string& out) {
  bool need = precedence(child) < min_prec;
  if (need) out += '(';
  print_node(child, out);
  if (need) out += ')';
}

void print_node(const ExprNode& node, std::string& out) {
  switch (node.kind) {
    case ExprNode::Kind::Number: {
      if (node.number < 0) {
        // negative literal prints as a unary minus expression
        out += '-';
        out += format_number(-node.number);
      } else {
        out += format_number(node.number);
      }
      return;
    }
    case ExprNode::Kind::Const:
      out += node.const_name;
      return;
    case ExprNode::Kind::Var:
      out += 't';
      return;
    case ExprNode::Kind::Unary:
      out += '-';
      print_child(*node.lhs, 3, out);
      return;
    case ExprNode::Kind::Binary: {
      switch (node.op) {
        case Op::Add:
          print_child(*node.lhs, 1, out);
          out += '+';
          print_child(*node.rhs, 2, out);
          return;
        case Op::Sub:
          print_child(*node.lhs, 1, out);
          out += '-';
          print_child(*node.rhs, 2, out);
          return;
        case Op::Mul:
          print_child(*node.lhs, 2, out);
          out += '*';
          print_child(*node.rhs, 3, out);
          return;
        case Op::Div:
          print_child(*node.lhs, 2, out);
          out += '/';
          print_child(*node.rhs, 3, out);
          return;
        case Op::Pow:
          print_child(*node.lhs, 9, out);
          out += '^';
          print_child(*node.rhs, 3, out);
          return;
        default:
          return;
      }
    }
    case ExprNode::Kind::Call:
      out += node.func_name;
      out += '(';
      print_node(*node.lhs, out);
      out += ')';
      return;
  }
}

bool uses_imag(const ExprNode& node) {
  if (node.kind == ExprNode::Kind::Const && node.const_name == "i") return true;
  if (node.lhs && uses_imag(*node.lhs)) return true;
  if (node.rhs && uses_imag(*node.rhs)) return true;
  return false;
}

}  // namespace
}  // namespace detail

Expr Expr::parse(std::string_view src, bool allow_imaginary) {
  detail::Parser parser(src, allow_imaginary);
  return Expr(parser.parse());
}

Expr Expr::constant(double value) {
  auto node = std::make_shared<detail::ExprNode>();
  node->kind = detail::ExprNode::Kind::Number;
  node->number = value;
  return Expr(std::move(node));
}

Complex Expr::eval(double t) const {
  if (!root_) throw EvalError("evaluating an empty expression");
  Complex v = detail::eval_node(*root_, t);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw EvalError("expression '" + str() + "' is nonfinite at t=" +
                    std::to_string(t));
  return v;
}

double Expr::eval_real(double t) const {
  Complex v = eval(t);
  if (std::abs(v.imag()) > 1e-12 * (1.0 + std::abs(v.real())))
    throw EvalError("expression '" + str() +
                    "' is not real-valued at t=" + std::to_string(t));
  return v.real();
}

std::string Expr::str() const {
  if (!root_) return "";
  std::string out;
  detail::print_node(*root_, out);
  return out;
}

bool Expr::references_imaginary_unit() const {
  return root_ && detail::uses_imag(*root_);
}

}  // namespace quasisl
