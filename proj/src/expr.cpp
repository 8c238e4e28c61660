#include "find/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>

namespace find {

bool Expr::operator==(const Expr& o) const {
  if (op != o.op) return false;
  switch (op) {
    case Op::Const: return value == o.value || (std::isnan(value) && std::isnan(o.value));
    case Op::Var: return index == o.index && name == o.name;
    default: return args == o.args;
  }
}

Expr constant(double v) {
  Expr e;
  e.op = Op::Const;
  e.value = v;
  return e;
}

Expr variable(std::size_t index, std::string name) {
  Expr e;
  e.op = Op::Var;
  e.index = index;
  e.name = std::move(name);
  return e;
}

namespace {

Expr node(Op op, std::vector<Expr> args) {
  Expr e;
  e.op = op;
  e.args = std::move(args);
  return e;
}

struct OpInfo {
  Op op;
  std::string_view symbol;
  std::size_t arity;
};

constexpr std::array<OpInfo, 14> kOps = {{
    {Op::Add, "+", 2},   {Op::Sub, "-", 2},      {Op::Mul, "*", 2},     {Op::Div, "/", 2},
    {Op::Pow, "^", 2},   {Op::Neg, "neg", 1},    {Op::Sin, "sin", 1},   {Op::Cos, "cos", 1},
    {Op::Tan, "tan", 1}, {Op::Exp, "exp", 1},    {Op::Log, "log", 1},   {Op::Sqrt, "sqrt", 1},
    {Op::Atan, "atan", 1}, {Op::Abs, "abs", 1},
}};

const OpInfo* find_symbol(std::string_view s) {
  for (const auto& info : kOps) {
    if (info.symbol == s) return &info;
  }
  return nullptr;
}

std::string format_number(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

int precedence(const Expr& e) {
  switch (e.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return e.value < 0 ? 3 : 5;
    default: return 5;
  }
}

void text(const Expr& e, int digits, std::string& out);

void text_child(const Expr& c, int min_prec, int digits, std::string& out) {
  if (precedence(c) < min_prec) {
    out += '(';
    text(c, digits, out);
    out += ')';
  } else {
    text(c, digits, out);
  }
}

void text(const Expr& e, int digits, std::string& out) {
  switch (e.op) {
    case Op::Const: out += format_number(e.value, digits); return;
    case Op::Var: out += e.name; return;
    case Op::Add: {
      text_child(e.args[0], 1, digits, out);
      const Expr& r = e.args[1];
      if (r.is_const() && r.value < 0) {
        out += " - " + format_number(-r.value, digits);
      } else if (r.op == Op::Neg) {
        out += " - ";
        text_child(r.args[0], 2, digits, out);
      } else if (r.op == Op::Mul && r.args[0].is_const() && r.args[0].value < 0) {
        out += " - " + format_number(-r.args[0].value, digits) + " * ";
        text_child(r.args[1], 2, digits, out);
      } else {
        out += " + ";
        text_child(r, 1, digits, out);
      }
      return;
    }
    case Op::Sub:
      text_child(e.args[0], 1, digits, out);
      out += " - ";
      text_child(e.args[1], 2, digits, out);
      return;
    case Op::Mul:
      text_child(e.args[0], 2, digits, out);
      out += " * ";
      text_child(e.args[1], 2, digits, out);
      return;
    case Op::Div:
      text_child(e.args[0], 2, digits, out);
      out += " / ";
      text_child(e.args[1], 3, digits, out);
      return;
    case Op::Pow:
      text_child(e.args[0], 5, digits, out);
      out += '^';
      if (e.args[1].is_const()) {
        out += format_number(e.args[1].value, digits);
      } else {
        text_child(e.args[1], 5, digits, out);
      }
      return;
    case Op::Neg:
      out += '-';
      text_child(e.args[0], 4, digits, out);
      return;
    default:
      out += op_symbol(e.op);
      out += '(';
      text(e.args[0], digits, out);
      out += ')';
      return;
  }
}

bool plain_symbol(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' || s[0] == '+' ||
      s[0] == '.') {
    return false;
  }
  if (find_symbol(s)) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

void sexpr(const Expr& e, std::string& out) {
  switch (e.op) {
    case Op::Const: out += format_number(e.value, 17); return;
    case Op::Var:
      if (plain_symbol(e.name)) {
        out += e.name;
      } else {
        out += '|';
        out += e.name;
        out += '|';
      }
      return;
    default:
      out += '(';
      out += op_symbol(e.op);
      for (const auto& a : e.args) {
        out += ' ';
        sexpr(a, out);
      }
      out += ')';
  }
}

class SexprParser {
 public:
  SexprParser(std::string_view s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {
    dynamic_ = vars.empty();
  }

  Expr parse() {
    Expr e = parse_node();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ExprParseError(msg + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string_view atom() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')') {
      ++pos_;
    }
    if (pos_ == start) fail("expected atom");
    return s_.substr(start, pos_ - start);
  }

  Expr make_var(std::string name) {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) return variable(i, std::move(name));
    }
    if (!dynamic_) fail("unknown variable '" + name + "'");
    vars_.push_back(name);
    return variable(vars_.size() - 1, std::move(name));
  }

  Expr parse_node() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (s_[pos_] == '(') {
      ++pos_;
      skip_ws();
      const auto sym = atom();
      const OpInfo* info = find_symbol(sym);
      if (!info) fail("unknown operator '" + std::string(sym) + "'");
      std::vector<Expr> args;
      for (;;) {
        skip_ws();
        if (pos_ >= s_.size()) fail("unterminated list");
        if (s_[pos_] == ')') {
          ++pos_;
          break;
        }
        args.push_back(parse_node());
      }
      if (args.size() != info->arity) fail("wrong argument count for '" + std::string(sym) + "'");
      return node(info->op, std::move(args));
    }
    if (s_[pos_] == ')') fail("unexpected ')'");
    if (s_[pos_] == '|') {
      const auto end = s_.find('|', pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated quoted name");
      std::string name(s_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return make_var(std::move(name));
    }
    const auto a = atom();
    const char c0 = a[0];
    if (std::isdigit(static_cast<unsigned char>(c0)) || c0 == '-' || c0 == '+' || c0 == '.' ||
        a == "inf" || a == "nan") {
      std::string tmp(a);
      char* end = nullptr;
      const double v = std::strtod(tmp.c_str(), &end);
      if (end != tmp.c_str() + tmp.size()) fail("malformed number '" + tmp + "'");
      return constant(v);
    }
    return make_var(std::string(a));
  }

  std::string_view s_;
  std::vector<std::string> vars_;
  bool dynamic_ = false;
  std::size_t pos_ = 0;
};

}  // namespace

Expr add(Expr a, Expr b) { return node(Op::Add, {std::move(a), std::move(b)}); }
Expr sub(Expr a, Expr b) { return node(Op::Sub, {std::move(a), std::move(b)}); }
Expr mul(Expr a, Expr b) { return node(Op::Mul, {std::move(a), std::move(b)}); }
Expr div(Expr a, Expr b) { return node(Op::Div, {std::move(a), std::move(b)}); }
Expr pow(Expr a, Expr b) { return node(Op::Pow, {std::move(a), std::move(b)}); }
Expr neg(Expr a) { return node(Op::Neg, {std::move(a)}); }

Expr apply(Op unary, Expr a) {
  if (arity(unary) != 1) throw std::invalid_argument("apply() needs a unary operator");
  return node(unary, {std::move(a)});
}

std::size_t arity(Op op) {
  if (op == Op::Const || op == Op::Var) return 0;
  for (const auto& info : kOps) {
    if (info.op == op) return info.arity;
  }
  return 0;
}

std::string_view op_symbol(Op op) {
  for (const auto& info : kOps) {
    if (info.op == op) return info.symbol;
  }
  return "";
}

std::size_t complexity(const Expr& e) {
  std::size_t n = 1;
  for (const auto& a : e.args) n += complexity(a);
  return n;
}

std::string render_text(const Expr& e, int digits) {
  std::string out;
  text(e, digits, out);
  return out;
}

std::string render_sexpr(const Expr& e) {
  std::string out;
  sexpr(e, out);
  return out;
}

Expr parse_sexpr(std::string_view text, const std::vector<std::string>& vars) {
  return SexprParser(text, vars).parse();
}

}  // namespace find
