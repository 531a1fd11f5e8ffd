#include "pmelab/expr.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pmelab {

namespace {
enum class Op { num, var, add, sub, mul, div, pow, neg, sin, cos, exp, sqrt };
}  // namespace

struct Expr::Node {
    Op op;
    double value = 0.0;  // num
    int var = 0;         // 0..2 -> x1..x3, 3 -> t
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_num(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::num;
    n->value = v;
    return n;
}
NodePtr make_var(int i) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::var;
    n->var = i;
    return n;
}
NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
  public:
    Parser(const std::string& s, bool allow_time) : s_(s), allow_time_(allow_time) {}

    NodePtr run() {
        auto n = parse_sum();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return n;
    }

  private:
    const std::string& s_;
    bool allow_time_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("expression error at position " + std::to_string(pos_) + ": " + what +
                                    " in \"" + s_ + "\"");
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            if (consume('+')) lhs = make_node(Op::add, lhs, parse_product());
            else if (consume('-')) lhs = make_node(Op::sub, lhs, parse_product());
            else return lhs;
        }
    }

    NodePtr parse_product() {
        auto lhs = parse_unary();
        for (;;) {
            if (consume('*')) lhs = make_node(Op::mul, lhs, parse_unary());
            else if (consume('/')) lhs = make_node(Op::div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make_node(Op::neg, parse_unary());
        if (consume('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_atom();
        if (consume('^')) {
            // right-associative; exponent may carry a sign
            NodePtr exp;
            if (consume('-')) exp = make_node(Op::neg, parse_power());
            else exp = parse_power();
            return make_node(Op::pow, base, exp);
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto n = parse_sum();
            if (!consume(')')) fail("missing ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
        fail("unexpected character");
    }

    NodePtr parse_number() {
        std::size_t end = pos_;
        while (end < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' || s_[end] == 'e' ||
                s_[end] == 'E' ||
                ((s_[end] == '+' || s_[end] == '-') && end > pos_ && (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
            ++end;
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(s_.substr(pos_, end - pos_), &used);
        } catch (const std::exception&) {
            fail("bad number");
        }
        pos_ += used;
        return make_num(v);
    }

    NodePtr parse_name() {
        std::size_t end = pos_;
        while (end < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_'))
            ++end;
        std::string name = s_.substr(pos_, end - pos_);
        pos_ = end;
        if (name == "x1") return make_var(0);
        if (name == "x2") return make_var(1);
        if (name == "x3") return make_var(2);
        if (name == "t") {
            if (!allow_time_) fail("variable t not allowed in this context");
            return make_var(3);
        }
        if (name == "pi") return make_num(3.14159265358979323846);
        if (name == "e") return make_num(2.71828182845904523536);
        if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt") {
            if (!consume('(')) fail("expected '(' after function name");
            auto arg = parse_sum();
            if (!consume(')')) fail("missing ')'");
            Op op = name == "sin" ? Op::sin : name == "cos" ? Op::cos : name == "exp" ? Op::exp : Op::sqrt;
            return make_node(op, arg);
        }
        fail("unknown identifier '" + name + "'");
    }
};

double eval_node(const Expr::Node& n, const double* xt) {
    switch (n.op) {
        case Op::num: return n.value;
        case Op::var: return xt[n.var];
        case Op::add: return eval_node(*n.a, xt) + eval_node(*n.b, xt);
        case Op::sub: return eval_node(*n.a, xt) - eval_node(*n.b, xt);
        case Op::mul: return eval_node(*n.a, xt) * eval_node(*n.b, xt);
        case Op::div: return eval_node(*n.a, xt) / eval_node(*n.b, xt);
        case Op::pow: return std::pow(eval_node(*n.a, xt), eval_node(*n.b, xt));
        case Op::neg: return -eval_node(*n.a, xt);
        case Op::sin: return std::sin(eval_node(*n.a, xt));
        case Op::cos: return std::cos(eval_node(*n.a, xt));
        case Op::exp: return std::exp(eval_node(*n.a, xt));
        case Op::sqrt: return std::sqrt(eval_node(*n.a, xt));
    }
    return 0.0;
}

bool node_uses_time(const Expr::Node& n) {
    if (n.op == Op::var) return n.var == 3;
    bool u = false;
    if (n.a) u = u || node_uses_time(*n.a);
    if (n.b) u = u || node_uses_time(*n.b);
    return u;
}

}  // namespace

Expr Expr::parse(const std::string& text, bool allow_time) {
    Parser p(text, allow_time);
    Expr e;
    e.root_ = p.run();
    e.text_ = text;
    return e;
}

double Expr::eval(double x1, double x2, double x3, double t) const {
    if (!root_) throw std::logic_error("evaluating an empty expression");
    const double xt[4] = {x1, x2, x3, t};
    return eval_node(*root_, xt);
}

bool Expr::uses_time() const { return root_ && node_uses_time(*root_); }

}  // namespace pmelab
