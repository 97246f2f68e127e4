#include "numerics/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace fkmatch::expr {

namespace {

struct Parser {
    const std::string& src;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos); }

    NodePtr make(NodeKind k, NodePtr l = nullptr, NodePtr r = nullptr) {
        auto n = std::make_unique<Node>();
        n->kind = k;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        return n;
    }

    NodePtr parse_expr() {
        NodePtr left = parse_term();
        for (;;) {
            if (consume('+'))
                left = make(NodeKind::add, std::move(left), parse_term());
            else if (consume('-'))
                left = make(NodeKind::sub, std::move(left), parse_term());
            else
                return left;
        }
    }

    NodePtr parse_term() {
        NodePtr left = parse_unary();
        for (;;) {
            if (consume('*'))
                left = make(NodeKind::mul, std::move(left), parse_unary());
            else if (consume('/'))
                left = make(NodeKind::div, std::move(left), parse_unary());
            else
                return left;
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make(NodeKind::neg, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (consume('^'))  // right-associative; exponent may carry unary minus
            return make(NodeKind::pow, std::move(base), parse_unary());
        return base;
    }

    NodePtr parse_atom() {
        const char c = peek();
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (!consume(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        if (c == '\0') fail("unexpected end of input");
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        skip_ws();
        const char* begin = src.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("expected a number");
        pos += static_cast<std::size_t>(end - begin);
        auto n = make(NodeKind::number);
        n->value = v;
        return n;
    }

    NodePtr parse_identifier() {
        skip_ws();
        const std::size_t start = pos;
        while (pos < src.size() &&
               std::isalpha(static_cast<unsigned char>(src[pos])))
            ++pos;
        const std::string name = src.substr(start, pos - start);
        if (name == "t") return make(NodeKind::time_var);
        Builtin fn;
        if (name == "sin")
            fn = Builtin::sin;
        else if (name == "cos")
            fn = Builtin::cos;
        else if (name == "exp")
            fn = Builtin::exp;
        else if (name == "sqrt")
            fn = Builtin::sqrt;
        else if (name == "log")
            fn = Builtin::log;
        else {
            pos = start;
            fail("unknown identifier '" + name + "'");
        }
        if (!consume('(')) fail("expected '(' after function name");
        NodePtr arg = parse_expr();
        if (!consume(')')) fail("expected ')'");
        auto n = make(NodeKind::call, std::move(arg));
        n->fn = fn;
        return n;
    }
};

int precedence(NodeKind k) {
    switch (k) {
        case NodeKind::add:
        case NodeKind::sub: return 1;
        case NodeKind::mul:
        case NodeKind::div: return 2;
        case NodeKind::neg: return 3;
        case NodeKind::pow: return 4;
        default: return 5;
    }
}

void print_node(const Node& n, std::ostringstream& out, int parent_prec,
                bool right_side) {
    const int prec = precedence(n.kind);
    const bool parens =
        prec < parent_prec || (prec == parent_prec && right_side &&
                               (n.kind == NodeKind::add || n.kind == NodeKind::sub ||
                                n.kind == NodeKind::mul || n.kind == NodeKind::div));
    if (parens) out << '(';
    switch (n.kind) {
        case NodeKind::number: {
            std::ostringstream num;
            num.precision(17);
            num << n.value;
            out << num.str();
            break;
        }
        case NodeKind::time_var: out << 't'; break;
        case NodeKind::add:
            print_node(*n.lhs, out, prec, false);
            out << '+';
            print_node(*n.rhs, out, prec, true);
            break;
        case NodeKind::sub:
            print_node(*n.lhs, out, prec, false);
            out << '-';
            print_node(*n.rhs, out, prec, true);
            break;
        case NodeKind::mul:
            print_node(*n.lhs, out, prec, false);
            out << '*';
            print_node(*n.rhs, out, prec, true);
            break;
        case NodeKind::div:
            print_node(*n.lhs, out, prec, false);
            out << '/';
            print_node(*n.rhs, out, prec, true);
            break;
        case NodeKind::pow:
            // '^' is right-associative: parenthesize a pow on the left.
            print_node(*n.lhs, out, prec + 1, false);
            out << '^';
            print_node(*n.rhs, out, prec, false);
            break;
        case NodeKind::neg:
            out << '-';
            print_node(*n.lhs, out, prec + 1, false);
            break;
        case NodeKind::call:
            switch (n.fn) {
                case Builtin::sin: out << "sin"; break;
                case Builtin::cos: out << "cos"; break;
                case Builtin::exp: out << "exp"; break;
                case Builtin::sqrt: out << "sqrt"; break;
                case Builtin::log: out << "log"; break;
            }
            out << '(';
            print_node(*n.lhs, out, 0, false);
            out << ')';
            break;
    }
    if (parens) out << ')';
}

}  // namespace

NodePtr parse(const std::string& source) {
    Parser p{source};
    NodePtr root = p.parse_expr();
    p.skip_ws();
    if (p.pos != source.size()) p.fail("trailing input");
    return root;
}

double eval(const Node& n, double t) {
    switch (n.kind) {
        case NodeKind::number: return n.value;
        case NodeKind::time_var: return t;
        case NodeKind::add: return eval(*n.lhs, t) + eval(*n.rhs, t);
        case NodeKind::sub: return eval(*n.lhs, t) - eval(*n.rhs, t);
        case NodeKind::mul: return eval(*n.lhs, t) * eval(*n.rhs, t);
        case NodeKind::div: return eval(*n.lhs, t) / eval(*n.rhs, t);
        case NodeKind::pow: return std::pow(eval(*n.lhs, t), eval(*n.rhs, t));
        case NodeKind::neg: return -eval(*n.lhs, t);
        case NodeKind::call: {
            const double a = eval(*n.lhs, t);
            switch (n.fn) {
                case Builtin::sin: return std::sin(a);
                case Builtin::cos: return std::cos(a);
                case Builtin::exp: return std::exp(a);
                case Builtin::sqrt: return std::sqrt(a);
                case Builtin::log: return std::log(a);
            }
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::string pretty_print(const Node& n) {
    std::ostringstream out;
    print_node(n, out, 0, false);
    return out.str();
}

bool structurally_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::number: return a.value == b.value;
        case NodeKind::time_var: return true;
        case NodeKind::neg: return structurally_equal(*a.lhs, *b.lhs);
        case NodeKind::call:
            return a.fn == b.fn && structurally_equal(*a.lhs, *b.lhs);
        default:
            return structurally_equal(*a.lhs, *b.lhs) &&
                   structurally_equal(*a.rhs, *b.rhs);
    }
}

TimeFunction TimeFunction::constant(double c) {
    TimeFunction f;
    f.kind_ = Kind::constant;
    f.value_ = c;
    f.t_max_ = std::numeric_limits<double>::infinity();
    std::ostringstream src;
    src.precision(17);
    src << c;
    f.source_ = src.str();
    return f;
}

TimeFunction TimeFunction::piecewise_linear(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2)
        throw InvalidArgument("piecewise_linear: need at least two knots");
    if (knots.front().first != 0.0)
        throw InvalidArgument("piecewise_linear: knots must start at t = 0");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i].first > knots[i - 1].first))
            throw InvalidArgument("piecewise_linear: knot times must increase");
    TimeFunction f;
    f.kind_ = Kind::piecewise_linear;
    f.t_max_ = knots.back().first;
    f.knots_ = std::move(knots);
    f.source_ = "piecewise_linear";
    return f;
}

TimeFunction TimeFunction::expression(const std::string& source, double t_max) {
    if (!(t_max > 0.0))
        throw InvalidArgument("expression time function: t_max must be > 0");
    TimeFunction f;
    f.kind_ = Kind::expression;
    f.t_max_ = t_max;
    f.ast_ = std::shared_ptr<const Node>(parse(source).release());
    f.source_ = source;
    return f;
}

double TimeFunction::operator()(double t) const {
    if (t < -1e-12 || t > t_max_ * (1.0 + 1e-12) + 1e-12)
        throw DomainError("time function evaluated outside [0, t_max]");
    switch (kind_) {
        case Kind::constant: return value_;
        case Kind::piecewise_linear: {
            if (t <= knots_.front().first) return knots_.front().second;
            if (t >= knots_.back().first) return knots_.back().second;
            std::size_t i = 1;
            while (knots_[i].first < t) ++i;
            const auto& [t0, v0] = knots_[i - 1];
            const auto& [t1, v1] = knots_[i];
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
        case Kind::expression: return eval(*ast_, t);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double TimeFunction::constant_value() const {
    if (kind_ != Kind::constant)
        throw InvalidArgument("constant_value on a non-constant time function");
    return value_;
}

void TimeFunction::check_role(Role role, const std::string& what) const {
    if (role == Role::none) return;
    // Sampled check; 512 points plus both endpoints of the declared domain.
    const double horizon = std::isfinite(t_max_) ? t_max_ : 64.0;
    const int samples = 512;
    for (int i = 0; i <= samples; ++i) {
        const double t = horizon * i / samples;
        const double v = (*this)(t);
        if (!std::isfinite(v))
            throw DomainError(what + " is not finite at t = " + std::to_string(t));
        if (role == Role::nonnegative && v < 0.0)
            throw DomainError(what + " must be >= 0 on its domain (violated at t = " +
                              std::to_string(t) + ")");
        if (role == Role::nonpositive && v > 0.0)
            throw DomainError(what + " must be <= 0 on its domain (violated at t = " +
                              std::to_string(t) + ")");
    }
}

TimeFunction parse_time_function(const std::string& source, double t_max) {
    return TimeFunction::expression(source, t_max);
}

}  // namespace fkmatch::expr
