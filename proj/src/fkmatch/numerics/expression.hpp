#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace fkmatch::expr {

// AST for the coefficient mini-language: numbers, the time variable t,
// + - * / ^, unary minus, parentheses and {sin, cos, exp, sqrt, log}.
struct Node;
using NodePtr = std::unique_ptr<Node>;

enum class NodeKind { number, time_var, add, sub, mul, div, pow, neg, call };
enum class Builtin { sin, cos, exp, sqrt, log };

struct Node {
    NodeKind kind;
    double value = 0.0;   // number
    Builtin fn{};         // call
    NodePtr lhs, rhs;     // binary; unary/call use lhs only
};

NodePtr parse(const std::string& source);  // throws ParseError with position
double eval(const Node& n, double t);
std::string pretty_print(const Node& n);
bool structurally_equal(const Node& a, const Node& b);

// A scalar function of time. Evaluation is deterministic and total on
// [0, t_max]; evaluation outside throws DomainError.
class TimeFunction {
  public:
    enum class Kind { constant, piecewise_linear, expression };
    enum class Role { none, nonnegative, nonpositive };

    static TimeFunction constant(double c);
    // Knots must start at t = 0 and be strictly increasing in t.
    static TimeFunction piecewise_linear(std::vector<std::pair<double, double>> knots);
    static TimeFunction expression(const std::string& source, double t_max);

    double operator()(double t) const;
    Kind kind() const { return kind_; }
    double t_max() const { return t_max_; }
    bool is_constant() const { return kind_ == Kind::constant; }
    double constant_value() const;  // only for constants
    const std::string& source() const { return source_; }

    // Samples the declared domain and throws DomainError on a violation of
    // the declared role (nonnegative for a dimension function, nonpositive
    // for a drift-rate function).
    void check_role(Role role, const std::string& what) const;

  private:
    TimeFunction() = default;
    Kind kind_ = Kind::constant;
    double value_ = 0.0;
    double t_max_ = 0.0;
    std::vector<std::pair<double, double>> knots_;
    std::shared_ptr<const Node> ast_;  // shared: TimeFunction is copyable
    std::string source_;
};

// Spec'd entry point: parses `source` into an expression-backed
// TimeFunction on [0, t_max].
TimeFunction parse_time_function(const std::string& source, double t_max = 64.0);

}  // namespace fkmatch::expr
