#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace drift {

/// Thrown by parse_expression(); `offset` is the byte offset of the
/// offending token in the input string.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& what)
        : std::runtime_error(what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Thrown by Expr::eval() on unbound variables and on domain errors
/// (log of a non-positive value, sqrt of a negative value, division by
/// zero, fractional power of a negative base).
class EvalError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Tanh };

/// Variable bindings for evaluation. Expression variables are short
/// names (x, y, z, u, v in practice), so a flat list beats a map.
class EvalContext {
public:
    EvalContext() = default;
    EvalContext(std::initializer_list<std::pair<std::string, double>> init);

    void bind(std::string name, double value);
    const double* lookup(std::string_view name) const;

private:
    std::vector<std::pair<std::string, double>> bindings_;
};

/// Immutable scalar expression tree. All operations are pure; an Expr
/// may be shared freely across threads after construction.
class Expr {
public:
    Expr() = default;

    static Expr number(double value);
    static Expr variable(std::string name);
    static Expr unary_minus(Expr operand);
    static Expr binary(BinOp op, Expr lhs, Expr rhs);
    static Expr call(Func f, Expr arg);

    bool valid() const { return root_ != nullptr; }

    /// IEEE double evaluation. Fails loudly instead of returning NaN.
    double eval(const EvalContext& ctx) const;

    /// Exactly the variables appearing in the tree.
    std::set<std::string> free_vars() const;

    /// Minimal-paren rendering that reparses to a structurally equal tree.
    std::string str() const;

    /// Structural equality (same tree shape, bit-equal literals).
    bool equals(const Expr& other) const;

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    std::shared_ptr<const Node> root_;
};

/// Recursive-descent parser. Grammar, loosest to tightest binding:
///   sum   := product (('+'|'-') product)*
///   product := unary (('*'|'/') unary)*
///   unary := '-' unary | power
///   power := primary ('^' unary)?        (right-associative)
///   primary := number | name | name '(' sum ')' | '(' sum ')'
/// Unknown names parse as variables (checked at eval time); unknown
/// function names are a parse error. No implicit multiplication.
Expr parse_expression(std::string_view text);

} // namespace drift
