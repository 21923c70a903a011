#include "drift/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <variant>

namespace drift {

namespace {

struct Number { double value; };
struct Variable { std::string name; };
struct Unary { /* operand in Node children */ };
struct Binary { BinOp op; };
struct Call { Func f; };

const char* func_name(Func f) {
    switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
    case Func::Tanh: return "tanh";
    }
    return "?";
}

bool lookup_func(std::string_view name, Func& out) {
    if (name == "sin") { out = Func::Sin; return true; }
    if (name == "cos") { out = Func::Cos; return true; }
    if (name == "tan") { out = Func::Tan; return true; }
    if (name == "exp") { out = Func::Exp; return true; }
    if (name == "log") { out = Func::Log; return true; }
    if (name == "sqrt") { out = Func::Sqrt; return true; }
    if (name == "abs") { out = Func::Abs; return true; }
    if (name == "tanh") { out = Func::Tanh; return true; }
    return false;
}

double eval_pow(double base, double exponent) {
    if (exponent == std::floor(exponent) && std::abs(exponent) <= 1e15) {
        // integer fast path; std::pow is exact-intent for integral exponents
        // and handles negative bases.
        return std::pow(base, exponent);
    }
    if (base > 0.0) return std::exp(exponent * std::log(base));
    if (base == 0.0) {
        if (exponent > 0.0) return 0.0;
        throw EvalError("domain error: 0 raised to a non-positive power");
    }
    throw EvalError("domain error: negative base with non-integer exponent");
}

} // namespace

struct Expr::Node {
    std::variant<Number, Variable, Unary, Binary, Call> payload;
    std::shared_ptr<const Node> a; // operand / lhs
    std::shared_ptr<const Node> b; // rhs
};

EvalContext::EvalContext(std::initializer_list<std::pair<std::string, double>> init) {
    for (auto& kv : init) bind(kv.first, kv.second);
}

void EvalContext::bind(std::string name, double value) {
    for (auto& kv : bindings_) {
        if (kv.first == name) { kv.second = value; return; }
    }
    bindings_.emplace_back(std::move(name), value);
}

const double* EvalContext::lookup(std::string_view name) const {
    for (const auto& kv : bindings_) {
        if (kv.first == name) return &kv.second;
    }
    return nullptr;
}

Expr Expr::number(double value) {
    return Expr(std::make_shared<Node>(Node{Number{value}, nullptr, nullptr}));
}

Expr Expr::variable(std::string name) {
    return Expr(std::make_shared<Node>(Node{Variable{std::move(name)}, nullptr, nullptr}));
}

Expr Expr::unary_minus(Expr operand) {
    return Expr(std::make_shared<Node>(Node{Unary{}, operand.root_, nullptr}));
}

Expr Expr::binary(BinOp op, Expr lhs, Expr rhs) {
    return Expr(std::make_shared<Node>(Node{Binary{op}, lhs.root_, rhs.root_}));
}

Expr Expr::call(Func f, Expr arg) {
    return Expr(std::make_shared<Node>(Node{Call{f}, arg.root_, nullptr}));
}

namespace {

double eval_node(const Expr::Node* n, const EvalContext& ctx);

double eval_binary(BinOp op, const Expr::Node* a, const Expr::Node* b,
                   const EvalContext& ctx) {
    const double x = eval_node(a, ctx);
    const double y = eval_node(b, ctx);
    switch (op) {
    case BinOp::Add: return x + y;
    case BinOp::Sub: return x - y;
    case BinOp::Mul: return x * y;
    case BinOp::Div:
        if (y == 0.0) throw EvalError("domain error: division by zero");
        return x / y;
    case BinOp::Pow: return eval_pow(x, y);
    }
    throw EvalError("corrupt expression node");
}

double eval_call(Func f, double x) {
    switch (f) {
    case Func::Sin: return std::sin(x);
    case Func::Cos: return std::cos(x);
    case Func::Tan: return std::tan(x);
    case Func::Exp: return std::exp(x);
    case Func::Log:
        if (x <= 0.0) throw EvalError("domain error: log of non-positive value");
        return std::log(x);
    case Func::Sqrt:
        if (x < 0.0) throw EvalError("domain error: sqrt of negative value");
        return std::sqrt(x);
    case Func::Abs: return std::abs(x);
    case Func::Tanh: return std::tanh(x);
    }
    throw EvalError("corrupt expression node");
}

double eval_node(const Expr::Node* n, const EvalContext& ctx) {
    if (auto* num = std::get_if<Number>(&n->payload)) return num->value;
    if (auto* var = std::get_if<Variable>(&n->payload)) {
        const double* v = ctx.lookup(var->name);
        if (!v) throw EvalError("unbound variable '" + var->name + "'");
        return *v;
    }
    if (std::get_if<Unary>(&n->payload)) return -eval_node(n->a.get(), ctx);
    if (auto* bin = std::get_if<Binary>(&n->payload))
        return eval_binary(bin->op, n->a.get(), n->b.get(), ctx);
    auto& call = std::get<Call>(n->payload);
    return eval_call(call.f, eval_node(n->a.get(), ctx));
}

void collect_vars(const Expr::Node* n, std::set<std::string>& out) {
    if (!n) return;
    if (auto* var = std::get_if<Variable>(&n->payload)) out.insert(var->name);
    collect_vars(n->a.get(), out);
    collect_vars(n->b.get(), out);
}

// Binding strength used for minimal parenthesisation.
int precedence_of(const Expr::Node* n) {
    if (std::holds_alternative<Binary>(n->payload)) {
        switch (std::get<Binary>(n->payload).op) {
        case BinOp::Add: case BinOp::Sub: return 1;
        case BinOp::Mul: case BinOp::Div: return 2;
        case BinOp::Pow: return 4;
        }
    }
    if (std::holds_alternative<Unary>(n->payload)) return 3;
    return 5;
}

void print_node(const Expr::Node* n, std::string& out);

void print_child(const Expr::Node* c, int min_prec, std::string& out) {
    if (precedence_of(c) < min_prec) {
        out += '(';
        print_node(c, out);
        out += ')';
    } else {
        print_node(c, out);
    }
}

void print_node(const Expr::Node* n, std::string& out) {
    if (auto* num = std::get_if<Number>(&n->payload)) {
        char buf[40];
        if (num->value < 0) {
            // negative literals only arise from programmatic construction;
            // keep the rendering reparseable.
            std::snprintf(buf, sizeof buf, "(0-%.17g)", -num->value);
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", num->value);
        }
        out += buf;
        return;
    }
    if (auto* var = std::get_if<Variable>(&n->payload)) {
        out += var->name;
        return;
    }
    if (std::holds_alternative<Unary>(n->payload)) {
        out += '-';
        print_child(n->a.get(), 3, out);
        return;
    }
    if (auto* bin = std::get_if<Binary>(&n->payload)) {
        switch (bin->op) {
        case BinOp::Add:
            print_child(n->a.get(), 1, out); out += '+';
            print_child(n->b.get(), 2, out);
            return;
        case BinOp::Sub:
            print_child(n->a.get(), 1, out); out += '-';
            print_child(n->b.get(), 2, out);
            return;
        case BinOp::Mul:
            print_child(n->a.get(), 2, out); out += '*';
            print_child(n->b.get(), 3, out);
            return;
        case BinOp::Div:
            print_child(n->a.get(), 2, out); out += '/';
            print_child(n->b.get(), 3, out);
            return;
        case BinOp::Pow:
            // base must bind tighter than '^'; exponent may be unary.
            print_child(n->a.get(), 5, out); out += '^';
            print_child(n->b.get(), 3, out);
            return;
        }
    }
    auto& call = std::get<Call>(n->payload);
    out += func_name(call.f);
    out += '(';
    print_node(n->a.get(), out);
    out += ')';
}

bool nodes_equal(const Expr::Node* a, const Expr::Node* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->payload.index() != b->payload.index()) return false;
    if (auto* num = std::get_if<Number>(&a->payload)) {
        const double x = num->value;
        const double y = std::get<Number>(b->payload).value;
        if (!(x == y) && !(std::isnan(x) && std::isnan(y))) return false;
    } else if (auto* var = std::get_if<Variable>(&a->payload)) {
        if (var->name != std::get<Variable>(b->payload).name) return false;
    } else if (auto* bin = std::get_if<Binary>(&a->payload)) {
        if (bin->op != std::get<Binary>(b->payload).op) return false;
    } else if (auto* call = std::get_if<Call>(&a->payload)) {
        if (call->f != std::get<Call>(b->payload).f) return false;
    }
    return nodes_equal(a->a.get(), b->a.get()) && nodes_equal(a->b.get(), b->b.get());
}

} // namespace

double Expr::eval(const EvalContext& ctx) const {
    if (!root_) throw EvalError("empty expression");
    return eval_node(root_.get(), ctx);
}

std::set<std::string> Expr::free_vars() const {
    std::set<std::string> out;
    collect_vars(root_.get(), out);
    return out;
}

std::string Expr::str() const {
    std::string out;
    if (root_) print_node(root_.get(), out);
    return out;
}

bool Expr::equals(const Expr& other) const {
    return nodes_equal(root_.get(), other.root_.get());
}

// ---------------------------------------------------------------------------
// parser

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr run() {
        Expr e = parse_sum();
        skip_ws();
        if (pos_ != text_.size())
            fail(pos_, "unexpected trailing input");
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(std::size_t at, const std::string& msg) {
        throw ParseError(at, "syntax error at offset " + std::to_string(at) + ": " + msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool peek_char(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool consume_char(char c) {
        if (peek_char(c)) { ++pos_; return true; }
        return false;
    }

    Expr parse_sum() {
        Expr lhs = parse_product();
        for (;;) {
            if (consume_char('+')) lhs = Expr::binary(BinOp::Add, lhs, parse_product());
            else if (consume_char('-')) lhs = Expr::binary(BinOp::Sub, lhs, parse_product());
            else return lhs;
        }
    }

    Expr parse_product() {
        Expr lhs = parse_unary();
        for (;;) {
            if (consume_char('*')) lhs = Expr::binary(BinOp::Mul, lhs, parse_unary());
            else if (consume_char('/')) lhs = Expr::binary(BinOp::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    Expr parse_unary() {
        if (consume_char('-')) return Expr::unary_minus(parse_unary());
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (consume_char('^')) {
            // exponent re-enters at unary so that 2^-3 and 2^3^2 work;
            // right associativity falls out of the recursion.
            return Expr::binary(BinOp::Pow, base, parse_unary());
        }
        return base;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail(pos_, "unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = parse_sum();
            skip_ws();
            if (!consume_char(')')) fail(pos_, "expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        fail(pos_, std::string("unexpected character '") + c + "'");
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        // strtod accepts leading signs and hex floats; restrict to the plain
        // decimal forms of the grammar by scanning the token first.
        std::size_t end = pos_;
        bool saw_digit = false;
        while (end < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.')) {
            saw_digit |= std::isdigit(static_cast<unsigned char>(text_[end]));
            ++end;
        }
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            std::size_t e = end + 1;
            if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
            if (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) {
                ++e;
                while (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e])))
                    ++e;
                end = e;
            }
        }
        if (!saw_digit) fail(start, "malformed number");
        std::string token(text_.substr(start, end - start));
        char* parsed_end = nullptr;
        const double value = std::strtod(token.c_str(), &parsed_end);
        if (parsed_end != token.c_str() + token.size()) fail(start, "malformed number");
        pos_ = end;
        // reject implicit multiplication like "2x"
        if (pos_ < text_.size() &&
            (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            fail(pos_, "implicit multiplication is not supported");
        return Expr::number(value);
    }

    Expr parse_name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (peek_char('(')) {
            Func f;
            if (!lookup_func(name, f))
                fail(start, "unknown function '" + name + "'");
            ++pos_; // '('
            Expr arg = parse_sum();
            skip_ws();
            if (!consume_char(')')) fail(pos_, "expected ')'");
            return Expr::call(f, arg);
        }
        return Expr::variable(std::move(name));
    }
};

} // namespace

Expr parse_expression(std::string_view text) {
    return Parser(text).run();
}

} // namespace drift
