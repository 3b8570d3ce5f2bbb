#pragma once

// Expressions in P, Q and I, e.g. "P*Q + (0.5-2i)*Q - I".
//
//   expr    := term (('+' | '-') term)*
//   term    := unary ('*' unary)*
//   unary   := ('+' | '-') unary | primary
//   primary := 'P' | 'Q' | 'I' | number ['i'] | 'i' | '(' expr ')'
//
// Whitespace is insignificant. A scalar literal c stands for c*I.

#include <cctype>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace halmos {

class WordSyntaxError : public std::runtime_error {
public:
    WordSyntaxError(std::size_t column, const std::string& what)
        : std::runtime_error("column " + std::to_string(column) + ": " + what), column_(column) {}

    /// 1-based position of the offending character.
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class WordExpression {
public:
    enum class Kind { P, Q, I, Scalar, Add, Sub, Mul, Neg };

    struct Node {
        Kind kind;
        std::complex<double> value{};
        int lhs = -1;
        int rhs = -1;
    };

    static WordExpression parse(std::string_view text) {
        WordExpression e;
        Parser parser{text, 0, e.nodes_};
        parser.skip_space();
        if (parser.at_end()) throw WordSyntaxError(1, "empty expression");
        e.root_ = parser.expr();
        parser.skip_space();
        if (!parser.at_end()) parser.unexpected();
        return e;
    }

    /// Evaluate with the given generators. T needs +, -, * and
    /// std::complex<double> * T.
    template <class T>
    T evaluate(const T& p, const T& q, const T& id) const {
        return eval<T>(root_, p, q, id);
    }

    const std::vector<Node>& nodes() const noexcept { return nodes_; }

private:
    template <class T>
    T eval(int at, const T& p, const T& q, const T& id) const {
        const Node& node = nodes_[static_cast<std::size_t>(at)];
        switch (node.kind) {
        case Kind::P: return p;
        case Kind::Q: return q;
        case Kind::I: return id;
        case Kind::Scalar: return node.value * id;
        case Kind::Add: return eval<T>(node.lhs, p, q, id) + eval<T>(node.rhs, p, q, id);
        case Kind::Sub: return eval<T>(node.lhs, p, q, id) - eval<T>(node.rhs, p, q, id);
        case Kind::Mul: return eval<T>(node.lhs, p, q, id) * eval<T>(node.rhs, p, q, id);
        case Kind::Neg: return std::complex<double>(-1.0) * eval<T>(node.lhs, p, q, id);
        }
        return id;
    }

    struct Parser {
        std::string_view text;
        std::size_t pos;
        std::vector<Node>& nodes;

        bool at_end() const { return pos >= text.size(); }
        char peek() const { return at_end() ? '\0' : text[pos]; }
        void skip_space() {
            while (!at_end() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        }
        [[noreturn]] void unexpected() const {
            if (at_end()) throw WordSyntaxError(text.size() + 1, "unexpected end of expression");
            throw WordSyntaxError(pos + 1, std::string("unexpected '") + text[pos] + "'");
        }
        int add(Node n) {
            nodes.push_back(n);
            return static_cast<int>(nodes.size()) - 1;
        }

        int expr() {
            int lhs = term();
            for (;;) {
                skip_space();
                const char c = peek();
                if (c != '+' && c != '-') return lhs;
                ++pos;
                const int rhs = term();
                lhs = add({c == '+' ? Kind::Add : Kind::Sub, {}, lhs, rhs});
            }
        }

        int term() {
            int lhs = unary();
            for (;;) {
                skip_space();
                if (peek() != '*') return lhs;
                ++pos;
                const int rhs = unary();
                lhs = add({Kind::Mul, {}, lhs, rhs});
            }
        }

        int unary() {
            skip_space();
            const char c = peek();
            if (c == '-' || c == '+') {
                ++pos;
                const int operand = unary();
                return c == '-' ? add({Kind::Neg, {}, operand, -1}) : operand;
            }
            return primary();
        }

        int primary() {
            skip_space();
            const char c = peek();
            switch (c) {
            case 'P': ++pos; return add({Kind::P});
            case 'Q': ++pos; return add({Kind::Q});
            case 'I': ++pos; return add({Kind::I});
            case 'i': ++pos; return add({Kind::Scalar, {0.0, 1.0}});
            case '(': {
                ++pos;
                const int inner = expr();
                skip_space();
                if (peek() != ')') unexpected();
                ++pos;
                return inner;
            }
            default: break;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
            unexpected();
        }

        int number() {
            const std::size_t start = pos;
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos;
            if (peek() == '.') {
                ++pos;
                while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos;
            }
            if (peek() == 'e' || peek() == 'E') {
                std::size_t save = pos++;
                if (peek() == '+' || peek() == '-') ++pos;
                if (!std::isdigit(static_cast<unsigned char>(peek()))) {
                    pos = save;
                } else {
                    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos;
                }
            }
            const std::string literal(text.substr(start, pos - start));
            char* end = nullptr;
            const double v = std::strtod(literal.c_str(), &end);
            if (end != literal.c_str() + literal.size()) throw WordSyntaxError(start + 1, "malformed number");
            if (peek() == 'i') {
                ++pos;
                return add({Kind::Scalar, {0.0, v}});
            }
            return add({Kind::Scalar, {v, 0.0}});
        }
    };

    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace halmos
