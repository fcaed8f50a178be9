// Recursive-descent parser for the expression text syntax.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | name | func '(' expr ')' | '(' expr ')'
//   func    := exp | log | sin | cos | abs | sign
//   number  := digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//
// Numeric literals are kept as exact rationals. Whitespace and newlines are
// ignored; errors carry 1-based line and column.

#include "strat/expr.hpp"

#include <cctype>

namespace strat {

namespace {

class Parser {
public:
    Parser(std::string_view text, const Symbols& symbols) : text_(text), symbols_(symbols) {}

    Expression parse()
    {
        Expression e = expr();
        skip_ws();
        if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        int line = 1, col = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(line, col, msg);
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static Expression fold_neg(Expression e)
    {
        if (e.is_constant() && e.exact()) return Expression::constant(Rational(-*e.exact()));
        return Expression::unary(Op::Neg, std::move(e));
    }

    Expression expr()
    {
        Expression e = term();
        for (;;) {
            if (accept('+')) e = Expression::binary(Op::Add, e, term());
            else if (accept('-')) e = Expression::binary(Op::Sub, e, term());
            else return e;
        }
    }

    Expression term()
    {
        Expression e = unary();
        for (;;) {
            if (accept('*')) {
                e = Expression::binary(Op::Mul, e, unary());
            } else if (accept('/')) {
                Expression d = unary();
                if (e.is_constant() && e.exact() && d.is_constant() && d.exact() && *d.exact() != 0)
                    e = Expression::constant(Rational(*e.exact() / *d.exact()));
                else
                    e = Expression::binary(Op::Div, e, d);
            } else {
                return e;
            }
        }
    }

    Expression unary()
    {
        if (accept('-')) return fold_neg(unary());
        return power();
    }

    Expression power()
    {
        Expression base = primary();
        if (accept('^')) return Expression::binary(Op::Pow, base, unary());
        return base;
    }

    Expression primary()
    {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expression e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            static const std::pair<const char*, Op> funcs[] = {
                {"exp", Op::Exp}, {"log", Op::Log}, {"sin", Op::Sin},
                {"cos", Op::Cos}, {"abs", Op::Abs}, {"sign", Op::Sign}};
            for (const auto& [fname, op] : funcs) {
                if (name == fname) {
                    if (!accept('(')) fail("expected '(' after " + name);
                    Expression a = expr();
                    if (!accept(')')) fail("expected ')'");
                    return Expression::unary(op, a);
                }
            }
            auto it = symbols_.names.find(name);
            if (it == symbols_.names.end()) {
                pos_ = start;
                fail("unknown variable '" + name + "'");
            }
            return Expression::variable(it->second);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Expression number()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        std::string lit(text_.substr(start, pos_ - start));
        try {
            return Expression::constant(parse_rational(lit));
        } catch (const Error&) {
            pos_ = start;
            fail("invalid number '" + lit + "'");
        }
    }

    std::string_view text_;
    const Symbols& symbols_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression parse_expression(std::string_view text, const Symbols& symbols)
{
    return Parser(text, symbols).parse();
}

}  // namespace strat
