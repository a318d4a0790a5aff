#ifndef DISKFP_EXPR_HPP
#define DISKFP_EXPR_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

/*
 * Scalar expression language for nonlinearities f(x,u,v), g(x,u,v) and
 * bound functions over the disk.
 *
 * Grammar:
 *   expr   := term (('+'|'-') term)*
 *   term   := factor (('*'|'/') factor)*
 *   factor := '-' factor | power
 *   power  := atom ('^' factor)?
 *   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
 *
 * '^' is right-associative and binds tighter than unary minus applied to
 * its base, so -x^2 parses as -(x^2).  Identifiers are lowercase and
 * case-sensitive: variables x1, x2, u, v; constants pi, e; functions
 * sin, cos, tan, exp, ln, sqrt, abs.
 */

namespace diskfp {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Var : unsigned { X1 = 0, X2 = 1, U = 2, V = 3 };

// Expressions are stored as a postorder tape: operands precede their
// operator, so evaluation is a single stack pass with no recursion.
class Expr {
    enum class Op : std::uint8_t {
        Literal, PushX1, PushX2, PushU, PushV, PushPi, PushE,
        Neg, Add, Sub, Mul, Div, Pow,
        Sin, Cos, Tan, Exp, Ln, Sqrt, Abs,
    };

    struct Node {
        Op op;
        double literal = 0.0;
    };

public:
    static Expr parse(std::string_view source);

    double eval(double x1, double x2, double u = 0.0, double v = 0.0) const {
        if (code_.empty()) throw EvalError("empty expression");
        std::array<double, kMaxStack> stack;
        int top = -1;
        for (const Node& n : code_) {
            switch (n.op) {
            case Op::Literal: stack[++top] = n.literal; break;
            case Op::PushX1:  stack[++top] = x1; break;
            case Op::PushX2:  stack[++top] = x2; break;
            case Op::PushU:   stack[++top] = u; break;
            case Op::PushV:   stack[++top] = v; break;
            case Op::PushPi:  stack[++top] = kPi; break;
            case Op::PushE:   stack[++top] = kE; break;
            case Op::Neg: stack[top] = -stack[top]; break;
            case Op::Add: --top; stack[top] += stack[top + 1]; break;
            case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
            case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
            case Op::Div:
                --top;
                if (stack[top + 1] == 0.0) throw EvalError("division by zero");
                stack[top] /= stack[top + 1];
                break;
            case Op::Pow: {
                --top;
                const double base = stack[top];
                const double exponent = stack[top + 1];
                if (base == 0.0 && exponent < 0.0)
                    throw EvalError("zero raised to a negative power");
                if (base < 0.0 && !isIntegral(exponent))
                    throw EvalError("negative base with non-integer exponent");
                stack[top] = std::pow(base, exponent);
                break;
            }
            case Op::Sin: stack[top] = std::sin(stack[top]); break;
            case Op::Cos: stack[top] = std::cos(stack[top]); break;
            case Op::Tan: stack[top] = std::tan(stack[top]); break;
            case Op::Exp: stack[top] = std::exp(stack[top]); break;
            case Op::Ln:
                if (stack[top] <= 0.0) throw EvalError("ln of a nonpositive argument");
                stack[top] = std::log(stack[top]);
                break;
            case Op::Sqrt:
                if (stack[top] < 0.0) throw EvalError("sqrt of a negative argument");
                stack[top] = std::sqrt(stack[top]);
                break;
            case Op::Abs: stack[top] = std::fabs(stack[top]); break;
            }
        }
        const double result = stack[0];
        if (!std::isfinite(result)) throw EvalError("expression evaluated to a non-finite value");
        return result;
    }

    bool uses(Var var) const { return (var_mask_ & (1u << static_cast<unsigned>(var))) != 0; }
    bool usesU() const { return uses(Var::U); }
    bool usesV() const { return uses(Var::V); }
    bool isConstant() const { return var_mask_ == 0; }
    unsigned variableMask() const { return var_mask_; }
    std::size_t size() const { return code_.size(); }

    // Infix rendering; reparsing the result yields identical evaluations.
    std::string toString() const {
        struct Piece {
            std::string text;
            int level;  // 1 +/-, 2 */, 3 unary -, 4 ^, 5 atom
        };
        std::vector<Piece> stack;
        auto wrap = [](const Piece& p, bool parens) {
            return parens ? "(" + p.text + ")" : p.text;
        };
        for (const Node& n : code_) {
            switch (n.op) {
            case Op::Literal: stack.push_back({formatLiteral(n.literal), 5}); break;
            case Op::PushX1: stack.push_back({"x1", 5}); break;
            case Op::PushX2: stack.push_back({"x2", 5}); break;
            case Op::PushU: stack.push_back({"u", 5}); break;
            case Op::PushV: stack.push_back({"v", 5}); break;
            case Op::PushPi: stack.push_back({"pi", 5}); break;
            case Op::PushE: stack.push_back({"e", 5}); break;
            case Op::Neg: {
                Piece a = stack.back(); stack.pop_back();
                stack.push_back({"-" + wrap(a, a.level < 3), 3});
                break;
            }
            case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow: {
                Piece b = stack.back(); stack.pop_back();
                Piece a = stack.back(); stack.pop_back();
                const char* sym = n.op == Op::Add ? "+" : n.op == Op::Sub ? "-"
                                : n.op == Op::Mul ? "*" : n.op == Op::Div ? "/" : "^";
                int level = (n.op == Op::Add || n.op == Op::Sub) ? 1
                          : (n.op == Op::Mul || n.op == Op::Div) ? 2 : 4;
                bool pa, pb;
                if (n.op == Op::Pow) {
                    pa = a.level < 5;       // base must be an atom
                    pb = b.level < 4;       // right-associative
                } else {
                    pa = a.level < level;
                    pb = b.level < level ||
                         (b.level == level && (n.op == Op::Sub || n.op == Op::Div));
                }
                stack.push_back({wrap(a, pa) + sym + wrap(b, pb), level});
                break;
            }
            case Op::Sin: case Op::Cos: case Op::Tan: case Op::Exp:
            case Op::Ln: case Op::Sqrt: case Op::Abs: {
                static const char* names[] = {"sin", "cos", "tan", "exp", "ln", "sqrt", "abs"};
                Piece a = stack.back(); stack.pop_back();
                const char* name = names[static_cast<int>(n.op) - static_cast<int>(Op::Sin)];
                stack.push_back({std::string(name) + "(" + a.text + ")", 5});
                break;
            }
            }
        }
        return stack.back().text;
    }

private:
    static constexpr int kMaxStack = 256;
    static constexpr double kPi = 3.14159265358979323846;
    static constexpr double kE = 2.71828182845904523536;

    static bool isIntegral(double x) {
        return std::nearbyint(x) == x && std::fabs(x) < 9.007199254740992e15;
    }

    static std::string formatLiteral(double x) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return buf;
    }

    void emit(Op op, double literal = 0.0) {
        code_.push_back({op, literal});
        switch (op) {
        case Op::Literal: case Op::PushX1: case Op::PushX2: case Op::PushU:
        case Op::PushV: case Op::PushPi: case Op::PushE:
            ++depth_;
            if (depth_ > kMaxStack) throw ParseError("expression too deeply nested", 0);
            break;
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow:
            --depth_;
            break;
        default:
            break;  // unary ops keep the depth
        }
    }

    std::vector<Node> code_;
    unsigned var_mask_ = 0;
    int depth_ = 0;

    friend class ExprParser;
};

class ExprParser {
    using Op = Expr::Op;

public:
    explicit ExprParser(std::string_view src) : src_(src) {}

    Expr run() {
        next();
        parseExpr(0);
        if (tok_.kind != Tok::End)
            throw ParseError("unexpected trailing input", tok_.pos);
        return std::move(out_);
    }

private:
        struct Token {
            enum Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
            double value = 0.0;
            std::string text;
            std::size_t pos = 0;
        };
        using Tok = Token::Kind;

        void parseExpr(int depth) {
            parseTerm(depth);
            while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
                const bool add = tok_.kind == Tok::Plus;
                next();
                parseTerm(depth);
                out_.emit(add ? Op::Add : Op::Sub);
            }
        }

        void parseTerm(int depth) {
            parseFactor(depth);
            while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
                const bool mul = tok_.kind == Tok::Star;
                next();
                parseFactor(depth);
                out_.emit(mul ? Op::Mul : Op::Div);
            }
        }

        void parseFactor(int depth) {
            if (depth > kMaxParseDepth)
                throw ParseError("expression too deeply nested", tok_.pos);
            if (tok_.kind == Tok::Minus) {
                next();
                parseFactor(depth + 1);
                out_.emit(Op::Neg);
                return;
            }
            parsePower(depth);
        }

        void parsePower(int depth) {
            parseAtom(depth);
            if (tok_.kind == Tok::Caret) {
                next();
                parseFactor(depth + 1);
                out_.emit(Op::Pow);
            }
        }

        void parseAtom(int depth) {
            switch (tok_.kind) {
            case Tok::Number: {
                out_.emit(Op::Literal, tok_.value);
                next();
                return;
            }
            case Tok::LParen: {
                next();
                parseExpr(depth + 1);
                expect(Tok::RParen, "expected ')'");
                return;
            }
            case Tok::Ident: {
                const std::string name = tok_.text;
                const std::size_t pos = tok_.pos;
                next();
                if (tok_.kind == Tok::LParen) {
                    const Op fn = functionOp(name, pos);
                    next();
                    parseExpr(depth + 1);
                    if (tok_.kind != Tok::RParen)
                        throw ParseError("function '" + name + "' takes exactly one argument", tok_.pos);
                    next();
                    out_.emit(fn);
                    return;
                }
                if (name == "x1") { out_.emit(Op::PushX1); out_.var_mask_ |= 1u << 0; return; }
                if (name == "x2") { out_.emit(Op::PushX2); out_.var_mask_ |= 1u << 1; return; }
                if (name == "u")  { out_.emit(Op::PushU);  out_.var_mask_ |= 1u << 2; return; }
                if (name == "v")  { out_.emit(Op::PushV);  out_.var_mask_ |= 1u << 3; return; }
                if (name == "pi") { out_.emit(Op::PushPi); return; }
                if (name == "e")  { out_.emit(Op::PushE);  return; }
                if (isFunctionName(name))
                    throw ParseError("function '" + name + "' requires an argument", pos);
                throw ParseError("unknown identifier '" + name + "'", pos);
            }
            default:
                throw ParseError("expected a number, identifier or '('", tok_.pos);
            }
        }

        static bool isFunctionName(const std::string& name) {
            return name == "sin" || name == "cos" || name == "tan" || name == "exp" ||
                   name == "ln" || name == "sqrt" || name == "abs";
        }

        static Op functionOp(const std::string& name, std::size_t pos) {
            if (name == "sin") return Op::Sin;
            if (name == "cos") return Op::Cos;
            if (name == "tan") return Op::Tan;
            if (name == "exp") return Op::Exp;
            if (name == "ln") return Op::Ln;
            if (name == "sqrt") return Op::Sqrt;
            if (name == "abs") return Op::Abs;
            throw ParseError("unknown function '" + name + "'", pos);
        }

        void expect(Tok kind, const char* message) {
            if (tok_.kind != kind) throw ParseError(message, tok_.pos);
            next();
        }

        void next() {
            while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
            tok_.pos = i_;
            if (i_ >= src_.size()) { tok_.kind = Tok::End; return; }
            const char c = src_[i_];
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
                lexNumber();
                return;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t j = i_;
                while (j < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
                    ++j;
                tok_.kind = Tok::Ident;
                tok_.text = std::string(src_.substr(i_, j - i_));
                i_ = j;
                return;
            }
            ++i_;
            switch (c) {
            case '+': tok_.kind = Tok::Plus; return;
            case '-': tok_.kind = Tok::Minus; return;
            case '*': tok_.kind = Tok::Star; return;
            case '/': tok_.kind = Tok::Slash; return;
            case '^': tok_.kind = Tok::Caret; return;
            case '(': tok_.kind = Tok::LParen; return;
            case ')': tok_.kind = Tok::RParen; return;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", tok_.pos);
            }
        }

        void lexNumber() {
            std::size_t j = i_;
            while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
            if (j < src_.size() && src_[j] == '.') {
                ++j;
                while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
            }
            // exponent part only when it is actually one: e/E [+-] digit
            if (j < src_.size() && (src_[j] == 'e' || src_[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
                if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
                    ++k;
                    while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) ++k;
                    j = k;
                }
            }
            const std::string text(src_.substr(i_, j - i_));
            try {
                tok_.value = std::stod(text);
            } catch (const std::exception&) {
                throw ParseError("malformed number '" + text + "'", i_);
            }
            tok_.kind = Tok::Number;
            i_ = j;
        }

        static constexpr int kMaxParseDepth = 200;

        std::string_view src_;
        std::size_t i_ = 0;
        Token tok_;
        Expr out_;
};

inline Expr Expr::parse(std::string_view source) { return ExprParser(source).run(); }

}  // namespace diskfp

#endif  // DISKFP_EXPR_HPP
