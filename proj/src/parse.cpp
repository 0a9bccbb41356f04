#include "statepat/text.hpp"
#include "typecheck.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <optional>

namespace statepat
{

ParseError::ParseError(SourceSpan span, std::vector<std::string> expected, const std::string& message)
    : std::runtime_error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message),
      _span(span), _expected(std::move(expected))
{
}

namespace
{

enum class Tok
{
    Ident,
    Int,
    Newline,
    End,
    Arrow,    // ->
    DotDot,   // ..
    Dot,
    Comma,
    Semi,
    Colon,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Assign,   // =
    Eq,       // ==
    Ne,       // !=
    Lt,
    Le,
    Gt,
    Ge,
    Diamond,  // <>
    AndAnd,
    OrOr,
    Bang,
    Plus,
    Minus,
    Star,
};

struct Token
{
    Tok kind;
    std::string text;
    SourceSpan span;
};

std::string describe(const Token& t)
{
    switch (t.kind) {
    case Tok::Newline: return "end of line";
    case Tok::End: return "end of input";
    default: return "'" + t.text + "'";
    }
}

class Lexer
{
public:
    explicit Lexer(std::string_view src, int first_line = 1) : _src(src), _line(first_line) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        while (_pos < _src.size()) {
            char c = _src[_pos];
            if (c == '#') {
                while (_pos < _src.size() && _src[_pos] != '\n')
                    ++_pos;
                continue;
            }
            if (c == '\n') {
                out.push_back({ Tok::Newline, "\n", here(1) });
                ++_pos;
                ++_line;
                _line_start = _pos;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                ++_pos;
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                auto start = _pos;
                while (_pos < _src.size() && (std::isalnum(static_cast<unsigned char>(_src[_pos])) || _src[_pos] == '_'))
                    ++_pos;
                out.push_back(make(Tok::Ident, start));
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                auto start = _pos;
                while (_pos < _src.size() && std::isdigit(static_cast<unsigned char>(_src[_pos])))
                    ++_pos;
                out.push_back(make(Tok::Int, start));
                continue;
            }
            out.push_back(punct());
        }
        out.push_back({ Tok::End, "", here(0) });
        return out;
    }

private:
    SourceSpan here(int len) const
    {
        return { _line, static_cast<int>(_pos - _line_start) + 1, len };
    }

    Token make(Tok kind, std::size_t start)
    {
        SourceSpan span{ _line, static_cast<int>(start - _line_start) + 1, static_cast<int>(_pos - start) };
        return { kind, std::string(_src.substr(start, _pos - start)), span };
    }

    Token punct()
    {
        static const std::pair<const char*, Tok> table[] = {
            { "->", Tok::Arrow }, { "..", Tok::DotDot }, { "==", Tok::Eq },     { "!=", Tok::Ne },
            { "<=", Tok::Le },    { ">=", Tok::Ge },     { "<>", Tok::Diamond }, { "&&", Tok::AndAnd },
            { "||", Tok::OrOr },  { ".", Tok::Dot },     { ",", Tok::Comma },   { ";", Tok::Semi },
            { ":", Tok::Colon },  { "/", Tok::Slash },   { "(", Tok::LParen },  { ")", Tok::RParen },
            { "[", Tok::LBracket }, { "]", Tok::RBracket }, { "=", Tok::Assign }, { "<", Tok::Lt },
            { ">", Tok::Gt },     { "!", Tok::Bang },    { "+", Tok::Plus },    { "-", Tok::Minus },
            { "*", Tok::Star },
        };
        auto rest = _src.substr(_pos);
        for (const auto& [text, kind] : table) {
            std::string_view t(text);
            if (rest.substr(0, t.size()) == t) {
                auto start = _pos;
                _pos += t.size();
                return make(kind, start);
            }
        }
        auto span = here(1);
        throw ParseError(span, {}, "unexpected character '" + std::string(1, _src[_pos]) + "'");
    }

    std::string_view _src;
    std::size_t _pos = 0;
    std::size_t _line_start = 0;
    int _line;
};

SourceSpan cover(SourceSpan a, SourceSpan b)
{
    if (a.line != b.line)
        return a;
    return { a.line, a.column, b.column + b.length - a.column };
}

class Parser
{
public:
    explicit Parser(std::vector<Token> toks) : _toks(std::move(toks)) {}

    Model model()
    {
        Model m;
        skip_newlines();
        if (!is_word("model"))
            fail({ "model" });
        m.span = next().span;
        m.name = ident("model name").text;
        end_line();

        Statechart* chart = nullptr;
        while (true) {
            skip_newlines();
            if (peek().kind == Tok::End)
                break;
            const Token& kw = peek();
            if (kw.kind != Tok::Ident)
                fail(top_keywords(chart != nullptr));
            if (kw.text == "in") {
                next();
                expect_word("event");
                auto name = ident("event name");
                m.interface.in_events.push_back({ name.text, name.span });
                chart = nullptr;
            } else if (kw.text == "event") {
                next();
                auto name = ident("event name");
                m.interface.internal_events.push_back({ name.text, name.span });
                chart = nullptr;
            } else if (kw.text == "var") {
                m.interface.variables.push_back(var_decl());
                chart = nullptr;
            } else if (kw.text == "order") {
                auto span = next().span;
                if (m.interface.exe_orders)
                    throw ParseError(span, {}, "duplicate `order` declaration");
                std::vector<int> ids;
                ids.push_back(small_int("chart index"));
                while (accept(Tok::Comma))
                    ids.push_back(small_int("chart index"));
                m.interface.exe_orders = std::move(ids);
                m.interface.order_span = span;
                chart = nullptr;
            } else if (kw.text == "pattern") {
                next();
                auto which = ident("pattern name");
                if (which.text == "twc")
                    m.patterns.twc = true;
                else if (which.text == "ceo")
                    m.patterns.ceo = true;
                else
                    throw ParseError(which.span, { "twc", "ceo" }, "unknown pattern '" + which.text + "'");
                chart = nullptr;
            } else if (kw.text == "native") {
                m.natives.push_back(native_decl());
                chart = nullptr;
            } else if (kw.text == "chart") {
                m.charts.push_back(chart_header());
                chart = &m.charts.back();
            } else if (chart && kw.text == "initial") {
                next();
                if (!chart->initial.empty())
                    throw ParseError(kw.span, {}, "chart '" + chart->name + "' already has an initial state");
                auto s = ident("state name");
                chart->initial = s.text;
                chart->initial_span = s.span;
            } else if (chart && kw.text == "state") {
                next();
                auto s = ident("state name");
                chart->states.push_back({ s.text, s.span });
            } else if (chart && kw.text == "transition") {
                chart->transitions.push_back(transition());
            } else {
                fail(top_keywords(chart != nullptr));
            }
            end_line();
        }
        return m;
    }

    Query query()
    {
        skip_newlines();
        Query q;
        const Token& t = peek();
        if (is_word("A")) {
            next();
            expect(Tok::LBracket, "[");
            expect(Tok::RBracket, "]");
            q.mode = QueryMode::AlwaysGlobally;
        } else if (is_word("E")) {
            next();
            expect(Tok::Diamond, "<>");
            q.mode = QueryMode::ExistsEventually;
        } else {
            throw ParseError(t.span, { "A[]", "E<>" }, "expected A[] or E<>, found " + describe(t));
        }
        q.predicate = expr();
        skip_newlines();
        if (peek().kind != Tok::End)
            fail({ "operator", "end of input" });
        return q;
    }

private:
    // -- token plumbing --------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const
    {
        auto i = std::min(_pos + ahead, _toks.size() - 1);
        return _toks[i];
    }
    const Token& next()
    {
        const Token& t = _toks[_pos];
        if (_pos + 1 < _toks.size())
            ++_pos;
        return t;
    }
    bool accept(Tok k)
    {
        if (peek().kind != k)
            return false;
        next();
        return true;
    }
    bool is_word(const char* w) const { return peek().kind == Tok::Ident && peek().text == w; }

    [[noreturn]] void fail(std::vector<std::string> expected) const
    {
        std::string msg = "expected ";
        for (std::size_t i = 0; i < expected.size(); ++i)
            msg += (i ? (i + 1 == expected.size() ? " or " : ", ") : "") + expected[i];
        msg += ", found " + describe(peek());
        throw ParseError(peek().span, std::move(expected), msg);
    }

    const Token& expect(Tok k, const char* what)
    {
        if (peek().kind != k)
            fail({ std::string("'") + what + "'" });
        return next();
    }
    void expect_word(const char* w)
    {
        if (!is_word(w))
            fail({ w });
        next();
    }
    Token ident(const char* what)
    {
        if (peek().kind != Tok::Ident)
            fail({ what });
        return next();
    }
    void skip_newlines()
    {
        while (peek().kind == Tok::Newline)
            next();
    }
    void end_line()
    {
        if (peek().kind != Tok::Newline && peek().kind != Tok::End)
            fail({ "end of line" });
        next();
    }

    static std::vector<std::string> top_keywords(bool in_chart)
    {
        std::vector<std::string> k{ "in", "event", "var", "order", "pattern", "native", "chart" };
        if (in_chart)
            k.insert(k.end(), { "initial", "state", "transition" });
        return k;
    }

    std::int64_t integer(const char* what)
    {
        bool neg = accept(Tok::Minus);
        if (peek().kind != Tok::Int)
            fail({ what });
        const Token& t = next();
        std::uint64_t mag = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), mag);
        constexpr auto lim = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
        if (ec != std::errc{} || mag > lim)
            throw ParseError(t.span, {}, "integer literal out of range");
        return neg ? -static_cast<std::int64_t>(mag) : static_cast<std::int64_t>(mag);
    }
    int small_int(const char* what)
    {
        auto span = peek().span;
        auto v = integer(what);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            throw ParseError(span, {}, "integer out of range");
        return static_cast<int>(v);
    }

    // -- declarations ----------------------------------------------------

    VarDecl var_decl()
    {
        VarDecl v;
        next();
        auto name = ident("variable name");
        v.name = name.text;
        v.span = name.span;
        expect(Tok::Colon, ":");
        expect_word("int");
        expect(Tok::LBracket, "[");
        v.min = integer("lower bound");
        expect(Tok::DotDot, "..");
        v.max = integer("upper bound");
        expect(Tok::RBracket, "]");
        expect(Tok::Assign, "=");
        v.initial = integer("initial value");
        return v;
    }

    std::string dotted_name(const char* what, SourceSpan* span = nullptr)
    {
        auto first = ident(what);
        std::string name = first.text;
        SourceSpan s = first.span;
        while (peek().kind == Tok::Dot) {
            next();
            auto part = ident(what);
            name += "." + part.text;
            s = cover(s, part.span);
        }
        if (span)
            *span = s;
        return name;
    }

    NativeDecl native_decl()
    {
        NativeDecl d;
        next();
        d.name = dotted_name("native name", &d.span);
        expect(Tok::Slash, "/");
        d.arity = small_int("arity");
        expect(Tok::Colon, ":");
        auto ty = ident("int, bool or void");
        if (ty.text == "int")
            d.result = NativeType::Int;
        else if (ty.text == "bool")
            d.result = NativeType::Bool;
        else if (ty.text == "void")
            d.result = NativeType::Void;
        else
            throw ParseError(ty.span, { "int", "bool", "void" }, "unknown native result type '" + ty.text + "'");
        return d;
    }

    Statechart chart_header()
    {
        Statechart c;
        c.span = next().span;
        c.name = ident("chart name").text;
        expect_word("priority");
        c.id = small_int("priority");
        if (is_word("manager")) {
            next();
            c.manager = true;
        }
        return c;
    }

    Transition transition()
    {
        Transition t;
        t.span = next().span;
        t.source = ident("source state").text;
        expect(Tok::Arrow, "->");
        t.target = ident("target state").text;
        if (is_word("on")) {
            next();
            t.trigger = EventTrigger{ ident("event name").text };
        } else if (is_word("after")) {
            next();
            auto k = integer("duration");
            auto unit = ident("'s'");
            if (unit.text != "s")
                throw ParseError(unit.span, { "s" }, "time triggers are written as `after Ks`");
            t.trigger = TimeTrigger{ k };
        }
        if (is_word("if")) {
            next();
            t.guard = expr();
        }
        if (is_word("do")) {
            next();
            t.actions.push_back(action());
            while (accept(Tok::Semi)) {
                if (peek().kind == Tok::Newline || peek().kind == Tok::End)
                    break;
                t.actions.push_back(action());
            }
        }
        return t;
    }

    Action action()
    {
        auto start = peek().span;
        if (is_word("raise")) {
            next();
            auto ev = ident("event name");
            return { RaiseAction{ ev.text }, cover(start, ev.span) };
        }
        SourceSpan name_span;
        auto name = dotted_name("action", &name_span);
        if (peek().kind == Tok::LParen) {
            auto args = call_args();
            return { CallAction{ NativeCall{ name, std::move(args) } }, cover(start, _toks[_pos - 1].span) };
        }
        if (name.find('.') != std::string::npos)
            fail({ "'('" });
        expect(Tok::Assign, "=");
        auto value = expr();
        return { AssignAction{ name, value }, cover(start, value->span) };
    }

    // -- expressions -----------------------------------------------------

    ExprPtr expr() { return implication(); }

    // The rhs of a binary operator must start an operand; otherwise report at
    // the operator so truncated input points at the dangling comparison.
    ExprPtr operand_after(const Token& op, ExprPtr (Parser::*sub)())
    {
        auto k = peek().kind;
        if (k == Tok::Newline || k == Tok::End || k == Tok::RParen || k == Tok::Semi || k == Tok::Comma)
            throw ParseError(op.span, { "expression" },
                             "expected expression after '" + op.text + "', found " + describe(peek()));
        return (this->*sub)();
    }

    ExprPtr implication()
    {
        auto lhs = disjunction();
        if (is_word("imply")) {
            const Token& op = next();
            auto rhs = operand_after(op, &Parser::implication);
            return make_binary(BinaryOp::Implies, lhs, rhs, cover(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr disjunction()
    {
        auto lhs = conjunction();
        while (peek().kind == Tok::OrOr) {
            const Token& op = next();
            auto rhs = operand_after(op, &Parser::conjunction);
            lhs = make_binary(BinaryOp::Or, lhs, rhs, cover(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr conjunction()
    {
        auto lhs = comparison();
        while (peek().kind == Tok::AndAnd) {
            const Token& op = next();
            auto rhs = operand_after(op, &Parser::comparison);
            lhs = make_binary(BinaryOp::And, lhs, rhs, cover(lhs->span, rhs->span));
        }
        return lhs;
    }

    static std::optional<BinaryOp> comparison_op(Tok k)
    {
        switch (k) {
        case Tok::Lt: return BinaryOp::Lt;
        case Tok::Le: return BinaryOp::Le;
        case Tok::Eq: return BinaryOp::Eq;
        case Tok::Ne: return BinaryOp::Ne;
        case Tok::Ge: return BinaryOp::Ge;
        case Tok::Gt: return BinaryOp::Gt;
        default: return std::nullopt;
        }
    }

    ExprPtr comparison()
    {
        auto lhs = additive();
        if (auto op = comparison_op(peek().kind)) {
            const Token& tok = next();
            auto rhs = operand_after(tok, &Parser::additive);
            if (comparison_op(peek().kind))
                throw ParseError(peek().span, {}, "comparisons do not chain; add parentheses");
            return make_binary(*op, lhs, rhs, cover(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr additive()
    {
        auto lhs = multiplicative();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const Token& op = next();
            auto rhs = operand_after(op, &Parser::multiplicative);
            lhs = make_binary(op.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub, lhs, rhs,
                              cover(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr multiplicative()
    {
        auto lhs = unary();
        while (peek().kind == Tok::Star) {
            const Token& op = next();
            auto rhs = operand_after(op, &Parser::unary);
            lhs = make_binary(BinaryOp::Mul, lhs, rhs, cover(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr unary()
    {
        if (peek().kind == Tok::Bang) {
            const Token& op = next();
            auto operand = operand_after(op, &Parser::unary);
            return make_unary(UnaryOp::Not, operand, cover(op.span, operand->span));
        }
        if (peek().kind == Tok::Minus) {
            const Token& op = next();
            if (peek().kind == Tok::Int) {
                const Token& lit = peek();
                auto v = integer_literal();
                return make_int(-v, cover(op.span, lit.span));
            }
            auto operand = operand_after(op, &Parser::unary);
            return make_unary(UnaryOp::Neg, operand, cover(op.span, operand->span));
        }
        return primary();
    }

    std::int64_t integer_literal()
    {
        const Token& t = next();
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{})
            throw ParseError(t.span, {}, "integer literal out of range");
        return v;
    }

    std::vector<ExprPtr> call_args()
    {
        expect(Tok::LParen, "(");
        std::vector<ExprPtr> args;
        if (peek().kind != Tok::RParen) {
            args.push_back(expr());
            while (accept(Tok::Comma))
                args.push_back(expr());
        }
        expect(Tok::RParen, ")");
        return args;
    }

    ExprPtr primary()
    {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Int: {
            auto span = t.span;
            return make_int(integer_literal(), span);
        }
        case Tok::LParen: {
            next();
            auto e = expr();
            expect(Tok::RParen, ")");
            return e;
        }
        case Tok::Ident: {
            if (t.text == "true" || t.text == "false") {
                next();
                return make_bool(t.text == "true", t.span);
            }
            if (t.text == "imply")
                fail({ "expression" });
            SourceSpan span;
            auto name = dotted_name("identifier", &span);
            if (peek().kind == Tok::LParen) {
                auto args = call_args();
                return make_call(name, std::move(args), cover(span, _toks[_pos - 1].span));
            }
            auto dot = name.find('.');
            if (dot == std::string::npos)
                return make_var(name, span);
            if (name.find('.', dot + 1) != std::string::npos)
                throw ParseError(span, {}, "state reference must be Chart.State");
            return make_atom(name.substr(0, dot), name.substr(dot + 1), span);
        }
        default:
            fail({ "expression" });
        }
    }

    std::vector<Token> _toks;
    std::size_t _pos = 0;
};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

} // namespace

Model parse_model(std::string_view text)
{
    return Parser(Lexer(text).run()).model();
}

Query parse_query(std::string_view text)
{
    auto q = Parser(Lexer(text).run()).query();
    q.text = std::string(trim(text));
    return q;
}

std::vector<Query> parse_query_file(std::string_view text)
{
    std::vector<Query> out;
    int line = 0;
    while (!text.empty()) {
        ++line;
        auto nl = text.find('\n');
        auto raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        auto hash = raw.find('#');
        auto body = trim(raw.substr(0, hash));
        if (body.empty())
            continue;
        auto q = Parser(Lexer(body, line).run()).query();
        q.text = std::string(body);
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<Diagnostic> validate_query(const Model& m, const Query& q)
{
    std::vector<Diagnostic> out;
    if (!q.predicate) {
        out.push_back({ {}, "query has no predicate" });
        return out;
    }
    auto ty = detail::type_of(m, *q.predicate, detail::ExprContext::Query, out);
    if (ty && *ty != detail::ValueType::Bool)
        out.push_back({ q.predicate->span, "query predicate must be bool" });
    return out;
}

} // namespace statepat
