#include "statepat/model.hpp"
#include "typecheck.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

namespace statepat
{
namespace detail
{

namespace
{

const char* type_name(ValueType t) { return t == ValueType::Int ? "int" : "bool"; }

struct Typer
{
    const Model& m;
    ExprContext ctx;
    std::vector<Diagnostic>& out;

    void error(SourceSpan span, std::string msg) { out.push_back({ span, std::move(msg) }); }

    void expect(const ExprPtr& e, ValueType want, const char* what)
    {
        if (!e)
            return;
        auto got = type_of(m, *e, ctx, out);
        if (got && *got != want)
            error(e->span, std::string(what) + " must be " + type_name(want) + ", found " + type_name(*got));
    }

    std::optional<ValueType> call(const NativeCall& c, SourceSpan span)
    {
        if (ctx == ExprContext::Query) {
            error(span, "native call '" + c.name + "' is not allowed in a query");
            return std::nullopt;
        }
        int arity = -1;
        NativeType result = NativeType::Int;
        if (auto* b = find_builtin_native(c.name)) {
            if ((b->twc && !m.patterns.twc) || (!b->twc && !m.patterns.ceo))
                error(span, "'" + c.name + "' requires `pattern " + (b->twc ? "twc" : "ceo") + "`");
            arity = b->arity;
            result = b->result;
        } else {
            auto it = std::find_if(m.natives.begin(), m.natives.end(),
                                   [&](const NativeDecl& d) { return d.name == c.name; });
            if (it == m.natives.end()) {
                error(span, "undeclared native function '" + c.name + "'");
            } else {
                arity = it->arity;
                result = it->result;
            }
        }
        if (arity >= 0 && static_cast<int>(c.args.size()) != arity)
            error(span, "'" + c.name + "' expects " + std::to_string(arity) + " argument(s), got " +
                            std::to_string(c.args.size()));
        for (const auto& a : c.args)
            expect(a, ValueType::Int, "native argument");
        if (arity < 0)
            return std::nullopt;
        if (result == NativeType::Void) {
            error(span, "'" + c.name + "' returns no value and can only be used as an action");
            return std::nullopt;
        }
        return result == NativeType::Int ? ValueType::Int : ValueType::Bool;
    }

    std::optional<ValueType> operator()(const IntLit&, SourceSpan) { return ValueType::Int; }
    std::optional<ValueType> operator()(const BoolLit&, SourceSpan) { return ValueType::Bool; }
    std::optional<ValueType> operator()(const VarRef& v, SourceSpan span)
    {
        if (!m.find_var(v.name)) {
            error(span, "undeclared variable '" + v.name + "'");
            return std::nullopt;
        }
        return ValueType::Int;
    }
    std::optional<ValueType> operator()(const StateAtom& a, SourceSpan span)
    {
        if (ctx == ExprContext::Model) {
            error(span, "state reference '" + a.chart + "." + a.state + "' is only allowed in queries");
            return ValueType::Bool;
        }
        auto* c = m.find_chart(a.chart);
        if (!c)
            error(span, "unknown chart '" + a.chart + "'");
        else if (!c->has_state(a.state))
            error(span, "chart '" + a.chart + "' has no state '" + a.state + "'");
        return ValueType::Bool;
    }
    std::optional<ValueType> operator()(const UnaryExpr& u, SourceSpan)
    {
        auto want = u.op == UnaryOp::Neg ? ValueType::Int : ValueType::Bool;
        expect(u.operand, want, u.op == UnaryOp::Neg ? "operand of unary '-'" : "operand of '!'");
        return want;
    }
    std::optional<ValueType> operator()(const BinaryExpr& b, SourceSpan span)
    {
        switch (b.op) {
        case BinaryOp::Mul:
        case BinaryOp::Add:
        case BinaryOp::Sub:
            expect(b.lhs, ValueType::Int, "arithmetic operand");
            expect(b.rhs, ValueType::Int, "arithmetic operand");
            return ValueType::Int;
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Eq:
        case BinaryOp::Ne:
        case BinaryOp::Ge:
        case BinaryOp::Gt:
            expect(b.lhs, ValueType::Int, "comparison operand");
            expect(b.rhs, ValueType::Int, "comparison operand");
            return ValueType::Bool;
        case BinaryOp::Implies:
            if (ctx == ExprContext::Model)
                error(span, "'imply' is only allowed in queries");
            [[fallthrough]];
        case BinaryOp::And:
        case BinaryOp::Or:
            expect(b.lhs, ValueType::Bool, "boolean operand");
            expect(b.rhs, ValueType::Bool, "boolean operand");
            return ValueType::Bool;
        }
        return std::nullopt;
    }
    std::optional<ValueType> operator()(const NativeCall& c, SourceSpan span) { return call(c, span); }
};

} // namespace

std::optional<ValueType> type_of(const Model& m, const Expr& e, ExprContext ctx, std::vector<Diagnostic>& out)
{
    Typer t{ m, ctx, out };
    return std::visit([&](const auto& n) { return t(n, e.span); }, e.node);
}

} // namespace detail

namespace
{

using detail::ExprContext;
using detail::ValueType;

constexpr std::int64_t kIntMin = std::numeric_limits<std::int32_t>::min();
constexpr std::int64_t kIntMax = std::numeric_limits<std::int32_t>::max();

void check_unique_names(const Model& m, std::vector<Diagnostic>& out)
{
    std::set<std::string> seen;
    auto claim = [&](const std::string& name, SourceSpan span, const char* kind) {
        if (!seen.insert(name).second)
            out.push_back({ span, std::string("duplicate ") + kind + " name '" + name + "'" });
    };
    for (const auto& e : m.interface.in_events)
        claim(e.name, e.span, "event");
    for (const auto& e : m.interface.internal_events)
        claim(e.name, e.span, "event");
    for (const auto& v : m.interface.variables)
        claim(v.name, v.span, "variable");

    std::set<std::string> natives;
    for (const auto& n : m.natives) {
        if (find_builtin_native(n.name))
            out.push_back({ n.span, "native '" + n.name + "' shadows a pattern function" });
        if (!natives.insert(n.name).second)
            out.push_back({ n.span, "duplicate native name '" + n.name + "'" });
        if (n.arity < 0)
            out.push_back({ n.span, "native arity must be non-negative" });
    }

    std::set<std::string> charts;
    for (const auto& c : m.charts)
        if (!charts.insert(c.name).second)
            out.push_back({ c.span, "duplicate chart name '" + c.name + "'" });
}

void check_variables(const Model& m, std::vector<Diagnostic>& out)
{
    for (const auto& v : m.interface.variables) {
        if (v.min < kIntMin || v.max > kIntMax)
            out.push_back({ v.span, "bounds of '" + v.name + "' exceed the 32-bit integer range" });
        if (v.min > v.max)
            out.push_back({ v.span, "variable '" + v.name + "' has empty range [" + std::to_string(v.min) + ".." +
                                        std::to_string(v.max) + "]" });
        else if (v.initial < v.min || v.initial > v.max)
            out.push_back({ v.span, "initial value of '" + v.name + "' lies outside [" + std::to_string(v.min) +
                                        ".." + std::to_string(v.max) + "]" });
    }
}

void check_charts(const Model& m, std::vector<Diagnostic>& out)
{
    if (m.charts.empty()) {
        out.push_back({ m.span, "model declares no charts" });
        return;
    }
    int managers = 0;
    for (std::size_t i = 0; i < m.charts.size(); ++i) {
        const auto& c = m.charts[i];
        if (c.id != static_cast<int>(i) + 1)
            out.push_back({ c.span, "chart '" + c.name + "' has priority " + std::to_string(c.id) + ", expected " +
                                        std::to_string(i + 1) +
                                        " (priorities must be contiguous from 1 in declaration order)" });
        if (c.manager) {
            ++managers;
            if (c.id != 1)
                out.push_back({ c.span, "manager chart '" + c.name + "' must have priority 1" });
        }
    }
    if (managers > 1)
        out.push_back({ m.span, "at most one chart may be flagged manager" });
}

void check_orders(const Model& m, std::vector<Diagnostic>& out)
{
    const auto users = static_cast<int>(m.user_charts().size());
    if (m.patterns.ceo && !m.interface.exe_orders)
        out.push_back({ m.span, "`pattern ceo` requires an `order` declaration" });
    if ((m.patterns.twc || m.patterns.ceo) && !m.manager())
        out.push_back({ m.span, "pattern-tagged model has no manager chart" });
    if (!m.interface.exe_orders)
        return;
    auto sorted = *m.interface.exe_orders;
    std::sort(sorted.begin(), sorted.end());
    bool perm = static_cast<int>(sorted.size()) == users;
    for (int i = 0; perm && i < users; ++i)
        perm = sorted[static_cast<std::size_t>(i)] == i + 1;
    if (!perm)
        out.push_back({ m.interface.order_span,
                        "execution order must be a permutation of chart indices 1.." + std::to_string(users) });
}

void check_transitions(const Model& m, const Statechart& c, std::vector<Diagnostic>& out)
{
    if (c.states.empty())
        out.push_back({ c.span, "chart '" + c.name + "' declares no states" });
    std::set<std::string> names;
    for (const auto& s : c.states)
        if (!names.insert(s.name).second)
            out.push_back({ s.span, "duplicate state '" + s.name + "' in chart '" + c.name + "'" });
    if (c.initial.empty())
        out.push_back({ c.span, "chart '" + c.name + "' has no initial state" });
    else if (!c.has_state(c.initial))
        out.push_back({ c.initial_span, "initial state '" + c.initial + "' is not declared in chart '" + c.name + "'" });

    for (const auto& t : c.transitions) {
        if (!c.has_state(t.source))
            out.push_back({ t.span, "transition source '" + t.source + "' is not a state of '" + c.name + "'" });
        if (!c.has_state(t.target))
            out.push_back({ t.span, "transition target '" + t.target + "' is not a state of '" + c.name + "'" });
        if (auto* ev = std::get_if<EventTrigger>(&t.trigger)) {
            if (!m.is_in_event(ev->event) && !m.is_internal_event(ev->event))
                out.push_back({ t.span, "trigger references undeclared event '" + ev->event + "'" });
        } else if (auto* tt = std::get_if<TimeTrigger>(&t.trigger)) {
            if (tt->seconds < 1)
                out.push_back({ t.span, "time trigger must be at least 1s" });
        }
        if (t.guard) {
            auto ty = detail::type_of(m, *t.guard, ExprContext::Model, out);
            if (ty && *ty != ValueType::Bool)
                out.push_back({ t.guard->span, "guard must be bool" });
        }
        for (const auto& a : t.actions) {
            if (auto* as = std::get_if<AssignAction>(&a.node)) {
                if (!m.find_var(as->var))
                    out.push_back({ a.span, "assignment to undeclared variable '" + as->var + "'" });
                if (as->value) {
                    auto ty = detail::type_of(m, *as->value, ExprContext::Model, out);
                    if (ty && *ty != ValueType::Int)
                        out.push_back({ as->value->span, "assigned value must be int" });
                }
            } else if (auto* r = std::get_if<RaiseAction>(&a.node)) {
                if (m.is_in_event(r->event))
                    out.push_back({ a.span, "'" + r->event + "' is an in event and cannot be raised by a chart" });
                else if (!m.is_internal_event(r->event))
                    out.push_back({ a.span, "raise of undeclared event '" + r->event + "'" });
            } else {
                const auto& call = std::get<CallAction>(a.node).call;
                // Void natives are fine as actions; type the arguments and arity only.
                std::vector<Diagnostic> local;
                auto probe = make_call(call.name, call.args, a.span);
                detail::type_of(m, *probe, ExprContext::Model, local);
                for (auto& d : local)
                    if (d.message.find("returns no value") == std::string::npos)
                        out.push_back(std::move(d));
            }
        }
    }
}

} // namespace

std::vector<Diagnostic> validate_model(const Model& m)
{
    std::vector<Diagnostic> out;
    if (m.name.empty())
        out.push_back({ m.span, "model has no name" });
    check_unique_names(m, out);
    check_variables(m, out);
    check_charts(m, out);
    check_orders(m, out);
    for (const auto& c : m.charts)
        check_transitions(m, c, out);
    return out;
}

} // namespace statepat
