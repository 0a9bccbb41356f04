#include "statepat/model.hpp"
#include "statepat/errors.hpp"

#include <algorithm>
#include <sstream>

namespace statepat
{

ExprPtr make_int(std::int64_t v, SourceSpan span) { return std::make_shared<Expr>(Expr{ IntLit{ v }, span }); }
ExprPtr make_bool(bool v, SourceSpan span) { return std::make_shared<Expr>(Expr{ BoolLit{ v }, span }); }
ExprPtr make_var(std::string name, SourceSpan span)
{
    return std::make_shared<Expr>(Expr{ VarRef{ std::move(name) }, span });
}
ExprPtr make_atom(std::string chart, std::string state, SourceSpan span)
{
    return std::make_shared<Expr>(Expr{ StateAtom{ std::move(chart), std::move(state) }, span });
}
ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourceSpan span)
{
    return std::make_shared<Expr>(Expr{ UnaryExpr{ op, std::move(operand) }, span });
}
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span)
{
    return std::make_shared<Expr>(Expr{ BinaryExpr{ op, std::move(lhs), std::move(rhs) }, span });
}
ExprPtr make_call(std::string name, std::vector<ExprPtr> args, SourceSpan span)
{
    return std::make_shared<Expr>(Expr{ NativeCall{ std::move(name), std::move(args) }, span });
}

namespace
{

bool same_call(const NativeCall& a, const NativeCall& b)
{
    if (a.name != b.name || a.args.size() != b.args.size())
        return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!same_expr(a.args[i], b.args[i]))
            return false;
    return true;
}

struct SameNode
{
    bool operator()(const IntLit& a, const IntLit& b) const { return a.value == b.value; }
    bool operator()(const BoolLit& a, const BoolLit& b) const { return a.value == b.value; }
    bool operator()(const VarRef& a, const VarRef& b) const { return a.name == b.name; }
    bool operator()(const StateAtom& a, const StateAtom& b) const { return a.chart == b.chart && a.state == b.state; }
    bool operator()(const UnaryExpr& a, const UnaryExpr& b) const
    {
        return a.op == b.op && same_expr(a.operand, b.operand);
    }
    bool operator()(const BinaryExpr& a, const BinaryExpr& b) const
    {
        return a.op == b.op && same_expr(a.lhs, b.lhs) && same_expr(a.rhs, b.rhs);
    }
    bool operator()(const NativeCall& a, const NativeCall& b) const { return same_call(a, b); }
    template <typename A, typename B>
    bool operator()(const A&, const B&) const
    {
        return false;
    }
};

bool same_action(const Action& a, const Action& b)
{
    if (a.node.index() != b.node.index())
        return false;
    if (auto* x = std::get_if<AssignAction>(&a.node)) {
        auto& y = std::get<AssignAction>(b.node);
        return x->var == y.var && same_expr(x->value, y.value);
    }
    if (auto* x = std::get_if<RaiseAction>(&a.node))
        return x->event == std::get<RaiseAction>(b.node).event;
    return same_call(std::get<CallAction>(a.node).call, std::get<CallAction>(b.node).call);
}

bool same_trigger(const Trigger& a, const Trigger& b)
{
    if (a.index() != b.index())
        return false;
    if (auto* x = std::get_if<EventTrigger>(&a))
        return x->event == std::get<EventTrigger>(b).event;
    if (auto* x = std::get_if<TimeTrigger>(&a))
        return x->seconds == std::get<TimeTrigger>(b).seconds;
    return true;
}

bool same_transition(const Transition& a, const Transition& b)
{
    if (a.source != b.source || a.target != b.target || !same_trigger(a.trigger, b.trigger) ||
        !same_expr(a.guard, b.guard) || a.actions.size() != b.actions.size())
        return false;
    for (std::size_t i = 0; i < a.actions.size(); ++i)
        if (!same_action(a.actions[i], b.actions[i]))
            return false;
    return true;
}

bool same_chart(const Statechart& a, const Statechart& b)
{
    if (a.id != b.id || a.name != b.name || a.manager != b.manager || a.initial != b.initial ||
        a.states.size() != b.states.size() || a.transitions.size() != b.transitions.size())
        return false;
    for (std::size_t i = 0; i < a.states.size(); ++i)
        if (a.states[i].name != b.states[i].name)
            return false;
    for (std::size_t i = 0; i < a.transitions.size(); ++i)
        if (!same_transition(a.transitions[i], b.transitions[i]))
            return false;
    return true;
}

bool same_events(const std::vector<EventDecl>& a, const std::vector<EventDecl>& b)
{
    return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                      [](const EventDecl& x, const EventDecl& y) { return x.name == y.name; });
}

} // namespace

bool same_expr(const ExprPtr& a, const ExprPtr& b)
{
    if (!a || !b)
        return !a && !b;
    return std::visit(SameNode{}, a->node, b->node);
}

bool operator==(const Model& a, const Model& b)
{
    if (a.name != b.name || a.patterns.twc != b.patterns.twc || a.patterns.ceo != b.patterns.ceo)
        return false;
    const auto& ia = a.interface;
    const auto& ib = b.interface;
    if (!same_events(ia.in_events, ib.in_events) || !same_events(ia.internal_events, ib.internal_events) ||
        ia.exe_orders != ib.exe_orders)
        return false;
    if (!std::equal(ia.variables.begin(), ia.variables.end(), ib.variables.begin(), ib.variables.end(),
                    [](const VarDecl& x, const VarDecl& y) {
                        return x.name == y.name && x.min == y.min && x.max == y.max && x.initial == y.initial;
                    }))
        return false;
    if (!std::equal(a.natives.begin(), a.natives.end(), b.natives.begin(), b.natives.end(),
                    [](const NativeDecl& x, const NativeDecl& y) {
                        return x.name == y.name && x.arity == y.arity && x.result == y.result;
                    }))
        return false;
    return std::equal(a.charts.begin(), a.charts.end(), b.charts.begin(), b.charts.end(), same_chart);
}

const char* to_symbol(BinaryOp op)
{
    switch (op) {
    case BinaryOp::Mul: return "*";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
    case BinaryOp::Implies: return "imply";
    }
    return "?";
}

const char* to_symbol(UnaryOp op) { return op == UnaryOp::Neg ? "-" : "!"; }

bool Statechart::has_state(const std::string& s) const
{
    return std::any_of(states.begin(), states.end(), [&](const State& st) { return st.name == s; });
}

const Statechart* Model::find_chart(const std::string& n) const
{
    for (const auto& c : charts)
        if (c.name == n)
            return &c;
    return nullptr;
}

const VarDecl* Model::find_var(const std::string& n) const
{
    for (const auto& v : interface.variables)
        if (v.name == n)
            return &v;
    return nullptr;
}

bool Model::is_in_event(const std::string& n) const
{
    return std::any_of(interface.in_events.begin(), interface.in_events.end(),
                       [&](const EventDecl& e) { return e.name == n; });
}

bool Model::is_internal_event(const std::string& n) const { return internal_event_id(n) != 0; }

int Model::internal_event_id(const std::string& n) const
{
    for (std::size_t i = 0; i < interface.internal_events.size(); ++i)
        if (interface.internal_events[i].name == n)
            return static_cast<int>(i) + 1;
    return 0;
}

const Statechart* Model::manager() const
{
    for (const auto& c : charts)
        if (c.manager)
            return &c;
    return nullptr;
}

std::vector<const Statechart*> Model::user_charts() const
{
    std::vector<const Statechart*> out;
    for (const auto& c : charts)
        if (!c.manager)
            out.push_back(&c);
    return out;
}

std::string format_diagnostic(const Diagnostic& d, const std::string& file)
{
    std::ostringstream os;
    if (!file.empty())
        os << file << ':';
    os << d.span.line << ':' << d.span.column << ": error: " << d.message;
    return os.str();
}

const std::vector<BuiltinNative>& builtin_natives()
{
    static const std::vector<BuiltinNative> table = {
        { "TWC.initEventQueue", 2, NativeType::Int, true },
        { "TWC.push", 2, NativeType::Void, true },
        { "TWC.pop", 2, NativeType::Bool, true },
        { "TWC.isNormalExe", 0, NativeType::Bool, true },
        { "CEO.updateExeInfo", 1, NativeType::Int, false },
        { "CEO.run", 1, NativeType::Bool, false },
    };
    return table;
}

const BuiltinNative* find_builtin_native(const std::string& name)
{
    for (const auto& b : builtin_natives())
        if (name == b.name)
            return &b;
    return nullptr;
}

// errors.hpp

namespace
{
std::string summarize(const std::vector<Diagnostic>& ds)
{
    std::ostringstream os;
    os << "model is invalid (" << ds.size() << " diagnostic" << (ds.size() == 1 ? "" : "s") << ")";
    if (!ds.empty())
        os << ": " << format_diagnostic(ds.front());
    return os.str();
}
} // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), _diagnostics(std::move(diagnostics))
{
}

ResourceLimitError::ResourceLimitError(std::size_t limit, std::size_t explored)
    : std::runtime_error("state limit of " + std::to_string(limit) + " exceeded after exploring " +
                         std::to_string(explored) + " states"),
      _limit(limit), _explored(explored)
{
}

} // namespace statepat
