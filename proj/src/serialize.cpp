#include "statepat/text.hpp"

#include <sstream>

namespace statepat
{

namespace
{

// Binding strength, loosest first. Comparisons do not associate.
int precedence(BinaryOp op)
{
    switch (op) {
    case BinaryOp::Implies: return 1;
    case BinaryOp::Or: return 2;
    case BinaryOp::And: return 3;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::Ge:
    case BinaryOp::Gt: return 4;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 5;
    case BinaryOp::Mul: return 6;
    }
    return 0;
}

constexpr int kUnary = 7;
constexpr int kAtom = 8;

int precedence(const Expr& e)
{
    if (auto* b = std::get_if<BinaryExpr>(&e.node))
        return precedence(b->op);
    if (std::holds_alternative<UnaryExpr>(e.node))
        return kUnary;
    if (auto* i = std::get_if<IntLit>(&e.node))
        return i->value < 0 ? kUnary : kAtom;
    return kAtom;
}

void write(std::ostream& os, const Expr& e, int min_prec);

void write_call(std::ostream& os, const NativeCall& c)
{
    os << c.name << '(';
    for (std::size_t i = 0; i < c.args.size(); ++i) {
        if (i)
            os << ", ";
        write(os, *c.args[i], 0);
    }
    os << ')';
}

struct Writer
{
    std::ostream& os;

    void operator()(const IntLit& v) const { os << v.value; }
    void operator()(const BoolLit& v) const { os << (v.value ? "true" : "false"); }
    void operator()(const VarRef& v) const { os << v.name; }
    void operator()(const StateAtom& a) const { os << a.chart << '.' << a.state; }
    void operator()(const NativeCall& c) const { write_call(os, c); }
    void operator()(const UnaryExpr& u) const
    {
        os << to_symbol(u.op);
        // A literal right after unary minus would fold into a negative literal on reparse.
        bool literal = std::holds_alternative<IntLit>(u.operand->node);
        if (literal || precedence(*u.operand) < kUnary) {
            os << '(';
            write(os, *u.operand, 0);
            os << ')';
        } else {
            write(os, *u.operand, kUnary);
        }
    }
    void operator()(const BinaryExpr& b) const
    {
        int p = precedence(b.op);
        bool cmp = p == 4;
        bool right_assoc = b.op == BinaryOp::Implies;
        write(os, *b.lhs, (cmp || right_assoc) ? p + 1 : p);
        os << ' ' << to_symbol(b.op) << ' ';
        write(os, *b.rhs, right_assoc ? p : p + 1);
    }
};

void write(std::ostream& os, const Expr& e, int min_prec)
{
    bool parens = precedence(e) < min_prec;
    if (parens)
        os << '(';
    std::visit(Writer{ os }, e.node);
    if (parens)
        os << ')';
}

void write_action(std::ostream& os, const Action& a)
{
    if (auto* as = std::get_if<AssignAction>(&a.node)) {
        os << as->var << " = " << serialize_expr(as->value);
    } else if (auto* r = std::get_if<RaiseAction>(&a.node)) {
        os << "raise " << r->event;
    } else {
        write_call(os, std::get<CallAction>(a.node).call);
    }
}

const char* type_keyword(NativeType t)
{
    switch (t) {
    case NativeType::Int: return "int";
    case NativeType::Bool: return "bool";
    case NativeType::Void: return "void";
    }
    return "int";
}

} // namespace

std::string serialize_expr(const ExprPtr& e)
{
    if (!e)
        return "true";
    std::ostringstream os;
    write(os, *e, 0);
    return os.str();
}

std::string serialize_model(const Model& m)
{
    std::ostringstream os;
    os << "model " << m.name << "\n";

    const auto& in = m.interface;
    if (!in.in_events.empty() || !in.internal_events.empty()) {
        os << "\n";
        for (const auto& e : in.in_events)
            os << "in event " << e.name << "\n";
        for (const auto& e : in.internal_events)
            os << "event " << e.name << "\n";
    }
    if (!in.variables.empty()) {
        os << "\n";
        for (const auto& v : in.variables)
            os << "var " << v.name << ": int[" << v.min << ".." << v.max << "] = " << v.initial << "\n";
    }
    if (in.exe_orders || m.patterns.twc || m.patterns.ceo || !m.natives.empty()) {
        os << "\n";
        if (in.exe_orders) {
            os << "order";
            for (std::size_t i = 0; i < in.exe_orders->size(); ++i)
                os << (i ? ", " : " ") << (*in.exe_orders)[i];
            os << "\n";
        }
        if (m.patterns.twc)
            os << "pattern twc\n";
        if (m.patterns.ceo)
            os << "pattern ceo\n";
        for (const auto& n : m.natives)
            os << "native " << n.name << "/" << n.arity << ": " << type_keyword(n.result) << "\n";
    }

    for (const auto& c : m.charts) {
        os << "\nchart " << c.name << " priority " << c.id << (c.manager ? " manager" : "") << "\n";
        if (!c.initial.empty())
            os << "  initial " << c.initial << "\n";
        for (const auto& s : c.states)
            os << "  state " << s.name << "\n";
        for (const auto& t : c.transitions) {
            os << "  transition " << t.source << " -> " << t.target;
            if (auto* ev = std::get_if<EventTrigger>(&t.trigger))
                os << " on " << ev->event;
            else if (auto* tt = std::get_if<TimeTrigger>(&t.trigger))
                os << " after " << tt->seconds << "s";
            if (t.guard)
                os << " if " << serialize_expr(t.guard);
            for (std::size_t i = 0; i < t.actions.size(); ++i) {
                os << (i ? "; " : " do ");
                write_action(os, t.actions[i]);
            }
            os << "\n";
        }
    }
    return os.str();
}

std::string serialize_query(const Query& q)
{
    return std::string(q.mode == QueryMode::AlwaysGlobally ? "A[] " : "E<> ") + serialize_expr(q.predicate);
}

} // namespace statepat
