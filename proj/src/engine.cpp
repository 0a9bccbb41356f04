#include "statepat/engine.hpp"
#include "statepat/errors.hpp"
#include "statepat/text.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace statepat
{

const NativeFn* NativeRegistry::find(const std::string& name) const
{
    auto it = _fns.find(name);
    return it == _fns.end() ? nullptr : &it->second;
}

namespace detail
{

enum class Op : std::uint8_t
{
    Const,
    Var,
    Atom,
    Neg,
    Not,
    Add,
    Sub,
    Mul,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    JumpIfFalse, // short-circuit: keep the value and jump when false, else pop it
    JumpIfTrue,
    Call,
};

struct Instr
{
    Op op;
    std::int32_t a = 0;
    std::int32_t b = 0;
    std::int64_t imm = 0;
};

struct Code
{
    std::vector<Instr> ins;
    int depth = 0;

    [[nodiscard]] bool empty() const { return ins.empty(); }
};

enum class NativeKind
{
    InitQueue,
    Push,
    Pop,
    IsNormal,
    UpdateExe,
    Run,
    User,
};

struct NativeRef
{
    NativeKind kind;
    const NativeFn* fn = nullptr;
    std::string name;
};

enum class TrigKind
{
    None,
    InEvent,
    Internal,
    Time,
};

struct CAction
{
    enum class Kind
    {
        Assign,
        Raise,
        Call,
    } kind;
    int target = 0; // var index or internal event index
    Code code;
};

struct CTransition
{
    int source = 0;
    int target = 0;
    TrigKind trig = TrigKind::None;
    std::int64_t arg = 0;
    Code guard; // empty means true
    std::vector<CAction> actions;
};

struct CChart
{
    int initial = 0;
    std::vector<CTransition> transitions;
    std::vector<std::vector<int>> outgoing; // per state, in declaration order
};

struct CompiledModel
{
    std::vector<std::int64_t> var_min;
    std::vector<std::int64_t> var_max;
    std::vector<std::int64_t> var_init;
    std::vector<CChart> charts;
    std::vector<std::int64_t> timer_caps;
    std::vector<NativeRef> natives;
    std::vector<int> rank; // TWC id -> execution rank, identity without CEO
    std::vector<int> order;
    std::size_t capacity = 0;
    int phases = 1;
    int subs = 1;
    int user_charts = 0;
    NativeRegistry registry;
};

namespace
{

struct Frame
{
    std::vector<std::int64_t>& vars;
    const std::vector<int>& active;
    PatternRuntime* pattern;
    std::vector<int>* pushed = nullptr;
};

[[noreturn, gnu::cold]] void out_of_range(const char* what)
{
    throw EngineError(std::string(what) + ": argument out of range");
}

inline int narrow(std::int64_t v, const char* what)
{
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) [[unlikely]]
        out_of_range(what);
    return static_cast<int>(v);
}

int map_rank(const CompiledModel& c, std::int64_t id)
{
    if (id >= 1 && id < static_cast<std::int64_t>(c.rank.size()))
        return c.rank[static_cast<std::size_t>(id)];
    return narrow(id, "TWC");
}

std::int64_t call_native(const CompiledModel& c, const NativeRef& n, std::span<const std::int64_t> args, Frame& f)
{
    auto& rt = *f.pattern;
    switch (n.kind) {
    case NativeKind::InitQueue:
        return twc_init_event_queue(rt, narrow(args[0], "initEventQueue"), narrow(args[1], "initEventQueue"));
    case NativeKind::Push: {
        int e = narrow(args[0], "push");
        twc_push(rt, e, map_rank(c, args[1]));
        if (f.pushed)
            f.pushed->push_back(e - 1);
        return 0;
    }
    case NativeKind::Pop: return twc_pop(rt, narrow(args[0], "pop"), map_rank(c, args[1])) ? 1 : 0;
    case NativeKind::IsNormal: return twc_is_normal_exe(rt) ? 1 : 0;
    case NativeKind::UpdateExe: return ceo_update_exe_info(rt, narrow(args[0], "updateExeInfo"));
    case NativeKind::Run: return ceo_run(rt, narrow(args[0], "run")) ? 1 : 0;
    case NativeKind::User:
        if (!n.fn)
            throw EngineError("native '" + n.name + "' is declared but not registered");
        return (*n.fn)(args);
    }
    return 0;
}

[[noreturn, gnu::cold]] void overflow_error()
{
    throw EngineError("integer overflow in expression");
}

inline std::int64_t checked(bool overflow, std::int64_t v)
{
    if (overflow) [[unlikely]]
        overflow_error();
    return v;
}

std::int64_t eval_on(const CompiledModel& c, const Code& code, Frame& f, std::int64_t* st);

[[gnu::noinline]] std::int64_t eval_deep(const CompiledModel& c, const Code& code, Frame& f)
{
    std::vector<std::int64_t> heap(static_cast<std::size_t>(code.depth));
    return eval_on(c, code, f, heap.data());
}

std::int64_t eval(const CompiledModel& c, const Code& code, Frame& f)
{
    constexpr int kInline = 32;
    if (code.depth > kInline)
        return eval_deep(c, code, f);
    std::int64_t st[kInline];
    return eval_on(c, code, f, st);
}

std::int64_t eval_on(const CompiledModel& c, const Code& code, Frame& f, std::int64_t* st)
{
    st[0] = 0;
    int sp = 0;
    const auto n = code.ins.size();
    for (std::size_t pc = 0; pc < n; ++pc) {
        const Instr& in = code.ins[pc];
        switch (in.op) {
        case Op::Const: st[sp++] = in.imm; break;
        case Op::Var: st[sp++] = f.vars[static_cast<std::size_t>(in.a)]; break;
        case Op::Atom: st[sp++] = f.active[static_cast<std::size_t>(in.a)] == in.b ? 1 : 0; break;
        case Op::Neg:
            st[sp - 1] = checked(st[sp - 1] == std::numeric_limits<std::int64_t>::min(), -st[sp - 1]);
            break;
        case Op::Not: st[sp - 1] = st[sp - 1] ? 0 : 1; break;
        case Op::Add: {
            std::int64_t r;
            bool o = __builtin_add_overflow(st[sp - 2], st[sp - 1], &r);
            st[sp - 2] = checked(o, r);
            --sp;
            break;
        }
        case Op::Sub: {
            std::int64_t r;
            bool o = __builtin_sub_overflow(st[sp - 2], st[sp - 1], &r);
            st[sp - 2] = checked(o, r);
            --sp;
            break;
        }
        case Op::Mul: {
            std::int64_t r;
            bool o = __builtin_mul_overflow(st[sp - 2], st[sp - 1], &r);
            st[sp - 2] = checked(o, r);
            --sp;
            break;
        }
        case Op::Lt: st[sp - 2] = st[sp - 2] < st[sp - 1]; --sp; break;
        case Op::Le: st[sp - 2] = st[sp - 2] <= st[sp - 1]; --sp; break;
        case Op::Eq: st[sp - 2] = st[sp - 2] == st[sp - 1]; --sp; break;
        case Op::Ne: st[sp - 2] = st[sp - 2] != st[sp - 1]; --sp; break;
        case Op::Ge: st[sp - 2] = st[sp - 2] >= st[sp - 1]; --sp; break;
        case Op::Gt: st[sp - 2] = st[sp - 2] > st[sp - 1]; --sp; break;
        case Op::JumpIfFalse:
            if (!st[sp - 1])
                pc = static_cast<std::size_t>(in.a) - 1;
            else
                --sp;
            break;
        case Op::JumpIfTrue:
            if (st[sp - 1])
                pc = static_cast<std::size_t>(in.a) - 1;
            else
                --sp;
            break;
        case Op::Call: {
            sp -= in.b;
            std::span<const std::int64_t> args(st + sp, static_cast<std::size_t>(in.b));
            st[sp++] = call_native(c, c.natives[static_cast<std::size_t>(in.a)], args, f);
            break;
        }
        }
    }
    return st[0];
}

class Compiler
{
public:
    Compiler(const Model& m, CompiledModel& c) : _m(m), _c(c) {}

    Code compile(const Expr& e)
    {
        Code code;
        _sp = 0;
        emit(e, code);
        return code;
    }

    Code compile_call(const NativeCall& call)
    {
        Code code;
        _sp = 0;
        emit_call(call, code);
        return code;
    }

private:
    void push(Code& code, Instr in, int delta)
    {
        code.ins.push_back(in);
        _sp += delta;
        code.depth = std::max(code.depth, _sp);
    }

    int var_index(const std::string& name) const
    {
        const auto& vs = _m.interface.variables;
        for (std::size_t i = 0; i < vs.size(); ++i)
            if (vs[i].name == name)
                return static_cast<int>(i);
        throw EngineError("unknown variable '" + name + "'");
    }

    int native_index(const std::string& name)
    {
        for (std::size_t i = 0; i < _c.natives.size(); ++i)
            if (_c.natives[i].name == name)
                return static_cast<int>(i);
        NativeRef ref{ NativeKind::User, nullptr, name };
        static const std::pair<const char*, NativeKind> builtins[] = {
            { "TWC.initEventQueue", NativeKind::InitQueue }, { "TWC.push", NativeKind::Push },
            { "TWC.pop", NativeKind::Pop },                   { "TWC.isNormalExe", NativeKind::IsNormal },
            { "CEO.updateExeInfo", NativeKind::UpdateExe },   { "CEO.run", NativeKind::Run },
        };
        bool builtin = false;
        for (const auto& [n, k] : builtins)
            if (name == n) {
                ref.kind = k;
                builtin = true;
            }
        if (!builtin)
            ref.fn = _c.registry.find(name);
        _c.natives.push_back(ref);
        return static_cast<int>(_c.natives.size()) - 1;
    }

    void emit_call(const NativeCall& call, Code& code)
    {
        for (const auto& a : call.args)
            emit(*a, code);
        const int argc = static_cast<int>(call.args.size());
        push(code, { Op::Call, native_index(call.name), argc, 0 }, 1 - argc);
    }

    void emit(const Expr& e, Code& code)
    {
        std::visit([&](const auto& n) { emit_node(n, code); }, e.node);
    }

    void emit_node(const IntLit& v, Code& code) { push(code, { Op::Const, 0, 0, v.value }, 1); }
    void emit_node(const BoolLit& v, Code& code) { push(code, { Op::Const, 0, 0, v.value ? 1 : 0 }, 1); }
    void emit_node(const VarRef& v, Code& code) { push(code, { Op::Var, var_index(v.name), 0, 0 }, 1); }
    void emit_node(const StateAtom& a, Code& code)
    {
        for (std::size_t ci = 0; ci < _m.charts.size(); ++ci) {
            const auto& chart = _m.charts[ci];
            if (chart.name != a.chart)
                continue;
            for (std::size_t si = 0; si < chart.states.size(); ++si)
                if (chart.states[si].name == a.state) {
                    push(code, { Op::Atom, static_cast<int>(ci), static_cast<int>(si), 0 }, 1);
                    return;
                }
        }
        throw EngineError("unknown state '" + a.chart + "." + a.state + "'");
    }
    void emit_node(const UnaryExpr& u, Code& code)
    {
        emit(*u.operand, code);
        push(code, { u.op == UnaryOp::Neg ? Op::Neg : Op::Not }, 0);
    }
    void emit_node(const NativeCall& c, Code& code) { emit_call(c, code); }
    void emit_node(const BinaryExpr& b, Code& code)
    {
        if (b.op == BinaryOp::And || b.op == BinaryOp::Or || b.op == BinaryOp::Implies) {
            emit(*b.lhs, code);
            if (b.op == BinaryOp::Implies)
                push(code, { Op::Not }, 0);
            auto jump = code.ins.size();
            push(code, { b.op == BinaryOp::And ? Op::JumpIfFalse : Op::JumpIfTrue }, -1);
            emit(*b.rhs, code);
            code.ins[jump].a = static_cast<std::int32_t>(code.ins.size());
            return;
        }
        emit(*b.lhs, code);
        emit(*b.rhs, code);
        Op op = Op::Add;
        switch (b.op) {
        case BinaryOp::Mul: op = Op::Mul; break;
        case BinaryOp::Add: op = Op::Add; break;
        case BinaryOp::Sub: op = Op::Sub; break;
        case BinaryOp::Lt: op = Op::Lt; break;
        case BinaryOp::Le: op = Op::Le; break;
        case BinaryOp::Eq: op = Op::Eq; break;
        case BinaryOp::Ne: op = Op::Ne; break;
        case BinaryOp::Ge: op = Op::Ge; break;
        case BinaryOp::Gt: op = Op::Gt; break;
        default: break;
        }
        push(code, { op }, -1);
    }

    const Model& _m;
    CompiledModel& _c;
    int _sp = 0;
};

int state_index(const Statechart& c, const std::string& name)
{
    for (std::size_t i = 0; i < c.states.size(); ++i)
        if (c.states[i].name == name)
            return static_cast<int>(i);
    return -1;
}

std::size_t count_pushes(const Model& m)
{
    std::size_t n = 0;
    for (const auto& c : m.charts)
        for (const auto& t : c.transitions)
            for (const auto& a : t.actions)
                if (auto* call = std::get_if<CallAction>(&a.node); call && call->call.name == "TWC.push")
                    ++n;
    return n;
}

void run_cycle_impl(const CompiledModel& c, RuntimeState& s, const EnvSet& env, int phase, CycleRecord* rec)
{
    // Raised events as (event, sender); senders are always charts already processed.
    thread_local std::vector<int> raised;
    thread_local std::vector<int> pushed;
    raised.clear();
    Frame f{ s.vars, s.active, &s.pattern, rec ? &pushed : nullptr };
    const bool normal = phase == 0;

    for (std::size_t ci = 0; ci < c.charts.size(); ++ci) {
        const auto& chart = c.charts[ci];
        ChartRecord* cr = nullptr;
        if (rec) {
            rec->charts.push_back({});
            cr = &rec->charts.back();
            cr->chart = static_cast<int>(ci);
            pushed.clear();
        }
        const auto raised_before = raised.size();
        for (int ti : chart.outgoing[static_cast<std::size_t>(s.active[ci])]) {
            const auto& t = chart.transitions[static_cast<std::size_t>(ti)];
            bool triggered = true;
            switch (t.trig) {
            case TrigKind::None: break;
            case TrigKind::InEvent:
                triggered = normal && !env.empty() && env[static_cast<std::size_t>(t.arg)];
                break;
            case TrigKind::Internal:
                triggered = std::find(raised.begin(), raised.end(), static_cast<int>(t.arg)) != raised.end();
                break;
            case TrigKind::Time: triggered = normal && s.timers[ci] >= t.arg; break;
            }
            if (!triggered)
                continue;
            if (!t.guard.empty() && !eval(c, t.guard, f))
                continue;
            for (const auto& a : t.actions) {
                switch (a.kind) {
                case CAction::Kind::Assign: {
                    auto v = eval(c, a.code, f);
                    auto i = static_cast<std::size_t>(a.target);
                    s.vars[i] = std::clamp(v, c.var_min[i], c.var_max[i]);
                    break;
                }
                case CAction::Kind::Raise: raised.push_back(a.target); break;
                case CAction::Kind::Call: eval(c, a.code, f); break;
                }
            }
            s.active[ci] = t.target;
            s.timers[ci] = 0;
            if (cr)
                cr->transition = ti;
            break;
        }
        if (cr) {
            cr->raised.assign(raised.begin() + static_cast<std::ptrdiff_t>(raised_before), raised.end());
            cr->raised.insert(cr->raised.end(), pushed.begin(), pushed.end());
            cr->vars_after = s.vars;
        }
    }
}

} // namespace
} // namespace detail

Engine::Engine(Model m, NativeRegistry natives) : _model(std::move(m)), _c(std::make_unique<detail::CompiledModel>())
{
    auto diags = validate_model(_model);
    if (!diags.empty())
        throw ValidationError(std::move(diags));

    auto& c = *_c;
    c.registry = std::move(natives);
    for (const auto& v : _model.interface.variables) {
        c.var_min.push_back(v.min);
        c.var_max.push_back(v.max);
        c.var_init.push_back(v.initial);
    }
    c.user_charts = static_cast<int>(_model.user_charts().size());
    c.phases = _model.patterns.twc ? static_cast<int>(_model.charts.size()) : 1;
    c.subs = _model.patterns.ceo ? c.user_charts : 1;
    if (_model.patterns.ceo)
        c.order = *_model.interface.exe_orders;
    c.capacity = detail::count_pushes(_model) * static_cast<std::size_t>(c.phases);

    // TWC ids are priorities. Under CEO the charts run in O order instead, so
    // push/pop compare positions in that order; the Manager always runs first.
    c.rank.resize(_model.charts.size() + 1);
    for (std::size_t id = 0; id < c.rank.size(); ++id)
        c.rank[id] = static_cast<int>(id);
    if (_model.patterns.ceo && _model.patterns.twc) {
        const int offset = _model.manager() ? 1 : 0;
        for (std::size_t pos = 0; pos < c.order.size(); ++pos)
            c.rank[static_cast<std::size_t>(c.order[pos] + offset)] = static_cast<int>(pos) + 1 + offset;
    }

    detail::Compiler comp(_model, c);
    for (const auto& chart : _model.charts) {
        detail::CChart cc;
        cc.initial = detail::state_index(chart, chart.initial);
        cc.outgoing.resize(chart.states.size());
        std::int64_t cap = 0;
        for (std::size_t ti = 0; ti < chart.transitions.size(); ++ti) {
            const auto& t = chart.transitions[ti];
            detail::CTransition ct;
            ct.source = detail::state_index(chart, t.source);
            ct.target = detail::state_index(chart, t.target);
            if (auto* ev = std::get_if<EventTrigger>(&t.trigger)) {
                if (_model.is_in_event(ev->event)) {
                    ct.trig = detail::TrigKind::InEvent;
                    ct.arg = in_event_index(ev->event);
                } else {
                    ct.trig = detail::TrigKind::Internal;
                    ct.arg = _model.internal_event_id(ev->event) - 1;
                }
            } else if (auto* tt = std::get_if<TimeTrigger>(&t.trigger)) {
                ct.trig = detail::TrigKind::Time;
                ct.arg = tt->seconds;
                cap = std::max(cap, tt->seconds);
            }
            if (t.guard)
                ct.guard = comp.compile(*t.guard);
            for (const auto& a : t.actions) {
                detail::CAction ca{ detail::CAction::Kind::Assign, 0, {} };
                if (auto* as = std::get_if<AssignAction>(&a.node)) {
                    const auto& vs = _model.interface.variables;
                    ca.target = static_cast<int>(
                        std::find_if(vs.begin(), vs.end(), [&](const VarDecl& v) { return v.name == as->var; }) -
                        vs.begin());
                    ca.code = comp.compile(*as->value);
                } else if (auto* r = std::get_if<RaiseAction>(&a.node)) {
                    ca.kind = detail::CAction::Kind::Raise;
                    ca.target = _model.internal_event_id(r->event) - 1;
                } else {
                    ca.kind = detail::CAction::Kind::Call;
                    ca.code = comp.compile_call(std::get<CallAction>(a.node).call);
                }
                ct.actions.push_back(std::move(ca));
            }
            cc.outgoing[static_cast<std::size_t>(ct.source)].push_back(static_cast<int>(ti));
            cc.transitions.push_back(std::move(ct));
        }
        c.timer_caps.push_back(cap);
        c.charts.push_back(std::move(cc));
    }
}

Engine::~Engine() = default;

RuntimeState Engine::initial_state() const
{
    RuntimeState s;
    for (const auto& ch : _c->charts)
        s.active.push_back(ch.initial);
    s.vars = _c->var_init;
    s.timers.assign(_c->charts.size(), 0);
    s.pattern.capacity = _c->capacity;
    if (_model.patterns.ceo) {
        s.pattern.O = _c->order;
        s.pattern.t = _c->user_charts;
    }
    return s;
}

int Engine::phases() const noexcept { return _c->phases; }
int Engine::subcycles() const noexcept { return _c->subs; }
const std::vector<std::int64_t>& Engine::timer_caps() const noexcept { return _c->timer_caps; }

namespace
{
// An empty set means no in-events; anything else must cover every in-event.
void check_env(const Model& m, const EnvSet& env)
{
    if (!env.empty() && env.size() != m.interface.in_events.size())
        throw EngineError("environment has " + std::to_string(env.size()) + " entries, model declares " +
                          std::to_string(m.interface.in_events.size()) + " in events");
}
} // namespace

CycleRecord Engine::run_cycle(RuntimeState& s, const EnvSet& env, int phase, int sub) const
{
    check_env(_model, env);
    CycleRecord rec;
    rec.phase = phase;
    rec.sub = sub;
    detail::run_cycle_impl(*_c, s, env, phase, &rec);
    return rec;
}

void Engine::timed_step(RuntimeState& s, const EnvSet& env, StepTrace* trace) const
{
    check_env(_model, env);
    for (int p = 0; p < _c->phases; ++p) {
        for (int q = 0; q < _c->subs; ++q) {
            if (trace) {
                trace->cycles.push_back(run_cycle(s, env, p, q));
            } else {
                detail::run_cycle_impl(*_c, s, env, p, nullptr);
            }
        }
    }
    ++s.clock;
    for (auto& t : s.timers)
        ++t;
    if (trace) {
        trace->step = s.clock;
        trace->injected = env_names(env);
    }
}

int Engine::in_event_index(const std::string& name) const
{
    const auto& ev = _model.interface.in_events;
    for (std::size_t i = 0; i < ev.size(); ++i)
        if (ev[i].name == name)
            return static_cast<int>(i);
    return -1;
}

EnvSet Engine::env_of(const std::vector<std::string>& names) const
{
    EnvSet env(_model.interface.in_events.size(), false);
    for (const auto& n : names) {
        int i = in_event_index(n);
        if (i < 0)
            throw EngineError("unknown in event '" + n + "'");
        env[static_cast<std::size_t>(i)] = true;
    }
    return env;
}

std::vector<std::string> Engine::env_names(const EnvSet& env) const
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < env.size(); ++i)
        if (env[i])
            out.push_back(_model.interface.in_events[i].name);
    return out;
}

struct Engine::Predicate::Impl
{
    const detail::CompiledModel* c = nullptr;
    detail::Code code;
};

Engine::Predicate::Predicate() = default;
Engine::Predicate::~Predicate() = default;
Engine::Predicate::Predicate(Predicate&&) noexcept = default;
Engine::Predicate& Engine::Predicate::operator=(Predicate&&) noexcept = default;

bool Engine::Predicate::operator()(const RuntimeState& s) const
{
    // Query predicates never call natives, so neither vars nor the pattern
    // runtime are written through these pointers.
    auto& vars = const_cast<std::vector<std::int64_t>&>(s.vars);
    detail::Frame f{ vars, s.active, const_cast<PatternRuntime*>(&s.pattern) };
    return detail::eval(*_impl->c, _impl->code, f) != 0;
}

Engine::Predicate Engine::compile_predicate(const ExprPtr& e) const
{
    Query q;
    q.predicate = e;
    auto diags = validate_query(_model, q);
    if (!diags.empty())
        throw ValidationError(std::move(diags));
    Predicate p;
    p._impl = std::make_unique<Predicate::Impl>();
    p._impl->c = _c.get();
    detail::CompiledModel scratch; // queries reference no natives
    detail::Compiler comp(_model, scratch);
    p._impl->code = comp.compile(*e);
    return p;
}

namespace
{

void write_vars(std::ostream& os, const Model& m, const std::vector<std::int64_t>& vars)
{
    os << '{';
    for (std::size_t i = 0; i < vars.size(); ++i)
        os << (i ? "," : "") << m.interface.variables[i].name << '=' << vars[i];
    os << '}';
}

} // namespace

std::string Engine::describe_state(const RuntimeState& s) const
{
    std::ostringstream os;
    os << "active={";
    for (std::size_t i = 0; i < s.active.size(); ++i)
        os << (i ? "," : "") << _model.charts[i].name << '='
           << _model.charts[i].states[static_cast<std::size_t>(s.active[i])].name;
    os << "} vars=";
    write_vars(os, _model, s.vars);
    os << " timers={";
    for (std::size_t i = 0; i < s.timers.size(); ++i)
        os << (i ? "," : "") << _model.charts[i].name << '=' << s.timers[i];
    os << "}";
    if (_model.patterns.twc) {
        os << " queue=[";
        for (std::size_t i = 0; i < s.pattern.n(); ++i)
            os << (i ? "," : "") << s.pattern.E[i] << ':' << s.pattern.S[i];
        os << "] exe=" << (s.pattern.exe ? "true" : "false");
    }
    if (_model.patterns.ceo)
        os << " token=" << s.pattern.t;
    os << " clock=" << s.clock;
    return os.str();
}

std::string format_step(const Engine& e, const StepTrace& t)
{
    const auto& m = e.model();
    const bool ceo = m.patterns.ceo;
    std::ostringstream os;
    for (const auto& cyc : t.cycles) {
        for (const auto& cr : cyc.charts) {
            const auto& chart = m.charts[static_cast<std::size_t>(cr.chart)];
            os << "step=" << t.step << " cycle=";
            if (cyc.normal())
                os << "normal";
            else
                os << "logic:" << cyc.phase;
            if (ceo)
                os << " sub=" << cyc.sub + 1;
            os << " chart=" << chart.name << " fired=";
            if (cr.transition < 0) {
                os << '-';
            } else {
                const auto& tr = chart.transitions[static_cast<std::size_t>(cr.transition)];
                os << tr.source << "->" << tr.target;
            }
            os << " raised=[";
            for (std::size_t i = 0; i < cr.raised.size(); ++i)
                os << (i ? "," : "") << m.interface.internal_events[static_cast<std::size_t>(cr.raised[i])].name;
            os << "] vars=";
            write_vars(os, m, cr.vars_after);
            os << '\n';
        }
    }
    return os.str();
}

Session::Session(std::shared_ptr<const Engine> engine)
    : _engine(std::move(engine)), _state(_engine->initial_state()),
      _pending(_engine->model().interface.in_events.size(), false)
{
}

void Session::inject(const std::string& event)
{
    int i = _engine->in_event_index(event);
    if (i < 0)
        throw EngineError("unknown in event '" + event + "'");
    _pending[static_cast<std::size_t>(i)] = true;
}

StepTrace Session::step()
{
    StepTrace t;
    _engine->timed_step(_state, _pending, &t);
    std::fill(_pending.begin(), _pending.end(), false);
    return t;
}

std::vector<std::string> Session::pending() const { return _engine->env_names(_pending); }

} // namespace statepat
