#include "statepat/patterns.hpp"
#include "statepat/errors.hpp"

#include <algorithm>
#include <numeric>

namespace statepat
{

namespace
{

void require_valid(const Model& m, const char* pattern)
{
    auto diags = validate_model(m);
    if (!diags.empty())
        throw PatternError(std::string(pattern) + ": input model is invalid: " + format_diagnostic(diags.front()));
}

void require_fresh_names(const Model& m, std::initializer_list<const char*> vars, bool manager)
{
    for (const char* v : vars)
        if (m.find_var(v))
            throw PatternError(std::string("model already declares variable '") + v + "'");
    if (manager && m.find_chart(kManagerName))
        throw PatternError(std::string("model already has a chart named '") + kManagerName + "'");
}

ExprPtr conjoin(const ExprPtr& g, ExprPtr extra)
{
    if (!g)
        return extra;
    return make_binary(BinaryOp::And, g, std::move(extra));
}

Action assign(const char* var, ExprPtr value) { return { AssignAction{ var, std::move(value) }, {} }; }

ExprPtr init_queue_call(int st_num)
{
    return make_call("TWC.initEventQueue", { make_int(st_num), make_var(kCycleVar) });
}

ExprPtr update_token_call(int k) { return make_call("CEO.updateExeInfo", { make_int(k) }); }

Statechart new_manager()
{
    Statechart mgr;
    mgr.id = 1;
    mgr.name = kManagerName;
    mgr.manager = true;
    mgr.initial = "Run";
    mgr.states.push_back({ "Run", {} });
    return mgr;
}

Transition self_loop() { return Transition{ "Run", "Run", std::monostate{}, nullptr, {}, {} }; }

void add_manager_first(Model& m, Statechart mgr)
{
    for (auto& c : m.charts)
        ++c.id;
    m.charts.insert(m.charts.begin(), std::move(mgr));
}

} // namespace

Model apply_twc(const Model& in, TransformReport* report)
{
    if (in.patterns.twc)
        throw PatternError("two-way communication is already applied to this model");
    if (in.patterns.ceo)
        throw PatternError("two-way communication must be applied before execution order");
    if (in.manager())
        throw PatternError("model already has a manager chart");
    if (in.charts.size() < 2)
        throw PatternError("two-way communication needs at least two charts");
    require_valid(in, "twc");
    require_fresh_names(in, { kCycleVar }, true);

    TransformReport local;
    TransformReport& rep = report ? *report : local;

    Model m = in;
    const int st_num = static_cast<int>(m.charts.size()) + 1;

    for (auto& c : m.charts) {
        const int self = c.id + 1;
        for (auto& t : c.transitions) {
            for (auto& a : t.actions) {
                if (auto* r = std::get_if<RaiseAction>(&a.node)) {
                    int id = in.internal_event_id(r->event);
                    a.node = CallAction{ NativeCall{ "TWC.push", { make_int(id), make_int(self) } } };
                    ++rep.raises_rewritten;
                }
            }
            auto* ev = std::get_if<EventTrigger>(&t.trigger);
            if (ev && in.is_internal_event(ev->event)) {
                auto pop = make_call("TWC.pop", { make_int(in.internal_event_id(ev->event)), make_int(self) });
                t.guard = t.guard ? make_binary(BinaryOp::And, pop, t.guard) : pop;
                t.trigger = std::monostate{};
                ++rep.triggers_rewritten;
            } else if (!ev) {
                t.guard = conjoin(t.guard, make_call("TWC.isNormalExe", {}));
                ++rep.normal_exe_guards;
            }
            // In-event triggers are left alone: the environment only offers them in the
            // normal cycle and they never enter the queue.
        }
    }

    auto mgr = new_manager();
    auto loop = self_loop();
    loop.actions.push_back(assign(kCycleVar, init_queue_call(st_num)));
    mgr.transitions.push_back(std::move(loop));
    add_manager_first(m, std::move(mgr));

    m.interface.variables.push_back({ kCycleVar, 0, st_num - 1, 0, {} });
    m.patterns.twc = true;
    rep.notes.push_back("added " + std::string(kManagerName) + " at priority 1; " + std::to_string(st_num) +
                        " phases per step");
    return m;
}

Model apply_ceo(const Model& in, TransformReport* report)
{
    if (in.patterns.ceo)
        throw PatternError("execution order is already applied to this model");
    if (in.manager() && !in.patterns.twc)
        throw PatternError("model already has a manager chart");
    require_valid(in, "ceo");
    require_fresh_names(in, { kTokenVar }, !in.patterns.twc);

    TransformReport local;
    TransformReport& rep = report ? *report : local;

    Model m = in;
    const int k = static_cast<int>(m.user_charts().size());
    if (!m.interface.exe_orders) {
        std::vector<int> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), 1);
        m.interface.exe_orders = std::move(order);
        rep.notes.push_back("no order declared; using declaration order");
    }

    int index = 0;
    for (auto& c : m.charts) {
        if (c.manager)
            continue;
        ++index;
        for (auto& t : c.transitions) {
            t.guard = conjoin(t.guard, make_call("CEO.run", { make_int(index) }));
            ++rep.order_guards;
        }
    }

    if (m.patterns.twc) {
        // One TWC phase spans k token sub-cycles: the phase advances when the token wraps.
        auto& mgr = m.charts.front();
        const int st_num = static_cast<int>(m.charts.size());
        mgr.transitions.clear();
        auto wrap = self_loop();
        wrap.guard = make_binary(BinaryOp::Eq, make_var(kTokenVar), make_int(k));
        wrap.actions.push_back(assign(kTokenVar, update_token_call(k)));
        wrap.actions.push_back(assign(kCycleVar, init_queue_call(st_num)));
        auto step = self_loop();
        step.actions.push_back(assign(kTokenVar, update_token_call(k)));
        mgr.transitions.push_back(std::move(wrap));
        mgr.transitions.push_back(std::move(step));
    } else {
        auto mgr = new_manager();
        auto loop = self_loop();
        loop.actions.push_back(assign(kTokenVar, update_token_call(k)));
        mgr.transitions.push_back(std::move(loop));
        add_manager_first(m, std::move(mgr));
    }

    m.interface.variables.push_back({ kTokenVar, 1, k, k, {} });
    m.patterns.ceo = true;
    rep.notes.push_back(std::to_string(k) + " token sub-cycles per phase");
    return m;
}

Model apply_both(const Model& m, TransformReport* report) { return apply_ceo(apply_twc(m, report), report); }

Model with_order(const Model& m, const std::vector<int>& order)
{
    const auto k = m.user_charts().size();
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    bool perm = sorted.size() == k;
    for (std::size_t i = 0; perm && i < k; ++i)
        perm = sorted[i] == static_cast<int>(i) + 1;
    if (!perm)
        throw PatternError("execution order must be a permutation of 1.." + std::to_string(k));
    Model out = m;
    out.interface.exe_orders = order;
    return out;
}

} // namespace statepat
