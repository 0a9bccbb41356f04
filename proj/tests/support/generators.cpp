#include "generators.hpp"

#include "statepat/engine.hpp"
#include "statepat/errors.hpp"
#include "statepat/pattern_runtime.hpp"
#include "statepat/patterns.hpp"
#include "statepat/verifier.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace statepat::testing
{

namespace
{

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(std::mt19937_64& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v)
{
    return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))];
}

ExprPtr random_int_expr(std::mt19937_64& rng, const Model& m, int depth)
{
    const auto& vars = m.interface.variables;
    if (depth <= 0 || coin(rng, 0.4)) {
        if (!vars.empty() && coin(rng, 0.6))
            return make_var(pick(rng, vars).name);
        return make_int(uniform(rng, -3, 5));
    }
    switch (uniform(rng, 0, 3)) {
    case 0: return make_binary(BinaryOp::Add, random_int_expr(rng, m, depth - 1), random_int_expr(rng, m, depth - 1));
    case 1: return make_binary(BinaryOp::Sub, random_int_expr(rng, m, depth - 1), random_int_expr(rng, m, depth - 1));
    case 2: return make_binary(BinaryOp::Mul, random_int_expr(rng, m, depth - 1), make_int(uniform(rng, -2, 3)));
    default: return make_unary(UnaryOp::Neg, random_int_expr(rng, m, depth - 1));
    }
}

ExprPtr random_comparison(std::mt19937_64& rng, const Model& m)
{
    static const std::vector<BinaryOp> cmp = {BinaryOp::Lt, BinaryOp::Le, BinaryOp::Eq,
                                              BinaryOp::Ne, BinaryOp::Ge, BinaryOp::Gt};
    return make_binary(pick(rng, cmp), random_int_expr(rng, m, 1), random_int_expr(rng, m, 1));
}

ExprPtr random_atom(std::mt19937_64& rng, const Model& m)
{
    auto users = m.user_charts();
    const auto* c = users[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(users.size()) - 1))];
    return make_atom(c->name, pick(rng, c->states).name);
}

} // namespace

ExprPtr random_bool_expr(std::mt19937_64& rng, const Model& m, int depth, bool query)
{
    if (depth <= 0 || coin(rng, 0.35)) {
        if (query && coin(rng, 0.5))
            return random_atom(rng, m);
        if (m.interface.variables.empty() || coin(rng, 0.1))
            return query ? random_atom(rng, m) : make_bool(coin(rng));
        return random_comparison(rng, m);
    }
    const int k = uniform(rng, 0, query ? 3 : 2);
    switch (k) {
    case 0: return make_unary(UnaryOp::Not, random_bool_expr(rng, m, depth - 1, query));
    case 1:
        return make_binary(BinaryOp::And, random_bool_expr(rng, m, depth - 1, query),
                           random_bool_expr(rng, m, depth - 1, query));
    case 2:
        return make_binary(BinaryOp::Or, random_bool_expr(rng, m, depth - 1, query),
                           random_bool_expr(rng, m, depth - 1, query));
    default:
        return make_binary(BinaryOp::Implies, random_bool_expr(rng, m, depth - 1, query),
                           random_bool_expr(rng, m, depth - 1, query));
    }
}

Model random_model(std::mt19937_64& rng, const GenOptions& o)
{
    Model m;
    m.name = "Gen";
    const int n_in = uniform(rng, 0, o.max_in_events);
    const int n_int = uniform(rng, 0, o.max_internal_events);
    for (int i = 1; i <= n_in; ++i)
        m.interface.in_events.push_back({"in" + std::to_string(i), {}});
    for (int i = 1; i <= n_int; ++i)
        m.interface.internal_events.push_back({"ev" + std::to_string(i), {}});
    const int n_vars = uniform(rng, 0, o.max_vars);
    for (int i = 1; i <= n_vars; ++i) {
        VarDecl v;
        v.name = "v" + std::to_string(i);
        v.min = uniform(rng, -3, 3);
        v.max = v.min + uniform(rng, 1, o.max_range - 1);
        v.initial = uniform(rng, static_cast<int>(v.min), static_cast<int>(v.max));
        m.interface.variables.push_back(v);
    }

    const int n_charts = uniform(rng, o.min_charts, o.max_charts);
    for (int c = 1; c <= n_charts; ++c) {
        Statechart sc;
        sc.id = c;
        sc.name = "C" + std::to_string(c);
        const int n_states = uniform(rng, 1, o.max_states);
        for (int s = 0; s < n_states; ++s)
            sc.states.push_back({"s" + std::to_string(s), {}});
        sc.initial = pick(rng, sc.states).name;
        for (const auto& st : sc.states) {
            const int n_tr = uniform(rng, 0, 2);
            for (int t = 0; t < n_tr; ++t) {
                Transition tr;
                tr.source = st.name;
                tr.target = pick(rng, sc.states).name;
                const int trig = uniform(rng, 0, 4);
                if (trig == 1 && !m.interface.in_events.empty())
                    tr.trigger = EventTrigger{pick(rng, m.interface.in_events).name};
                else if (trig == 2 && !m.interface.internal_events.empty())
                    tr.trigger = EventTrigger{pick(rng, m.interface.internal_events).name};
                else if (trig == 3)
                    tr.trigger = TimeTrigger{uniform(rng, 1, 2)};
                if (coin(rng, 0.55))
                    tr.guard = random_bool_expr(rng, m, 2, false);
                const int n_act = uniform(rng, 0, 2);
                for (int a = 0; a < n_act; ++a) {
                    Action act;
                    const bool can_raise = !m.interface.internal_events.empty();
                    const bool can_assign = !m.interface.variables.empty();
                    if (can_raise && (!can_assign || coin(rng)))
                        act.node = RaiseAction{pick(rng, m.interface.internal_events).name};
                    else if (can_assign)
                        act.node = AssignAction{pick(rng, m.interface.variables).name, random_int_expr(rng, m, 2)};
                    else
                        continue;
                    tr.actions.push_back(std::move(act));
                }
                sc.transitions.push_back(std::move(tr));
            }
        }
        m.charts.push_back(std::move(sc));
    }

    if (o.allow_order && coin(rng)) {
        std::vector<int> order(static_cast<std::size_t>(n_charts));
        std::iota(order.begin(), order.end(), 1);
        std::shuffle(order.begin(), order.end(), rng);
        m.interface.exe_orders = order;
    }
    return m;
}

Query random_invariant(std::mt19937_64& rng, const Model& m)
{
    Query q;
    q.mode = QueryMode::AlwaysGlobally;
    q.predicate = random_bool_expr(rng, m, 2, true);
    q.text = serialize_query(q);
    return q;
}

// ---------------------------------------------------------------------------
// Hoare suites. Each check states the postcondition as written, over the
// inputs captured before the call.
// ---------------------------------------------------------------------------

namespace
{

PatternRuntime random_queue(std::mt19937_64& rng)
{
    PatternRuntime rt;
    const int n = uniform(rng, 0, 12);
    for (int i = 0; i < n; ++i) {
        rt.E.push_back(uniform(rng, 1, 6));
        rt.S.push_back(uniform(rng, 1, 6));
    }
    rt.exe = coin(rng);
    rt.capacity = static_cast<std::size_t>(n + uniform(rng, 1, 4));
    return rt;
}

std::string dump(const PatternRuntime& rt)
{
    std::ostringstream os;
    os << "E=[";
    for (std::size_t i = 0; i < rt.E.size(); ++i)
        os << (i ? "," : "") << rt.E[i];
    os << "] S=[";
    for (std::size_t i = 0; i < rt.S.size(); ++i)
        os << (i ? "," : "") << rt.S[i];
    os << "] exe=" << rt.exe << " t=" << rt.t;
    return os.str();
}

template <class Case>
SuiteResult run_suite(const char* name, std::size_t cases, std::uint64_t seed, Case&& one)
{
    SuiteResult r;
    r.name = name;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < cases; ++i) {
        ++r.cases;
        std::string why = one(rng);
        if (!why.empty()) {
            if (r.failures++ == 0)
                r.first_failure = why;
        }
    }
    return r;
}

} // namespace

std::vector<SuiteResult> run_hoare_suites(std::size_t cases, std::uint64_t seed)
{
    std::vector<SuiteResult> out;

    out.push_back(run_suite("initEventQueue", cases, seed + 1, [](std::mt19937_64& rng) -> std::string {
        auto rt = random_queue(rng);
        const int stNum = uniform(rng, 2, 8);
        const int c = uniform(rng, 0, stNum - 1);
        const int a = c;
        const int x = twc_init_event_queue(rt, stNum, c);
        const auto n = rt.n();
        bool post = (x == 1 && rt.exe && n == 0) || ((x == 0 || x == a + 1) && !rt.exe);
        // The operation contract pins the branch: the normal cycle iff c == 0,
        // wrapping to 0 exactly from stNum - 1.
        bool branch = c == 0 ? (x == 1 && rt.exe && n == 0)
                             : (!rt.exe && x == (c == stNum - 1 ? 0 : c + 1));
        if (post && branch)
            return {};
        return "stNum=" + std::to_string(stNum) + " c=" + std::to_string(c) + " -> x=" + std::to_string(x) + " " +
               dump(rt);
    }));

    out.push_back(run_suite("push", cases, seed + 2, [](std::mt19937_64& rng) -> std::string {
        auto rt = random_queue(rng);
        const auto N = rt.n();
        const int e = uniform(rng, 1, 1000);
        const int s = uniform(rng, 1, 1000);
        auto before = rt;
        twc_push(rt, e, s);
        const auto n = rt.n();
        bool post = n >= 1 && rt.E[n - 1] == e && rt.S[n - 1] == s && n == N + 1 && rt.E.size() == rt.S.size();
        bool prefix = std::equal(before.E.begin(), before.E.end(), rt.E.begin()) &&
                      std::equal(before.S.begin(), before.S.end(), rt.S.begin());
        if (post && prefix)
            return {};
        return "push(" + std::to_string(e) + "," + std::to_string(s) + ") on " + dump(before);
    }));

    out.push_back(run_suite("pop", cases, seed + 3, [](std::mt19937_64& rng) -> std::string {
        auto rt = random_queue(rng);
        const int e = uniform(rng, 1, 6);
        const int r = uniform(rng, 1, 6);
        const auto before = rt;
        const auto w = detail::twc_pop_witness(rt, e, r);
        const bool x = twc_pop(rt, e, r);
        const auto v = static_cast<std::size_t>(w.v);
        bool post = !w.x || (w.x && v < rt.n() && rt.E[v] == e && ((rt.exe && r > rt.S[v]) || (!rt.exe && r < rt.S[v])));
        bool exists = false;
        for (std::size_t i = 0; i < rt.n(); ++i)
            exists = exists || (rt.E[i] == e && ((rt.exe && r > rt.S[i]) || (!rt.exe && r < rt.S[i])));
        if (post && x == w.x && x == exists && rt == before)
            return {};
        return "pop(" + std::to_string(e) + "," + std::to_string(r) + ") on " + dump(before) +
               " -> x=" + std::to_string(x);
    }));

    out.push_back(run_suite("isNormalExe", cases, seed + 4, [](std::mt19937_64& rng) -> std::string {
        auto rt = random_queue(rng);
        const auto before = rt;
        const bool x = twc_is_normal_exe(rt);
        if (x == rt.exe && rt == before && twc_is_normal_exe(rt) == x)
            return {};
        return "isNormalExe on " + dump(before);
    }));

    out.push_back(run_suite("updateExeInfo", cases, seed + 5, [](std::mt19937_64& rng) -> std::string {
        PatternRuntime rt;
        const int stNum = uniform(rng, 1, 10);
        // t > 0 is the whole precondition, so tokens beyond stNum are drawn too.
        rt.t = coin(rng, 0.9) ? uniform(rng, 1, stNum) : uniform(rng, stNum + 1, stNum + 5);
        const int t = rt.t;
        const int x = ceo_update_exe_info(rt, stNum);
        bool post = (t == stNum && x == 1) || (t != stNum && x == t + 1);
        if (post && rt.t == x)
            return {};
        return "t=" + std::to_string(t) + " stNum=" + std::to_string(stNum) + " -> " + std::to_string(x);
    }));

    out.push_back(run_suite("run", cases, seed + 6, [](std::mt19937_64& rng) -> std::string {
        PatternRuntime rt;
        const int k = uniform(rng, 1, 8);
        rt.O.resize(static_cast<std::size_t>(k));
        std::iota(rt.O.begin(), rt.O.end(), 1);
        std::shuffle(rt.O.begin(), rt.O.end(), rng);
        rt.t = uniform(rng, 1, k);
        const int st = uniform(rng, 1, k + 2);
        const auto before = rt;
        const bool x = ceo_run(rt, st);
        const int o = rt.O[static_cast<std::size_t>(rt.t - 1)];
        bool post = (x && o == st) || (!x && o != st);
        if (post && rt == before)
            return {};
        return "t=" + std::to_string(rt.t) + " st=" + std::to_string(st) + " " + dump(before);
    }));

    return out;
}

// ---------------------------------------------------------------------------
// Oracle equivalence
// ---------------------------------------------------------------------------

OracleResult run_oracle(std::size_t models, std::size_t schedules, std::size_t steps, std::uint64_t seed)
{
    OracleResult r;
    std::mt19937_64 rng(seed);
    auto problem = [&](const std::string& what) {
        if (r.first_problem.empty())
            r.first_problem = what;
    };
    while (r.models < models) {
        Model m = random_model(rng);
        if (!validate_model(m).empty()) {
            problem("generator produced an invalid model:\n" + serialize_model(m));
            ++r.models;
            continue;
        }
        switch (uniform(rng, 0, 3)) {
        case 1: m = apply_twc(m); break;
        case 2: m = apply_ceo(m); break;
        case 3: m = apply_both(m); break;
        default: break;
        }
        ++r.models;
        Engine e(m);
        std::vector<Query> qs;
        std::vector<VerificationResult> verdicts;
        std::vector<Engine::Predicate> preds;
        for (int qi = 0; qi < 3; ++qi) {
            qs.push_back(random_invariant(rng, m));
            verdicts.push_back(check_query(e, qs.back()));
            preds.push_back(e.compile_predicate(qs.back().predicate));
        }
        SimulationOptions so;
        so.schedules = schedules;
        so.steps = steps;
        so.seed = seed + r.models;
        std::vector<const Engine::Predicate*> ptrs;
        for (const auto& p : preds)
            ptrs.push_back(&p);
        const auto sims = simulate_invariants(e, ptrs, so);
        for (std::size_t qi = 0; qi < qs.size(); ++qi) {
            const auto& q = qs[qi];
            const auto& res = verdicts[qi];
            const auto& pred = preds[qi];
            const auto& sim = sims[qi];
            ++r.queries;
            if (res.verdict == Verdict::Holds) {
                ++r.holds;
                if (sim.violated) {
                    ++r.contradictions;
                    problem("simulator violated HOLDS verdict of " + q.text + " (schedule " +
                            std::to_string(sim.schedule) + ", step " + std::to_string(sim.step) + ") on\n" +
                            serialize_model(m));
                }
            } else {
                ++r.fails;
                if (sim.violated)
                    ++r.fails_confirmed;
                try {
                    auto last = replay(e, res.trace);
                    if (pred(last)) {
                        ++r.replay_errors;
                        problem("counterexample for " + q.text + " ends in a satisfying state");
                    }
                } catch (const EngineError& ex) {
                    ++r.replay_errors;
                    problem(std::string("replay failed: ") + ex.what());
                }
            }
        }
    }
    return r;
}

RoundTripResult run_round_trip(std::size_t models, std::uint64_t seed)
{
    RoundTripResult r;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < models; ++i) {
        Model m = random_model(rng);
        // Transformed models exercise natives, pattern tags and the Manager.
        switch (i % 4) {
        case 1: m = apply_twc(m); break;
        case 2: m = apply_ceo(m); break;
        case 3: m = apply_both(m); break;
        default: break;
        }
        ++r.models;
        std::string text = serialize_model(m);
        std::string why;
        try {
            Model back = parse_model(text);
            if (back != m)
                why = "parsed model differs";
            else if (serialize_model(back) != text)
                why = "second serialization differs";
            Query q = random_invariant(rng, m);
            Query qb = parse_query(serialize_query(q));
            if (qb.mode != q.mode || !same_expr(qb.predicate, q.predicate))
                why += (why.empty() ? "" : "; ") + std::string("query differs: ") + q.text;
        } catch (const std::exception& ex) {
            why = std::string("exception: ") + ex.what();
        }
        if (!why.empty() && r.failures++ == 0)
            r.first_failure = why + "\n" + text;
    }
    return r;
}

} // namespace statepat::testing
