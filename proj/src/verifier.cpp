#include "statepat/verifier.hpp"
#include "statepat/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include <omp.h>

namespace statepat
{

std::optional<EnvPolicy> parse_env_policy(const std::string& s)
{
    if (s == "one-or-none")
        return EnvPolicy::OneOrNone;
    if (s == "subset")
        return EnvPolicy::Subset;
    if (s == "closed")
        return EnvPolicy::Closed;
    return std::nullopt;
}

const char* to_string(EnvPolicy p)
{
    switch (p) {
    case EnvPolicy::OneOrNone: return "one-or-none";
    case EnvPolicy::Subset: return "subset";
    case EnvPolicy::Closed: return "closed";
    }
    return "?";
}

std::vector<EnvSet> env_choices(const Engine& e, EnvPolicy p)
{
    const auto n = e.model().interface.in_events.size();
    std::vector<EnvSet> out;
    out.emplace_back(n, false);
    if (p == EnvPolicy::OneOrNone) {
        for (std::size_t i = 0; i < n; ++i) {
            out.emplace_back(n, false);
            out.back()[i] = true;
        }
    } else if (p == EnvPolicy::Subset) {
        if (n > 16)
            throw EngineError("subset policy supports at most 16 in events");
        for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
            EnvSet s(n, false);
            for (std::size_t i = 0; i < n; ++i)
                s[i] = (mask >> i) & 1u;
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::size_t default_state_limit()
{
    const char* v = std::getenv("STATEPAT_STATE_LIMIT");
    if (!v || !*v)
        return kDefaultStateLimit;
    char* end = nullptr;
    auto n = std::strtoull(v, &end, 10);
    if (*end != '\0' || n == 0)
        return kDefaultStateLimit;
    return static_cast<std::size_t>(n);
}

StateKey encode_state(const Engine& e, const RuntimeState& s)
{
    const auto& caps = e.timer_caps();
    StateKey k;
    k.reserve(s.active.size() * 2 + s.vars.size() + 3 + s.pattern.n() * 2);
    for (int a : s.active)
        k.push_back(a);
    for (auto v : s.vars)
        k.push_back(static_cast<std::int32_t>(v));
    for (std::size_t i = 0; i < s.timers.size(); ++i)
        k.push_back(static_cast<std::int32_t>(std::min(s.timers[i], caps[i])));
    k.push_back(s.pattern.exe ? 1 : 0);
    k.push_back(s.pattern.t);
    k.push_back(static_cast<std::int32_t>(s.pattern.n()));
    k.insert(k.end(), s.pattern.E.begin(), s.pattern.E.end());
    k.insert(k.end(), s.pattern.S.begin(), s.pattern.S.end());
    return k;
}

RuntimeState decode_state(const Engine& e, const StateKey& k, std::int64_t clock)
{
    RuntimeState s = e.initial_state();
    std::size_t p = 0;
    for (auto& a : s.active)
        a = k[p++];
    for (auto& v : s.vars)
        v = k[p++];
    for (auto& t : s.timers)
        t = k[p++];
    s.pattern.exe = k[p++] != 0;
    s.pattern.t = k[p++];
    auto n = static_cast<std::size_t>(k[p++]);
    s.pattern.E.assign(k.begin() + static_cast<std::ptrdiff_t>(p), k.begin() + static_cast<std::ptrdiff_t>(p + n));
    p += n;
    s.pattern.S.assign(k.begin() + static_cast<std::ptrdiff_t>(p), k.begin() + static_cast<std::ptrdiff_t>(p + n));
    s.clock = clock;
    return s;
}

namespace
{

struct KeyHash
{
    std::size_t operator()(const StateKey& k) const noexcept
    {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (auto v : k) {
            h ^= static_cast<std::uint32_t>(v);
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

using StopFn = std::function<bool(const RuntimeState&)>;

struct Successor
{
    StateKey key;
    int via;
    bool hit;
};

struct Search
{
    StateGraph graph;
    int found = -1;
};

void expand(const Engine& e, const std::vector<EnvSet>& choices, const StateKey& key, int depth, const StopFn& stop,
            std::vector<Successor>& out)
{
    const auto base = decode_state(e, key, depth);
    out.clear();
    for (std::size_t c = 0; c < choices.size(); ++c) {
        RuntimeState s = base;
        e.timed_step(s, choices[c]);
        out.push_back({ encode_state(e, s), static_cast<int>(c), stop && stop(s) });
    }
}

// Level-synchronous BFS. Successors of a level are computed independently
// (in parallel when asked) and merged in frontier order, so node numbering,
// the first hit, and the limit check match the serial run exactly.
Search bfs(const Engine& e, const ExploreOptions& opt, const StopFn& stop)
{
    Search r;
    auto& g = r.graph;
    const auto choices = env_choices(e, opt.policy);
    std::unordered_map<StateKey, int, KeyHash> index;

    auto init = e.initial_state();
    g.nodes.push_back(encode_state(e, init));
    g.parent.push_back(-1);
    g.via.push_back(-1);
    g.depth.push_back(0);
    index.emplace(g.nodes[0], 0);
    if (opt.limit < 1)
        throw ResourceLimitError(opt.limit, 1);
    if (stop && stop(init)) {
        r.found = 0;
        return r;
    }

    std::vector<int> frontier{ 0 };
    std::vector<std::vector<Successor>> succ;
    while (!frontier.empty()) {
        g.frontier_peak = std::max(g.frontier_peak, frontier.size());
        succ.resize(frontier.size());
        const auto count = static_cast<std::int64_t>(frontier.size());

        if (opt.parallel) {
            std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 8)
            for (std::int64_t i = 0; i < count; ++i) {
                try {
                    int id = frontier[static_cast<std::size_t>(i)];
                    expand(e, choices, g.nodes[static_cast<std::size_t>(id)], g.depth[static_cast<std::size_t>(id)],
                           stop, succ[static_cast<std::size_t>(i)]);
                } catch (...) {
#pragma omp critical(statepat_bfs_error)
                    if (!error)
                        error = std::current_exception();
                }
            }
            if (error)
                std::rethrow_exception(error);
        } else {
            for (std::int64_t i = 0; i < count; ++i) {
                int id = frontier[static_cast<std::size_t>(i)];
                expand(e, choices, g.nodes[static_cast<std::size_t>(id)], g.depth[static_cast<std::size_t>(id)], stop,
                       succ[static_cast<std::size_t>(i)]);
            }
        }

        std::vector<int> next;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            const int from = frontier[i];
            for (auto& s : succ[i]) {
                ++g.edges;
                auto [it, fresh] = index.try_emplace(std::move(s.key), static_cast<int>(g.nodes.size()));
                if (!fresh)
                    continue;
                if (g.nodes.size() >= opt.limit)
                    throw ResourceLimitError(opt.limit, g.nodes.size());
                g.nodes.push_back(it->first);
                g.parent.push_back(from);
                g.via.push_back(s.via);
                g.depth.push_back(g.depth[static_cast<std::size_t>(from)] + 1);
                if (s.hit) {
                    r.found = it->second;
                    return r;
                }
                next.push_back(it->second);
            }
        }
        frontier = std::move(next);
    }
    return r;
}

std::vector<TraceStep> rebuild(const Engine& e, const ExploreOptions& opt, const StateGraph& g, int node)
{
    std::vector<int> path;
    for (int n = node; g.parent[static_cast<std::size_t>(n)] >= 0; n = g.parent[static_cast<std::size_t>(n)])
        path.push_back(g.via[static_cast<std::size_t>(n)]);
    std::reverse(path.begin(), path.end());

    const auto choices = env_choices(e, opt.policy);
    std::vector<TraceStep> out;
    auto s = e.initial_state();
    for (int c : path) {
        TraceStep step;
        e.timed_step(s, choices[static_cast<std::size_t>(c)], &step.trace);
        step.injected = step.trace.injected;
        step.state = s;
        out.push_back(std::move(step));
    }
    if (encode_state(e, s) != g.nodes[static_cast<std::size_t>(node)])
        throw EngineError("internal error: rebuilt trace does not reach the recorded state");
    return out;
}

} // namespace

StateGraph explore(const Engine& e, const ExploreOptions& options) { return bfs(e, options, nullptr).graph; }

VerificationResult check_query(const Engine& e, const Query& q, const ExploreOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    auto pred = e.compile_predicate(q.predicate);
    const bool always = q.mode == QueryMode::AlwaysGlobally;
    StopFn stop = always ? StopFn([&](const RuntimeState& s) { return !pred(s); })
                         : StopFn([&](const RuntimeState& s) { return pred(s); });

    auto search = bfs(e, options, stop);
    VerificationResult r;
    const bool hit = search.found >= 0;
    r.verdict = (always != hit) ? Verdict::Holds : Verdict::Fails;
    if (hit) {
        r.has_trace = true;
        r.trace = rebuild(e, options, search.graph, search.found);
    }
    r.stats.states = search.graph.nodes.size();
    r.stats.frontier_peak = search.graph.frontier_peak;
    r.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

RuntimeState replay(const Engine& e, const std::vector<TraceStep>& trace)
{
    auto s = e.initial_state();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        e.timed_step(s, e.env_of(trace[i].injected));
        if (!(s == trace[i].state))
            throw EngineError("trace does not match the model at step " + std::to_string(i + 1));
    }
    return s;
}

std::string format_trace(const Engine& e, const Query& q, const VerificationResult& r)
{
    std::ostringstream os;
    os << "# model: " << e.model().name << '\n';
    os << "# query: " << (q.text.empty() ? serialize_query(q) : q.text) << '\n';
    os << "# verdict: " << (r.verdict == Verdict::Holds ? "HOLDS" : "FAILS") << '\n';
    os << "# states: " << r.stats.states << '\n';
    os << "# trace_len: " << r.trace.size() << '\n';
    os << "# initial: " << e.describe_state(e.initial_state()) << '\n';
    for (const auto& step : r.trace) {
        os << "# step " << step.trace.step << " inject=[";
        for (std::size_t i = 0; i < step.injected.size(); ++i)
            os << (i ? "," : "") << step.injected[i];
        os << "]\n";
        os << format_step(e, step.trace);
        os << "# state: " << e.describe_state(step.state) << '\n';
    }
    return os.str();
}

namespace
{

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Per invariant, steps until it breaks, or steps + 1 when it never does.
void run_schedule(const Engine& e, const std::vector<const Engine::Predicate*>& invs,
                  const std::vector<EnvSet>& choices, const SimulationOptions& opt, std::size_t index,
                  std::size_t* out)
{
    std::mt19937_64 rng(splitmix(opt.seed ^ splitmix(index)));
    std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
    auto s = e.initial_state();
    std::size_t open = invs.size();
    auto check = [&](std::size_t k) {
        for (std::size_t j = 0; j < invs.size(); ++j) {
            if (out[j] > opt.steps && !(*invs[j])(s)) {
                out[j] = k;
                --open;
            }
        }
    };
    check(0);
    for (std::size_t k = 1; k <= opt.steps && open; ++k) {
        e.timed_step(s, choices[pick(rng)]);
        check(k);
    }
}

} // namespace

std::vector<SimulationResult> simulate_invariants(const Engine& e,
                                                  const std::vector<const Engine::Predicate*>& invariants,
                                                  const SimulationOptions& options)
{
    const auto choices = env_choices(e, options.policy);
    const std::size_t width = invariants.size();
    // outcome[i * width + j]: schedule i, invariant j
    std::vector<std::size_t> outcome(options.schedules * width, options.steps + 1);
    const auto count = static_cast<std::int64_t>(options.schedules);
    auto one = [&](std::int64_t i) {
        run_schedule(e, invariants, choices, options, static_cast<std::size_t>(i),
                     outcome.data() + static_cast<std::size_t>(i) * width);
    };

    if (width == 0) {
        // nothing to check
    } else if (options.parallel) {
        std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 64)
        for (std::int64_t i = 0; i < count; ++i) {
            try {
                one(i);
            } catch (...) {
#pragma omp critical(statepat_sim_error)
                if (!error)
                    error = std::current_exception();
            }
        }
        if (error)
            std::rethrow_exception(error);
    } else {
        for (std::int64_t i = 0; i < count; ++i)
            one(i);
    }

    std::vector<SimulationResult> results(width);
    for (std::size_t j = 0; j < width; ++j) {
        auto& r = results[j];
        for (std::size_t i = 0; i < options.schedules; ++i) {
            const auto at = outcome[i * width + j];
            const bool broke = at <= options.steps;
            r.steps_run += broke ? at : options.steps;
            if (broke && !r.violated) {
                r.violated = true;
                r.schedule = i;
                r.step = at;
            }
        }
    }
    return results;
}

SimulationResult simulate_invariant(const Engine& e, const Engine::Predicate& invariant,
                                    const SimulationOptions& options)
{
    return simulate_invariants(e, {&invariant}, options).front();
}

} // namespace statepat
