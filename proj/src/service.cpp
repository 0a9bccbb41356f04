#include "statepat/service.hpp"
#include "statepat/engine.hpp"
#include "statepat/errors.hpp"
#include "statepat/pipeline.hpp"
#include "statepat/text.hpp"
#include "statepat/verifier.hpp"

#include <httplib.h>
#include <json.hpp>

#include <deque>
#include <map>
#include <mutex>
#include <random>

namespace statepat
{

using nlohmann::json;

namespace
{

constexpr int kSchemaVersion = 1;

struct HttpError
{
    int status;
    json body;
};

[[noreturn]] void fail(int status, const std::string& message, json extra = json::object())
{
    extra["v"] = kSchemaVersion;
    extra["error"] = message;
    throw HttpError{ status, std::move(extra) };
}

json span_json(const SourceSpan& s) { return { { "line", s.line }, { "column", s.column }, { "length", s.length } }; }

json diagnostics_json(const std::vector<Diagnostic>& ds)
{
    json out = json::array();
    for (const auto& d : ds) {
        auto j = span_json(d.span);
        j["message"] = d.message;
        out.push_back(std::move(j));
    }
    return out;
}

json snapshot_json(const Engine& e, const RuntimeState& s, const std::vector<std::string>& pending)
{
    const auto& m = e.model();
    json active = json::object();
    json timers = json::object();
    for (std::size_t i = 0; i < s.active.size(); ++i) {
        const auto& c = m.charts[i];
        active[c.name] = c.states[static_cast<std::size_t>(s.active[i])].name;
        timers[c.name] = s.timers[i];
    }
    json vars = json::object();
    for (std::size_t i = 0; i < s.vars.size(); ++i)
        vars[m.interface.variables[i].name] = s.vars[i];

    json queue = nullptr;
    if (m.patterns.twc) {
        json events = json::array();
        for (std::size_t i = 0; i < s.pattern.n(); ++i) {
            auto id = static_cast<std::size_t>(s.pattern.E[i]);
            json ev = { { "id", s.pattern.E[i] }, { "sender", s.pattern.S[i] } };
            if (id >= 1 && id <= m.interface.internal_events.size())
                ev["event"] = m.interface.internal_events[id - 1].name;
            events.push_back(std::move(ev));
        }
        queue = { { "events", std::move(events) }, { "n", s.pattern.n() }, { "exe", s.pattern.exe },
                  { "capacity", s.pattern.capacity } };
    }
    json token = nullptr;
    if (m.patterns.ceo) {
        json charts = json::array();
        const auto users = m.user_charts();
        for (int idx : s.pattern.O)
            charts.push_back(users[static_cast<std::size_t>(idx - 1)]->name);
        token = { { "t", s.pattern.t }, { "order", s.pattern.O }, { "charts", std::move(charts) } };
    }
    return { { "v", kSchemaVersion },
             { "model", m.name },
             { "clock", s.clock },
             { "active", std::move(active) },
             { "vars", std::move(vars) },
             { "timers", std::move(timers) },
             { "queue", std::move(queue) },
             { "token", std::move(token) },
             { "pending", pending },
             { "patterns", { { "twc", m.patterns.twc }, { "ceo", m.patterns.ceo } } } };
}

json step_json(const Engine& e, const StepTrace& t)
{
    const auto& m = e.model();
    json cycles = json::array();
    for (const auto& c : t.cycles) {
        json charts = json::array();
        for (const auto& cr : c.charts) {
            const auto& chart = m.charts[static_cast<std::size_t>(cr.chart)];
            json fired = nullptr;
            if (cr.transition >= 0) {
                const auto& tr = chart.transitions[static_cast<std::size_t>(cr.transition)];
                fired = tr.source + "->" + tr.target;
            }
            json raised = json::array();
            for (int ev : cr.raised)
                raised.push_back(m.interface.internal_events[static_cast<std::size_t>(ev)].name);
            json vars = json::object();
            for (std::size_t i = 0; i < cr.vars_after.size(); ++i)
                vars[m.interface.variables[i].name] = cr.vars_after[i];
            charts.push_back({ { "chart", chart.name },
                               { "fired", std::move(fired) },
                               { "raised", std::move(raised) },
                               { "vars", std::move(vars) } });
        }
        cycles.push_back({ { "kind", c.normal() ? "normal" : "logic" },
                           { "phase", c.phase },
                           { "sub", c.sub + 1 },
                           { "charts", std::move(charts) } });
    }
    return { { "step", t.step }, { "injected", t.injected }, { "cycles", std::move(cycles) },
             { "text", format_step(e, t) } };
}

json parse_body(const std::string& body)
{
    if (body.empty())
        fail(400, "request body is empty");
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        fail(400, "request body must be a JSON object");
    return j;
}

std::optional<std::string> opt_string(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return std::nullopt;
    if (!it->is_string())
        fail(400, std::string("'") + key + "' must be a string");
    return it->get<std::string>();
}

std::optional<std::string> order_field(const json& j)
{
    auto it = j.find("order");
    if (it == j.end() || it->is_null())
        return std::nullopt;
    if (it->is_string())
        return it->get<std::string>();
    if (!it->is_array())
        fail(400, "'order' must be a list of chart indices or names");
    std::string spec;
    for (const auto& v : *it) {
        if (!spec.empty())
            spec += ",";
        if (v.is_number_integer())
            spec += std::to_string(v.get<long long>());
        else if (v.is_string())
            spec += v.get<std::string>();
        else
            fail(400, "'order' entries must be integers or chart names");
    }
    return spec;
}

// Parses, validates and transforms the model in a request, mapping each
// failure onto a 400 with diagnostics.
Model model_from(const json& j, const std::optional<std::string>& fallback)
{
    auto text = opt_string(j, "model_text");
    if (!text)
        text = fallback;
    if (!text)
        fail(400, "'model_text' is required");
    auto pattern_name = opt_string(j, "pattern").value_or("none");
    auto pattern = parse_pattern_choice(pattern_name);
    if (!pattern)
        fail(400, "unknown pattern '" + pattern_name + "'");
    try {
        return load_model(*text, *pattern, order_field(j));
    } catch (const ParseError& e) {
        Diagnostic d{ e.span(), e.what() };
        fail(400, "parse error", { { "diagnostics", diagnostics_json({ d }) } });
    } catch (const ValidationError& e) {
        fail(400, "invalid model", { { "diagnostics", diagnostics_json(e.diagnostics()) } });
    } catch (const PatternError& e) {
        fail(400, std::string("pattern error: ") + e.what());
    }
}

struct SessionRecord
{
    std::mutex mutex;
    std::shared_ptr<const Engine> engine;
    std::unique_ptr<Session> session;
    std::deque<json> history;
};

std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path.substr(0, path.find('?'))) {
        if (c == '/') {
            if (!cur.empty())
                parts.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty())
        parts.push_back(std::move(cur));
    return parts;
}

} // namespace

struct Service::Impl
{
    ServiceOptions options;
    std::mutex sessions_mutex;
    std::map<std::string, std::shared_ptr<SessionRecord>> sessions;
    std::mt19937_64 rng{ std::random_device{}() };
    httplib::Server server;

    std::string new_id()
    {
        static const char* hex = "0123456789abcdef";
        std::string id;
        auto a = rng();
        auto b = rng();
        for (int i = 0; i < 16; ++i)
            id += hex[(a >> (i * 4)) & 0xf];
        for (int i = 0; i < 16; ++i)
            id += hex[(b >> (i * 4)) & 0xf];
        return id;
    }

    std::shared_ptr<SessionRecord> find(const std::string& id)
    {
        std::lock_guard lock(sessions_mutex);
        auto it = sessions.find(id);
        if (it == sessions.end())
            fail(404, "unknown session '" + id + "'");
        return it->second;
    }

    void remember(SessionRecord& r, json snap)
    {
        r.history.push_back(std::move(snap));
        while (r.history.size() > options.history_limit)
            r.history.pop_front();
    }

    HttpResponse create_session(const std::string& body)
    {
        auto j = parse_body(body);
        auto model = model_from(j, options.preload_model);
        auto rec = std::make_shared<SessionRecord>();
        try {
            rec->engine = std::make_shared<const Engine>(std::move(model));
        } catch (const ValidationError& e) {
            fail(400, "invalid model", { { "diagnostics", diagnostics_json(e.diagnostics()) } });
        }
        rec->session = std::make_unique<Session>(rec->engine);
        auto snap = snapshot_json(*rec->engine, rec->session->state(), {});
        remember(*rec, snap);
        std::string id;
        {
            std::lock_guard lock(sessions_mutex);
            do {
                id = new_id();
            } while (sessions.count(id));
            sessions.emplace(id, rec);
        }
        json out = { { "v", kSchemaVersion }, { "session_id", id }, { "initial_snapshot", std::move(snap) } };
        return { 201, out.dump() };
    }

    HttpResponse inject(const std::string& id, const std::string& body)
    {
        auto rec = find(id);
        auto j = parse_body(body);
        auto ev = opt_string(j, "event");
        if (!ev)
            fail(400, "'event' is required");
        std::lock_guard lock(rec->mutex);
        try {
            rec->session->inject(*ev);
        } catch (const EngineError& e) {
            fail(400, e.what());
        }
        json out = { { "v", kSchemaVersion }, { "accepted", *ev }, { "pending", rec->session->pending() } };
        return { 202, out.dump() };
    }

    HttpResponse step(const std::string& id, const std::string& body)
    {
        auto rec = find(id);
        long long count = 1;
        if (!body.empty()) {
            auto j = parse_body(body);
            if (auto it = j.find("count"); it != j.end() && !it->is_null()) {
                if (!it->is_number_integer())
                    fail(400, "'count' must be an integer");
                count = it->get<long long>();
            }
        }
        if (count < 0 || static_cast<unsigned long long>(count) > options.max_step_count)
            fail(400, "'count' must be between 0 and " + std::to_string(options.max_step_count));

        std::lock_guard lock(rec->mutex);
        json snaps = json::array();
        json traces = json::array();
        try {
            for (long long i = 0; i < count; ++i) {
                auto t = rec->session->step();
                auto snap = snapshot_json(*rec->engine, rec->session->state(), {});
                remember(*rec, snap);
                snaps.push_back(std::move(snap));
                traces.push_back(step_json(*rec->engine, t));
            }
        } catch (const EngineError& e) {
            fail(500, e.what());
        } catch (const ContractError& e) {
            fail(500, e.what());
        }
        json out = { { "v", kSchemaVersion }, { "snapshots", std::move(snaps) }, { "cycle_traces", std::move(traces) } };
        return { 200, out.dump() };
    }

    HttpResponse get(const std::string& id)
    {
        auto rec = find(id);
        std::lock_guard lock(rec->mutex);
        json history = json::array();
        for (const auto& h : rec->history)
            history.push_back(h);
        json out = { { "v", kSchemaVersion },
                     { "session_id", id },
                     { "snapshot", snapshot_json(*rec->engine, rec->session->state(), rec->session->pending()) },
                     { "in_events", json::array() },
                     { "history", std::move(history) } };
        for (const auto& ev : rec->engine->model().interface.in_events)
            out["in_events"].push_back(ev.name);
        return { 200, out.dump() };
    }

    HttpResponse remove(const std::string& id)
    {
        std::lock_guard lock(sessions_mutex);
        if (!sessions.erase(id))
            fail(404, "unknown session '" + id + "'");
        return { 204, "" };
    }

    HttpResponse verify(const std::string& body)
    {
        auto j = parse_body(body);
        auto model = model_from(j, options.preload_model);
        auto qs = j.find("queries");
        if (qs == j.end() || !qs->is_array())
            fail(400, "'queries' must be a list of formulas");

        ExploreOptions opt;
        opt.limit = options.state_limit ? options.state_limit : default_state_limit();
        if (auto env = opt_string(j, "env")) {
            auto p = parse_env_policy(*env);
            if (!p)
                fail(400, "unknown env policy '" + *env + "'");
            opt.policy = *p;
        }

        std::optional<Engine> engine;
        try {
            engine.emplace(std::move(model));
        } catch (const ValidationError& e) {
            fail(400, "invalid model", { { "diagnostics", diagnostics_json(e.diagnostics()) } });
        }

        std::vector<Query> queries;
        for (const auto& q : *qs) {
            if (!q.is_string())
                fail(400, "queries must be strings");
            try {
                queries.push_back(parse_query(q.get<std::string>()));
            } catch (const ParseError& e) {
                Diagnostic d{ e.span(), e.what() };
                fail(400, "malformed query '" + q.get<std::string>() + "'",
                     { { "diagnostics", diagnostics_json({ d }) } });
            }
            auto diags = validate_query(engine->model(), queries.back());
            if (!diags.empty())
                fail(400, "query does not match the model", { { "diagnostics", diagnostics_json(diags) } });
        }

        json results = json::array();
        for (const auto& q : queries) {
            VerificationResult r;
            try {
                r = check_query(*engine, q, opt);
            } catch (const ResourceLimitError& e) {
                fail(408, e.what(), { { "query", q.text }, { "states_explored", e.states_explored() },
                                      { "limit", e.limit() } });
            }
            json trace = nullptr;
            if (r.has_trace) {
                trace = json::array();
                for (const auto& s : r.trace)
                    trace.push_back({ { "injected", s.injected },
                                      { "cycles", step_json(*engine, s.trace) },
                                      { "snapshot", snapshot_json(*engine, s.state, {}) } });
            }
            results.push_back({ { "query", q.text },
                                { "verdict", r.verdict == Verdict::Holds ? "holds" : "fails" },
                                { "states", r.stats.states },
                                { "trace_len", r.trace.size() },
                                { "trace", std::move(trace) },
                                { "trace_text", r.has_trace ? format_trace(*engine, q, r) : "" } });
        }
        json out = { { "v", kSchemaVersion }, { "results", std::move(results) } };
        return { 200, out.dump() };
    }

    HttpResponse route(const std::string& method, const std::string& path, const std::string& body)
    {
        auto parts = split_path(path);
        if (parts.size() == 1 && parts[0] == "healthz" && method == "GET")
            return { 200, "ok", "text/plain" };
        if (parts.size() == 1 && parts[0] == "verify" && method == "POST")
            return verify(body);
        if (!parts.empty() && parts[0] == "sessions") {
            if (parts.size() == 1 && method == "POST")
                return create_session(body);
            if (parts.size() == 2 && method == "GET")
                return get(parts[1]);
            if (parts.size() == 2 && method == "DELETE")
                return remove(parts[1]);
            if (parts.size() == 3 && parts[2] == "events" && method == "POST")
                return inject(parts[1], body);
            if (parts.size() == 3 && parts[2] == "step" && method == "POST")
                return step(parts[1], body);
        }
        fail(404, "no route for " + method + " " + path);
    }
};

Service::Service(ServiceOptions options) : _impl(std::make_unique<Impl>())
{
    _impl->options = std::move(options);
    auto& srv = _impl->server;
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
        auto r = handle(req.method, req.path, req.body);
        res.status = r.status;
        if (!r.body.empty())
            res.set_content(r.body, r.content_type);
    };
    srv.set_default_headers({ { "Access-Control-Allow-Origin", _impl->options.cors_origin },
                              { "Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS" },
                              { "Access-Control-Allow-Headers", "Content-Type" } });
    srv.Get(R"(/.*)", dispatch);
    srv.Post(R"(/.*)", dispatch);
    srv.Delete(R"(/.*)", dispatch);
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

Service::~Service() { stop(); }

HttpResponse Service::handle(const std::string& method, const std::string& path, const std::string& body)
{
    try {
        return _impl->route(method, path, body);
    } catch (const HttpError& e) {
        return { e.status, e.body.dump() };
    } catch (const std::exception& e) {
        json j = { { "v", kSchemaVersion }, { "error", e.what() } };
        return { 500, j.dump() };
    }
}

int Service::bind(const std::string& host, int port)
{
    if (port < 0 || port > 65535)
        return -1;
    if (port == 0)
        return _impl->server.bind_to_any_port(host);
    return _impl->server.bind_to_port(host, port) ? port : -1;
}

bool Service::listen_after_bind() { return _impl->server.listen_after_bind(); }

void Service::stop()
{
    if (_impl && _impl->server.is_running())
        _impl->server.stop();
}

} // namespace statepat
