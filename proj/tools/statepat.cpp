// statepat: check, transform, verify, simulate and serve statechart models.
//
// Exit codes: 0 ok, 1 a query failed, 2 parse error, 3 validation error,
// 4 pattern error, 5 state limit exceeded, 6 cannot bind port, 7 I/O error,
// 64 inconsistent flags.

#include "statepat/engine.hpp"
#include "statepat/errors.hpp"
#include "statepat/pipeline.hpp"
#include "statepat/service.hpp"
#include "statepat/text.hpp"
#include "statepat/verifier.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace statepat;

namespace
{

enum Exit
{
    kOk = 0,
    kQueryFailed = 1,
    kParse = 2,
    kValidate = 3,
    kPattern = 4,
    kResource = 5,
    kPort = 6,
    kIo = 7,
    kUsage = 64,
};

struct IoError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw IoError("cannot write '" + path.string() + "'");
}

struct Common
{
    std::string model_path;
    std::string pattern = "none";
    std::string order;
    bool verbose = false;

    Model load(TransformReport* report = nullptr) const
    {
        auto choice = parse_pattern_choice(pattern);
        if (!choice)
            throw UsageError("--pattern must be twc, ceo or both");
        auto text = read_file(model_path);
        auto parsed = parse_model(text);
        std::optional<std::vector<int>> ids;
        if (!order.empty()) {
            if (!uses_ceo(*choice) && !parsed.patterns.ceo)
                throw UsageError("--order needs --pattern ceo or both, or a model with `pattern ceo`");
            ids = parse_order(parsed, order);
        }
        return prepare_model(parsed, *choice, ids, report);
    }
};

void add_common(CLI::App* cmd, Common& c, bool pattern_flags)
{
    cmd->add_option("model", c.model_path, "model file (.scm)")->required();
    if (pattern_flags) {
        cmd->add_option("--pattern", c.pattern, "pattern to apply before running")
            ->check(CLI::IsMember({ "none", "twc", "ceo", "both" }));
        cmd->add_option("--order", c.order, "execution order, e.g. 2,1 or Ventilator,Laser");
    }
    cmd->add_flag("-v,--verbose", c.verbose, "print statistics to stderr");
}

int cmd_check(const Common& c)
{
    auto text = read_file(c.model_path);
    auto m = parse_model(text);
    auto diags = validate_model(m);
    for (const auto& d : diags)
        std::cerr << format_diagnostic(d, c.model_path) << '\n';
    if (!diags.empty())
        return kValidate;
    std::cout << c.model_path << ": ok (" << m.charts.size() << " charts)\n";
    return kOk;
}

int cmd_transform(const Common& c, const std::string& out)
{
    if (c.pattern == "none")
        throw UsageError("transform needs --pattern twc, ceo or both");
    TransformReport rep;
    auto m = c.load(&rep);
    auto text = serialize_model(m);
    if (out.empty())
        std::cout << text;
    else
        write_file(out, text);
    std::cerr << "transformed " << c.model_path << " with " << c.pattern << ": " << rep.raises_rewritten
              << " raise actions, " << rep.triggers_rewritten << " event triggers, " << rep.normal_exe_guards
              << " normal-cycle guards, " << rep.order_guards << " order guards\n";
    for (const auto& n : rep.notes)
        std::cerr << "  " << n << '\n';
    return kOk;
}

struct VerifyFlags
{
    std::vector<std::string> queries;
    std::string env = "one-or-none";
    std::size_t limit = 0;
    std::string trace_dir = "traces";
    bool serial = false;
};

int cmd_verify(const Common& c, const VerifyFlags& f)
{
    auto engine = Engine(c.load());
    std::vector<Query> queries;
    for (const auto& q : f.queries) {
        if (fs::is_regular_file(q)) {
            auto more = parse_query_file(read_file(q));
            queries.insert(queries.end(), more.begin(), more.end());
        } else {
            queries.push_back(parse_query(q));
        }
    }
    if (queries.empty()) {
        std::cerr << "warning: no queries to check\n";
        return kOk;
    }
    for (const auto& q : queries) {
        auto diags = validate_query(engine.model(), q);
        if (!diags.empty()) {
            for (const auto& d : diags)
                std::cerr << q.text << ": " << d.message << '\n';
            return kValidate;
        }
    }

    ExploreOptions opt;
    opt.policy = *parse_env_policy(f.env);
    opt.limit = f.limit ? f.limit : default_state_limit();
    opt.parallel = !f.serial;

    const auto stem = fs::path(c.model_path).stem().string();
    bool all = true;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& q = queries[i];
        auto r = check_query(engine, q, opt);
        const bool holds = r.verdict == Verdict::Holds;
        all = all && holds;
        std::cout << q.text << " : " << (holds ? "HOLDS" : "FAILS") << " states=" << r.stats.states
                  << " trace_len=" << r.trace.size() << std::endl;
        if (r.has_trace) {
            auto path = fs::path(f.trace_dir) / (stem + ".q" + std::to_string(i + 1) + ".trace");
            write_file(path, format_trace(engine, q, r));
            if (c.verbose)
                std::cerr << "  trace: " << path.string() << '\n';
        }
        if (c.verbose)
            std::cerr << "  frontier_peak=" << r.stats.frontier_peak << " seconds=" << r.stats.seconds << '\n';
    }
    return all ? kOk : kQueryFailed;
}

std::vector<std::string> split_commands(const std::string& text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n' || ch == ';') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

// Returns false on `quit`.
bool run_command(Session& s, const std::string& line, std::ostream& out, std::ostream& dump)
{
    std::istringstream in(line.substr(0, line.find('#')));
    std::string cmd;
    if (!(in >> cmd))
        return true;
    const auto& e = s.engine();
    const auto& m = e.model();
    if (cmd == "quit" || cmd == "exit")
        return false;
    if (cmd == "step") {
        long long k = 1;
        std::string arg;
        if (in >> arg) {
            try {
                k = std::stoll(arg);
            } catch (const std::exception&) {
                k = -1;
            }
            if (k < 0) {
                std::cerr << "error: step count must be a non-negative integer\n";
                return true;
            }
        }
        for (long long i = 0; i < k; ++i) {
            auto text = format_step(e, s.step());
            out << text;
            dump << text;
        }
    } else if (cmd == "raise") {
        std::string ev;
        if (!(in >> ev)) {
            std::cerr << "error: raise needs an event name\n";
            return true;
        }
        try {
            s.inject(ev);
            dump << "# raise " << ev << '\n';
        } catch (const EngineError& err) {
            std::cerr << "error: " << err.what() << '\n';
        }
    } else if (cmd == "state") {
        out << e.describe_state(s.state()) << '\n';
    } else if (cmd == "vars") {
        for (std::size_t i = 0; i < s.state().vars.size(); ++i)
            out << m.interface.variables[i].name << '=' << s.state().vars[i] << '\n';
    } else if (cmd == "queue") {
        const auto& p = s.state().pattern;
        if (!m.patterns.twc && !m.patterns.ceo) {
            out << "no pattern runtime (model has no pattern applied)\n";
            return true;
        }
        if (m.patterns.twc) {
            out << "queue n=" << p.n() << " exe=" << (p.exe ? "true" : "false") << " [";
            for (std::size_t i = 0; i < p.n(); ++i)
                out << (i ? ", " : "") << m.interface.internal_events[static_cast<std::size_t>(p.E[i] - 1)].name
                    << " from " << p.S[i];
            out << "]\n";
        }
        if (m.patterns.ceo) {
            out << "token t=" << p.t << " order=";
            for (std::size_t i = 0; i < p.O.size(); ++i)
                out << (i ? "," : "") << p.O[i];
            out << '\n';
        }
    } else {
        std::cerr << "error: unknown command '" << cmd << "' (step [k], raise <event>, state, vars, queue, quit)\n";
    }
    return true;
}

int cmd_simulate(const Common& c, const std::string& script, const std::string& out_path)
{
    auto engine = std::make_shared<const Engine>(c.load());
    Session session(engine);
    std::ostringstream dump;
    dump << "# model: " << engine->model().name << '\n';
    dump << "# initial: " << engine->describe_state(session.state()) << '\n';

    if (!script.empty()) {
        for (const auto& line : split_commands(read_file(script)))
            if (!run_command(session, line, std::cout, dump))
                break;
    } else {
        std::string line;
        const bool tty = isatty(fileno(stdin));
        if (tty)
            std::cout << "> " << std::flush;
        while (std::getline(std::cin, line)) {
            bool go_on = true;
            for (const auto& part : split_commands(line))
                if (!(go_on = run_command(session, part, std::cout, dump)))
                    break;
            if (!go_on)
                break;
            if (tty)
                std::cout << "> " << std::flush;
        }
    }
    dump << "# final: " << engine->describe_state(session.state()) << '\n';
    if (!out_path.empty())
        write_file(out_path, dump.str());
    return kOk;
}

Service* g_service = nullptr;

void on_signal(int)
{
    if (g_service)
        g_service->stop();
}

int cmd_serve(const std::string& model_path, int port, const std::string& host, const std::string& cors)
{
    ServiceOptions opt;
    opt.cors_origin = cors;
    if (!model_path.empty()) {
        auto text = read_file(model_path);
        load_model(text); // fail fast on a broken preload
        opt.preload_model = text;
    }
    Service service(opt);
    int bound = service.bind(host, port);
    if (bound < 0) {
        std::cerr << "error: cannot listen on " << host << ":" << port << '\n';
        return kPort;
    }
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << host << ":" << bound << std::endl;
    service.listen_after_bind();
    g_service = nullptr;
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{ "Statechart modeling, pattern transformation, simulation and verification" };
    app.require_subcommand(1);
    app.set_config("--config", "statepat.toml", "TOML file whose keys mirror the flags");

    Common common;
    std::string out;
    VerifyFlags vf;
    std::string script;
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string cors = "*";
    std::string serve_model;

    auto* check = app.add_subcommand("check", "parse and validate a model");
    add_common(check, common, false);

    auto* transform = app.add_subcommand("transform", "apply a pattern and print or write the result");
    add_common(transform, common, true);
    transform->add_option("--out", out, "output path (default stdout)");

    auto* verify = app.add_subcommand("verify", "check A[]/E<> queries by exhaustive exploration");
    add_common(verify, common, true);
    verify->add_option("queries", vf.queries, "query files (.q) or inline formulas")->required();
    verify->add_option("--env", vf.env, "environment policy")
        ->check(CLI::IsMember({ "one-or-none", "subset", "closed" }));
    verify->add_option("--limit", vf.limit, "state limit (default 1000000 or STATEPAT_STATE_LIMIT)");
    verify->add_option("--trace-dir", vf.trace_dir, "directory for .trace files");
    verify->add_flag("--serial", vf.serial, "use the serial reference exploration");

    auto* simulate = app.add_subcommand("simulate", "interactive or scripted simulation");
    add_common(simulate, common, true);
    simulate->add_option("--script", script, "command file; commands separated by newlines or ';'");
    simulate->add_option("--out", out, "write the step dump to this file");

    auto* serve = app.add_subcommand("serve", "run the HTTP session service");
    serve->add_option("model", serve_model, "model to preload");
    serve->add_option("--port", port, "TCP port");
    serve->add_option("--host", host, "bind address");
    serve->add_option("--cors", cors, "allowed CORS origin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*check)
            return cmd_check(common);
        if (*transform)
            return cmd_transform(common, out);
        if (*verify)
            return cmd_verify(common, vf);
        if (*simulate)
            return cmd_simulate(common, script, out);
        if (*serve)
            return cmd_serve(serve_model, port, host, cors);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParse;
    } catch (const ValidationError& e) {
        for (const auto& d : e.diagnostics())
            std::cerr << format_diagnostic(d, common.model_path) << '\n';
        return kValidate;
    } catch (const PatternError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kPattern;
    } catch (const ResourceLimitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kResource;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kOk;
}
