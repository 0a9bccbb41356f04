#include "common.hpp"
#include "generators.hpp"

#include "statepat/errors.hpp"
#include "statepat/patterns.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace statepat;
using namespace statepat::testing;

namespace
{

const char* kP1 = "A[] !(Laser.On && Ventilator.On)";
const char* kP2 = "A[] SpO >= 95";

VerificationResult check(const Engine& e, const std::string& q, bool parallel = true,
                         EnvPolicy policy = EnvPolicy::OneOrNone)
{
    ExploreOptions o;
    o.parallel = parallel;
    o.policy = policy;
    return check_query(e, parse_query(q), o);
}

std::string replace(std::string text, const std::string& from, const std::string& to)
{
    auto at = text.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    if (at != std::string::npos)
        text.replace(at, from.size(), to);
    return text;
}

std::string negate(const std::string& q)
{
    auto pred = parse_query(q).predicate;
    return "E<> " + serialize_expr(make_unary(UnaryOp::Not, pred));
}

struct Corpus
{
    std::string name;
    std::shared_ptr<const Engine> engine;
    std::vector<std::string> queries;
};

std::vector<Corpus> corpus()
{
    std::vector<std::string> laser_q = {kP1, kP2, "A[] Ventilator.On imply Laser.Off",
                                        "A[] Laser.Off imply Ventilator.On", "A[] !Ventilator.Off",
                                        "A[] SpO >= 97 || Ventilator.On"};
    std::vector<Corpus> out;
    auto add = [&](std::string name, Model m, std::vector<std::string> qs) {
        out.push_back({std::move(name), std::make_shared<const Engine>(std::move(m)), std::move(qs)});
    };
    add("laser", load("laser.scm"), laser_q);
    add("laser/both", load("laser.scm", PatternChoice::Both), laser_q);
    add("laser/both/2,1", load("laser.scm", PatternChoice::Both, std::string("2,1")), laser_q);
    add("laser/twc", load("laser.scm", PatternChoice::Twc), laser_q);
    add("twc_toy", load("twc_toy.scm"), {"A[] !S1.C1", "A[] !S2.B2", "A[] S1.A1 || S2.B2"});
    add("twc_toy/twc", load("twc_toy.scm", PatternChoice::Twc), {"A[] !S1.C1", "A[] !S2.B2"});
    for (auto order : {"1,2", "2,1"})
        add(std::string("ceo_toy/") + order, load("ceo_toy.scm", PatternChoice::Ceo, std::string(order)),
            {"A[] x >= y", "A[] y >= x", "A[] x + y <= 1"});
    return out;
}

} // namespace

TEST(Verifier, SingleStateModelIsOneNode)
{
    Engine e(parse_model("model One\nchart A priority 1\n  initial S\n  state S\n"));
    auto g = explore(e);
    EXPECT_EQ(g.nodes.size(), 1u);
    EXPECT_EQ(g.parent[0], -1);
}

TEST(Verifier, RawLaserReachesUnsafeState)
{
    Engine e(load("laser.scm"));
    auto r = check(e, kP1);
    EXPECT_EQ(r.verdict, Verdict::Fails);
    ASSERT_TRUE(r.has_trace);
    auto last = replay(e, r.trace);
    EXPECT_EQ(active_name(e, last, "Laser"), "On");
    EXPECT_EQ(active_name(e, last, "Ventilator"), "On");
    // Regression anchors from the reference exploration.
    EXPECT_EQ(r.stats.states, 11u);
    EXPECT_EQ(r.trace.size(), 9u);
    EXPECT_EQ(check(e, kP2).verdict, Verdict::Holds);
}

TEST(Verifier, TransformedLaserIsSafeInBothOrders)
{
    Engine lv(load("laser.scm", PatternChoice::Both));
    Engine vl(load("laser.scm", PatternChoice::Both, std::string("Ventilator,Laser")));
    for (const auto* q : {kP1, kP2}) {
        EXPECT_EQ(check(lv, q).verdict, Verdict::Holds) << q;
        EXPECT_EQ(check(vl, q).verdict, Verdict::Holds) << q;
    }
    EXPECT_EQ(check(lv, kP1).stats.states, 20u);
    EXPECT_EQ(check(vl, kP1).stats.states, 19u);
    EXPECT_EQ(check(lv, "E<> Ventilator.Off").verdict, Verdict::Holds);
    EXPECT_EQ(check(lv, "E<> Laser.Off").verdict, Verdict::Holds);
    EXPECT_EQ(check(lv, "A[] Ventilator.On imply Laser.Off").verdict, Verdict::Holds);
    EXPECT_EQ(check(vl, "A[] Laser.Off imply Ventilator.On").verdict, Verdict::Holds);
}

TEST(Verifier, StricterThresholdBreaksP2)
{
    auto text = replace(model_text("laser.scm"), "if SpO <= 95", "if SpO < 95");
    Engine e(load_model(text, PatternChoice::Both));
    auto r = check(e, kP2);
    EXPECT_EQ(r.verdict, Verdict::Fails);
    EXPECT_LT(var_value(e, replay(e, r.trace), "SpO"), 95);
}

TEST(Verifier, DelayedRecoveryCalibrationBreaksP2)
{
    // Off -> Syn at 96 with one more decrement while in Syn: a laser restart
    // during recovery takes SpO from 95 to 94.
    auto text = replace(model_text("laser.scm"), "if SpO <= 95", "if SpO <= 96");
    text = replace(text, "Syn -> On after 1s if VenCmd == 1 do VenCmd = 0",
                   "Syn -> On after 1s if VenCmd == 1 do VenCmd = 0; SpO = SpO - 1");
    Engine e(load_model(text, PatternChoice::Both));
    auto r = check(e, kP2);
    EXPECT_EQ(r.verdict, Verdict::Fails);
    EXPECT_EQ(var_value(e, replay(e, r.trace), "SpO"), 94);
}

TEST(Verifier, TwoWayCommunicationVerdicts)
{
    Engine raw(load("twc_toy.scm"));
    Engine twc(load("twc_toy.scm", PatternChoice::Twc));
    EXPECT_EQ(check(raw, "E<> S1.C1").verdict, Verdict::Fails);
    EXPECT_EQ(check(raw, "E<> S2.B2").verdict, Verdict::Holds);
    EXPECT_EQ(check(twc, "E<> S1.C1").verdict, Verdict::Holds);
    auto w = check(twc, "E<> S2.B2");
    EXPECT_EQ(w.verdict, Verdict::Holds);
    ASSERT_TRUE(w.has_trace);
    EXPECT_EQ(active_name(twc, replay(twc, w.trace), "S2"), "B2");
}

TEST(Verifier, ExecutionOrderVerdicts)
{
    Engine s12(load("ceo_toy.scm", PatternChoice::Ceo, std::string("S1,S2")));
    Engine s21(load("ceo_toy.scm", PatternChoice::Ceo, std::string("S2,S1")));
    EXPECT_EQ(check(s12, "A[] x >= y").verdict, Verdict::Holds);
    EXPECT_EQ(check(s12, "A[] y >= x").verdict, Verdict::Fails);
    EXPECT_EQ(check(s21, "A[] y >= x").verdict, Verdict::Holds);
    EXPECT_EQ(check(s21, "A[] x >= y").verdict, Verdict::Fails);
}

TEST(Verifier, ReplayEmptyTraceIsInitial)
{
    Engine e(load("laser.scm"));
    EXPECT_EQ(replay(e, {}), e.initial_state());
    auto r = check(e, "E<> Laser.Off");
    EXPECT_EQ(r.verdict, Verdict::Holds);
    EXPECT_TRUE(r.trace.empty());
}

TEST(Verifier, ReplayDetectsTampering)
{
    Engine e(load("laser.scm"));
    auto r = check(e, kP1);
    ASSERT_FALSE(r.trace.empty());
    auto bad = r.trace;
    bad.back().state.vars[0] -= 1;
    EXPECT_THROW(replay(e, bad), EngineError);
    auto wrong_env = r.trace;
    wrong_env.front().injected = {"nope"};
    EXPECT_THROW(replay(e, wrong_env), EngineError);
}

TEST(Verifier, TraceOnlyWhenExpected)
{
    Engine e(load("laser.scm"));
    EXPECT_FALSE(check(e, kP2).has_trace);
    EXPECT_TRUE(check(e, kP1).has_trace);
    EXPECT_FALSE(check(e, "E<> SpO > 100").has_trace);
}

TEST(Verifier, AlwaysFailsIffNegationReachable)
{
    for (const auto& c : corpus())
        for (const auto& q : c.queries) {
            auto a = check(*c.engine, q);
            auto en = check(*c.engine, negate(q));
            EXPECT_EQ(a.verdict == Verdict::Fails, en.verdict == Verdict::Holds) << c.name << ": " << q;
            EXPECT_EQ(a.trace.size(), en.trace.size()) << c.name << ": " << q;
        }
}

TEST(Verifier, SerialAndParallelAgree)
{
    for (const auto& c : corpus())
        for (const auto& q : c.queries) {
            auto p = check(*c.engine, q, true);
            auto s = check(*c.engine, q, false);
            EXPECT_EQ(p.verdict, s.verdict) << c.name << ": " << q;
            EXPECT_EQ(p.stats.states, s.stats.states) << c.name << ": " << q;
            auto qq = parse_query(q);
            EXPECT_EQ(format_trace(*c.engine, qq, p), format_trace(*c.engine, qq, s)) << c.name << ": " << q;
        }
    std::mt19937_64 rng(61);
    for (int i = 0; i < 30; ++i) {
        Engine e(apply_both(random_model(rng)));
        ExploreOptions par, ser;
        ser.parallel = false;
        auto gp = explore(e, par);
        auto gs = explore(e, ser);
        EXPECT_EQ(gp.nodes, gs.nodes);
        EXPECT_EQ(gp.parent, gs.parent);
        EXPECT_EQ(gp.edges, gs.edges);
    }
}

TEST(Verifier, MorePermissiveEnvironmentNeverHelps)
{
    for (const auto& c : corpus())
        for (const auto& q : c.queries) {
            auto closed = check(*c.engine, q, true, EnvPolicy::Closed).verdict;
            auto one = check(*c.engine, q, true, EnvPolicy::OneOrNone).verdict;
            auto subset = check(*c.engine, q, true, EnvPolicy::Subset).verdict;
            if (closed == Verdict::Fails) {
                EXPECT_EQ(one, Verdict::Fails) << c.name << ": " << q;
            }
            if (one == Verdict::Fails) {
                EXPECT_EQ(subset, Verdict::Fails) << c.name << ": " << q;
            }
        }
}

TEST(Verifier, StateLimitIsAResourceError)
{
    Engine e(load("laser.scm", PatternChoice::Both));
    ExploreOptions o;
    o.limit = 5;
    try {
        check_query(e, parse_query(kP1), o);
        FAIL() << "expected ResourceLimitError";
    } catch (const ResourceLimitError& err) {
        EXPECT_EQ(err.limit(), 5u);
        EXPECT_GE(err.states_explored(), 5u);
    }
    ::setenv("STATEPAT_STATE_LIMIT", "1234", 1);
    EXPECT_EQ(default_state_limit(), 1234u);
    ::setenv("STATEPAT_STATE_LIMIT", "junk", 1);
    EXPECT_EQ(default_state_limit(), kDefaultStateLimit);
    ::unsetenv("STATEPAT_STATE_LIMIT");
}

TEST(Verifier, KeysRoundTripAndIgnoreClock)
{
    Engine e(load("laser.scm", PatternChoice::Both));
    auto g = explore(e);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        auto s = decode_state(e, g.nodes[i], g.depth[i]);
        EXPECT_EQ(encode_state(e, s), g.nodes[i]);
        EXPECT_EQ(s.clock, g.depth[i]);
    }
    auto s = e.initial_state();
    auto t = s;
    t.clock = 99;
    EXPECT_EQ(encode_state(e, s), encode_state(e, t));
}

TEST(Verifier, SimulatorFindsRawLaserViolation)
{
    Engine e(load("laser.scm"));
    auto p1 = e.compile_predicate(parse_query(kP1).predicate);
    SimulationOptions o;
    o.schedules = 200;
    auto par = simulate_invariant(e, p1, o);
    o.parallel = false;
    auto ser = simulate_invariant(e, p1, o);
    EXPECT_TRUE(par.violated);
    EXPECT_EQ(par.schedule, ser.schedule);
    EXPECT_EQ(par.step, ser.step);
    EXPECT_GE(par.step, 9u); // never shorter than the BFS counterexample
}

TEST(Verifier, BatchedSimulationMatchesSingle)
{
    Engine e(load("laser.scm"));
    std::vector<Engine::Predicate> preds;
    for (const auto* q : {kP1, "A[] SpO >= 95", "A[] Laser.Off", "A[] SpO >= 0"})
        preds.push_back(e.compile_predicate(parse_query(q).predicate));
    std::vector<const Engine::Predicate*> ptrs;
    for (const auto& p : preds)
        ptrs.push_back(&p);
    SimulationOptions o;
    o.schedules = 300;
    o.seed = 17;
    for (bool parallel : {true, false}) {
        o.parallel = parallel;
        auto batch = simulate_invariants(e, ptrs, o);
        ASSERT_EQ(batch.size(), preds.size());
        for (std::size_t j = 0; j < preds.size(); ++j) {
            auto one = simulate_invariant(e, preds[j], o);
            EXPECT_EQ(batch[j].violated, one.violated) << j;
            EXPECT_EQ(batch[j].schedule, one.schedule) << j;
            EXPECT_EQ(batch[j].step, one.step) << j;
            EXPECT_EQ(batch[j].steps_run, one.steps_run) << j;
        }
        EXPECT_FALSE(batch[3].violated);
    }
    EXPECT_TRUE(simulate_invariants(e, {}, o).empty());
}

TEST(Verifier, SimulatorNeverRefutesHoldingCorpusQueries)
{
    for (const auto& c : corpus())
        for (const auto& q : c.queries) {
            auto r = check(*c.engine, q);
            if (r.verdict != Verdict::Holds)
                continue;
            SimulationOptions o;
            o.schedules = 2'000;
            auto sim = simulate_invariant(*c.engine, c.engine->compile_predicate(parse_query(q).predicate), o);
            EXPECT_FALSE(sim.violated) << c.name << ": " << q;
        }
}

TEST(Verifier, OracleOnGeneratedModels)
{
    auto r = run_oracle(20, 1'000, 100, 99);
    EXPECT_EQ(r.contradictions, 0u) << r.first_problem;
    EXPECT_EQ(r.replay_errors, 0u) << r.first_problem;
    EXPECT_GT(r.holds, 0u);
    EXPECT_GT(r.fails, 0u);
}

TEST(Verifier, QueryValidation)
{
    auto m = load("laser.scm");
    EXPECT_TRUE(validate_query(m, parse_query(kP1)).empty());
    EXPECT_FALSE(validate_query(m, parse_query("A[] Laser.Onn")).empty());
    EXPECT_FALSE(validate_query(m, parse_query("A[] Pump.On")).empty());
    EXPECT_FALSE(validate_query(m, parse_query("A[] SpO")).empty());
    EXPECT_FALSE(validate_query(m, parse_query("A[] CEO.run(1)")).empty());
    Engine e(m);
    EXPECT_THROW(e.compile_predicate(parse_query("A[] Laser.Onn").predicate), ValidationError);
}
