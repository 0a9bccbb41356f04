#pragma once

#include "statepat/engine.hpp"
#include "statepat/text.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace statepat
{

enum class EnvPolicy
{
    OneOrNone, // at most one in-event per step
    Subset,    // any subset of in-events per step
    Closed,    // no environment input
};

std::optional<EnvPolicy> parse_env_policy(const std::string& s);
const char* to_string(EnvPolicy p);

/// Environment choices for one step, in a fixed order: the empty set first,
/// then singletons or subsets by ascending bitmask.
std::vector<EnvSet> env_choices(const Engine& e, EnvPolicy p);

inline constexpr std::size_t kDefaultStateLimit = 1'000'000;

/// kDefaultStateLimit unless STATEPAT_STATE_LIMIT holds a positive integer.
std::size_t default_state_limit();

struct ExploreOptions
{
    EnvPolicy policy = EnvPolicy::OneOrNone;
    std::size_t limit = kDefaultStateLimit;
    bool parallel = true; // OpenMP frontier expansion; false selects the serial reference
};

/// Canonical encoding of a step-boundary state. Timers saturate at the
/// chart's largest time trigger and the clock is left out, so states with the
/// same future behaviour share a key.
using StateKey = std::vector<std::int32_t>;

StateKey encode_state(const Engine& e, const RuntimeState& s);
RuntimeState decode_state(const Engine& e, const StateKey& k, std::int64_t clock = 0);

struct StateGraph
{
    std::vector<StateKey> nodes; // BFS discovery order; nodes[0] is initial
    std::vector<int> parent;     // -1 for the root
    std::vector<int> via;        // index into env_choices for the edge from parent
    std::vector<int> depth;
    std::size_t edges = 0;
    std::size_t frontier_peak = 0;
};

/// Full reachable graph. Throws ResourceLimitError past options.limit states.
StateGraph explore(const Engine& e, const ExploreOptions& options = {});

enum class Verdict
{
    Holds,
    Fails,
};

struct TraceStep
{
    std::vector<std::string> injected;
    StepTrace trace;
    RuntimeState state; // after the step
};

struct VerificationStats
{
    std::size_t states = 0;
    std::size_t frontier_peak = 0;
    double seconds = 0.0;
};

struct VerificationResult
{
    Verdict verdict = Verdict::Holds;
    bool has_trace = false; // counterexample for a failing A[], witness for a holding E<>
    std::vector<TraceStep> trace;
    VerificationStats stats;
};

VerificationResult check_query(const Engine& e, const Query& q, const ExploreOptions& options = {});

/// Re-executes a trace from the initial state and checks every recorded
/// snapshot. Throws EngineError on mismatch.
RuntimeState replay(const Engine& e, const std::vector<TraceStep>& trace);

/// `.trace` file body: `#` metadata lines, then the step dump of every step.
std::string format_trace(const Engine& e, const Query& q, const VerificationResult& r);

struct SimulationOptions
{
    std::size_t schedules = 10'000;
    std::size_t steps = 100;
    std::uint64_t seed = 1;
    EnvPolicy policy = EnvPolicy::OneOrNone;
    bool parallel = true;
};

struct SimulationResult
{
    bool violated = false;
    std::size_t schedule = 0; // lowest violating schedule
    std::size_t step = 0;     // 0 means the initial state
    std::size_t steps_run = 0;
};

/// Runs random environment schedules and reports the first state falsifying
/// `invariant`. The result does not depend on `parallel`.
SimulationResult simulate_invariant(const Engine& e, const Engine::Predicate& invariant,
                                    const SimulationOptions& options = {});

/// Same as `simulate_invariant` for each entry, sharing one run of every
/// schedule. A schedule stops once all invariants have broken.
std::vector<SimulationResult> simulate_invariants(const Engine& e,
                                                  const std::vector<const Engine::Predicate*>& invariants,
                                                  const SimulationOptions& options = {});

} // namespace statepat
