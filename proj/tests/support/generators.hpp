#pragma once

#include "statepat/model.hpp"
#include "statepat/text.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace statepat::testing
{

struct GenOptions
{
    int min_charts = 2;
    int max_charts = 3;
    int max_states = 4;
    int max_vars = 2;
    int max_range = 8; // max - min + 1
    int max_in_events = 2;
    int max_internal_events = 2;
    bool allow_order = true;
};

/// A valid model drawn from the space described by `o`. Guards and
/// assignments stay small enough that checked arithmetic never overflows.
Model random_model(std::mt19937_64& rng, const GenOptions& o = {});

/// Boolean expression over the model's variables. With `query` set it may
/// also use state atoms and `imply`.
ExprPtr random_bool_expr(std::mt19937_64& rng, const Model& m, int depth, bool query);

/// `A[] p` for a random predicate p over states and variables.
Query random_invariant(std::mt19937_64& rng, const Model& m);

/// Outcome of one Hoare suite: how many random cases ran and how many broke
/// the postcondition (or the non-mutation check).
struct SuiteResult
{
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string first_failure;
};

/// One suite per runtime function, each with `cases` precondition-respecting
/// random inputs.
std::vector<SuiteResult> run_hoare_suites(std::size_t cases, std::uint64_t seed);

/// Verifier versus random simulation on generated models.
struct OracleResult
{
    std::size_t models = 0;
    std::size_t queries = 0;
    std::size_t holds = 0;
    std::size_t fails = 0;
    std::size_t fails_confirmed = 0; // simulator also found a violation
    std::size_t contradictions = 0;  // simulator violated a HOLDS verdict
    std::size_t replay_errors = 0;   // FAILS trace did not reproduce a violation
    std::string first_problem;
};

OracleResult run_oracle(std::size_t models, std::size_t schedules, std::size_t steps, std::uint64_t seed);

/// Models and queries for the round-trip property.
struct RoundTripResult
{
    std::size_t models = 0;
    std::size_t failures = 0;
    std::string first_failure;
};

RoundTripResult run_round_trip(std::size_t models, std::uint64_t seed);

} // namespace statepat::testing
