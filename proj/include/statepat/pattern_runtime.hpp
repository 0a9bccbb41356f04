#pragma once

#include <cstddef>
#include <vector>

namespace statepat
{

/// Shared state behind the TWC.* and CEO.* natives. The queue length n is
/// E.size(). The TWC cycle counter c is owned by the Manager (model variable
/// `cycleNum`) and passed in by value, so it is not duplicated here.
struct PatternRuntime
{
    std::vector<int> E; // queued event ids
    std::vector<int> S; // sender chart ids, parallel to E
    bool exe = false;   // true during the normal cycle
    int t = 0;          // CEO execution token, 1-based position in O
    std::vector<int> O; // CEO execution order
    std::size_t capacity = 0;

    [[nodiscard]] std::size_t n() const noexcept { return E.size(); }
    bool operator==(const PatternRuntime&) const = default;
};

// Each function below is the straight-line transcription of its program. A call
// outside the documented precondition throws ContractError.

/// pre: 0 <= c < stNum, stNum > 1. Starts a normal cycle (clearing the queue)
/// when c == 0; returns the next cycle number modulo stNum.
int twc_init_event_queue(PatternRuntime& rt, int stNum, int c);

/// pre: e > 0, s > 0. Throws EngineError when the queue is at capacity.
void twc_push(PatternRuntime& rt, int e, int s);

/// pre: e > 0, r > 0. True when some queued e was sent by a lower-numbered chart
/// during the normal cycle, or by a higher-numbered one during a logic cycle.
bool twc_pop(const PatternRuntime& rt, int e, int r);

bool twc_is_normal_exe(const PatternRuntime& rt);

/// pre: t > 0, stNum > 0. Advances the token, wrapping from stNum to 1.
int ceo_update_exe_info(PatternRuntime& rt, int stNum);

/// pre: t > 0, st > 0, t <= |O|.
bool ceo_run(const PatternRuntime& rt, int st);

namespace detail
{

struct PopWitness
{
    bool x = false;
    int v = 0; // last matching index; meaningful only when x
};

/// twc_pop with the loop's index variable exposed for postcondition tests.
PopWitness twc_pop_witness(const PatternRuntime& rt, int e, int r);

} // namespace detail

} // namespace statepat
