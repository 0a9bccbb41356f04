#include "statepat/pattern_runtime.hpp"
#include "statepat/errors.hpp"

#include <string>

namespace statepat
{

namespace
{
void require(bool cond, const char* what)
{
    if (!cond)
        throw ContractError(what);
}
} // namespace

int twc_init_event_queue(PatternRuntime& rt, int stNum, int c)
{
    require(c >= 0 && c < stNum && stNum > 1, "initEventQueue: requires 0 <= c < stNum and stNum > 1");
    if (c == 0) {
        rt.exe = true;
        rt.E.clear();
        rt.S.clear();
    } else {
        rt.exe = false;
    }
    int a = c;
    if (c == stNum - 1)
        c = 0;
    else
        c = a + 1;
    return c;
}

void twc_push(PatternRuntime& rt, int e, int s)
{
    require(e > 0 && s > 0, "push: requires e > 0 and s > 0");
    if (rt.n() >= rt.capacity)
        throw EngineError("event queue overflow: capacity " + std::to_string(rt.capacity));
    rt.E.push_back(e);
    rt.S.push_back(s);
}

namespace detail
{

PopWitness twc_pop_witness(const PatternRuntime& rt, int e, int r)
{
    require(e > 0 && r > 0, "pop: requires e > 0 and r > 0");
    PopWitness w;
    for (std::size_t i = 0; i < rt.n(); ++i) {
        if (rt.E[i] == e && ((rt.exe && r > rt.S[i]) || (!rt.exe && r < rt.S[i]))) {
            w.v = static_cast<int>(i);
            w.x = true;
        }
    }
    return w;
}

} // namespace detail

bool twc_pop(const PatternRuntime& rt, int e, int r) { return detail::twc_pop_witness(rt, e, r).x; }

bool twc_is_normal_exe(const PatternRuntime& rt) { return rt.exe; }

int ceo_update_exe_info(PatternRuntime& rt, int stNum)
{
    require(rt.t > 0 && stNum > 0, "updateExeInfo: requires t > 0 and stNum > 0");
    int a = 0;
    if (rt.t == stNum)
        a = 1;
    else
        a = rt.t + 1;
    rt.t = a;
    return a;
}

bool ceo_run(const PatternRuntime& rt, int st)
{
    require(rt.t > 0 && st > 0, "run: requires t > 0 and st > 0");
    require(static_cast<std::size_t>(rt.t) <= rt.O.size(), "run: token beyond the execution order");
    return rt.O[static_cast<std::size_t>(rt.t - 1)] == st;
}

} // namespace statepat
