#pragma once

#include "statepat/model.hpp"
#include "statepat/pattern_runtime.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace statepat
{

using NativeFn = std::function<std::int64_t(std::span<const std::int64_t>)>;

/// User-declared natives. TWC.* and CEO.* are bound by the engine itself.
class NativeRegistry
{
public:
    void bind(const std::string& name, NativeFn fn) { _fns[name] = std::move(fn); }
    [[nodiscard]] const NativeFn* find(const std::string& name) const;

private:
    std::map<std::string, NativeFn> _fns;
};

/// Snapshot at a timed-step boundary. The per-cycle raised-event set is local to
/// run_cycle and always empty here.
struct RuntimeState
{
    std::vector<int> active;          // state index per chart, priority order
    std::vector<std::int64_t> vars;   // declaration order
    std::vector<std::int64_t> timers; // steps spent in the active state
    PatternRuntime pattern;
    std::int64_t clock = 0;

    bool operator==(const RuntimeState&) const = default;
};

/// In-event selection for one step, indexed like Model::interface.in_events.
/// An empty set offers no in-events.
using EnvSet = std::vector<bool>;

struct ChartRecord
{
    int chart = 0;       // index into the model's charts
    int transition = -1; // index into the chart's transitions, -1 when nothing fired
    std::vector<int> raised; // internal event indices, raised or pushed
    std::vector<std::int64_t> vars_after;
};

struct CycleRecord
{
    int phase = 0; // 0 is the normal cycle; TWC logic cycles are 1..N-1
    int sub = 0;   // CEO token sub-cycle, 0 without CEO
    std::vector<ChartRecord> charts;

    [[nodiscard]] bool normal() const { return phase == 0; }
};

struct StepTrace
{
    std::int64_t step = 0; // 1-based; equals the clock after the step
    std::vector<std::string> injected;
    std::vector<CycleRecord> cycles;
};

namespace detail
{
struct CompiledModel;
}

/// Compiled, immutable form of a validated model. Thread-safe for concurrent
/// use with distinct RuntimeStates.
class Engine
{
public:
    /// Throws ValidationError for an invalid model.
    explicit Engine(Model m, NativeRegistry natives = {});
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    [[nodiscard]] const Model& model() const noexcept { return _model; }
    [[nodiscard]] RuntimeState initial_state() const;

    /// One normal cycle, the pattern-mandated logic cycles, then clock and timers
    /// advance. Pass `trace` to record what fired.
    void timed_step(RuntimeState& s, const EnvSet& env, StepTrace* trace = nullptr) const;

    /// One dispatch over all charts. `phase` and `sub` select the schedule slot;
    /// env is offered only when phase == 0.
    CycleRecord run_cycle(RuntimeState& s, const EnvSet& env, int phase = 0, int sub = 0) const;

    [[nodiscard]] int phases() const noexcept;
    [[nodiscard]] int subcycles() const noexcept;

    [[nodiscard]] int in_event_index(const std::string& name) const; // -1 if undeclared
    [[nodiscard]] EnvSet env_of(const std::vector<std::string>& names) const;
    [[nodiscard]] std::vector<std::string> env_names(const EnvSet& env) const;

    /// Largest time trigger per chart; timers beyond it are indistinguishable.
    [[nodiscard]] const std::vector<std::int64_t>& timer_caps() const noexcept;

    /// Compiles a query predicate. Throws ValidationError when it does not
    /// resolve against this model.
    class Predicate;
    [[nodiscard]] Predicate compile_predicate(const ExprPtr& e) const;

    std::string describe_state(const RuntimeState& s) const;

private:
    Model _model;
    std::unique_ptr<detail::CompiledModel> _c;
    friend class Predicate;
};

class Engine::Predicate
{
public:
    Predicate();
    ~Predicate();
    Predicate(Predicate&&) noexcept;
    Predicate& operator=(Predicate&&) noexcept;
    [[nodiscard]] bool operator()(const RuntimeState& s) const;

private:
    friend class Engine;
    struct Impl;
    std::unique_ptr<Impl> _impl;
};

/// One line per chart per cycle:
/// `step=<k> cycle=<normal|logic:i> [sub=<j>] chart=<name> fired=<src->dst|-> raised=[...] vars={...}`.
std::string format_step(const Engine& e, const StepTrace& t);

/// Interactive wrapper: pending injections plus the current state.
class Session
{
public:
    explicit Session(std::shared_ptr<const Engine> engine);

    /// Queues an in-event for the next step. Re-injecting is a no-op. Throws
    /// EngineError for an undeclared in-event.
    void inject(const std::string& event);
    StepTrace step();

    [[nodiscard]] const RuntimeState& state() const noexcept { return _state; }
    [[nodiscard]] const Engine& engine() const noexcept { return *_engine; }
    [[nodiscard]] std::vector<std::string> pending() const;

private:
    std::shared_ptr<const Engine> _engine;
    RuntimeState _state;
    EnvSet _pending;
};

} // namespace statepat
