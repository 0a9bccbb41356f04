#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace statepat
{

struct SourceSpan
{
    int line = 0;
    int column = 0;
    int length = 0;
};

// ---------------------------------------------------------------------------
// Expressions
//
// One tree type serves model guards, assignment right-hand sides and query
// predicates. State atoms (`Chart.State`) and `imply` are only legal in
// queries; validate_model rejects them inside models.
// ---------------------------------------------------------------------------

enum class UnaryOp
{
    Neg,
    Not,
};

enum class BinaryOp
{
    Mul,
    Add,
    Sub,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    And,
    Or,
    Implies,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct IntLit
{
    std::int64_t value = 0;
};

struct BoolLit
{
    bool value = false;
};

struct VarRef
{
    std::string name;
};

struct StateAtom
{
    std::string chart;
    std::string state;
};

struct UnaryExpr
{
    UnaryOp op;
    ExprPtr operand;
};

struct BinaryExpr
{
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct NativeCall
{
    std::string name;
    std::vector<ExprPtr> args;
};

struct Expr
{
    std::variant<IntLit, BoolLit, VarRef, StateAtom, UnaryExpr, BinaryExpr, NativeCall> node;
    SourceSpan span;
};

ExprPtr make_int(std::int64_t v, SourceSpan span = {});
ExprPtr make_bool(bool v, SourceSpan span = {});
ExprPtr make_var(std::string name, SourceSpan span = {});
ExprPtr make_atom(std::string chart, std::string state, SourceSpan span = {});
ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourceSpan span = {});
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span = {});
ExprPtr make_call(std::string name, std::vector<ExprPtr> args, SourceSpan span = {});

/// Structural equality, spans ignored. Null pointers compare equal to each other.
bool same_expr(const ExprPtr& a, const ExprPtr& b);

const char* to_symbol(BinaryOp op);
const char* to_symbol(UnaryOp op);

// ---------------------------------------------------------------------------
// Actions, transitions, charts
// ---------------------------------------------------------------------------

struct AssignAction
{
    std::string var;
    ExprPtr value;
};

struct RaiseAction
{
    std::string event;
};

struct CallAction
{
    NativeCall call;
};

struct Action
{
    std::variant<AssignAction, RaiseAction, CallAction> node;
    SourceSpan span;
};

struct EventTrigger
{
    std::string event;
};

struct TimeTrigger
{
    std::int64_t seconds = 1;
};

using Trigger = std::variant<std::monostate, EventTrigger, TimeTrigger>;

struct Transition
{
    std::string source;
    std::string target;
    Trigger trigger;
    ExprPtr guard; // null means `true`
    std::vector<Action> actions;
    SourceSpan span;
};

struct State
{
    std::string name;
    SourceSpan span;
};

struct Statechart
{
    int id = 0; // priority; lower runs first
    std::string name;
    bool manager = false;
    std::string initial;
    std::vector<State> states;
    std::vector<Transition> transitions; // declaration order is firing priority
    SourceSpan span;
    SourceSpan initial_span;

    [[nodiscard]] bool has_state(const std::string& s) const;
};

struct EventDecl
{
    std::string name;
    SourceSpan span;
};

struct VarDecl
{
    std::string name;
    std::int64_t min = 0;
    std::int64_t max = 0;
    std::int64_t initial = 0;
    SourceSpan span;
};

enum class NativeType
{
    Int,
    Bool,
    Void,
};

struct NativeDecl
{
    std::string name;
    int arity = 0;
    NativeType result = NativeType::Int;
    SourceSpan span;
};

struct InterfaceDecl
{
    std::vector<EventDecl> in_events;
    std::vector<EventDecl> internal_events;
    std::vector<VarDecl> variables;
    std::optional<std::vector<int>> exe_orders; // CEO order O[], over user-chart indices
    SourceSpan order_span;
};

struct PatternTags
{
    bool twc = false;
    bool ceo = false;
};

struct Model
{
    std::string name;
    InterfaceDecl interface;
    std::vector<Statechart> charts; // ascending priority id
    std::vector<NativeDecl> natives;
    PatternTags patterns;
    SourceSpan span;

    [[nodiscard]] const Statechart* find_chart(const std::string& name) const;
    [[nodiscard]] const VarDecl* find_var(const std::string& name) const;
    [[nodiscard]] bool is_in_event(const std::string& name) const;
    [[nodiscard]] bool is_internal_event(const std::string& name) const;
    /// 1-based position among internal events, 0 if undeclared. Used as the TWC event id.
    [[nodiscard]] int internal_event_id(const std::string& name) const;
    [[nodiscard]] const Statechart* manager() const;
    /// Charts without the manager flag, in priority order.
    [[nodiscard]] std::vector<const Statechart*> user_charts() const;
};

bool operator==(const Model& a, const Model& b);
inline bool operator!=(const Model& a, const Model& b) { return !(a == b); }

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Diagnostic
{
    SourceSpan span;
    std::string message;
};

std::string format_diagnostic(const Diagnostic& d, const std::string& file = {});

/// Returns one diagnostic per violated structural or typing rule; empty when the
/// model can be executed.
std::vector<Diagnostic> validate_model(const Model& m);

/// Signature of a native callable from models carrying the matching pattern tag.
struct BuiltinNative
{
    const char* name;
    int arity;
    NativeType result;
    bool twc; // false: CEO
};

const std::vector<BuiltinNative>& builtin_natives();
const BuiltinNative* find_builtin_native(const std::string& name);

} // namespace statepat
