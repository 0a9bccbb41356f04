#pragma once

#include "statepat/model.hpp"

#include <optional>
#include <vector>

namespace statepat::detail
{

enum class ValueType
{
    Int,
    Bool,
};

enum class ExprContext
{
    Model, // guards and assignments: natives allowed, no state atoms, no `imply`
    Query, // predicates: state atoms and `imply` allowed, no natives
};

/// Types `e`, appending a diagnostic for every rule it breaks. Returns the type
/// when it could be determined (even if sub-terms had errors).
std::optional<ValueType> type_of(const Model& m, const Expr& e, ExprContext ctx, std::vector<Diagnostic>& out);

} // namespace statepat::detail
