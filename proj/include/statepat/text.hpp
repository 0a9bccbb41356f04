#pragma once

#include "statepat/model.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace statepat
{

class ParseError : public std::runtime_error
{
public:
    ParseError(SourceSpan span, std::vector<std::string> expected, const std::string& message);
    [[nodiscard]] const SourceSpan& span() const noexcept { return _span; }
    [[nodiscard]] const std::vector<std::string>& expected() const noexcept { return _expected; }

private:
    SourceSpan _span;
    std::vector<std::string> _expected;
};

/// Parses the line-oriented `.scm` format documented in docs/dsl.md. Does not
/// validate; call validate_model on the result.
Model parse_model(std::string_view text);

/// Canonical text form. parse_model(serialize_model(m)) == m for any model
/// that passes validation.
std::string serialize_model(const Model& m);

/// Fully precedence-aware printing: parentheses appear only where needed.
std::string serialize_expr(const ExprPtr& e);

enum class QueryMode
{
    ExistsEventually, // E<> p
    AlwaysGlobally,   // A[] p
};

struct Query
{
    QueryMode mode = QueryMode::AlwaysGlobally;
    ExprPtr predicate;
    std::string text; // source text, trimmed
};

Query parse_query(std::string_view text);
std::string serialize_query(const Query& q);

/// One formula per line; blank lines and `#` comments skipped. Spans in the
/// returned predicates are relative to their own line, with `line` set to the
/// file line.
std::vector<Query> parse_query_file(std::string_view text);

/// Diagnostics for atoms and variables in `q` that do not resolve against `m`,
/// or a predicate that is not boolean.
std::vector<Diagnostic> validate_query(const Model& m, const Query& q);

} // namespace statepat
