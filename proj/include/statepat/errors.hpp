#pragma once

#include "statepat/model.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace statepat
{

/// A model failed validate_model where a valid one was required.
class ValidationError : public std::runtime_error
{
public:
    explicit ValidationError(std::vector<Diagnostic> diagnostics);
    [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const noexcept { return _diagnostics; }

private:
    std::vector<Diagnostic> _diagnostics;
};

/// A pattern transformer was applied to a model outside its precondition.
class PatternError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A pattern runtime function was called outside its Hoare precondition.
class ContractError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/// Execution-time failure (unregistered native, queue overflow, arithmetic overflow).
class EngineError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Exploration hit the configured state limit; no verdict was produced.
class ResourceLimitError : public std::runtime_error
{
public:
    ResourceLimitError(std::size_t limit, std::size_t explored);
    [[nodiscard]] std::size_t limit() const noexcept { return _limit; }
    [[nodiscard]] std::size_t states_explored() const noexcept { return _explored; }

private:
    std::size_t _limit;
    std::size_t _explored;
};

} // namespace statepat
