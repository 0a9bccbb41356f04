#pragma once

#include "statepat/model.hpp"

#include <string>
#include <vector>

namespace statepat
{

struct TransformReport
{
    int raises_rewritten = 0;   // raise e -> TWC.push(id, sender)
    int triggers_rewritten = 0; // on e -> TWC.pop(id, receiver) in the guard
    int normal_exe_guards = 0;  // G -> G && TWC.isNormalExe()
    int order_guards = 0;       // G -> G && CEO.run(index)
    std::vector<std::string> notes;
};

/// Names the transformers introduce; a model already using them is rejected.
inline constexpr const char* kManagerName = "Manager";
inline constexpr const char* kCycleVar = "cycleNum";
inline constexpr const char* kTokenVar = "exeIndex";

/// Two-way communication. Requires a valid, untagged model with at least two
/// charts and no manager. Adds the Manager at priority 1 and shifts user chart
/// priorities by one.
Model apply_twc(const Model& m, TransformReport* report = nullptr);

/// Configurable execution order. Requires a valid model without `pattern ceo`.
/// Uses the declared `order`, defaulting to declaration order. Extends the TWC
/// Manager when present.
Model apply_ceo(const Model& m, TransformReport* report = nullptr);

/// apply_twc followed by apply_ceo.
Model apply_both(const Model& m, TransformReport* report = nullptr);

/// Returns `m` with its execution order replaced. Throws PatternError when the
/// order is not a permutation of the user chart indices.
Model with_order(const Model& m, const std::vector<int>& order);

} // namespace statepat
