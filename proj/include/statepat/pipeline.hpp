#pragma once

#include "statepat/patterns.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace statepat
{

enum class PatternChoice
{
    None,
    Twc,
    Ceo,
    Both,
};

std::optional<PatternChoice> parse_pattern_choice(const std::string& s);
[[nodiscard]] inline bool uses_ceo(PatternChoice p) { return p == PatternChoice::Ceo || p == PatternChoice::Both; }

/// `2,1` or `Ventilator,Laser`: user chart indices or names, comma separated.
/// Throws PatternError when an entry does not name a user chart.
std::vector<int> parse_order(const Model& m, const std::string& spec);

/// Validates `m` (ValidationError), then applies the order override and the
/// selected pattern (PatternError).
Model prepare_model(const Model& m, PatternChoice pattern, const std::optional<std::vector<int>>& order = {},
                    TransformReport* report = nullptr);

/// parse_model + prepare_model.
Model load_model(std::string_view text, PatternChoice pattern = PatternChoice::None,
                 const std::optional<std::string>& order = {}, TransformReport* report = nullptr);

} // namespace statepat
