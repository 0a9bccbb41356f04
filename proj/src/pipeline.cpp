#include "statepat/pipeline.hpp"
#include "statepat/errors.hpp"
#include "statepat/text.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace statepat
{

std::optional<PatternChoice> parse_pattern_choice(const std::string& s)
{
    if (s.empty() || s == "none")
        return PatternChoice::None;
    if (s == "twc")
        return PatternChoice::Twc;
    if (s == "ceo")
        return PatternChoice::Ceo;
    if (s == "both")
        return PatternChoice::Both;
    return std::nullopt;
}

std::vector<int> parse_order(const Model& m, const std::string& spec)
{
    const auto users = m.user_charts();
    std::vector<int> out;
    std::stringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw PatternError("empty entry in execution order '" + spec + "'");
        item = item.substr(b, e - b + 1);
        int v = 0;
        auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec == std::errc{} && p == item.data() + item.size()) {
            out.push_back(v);
            continue;
        }
        int found = 0;
        for (std::size_t i = 0; i < users.size(); ++i)
            if (users[i]->name == item)
                found = static_cast<int>(i) + 1;
        if (!found)
            throw PatternError("'" + item + "' is not a chart of this model");
        out.push_back(found);
    }
    return out;
}

Model prepare_model(const Model& m, PatternChoice pattern, const std::optional<std::vector<int>>& order,
                    TransformReport* report)
{
    auto diags = validate_model(m);
    if (!diags.empty())
        throw ValidationError(std::move(diags));
    Model out = order ? with_order(m, *order) : m;
    switch (pattern) {
    case PatternChoice::None: break;
    case PatternChoice::Twc: out = apply_twc(out, report); break;
    case PatternChoice::Ceo: out = apply_ceo(out, report); break;
    case PatternChoice::Both: out = apply_both(out, report); break;
    }
    return out;
}

Model load_model(std::string_view text, PatternChoice pattern, const std::optional<std::string>& order,
                 TransformReport* report)
{
    auto m = parse_model(text);
    std::optional<std::vector<int>> ids;
    if (order)
        ids = parse_order(m, *order);
    return prepare_model(m, pattern, ids, report);
}

} // namespace statepat
