#pragma once

#include "statepat/engine.hpp"
#include "statepat/pipeline.hpp"
#include "statepat/text.hpp"
#include "statepat/verifier.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace statepat::testing
{

inline std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string model_path(const std::string& name) { return std::string(STATEPAT_MODELS_DIR) + "/" + name; }

inline std::string model_text(const std::string& name) { return read_text(model_path(name)); }

inline Model load(const std::string& name, PatternChoice p = PatternChoice::None,
                  const std::optional<std::string>& order = {})
{
    return load_model(model_text(name), p, order);
}

inline Verdict verdict(const Engine& e, const std::string& query, EnvPolicy policy = EnvPolicy::OneOrNone)
{
    ExploreOptions o;
    o.policy = policy;
    return check_query(e, parse_query(query), o).verdict;
}

inline std::string active_name(const Engine& e, const RuntimeState& s, const std::string& chart)
{
    const auto& charts = e.model().charts;
    for (std::size_t i = 0; i < charts.size(); ++i)
        if (charts[i].name == chart)
            return charts[i].states[static_cast<std::size_t>(s.active[i])].name;
    return {};
}

inline std::int64_t var_value(const Engine& e, const RuntimeState& s, const std::string& var)
{
    const auto& vars = e.model().interface.variables;
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == var)
            return s.vars[i];
    return INT64_MIN;
}

} // namespace statepat::testing
