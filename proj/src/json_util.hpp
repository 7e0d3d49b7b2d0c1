#pragma once

#include <json.hpp>

#include <stdexcept>

#include "xprobe/taxonomy.hpp"

namespace xprobe::detail {

inline nlohmann::json param_to_json(const ParamValue& v) {
    return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

inline ParamValue param_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw std::runtime_error("parameter value must be a number or a string");
}

inline nlohmann::json params_to_json(const ParamList& params) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [name, v] : params) obj[name] = param_to_json(v);
    return obj;
}

}  // namespace xprobe::detail
