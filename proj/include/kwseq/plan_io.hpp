#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kwseq/plan.hpp"

namespace kwseq {

inline constexpr const char* plan_schema_version = "kw-plan/1";

/// Summary numbers stored next to the action table.
struct PlanCharacteristics {
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double beta = std::numeric_limits<double>::quiet_NaN();
    double asn_at_star = std::numeric_limits<double>::quiet_NaN();
    int q99 = 0;
    double delta = std::numeric_limits<double>::quiet_NaN();
    double lagrangian_value = std::numeric_limits<double>::quiet_NaN();
};

struct PlanDocument {
    Plan plan;
    PlanCharacteristics characteristics;
    /// Solver status ("solved", "nearest", ...); absent for hand-made documents.
    std::optional<std::string> status;
};

class PlanFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using ordered_json = nlohmann::ordered_json;

/// NaN has no JSON literal; it is written as null.
inline ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

inline double read_number(const ordered_json& obj, const char* key, bool nullable = false) {
    if (!obj.contains(key)) throw PlanFormatError(std::string("missing field '") + key + "'");
    const auto& v = obj.at(key);
    if (v.is_null() && nullable) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw PlanFormatError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

inline int read_int(const ordered_json& obj, const char* key) {
    if (!obj.contains(key)) throw PlanFormatError(std::string("missing field '") + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw PlanFormatError(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
}

inline const ordered_json& read_object(const ordered_json& obj, const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_object()) {
        throw PlanFormatError(std::string("field '") + key + "' must be an object");
    }
    return obj.at(key);
}

}  // namespace detail

inline std::string serialize_plan(const PlanDocument& doc) {
    using detail::number_or_null;
    const Plan& p = doc.plan;
    const auto& cfg = p.config();
    detail::ordered_json j;
    j["schema_version"] = plan_schema_version;
    j["hypotheses"] = {{"theta0", cfg.hyp.theta0()}, {"theta1", cfg.hyp.theta1()}};
    j["theta_star"] = cfg.theta_star;
    j["lambda0"] = cfg.lambda0;
    j["lambda1"] = cfg.lambda1;
    j["horizon"] = p.horizon();
    j["effective_horizon"] = p.effective_horizon();
    if (doc.status) j["status"] = *doc.status;
    const auto& c = doc.characteristics;
    j["characteristics"] = {{"alpha", number_or_null(c.alpha)},
                            {"beta", number_or_null(c.beta)},
                            {"asn_at_star", number_or_null(c.asn_at_star)},
                            {"q99", c.q99},
                            {"delta", number_or_null(c.delta)},
                            {"lagrangian_value", number_or_null(c.lagrangian_value)}};
    auto rows = detail::ordered_json::array();
    for (int n = 1; n <= p.horizon(); ++n) {
        std::string row(static_cast<std::size_t>(n) + 1, 'C');
        for (int s = 0; s <= n; ++s) row[static_cast<std::size_t>(s)] = action_code(p.action(n, s));
        rows.push_back(std::move(row));
    }
    j["actions"] = std::move(rows);
    return j.dump(1) + "\n";
}

/// Parses and validates a plan document; PlanFormatError names the offending field.
inline PlanDocument parse_plan(const std::string& text) {
    detail::ordered_json j;
    try {
        j = detail::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw PlanFormatError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw PlanFormatError("plan document must be a JSON object");
    if (!j.contains("schema_version") || !j.at("schema_version").is_string()) {
        throw PlanFormatError("missing field 'schema_version'");
    }
    if (j.at("schema_version").get<std::string>() != plan_schema_version) {
        throw PlanFormatError("unsupported schema_version '" + j.at("schema_version").get<std::string>() + "'");
    }
    const auto& hj = detail::read_object(j, "hypotheses");
    const int horizon = detail::read_int(j, "horizon");
    if (horizon < 1) throw PlanFormatError("field 'horizon' must be at least 1");

    std::optional<LagrangeConfig> cfg;
    try {
        cfg.emplace(Hypotheses(detail::read_number(hj, "theta0"), detail::read_number(hj, "theta1")),
                    detail::read_number(j, "theta_star"), detail::read_number(j, "lambda0"),
                    detail::read_number(j, "lambda1"));
    } catch (const PlanFormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw PlanFormatError(std::string("invalid parameters: ") + e.what());
    }

    if (!j.contains("actions") || !j.at("actions").is_array()) {
        throw PlanFormatError("field 'actions' must be an array of strings");
    }
    const auto& rows = j.at("actions");
    if (rows.size() != static_cast<std::size_t>(horizon)) {
        throw PlanFormatError("field 'actions' has " + std::to_string(rows.size()) + " rows, expected horizon " +
                              std::to_string(horizon));
    }
    std::vector<Action> actions;
    actions.reserve(triangle_size(horizon));
    for (int n = 1; n <= horizon; ++n) {
        const auto& r = rows[static_cast<std::size_t>(n - 1)];
        if (!r.is_string()) throw PlanFormatError("actions row " + std::to_string(n) + " must be a string");
        const auto& str = r.get_ref<const std::string&>();
        if (str.size() != static_cast<std::size_t>(n) + 1) {
            throw PlanFormatError("actions row " + std::to_string(n) + " has " + std::to_string(str.size()) +
                                  " characters, expected " + std::to_string(n + 1));
        }
        for (char ch : str) {
            if (ch != 'C' && ch != 'A' && ch != 'R') {
                throw PlanFormatError("actions row " + std::to_string(n) + " contains '" + std::string(1, ch) +
                                      "', expected one of C, A, R");
            }
            actions.push_back(action_from_code(ch));
        }
    }

    const auto& cj = detail::read_object(j, "characteristics");
    PlanCharacteristics c;
    c.alpha = detail::read_number(cj, "alpha", true);
    c.beta = detail::read_number(cj, "beta", true);
    c.asn_at_star = detail::read_number(cj, "asn_at_star", true);
    c.q99 = detail::read_int(cj, "q99");
    c.delta = detail::read_number(cj, "delta", true);
    c.lagrangian_value = detail::read_number(cj, "lagrangian_value", true);

    std::optional<std::string> status;
    if (j.contains("status")) {
        if (!j.at("status").is_string()) throw PlanFormatError("field 'status' must be a string");
        status = j.at("status").get<std::string>();
    }

    std::optional<Plan> plan;
    try {
        plan.emplace(*cfg, horizon, std::move(actions), c.lagrangian_value);
    } catch (const std::exception& e) {
        throw PlanFormatError(std::string("invalid action table: ") + e.what());
    }
    const int eff = detail::read_int(j, "effective_horizon");
    if (eff != plan->effective_horizon()) {
        throw PlanFormatError("field 'effective_horizon' is " + std::to_string(eff) + " but the actions give " +
                              std::to_string(plan->effective_horizon()));
    }
    return {std::move(*plan), c, std::move(status)};
}

inline PlanDocument read_plan_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PlanFormatError("cannot open plan file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_plan(ss.str());
}

inline void write_plan_file(const std::string& path, const PlanDocument& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write plan file '" + path + "'");
    out << serialize_plan(doc);
    if (!out) throw std::runtime_error("error writing plan file '" + path + "'");
}

}  // namespace kwseq
