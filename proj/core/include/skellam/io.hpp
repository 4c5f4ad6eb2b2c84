#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "skellam/analytics.hpp"
#include "skellam/rates.hpp"

namespace skellam {

// {"kind": "weibull", "params": {"scale": 2, "shape": 1}}; unknown fields are rejected.
RateFunction rate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RateFunction& rf);

// {"variant": "ngsp", "k": 2, "alpha": 1, "up": [...], "down": [...]}
ProcessSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProcessSpec& spec);

nlohmann::json to_json(const MomentSummary& m);
nlohmann::json to_json(const DependenceReport& d);
nlohmann::json to_json(const ProbabilityBound& b);

// Shortest text that round-trips the double.
std::string format_number(double x);

}  // namespace skellam
