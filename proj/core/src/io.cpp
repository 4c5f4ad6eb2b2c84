#include "skellam/io.hpp"

#include <cstdio>
#include <initializer_list>
#include <set>

namespace skellam {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw SpecError(where + ": expected a JSON object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!names.count(it.key())) throw SpecError(where + ": unknown field '" + it.key() + "'");
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw SpecError(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw SpecError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<double> number_list(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw SpecError(where + ": '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw SpecError(where + ": '" + key + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<RateFunction> side_from_json(const json& j, const char* key) {
  std::vector<RateFunction> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw SpecError(std::string("spec: '") + key + "' must be an array");
  for (const auto& item : j.at(key)) out.push_back(rate_from_json(item));
  return out;
}

}  // namespace

RateFunction rate_from_json(const json& j) {
  reject_unknown(j, {"kind", "params"}, "rate");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw SpecError("rate: missing 'kind'");
  const RateKind kind = rate_kind_from_string(j.at("kind").get<std::string>());
  const json params = j.value("params", json::object());
  const std::string where = "rate params (" + std::string(to_string(kind)) + ")";
  switch (kind) {
    case RateKind::constant:
      reject_unknown(params, {"rate"}, where);
      return RateFunction::constant(number(params, "rate", where));
    case RateKind::weibull:
      reject_unknown(params, {"scale", "shape"}, where);
      return RateFunction::weibull(number(params, "scale", where), number(params, "shape", where));
    case RateKind::gompertz_makeham:
      reject_unknown(params, {"a", "b", "mu"}, where);
      return RateFunction::gompertz_makeham(number(params, "a", where), number(params, "b", where),
                                            number(params, "mu", where));
    case RateKind::tabulated:
      reject_unknown(params, {"times", "values"}, where);
      return RateFunction::tabulated(number_list(params, "times", where),
                                     number_list(params, "values", where));
  }
  throw SpecError("rate: unsupported kind");
}

json to_json(const RateFunction& rf) {
  json params = json::object();
  const auto& p = rf.params();
  switch (rf.kind()) {
    case RateKind::constant: params["rate"] = p[0]; break;
    case RateKind::weibull:
      params["scale"] = p[0];
      params["shape"] = p[1];
      break;
    case RateKind::gompertz_makeham:
      params["a"] = p[0];
      params["b"] = p[1];
      params["mu"] = p[2];
      break;
    case RateKind::tabulated:
      params["times"] = rf.knot_times();
      params["values"] = rf.knot_values();
      break;
  }
  return json{{"kind", std::string(to_string(rf.kind()))}, {"params", params}};
}

ProcessSpec spec_from_json(const json& j) {
  reject_unknown(j, {"variant", "k", "alpha", "up", "down"}, "spec");
  ProcessSpec spec;
  if (j.contains("variant")) {
    if (!j.at("variant").is_string()) throw SpecError("spec: 'variant' must be a string");
    spec.variant = variant_from_string(j.at("variant").get<std::string>());
  }
  spec.up = side_from_json(j, "up");
  spec.down = side_from_json(j, "down");
  if (j.contains("k")) {
    if (!j.at("k").is_number_integer()) throw SpecError("spec: 'k' must be an integer");
    spec.k = j.at("k").get<int>();
  } else {
    spec.k = static_cast<int>(spec.up.size());
  }
  if (j.contains("alpha")) spec.alpha = number(j, "alpha", "spec");
  return spec;
}

json to_json(const ProcessSpec& spec) {
  json up = json::array(), down = json::array();
  for (const auto& rf : spec.up) up.push_back(to_json(rf));
  for (const auto& rf : spec.down) down.push_back(to_json(rf));
  json out{{"variant", std::string(to_string(spec.variant))},
           {"k", spec.k},
           {"alpha", spec.alpha},
           {"up", up}};
  if (!spec.down.empty()) out["down"] = down;
  return out;
}

json to_json(const MomentSummary& m) {
  json out{{"mean", m.mean}, {"variance", m.variance}, {"dispersion_index", m.dispersion_index}};
  if (m.covariance) out["covariance"] = *m.covariance;
  if (m.mean_se) out["mean_se"] = *m.mean_se;
  if (m.variance_se) out["variance_se"] = *m.variance_se;
  if (m.covariance_se) out["covariance_se"] = *m.covariance_se;
  return out;
}

json to_json(const DependenceReport& d) {
  return json{{"theta", d.theta}, {"class", std::string(to_string(d.dependence))}, {"c_of_s", d.c_of_s}};
}

json to_json(const ProbabilityBound& b) {
  return json{{"value", b.value}, {"lower", b.lower}, {"upper", b.upper}};
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace skellam
