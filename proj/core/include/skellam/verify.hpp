#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "skellam/pmf.hpp"
#include "skellam/rates.hpp"

namespace skellam {

enum class Verdict { pass, fail, discrepancy_documented };
std::string_view to_string(Verdict v);

struct VerificationReport {
  std::string name;
  double analytic = 0.0;
  double estimate = 0.0;
  std::optional<double> std_error;
  double tolerance = 0.0;
  Verdict verdict = Verdict::fail;
  nlohmann::json metadata = nlohmann::json::object();
};

// All (x_1..x_k) with sum_j j x_j = n, x_j >= 0.
struct CompositionSet {
  int k = 1;
  long n = 0;
  std::vector<std::vector<long>> tuples;
};

CompositionSet enumerate_compositions(int k, long n);

// Brute-force counting pmf summed over compositions; n_max is capped at 40.
PmfTable ngcp_pmf_oracle(std::span<const RateFunction> up, double t, long n_max);

struct CheckConfig {
  std::optional<ProcessSpec> spec;  // absent: the check's default spec built from k
  int k = 0;                // 0: the check's default k
  std::size_t samples = 0;  // 0: the check's default sample size
  std::uint64_t seed = 0;
};

// lambda_j = 1.2 / j and mu_j = 0.8 / j, constant.
ProcessSpec default_verify_spec(int k, Variant variant = Variant::NGSP);

const std::vector<std::string>& required_checks();
const std::vector<std::string>& check_catalog();

VerificationReport run_check(std::string_view name, const CheckConfig& config = {});
// Every catalog entry in catalog order; checks run concurrently.
std::vector<VerificationReport> run_all_checks(const CheckConfig& config = {});

nlohmann::json to_json(const VerificationReport& report);
std::string format_table(const std::vector<VerificationReport>& reports);
bool any_failed(const std::vector<VerificationReport>& reports);

}  // namespace skellam
