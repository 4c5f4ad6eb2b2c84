#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "skellam/verify.hpp"

using namespace skellam;

TEST_CASE("compositions") {
  const CompositionSet c = enumerate_compositions(3, 6);
  CHECK(c.tuples.size() == 7);
  std::set<std::vector<long>> unique(c.tuples.begin(), c.tuples.end());
  CHECK(unique.size() == 7);
  for (const auto& x : c.tuples) {
    REQUIRE(x.size() == 3);
    CHECK(x[0] + 2 * x[1] + 3 * x[2] == 6);
  }
  CHECK(enumerate_compositions(1, 9).tuples.size() == 1);
  CHECK(enumerate_compositions(4, 0).tuples.size() == 1);
  // partitions of 10 into parts of size at most 10
  CHECK(enumerate_compositions(10, 10).tuples.size() == 42);
  CHECK_THROWS(enumerate_compositions(0, 3));
}

TEST_CASE("enumeration oracle") {
  const std::vector<RateFunction> up{RateFunction::constant(0.4)};
  const PmfTable p = ngcp_pmf_oracle(up, 2.0, 10);
  for (long n = 0; n <= 10; ++n)
    CHECK(p.at(n) == doctest::Approx(std::exp(n * std::log(0.8) - 0.8 - std::lgamma(n + 1.0))).epsilon(1e-13));
  CHECK_THROWS(ngcp_pmf_oracle(up, 1.0, 41));
}

TEST_CASE("catalog") {
  const auto& all = check_catalog();
  for (const auto& name : required_checks())
    CHECK(std::find(all.begin(), all.end(), name) != all.end());
  CHECK_THROWS(run_check("no_such_check"));
}

TEST_CASE("deterministic checks pass") {
  for (const char* name : {"recurrence", "ngcp_oracle", "weighted_sum"}) {
    const VerificationReport r = run_check(name);
    CHECK_MESSAGE(r.verdict == Verdict::pass, name);
    CHECK(r.estimate <= r.tolerance);
  }
  CHECK(run_check("bessel_vs_convolution", CheckConfig{{}, 1, 0, 0}).verdict == Verdict::pass);
}

TEST_CASE("Bessel form is documented, not passed, for k > 1") {
  const VerificationReport r = run_check("bessel_vs_convolution", CheckConfig{{}, 2, 0, 0});
  CHECK(r.verdict == Verdict::discrepancy_documented);
  CHECK(r.metadata.at("max_gap").get<double>() > 0.0);
}

TEST_CASE("sampled checks are reproducible") {
  const CheckConfig cfg{{}, 0, 5000, 17};
  const VerificationReport a = run_check("moments", cfg);
  const VerificationReport b = run_check("moments", cfg);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
  CHECK(a.metadata.at("seed") == b.metadata.at("seed"));
}

TEST_CASE("spec override reaches the check") {
  ProcessSpec spec;
  spec.variant = Variant::NGSP;
  spec.k = 1;
  spec.up = {RateFunction::constant(2.0)};
  spec.down = {RateFunction::constant(0.5)};
  const VerificationReport r = run_check("moments", CheckConfig{spec, 0, 5000, 3});
  CHECK(r.analytic == doctest::Approx(1.5));
}

TEST_CASE("report serialization and table") {
  VerificationReport r;
  r.name = "demo";
  r.analytic = 1.0;
  r.estimate = 1.1;
  r.std_error = 0.05;
  r.tolerance = 0.15;
  r.verdict = Verdict::pass;
  const auto j = to_json(r);
  CHECK(j.at("name") == "demo");
  CHECK(j.at("verdict") == "pass");
  CHECK(j.at("std_error").get<double>() == 0.05);
  const std::string table = format_table({r});
  CHECK(table.find("demo") != std::string::npos);
  CHECK_FALSE(any_failed({r}));
  r.verdict = Verdict::fail;
  CHECK(any_failed({r}));
  r.verdict = Verdict::discrepancy_documented;
  CHECK_FALSE(any_failed({r}));
  CHECK(to_string(Verdict::discrepancy_documented) == "discrepancy_documented");
}
