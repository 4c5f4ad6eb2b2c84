#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skellam/analytics.hpp"
#include "skellam/io.hpp"
#include "skellam/parallel.hpp"
#include "skellam/pmf.hpp"
#include "skellam/samplers.hpp"
#include "skellam/tickdata.hpp"
#include "skellam/verify.hpp"

#ifndef SKELLAM_VERSION
#define SKELLAM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace skellam;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerification = 2;

struct SpecFlags {
  std::string file;
  std::string variant;
  std::optional<double> alpha;
  std::vector<double> up;
  std::vector<double> down;
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f) {
  cmd->add_option("--spec", f.file, "Process spec JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--variant", f.variant, "Variant name (overrides the file), e.g. ngsp, nhgfsp");
  cmd->add_option("--alpha", f.alpha, "Fractional index in (0,1] (overrides the file)");
  cmd->add_option("--up", f.up, "Constant up rates lambda_1..lambda_k, per unit time")->delimiter(',');
  cmd->add_option("--down", f.down, "Constant down rates mu_1..mu_k, per unit time")->delimiter(',');
}

ProcessSpec resolve_spec(const SpecFlags& f) {
  ProcessSpec spec;
  bool have = false;
  if (!f.file.empty()) {
    std::ifstream in(f.file);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw SpecError("cannot parse " + f.file + ": " + e.what());
    }
    spec = spec_from_json(j);
    have = true;
  }
  if (!f.up.empty()) {
    spec.up.clear();
    for (double r : f.up) spec.up.push_back(RateFunction::constant(r));
    spec.k = static_cast<int>(spec.up.size());
    if (f.down.empty() && !have) spec.down.clear();
    have = true;
  }
  if (!f.down.empty()) {
    spec.down.clear();
    for (double r : f.down) spec.down.push_back(RateFunction::constant(r));
    have = true;
  }
  if (!have) throw SpecError("a spec is required: pass --spec FILE or --up/--down rates");
  if (!f.variant.empty()) spec.variant = variant_from_string(f.variant);
  else if (f.file.empty()) spec.variant = spec.down.empty() ? Variant::NGCP : Variant::NGSP;
  if (f.alpha) spec.alpha = *f.alpha;
  spec.validate();
  return spec;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SKELLAM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw SpecError("SKELLAM_SEED must be an unsigned integer");
    }
  }
  return 0;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- simulate ---------------------------------------------------------------------------------

struct SimulateArgs {
  SpecFlags spec;
  double t_end = 1.0;
  std::size_t paths = 1;
  std::uint64_t seed = 0;
  std::string out = ".";
  bool paper_exact = false;
  double h = 0.0;
  std::string ngsp_method = "thinning";
};

std::string path_csv(const SamplePath& p) {
  std::string s = "t,state\n0,0\n";
  for (std::size_t i = 0; i < p.times.size(); ++i)
    s += format_number(p.times[i]) + "," + std::to_string(p.states[i]) + "\n";
  return s;
}

int cmd_simulate(const SimulateArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  const ProcessSpec spec = resolve_spec(a.spec);
  if (!(a.t_end >= 0.0)) throw SpecError("--t-end must be nonnegative");
  SamplerOptions opts;
  opts.paper_exact = a.paper_exact;
  opts.h = a.h;
  opts.ngsp_method = a.ngsp_method == "paper" ? NgspMethod::paper : NgspMethod::thinning;
  fs::create_directories(a.out);
  json files = json::array();
  if (spec.variant == Variant::RUN_AVG_GCP || spec.variant == Variant::RUN_AVG_GSP) {
    const auto draws = farm(a.paths, [&](std::size_t i) {
      RngStream rng(a.seed, i);
      return sample_running_avg(spec, a.t_end, rng);
    });
    std::string csv = "path,running_average\n";
    for (std::size_t i = 0; i < draws.size(); ++i) csv += std::to_string(i) + "," + format_number(draws[i]) + "\n";
    write_text((fs::path(a.out) / "running_average.csv").string(), csv);
    files.push_back("running_average.csv");
  } else {
    const auto csvs = farm(a.paths, [&](std::size_t i) {
      RngStream rng(a.seed, i);
      return path_csv(sample_path(spec, a.t_end, rng, opts));
    });
    for (std::size_t i = 0; i < csvs.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "path_%05zu.csv", i);
      write_text((fs::path(a.out) / name).string(), csvs[i]);
      files.push_back(name);
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest{{"version", SKELLAM_VERSION},
                {"command", "simulate"},
                {"spec", to_json(spec)},
                {"seed", a.seed},
                {"t_end", a.t_end},
                {"paths", a.paths},
                {"paper_exact", a.paper_exact},
                {"ngsp_method", a.ngsp_method},
                {"files", files},
                {"wall_time_seconds", wall}};
  if (a.h > 0.0) manifest["h"] = a.h;
  write_text((fs::path(a.out) / "manifest.json").string(), dump(manifest));
  return kExitOk;
}

// ---- pmf ----------------------------------------------------------------------------------------

struct PmfArgs {
  SpecFlags spec;
  std::vector<double> times{1.0};
  std::string backend;
  std::optional<long> n_min, n_max;
  std::string out = "-";
};

int cmd_pmf(const PmfArgs& a) {
  const ProcessSpec spec = resolve_spec(a.spec);
  std::optional<PmfBackend> backend;
  if (!a.backend.empty()) backend = pmf_backend_from_string(a.backend);
  if (a.out != "-") fs::create_directories(a.out);
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const double t = a.times[i];
    long lo = 0, hi = 0;
    if (a.n_min && a.n_max) {
      lo = *a.n_min;
      hi = *a.n_max;
    } else {
      const MomentSummary m = marginal_moments(spec, t, {}, McControl{4000, 1, 0.0});
      const long half = static_cast<long>(std::ceil(std::fabs(m.mean) + 12.0 * std::sqrt(m.variance) + 10.0 * spec.k));
      lo = a.n_min.value_or(spec.down.empty() ? 0 : -half);
      hi = a.n_max.value_or(half);
    }
    const PmfTable table = marginal_pmf(spec, t, lo, hi, backend);
    std::ostringstream os;
    write_csv(os, table);
    if (a.out == "-") {
      std::cout << os.str();
    } else {
      char name[32];
      std::snprintf(name, sizeof name, "pmf_%03zu.csv", i);
      write_text((fs::path(a.out) / name).string(), os.str());
    }
  }
  return kExitOk;
}

// ---- moments / classify / hitting -----------------------------------------------------------

struct MomentsArgs {
  SpecFlags spec;
  double t = 1.0;
  std::optional<double> s;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  std::string out = "-";
};

int cmd_moments(const MomentsArgs& a) {
  const ProcessSpec spec = resolve_spec(a.spec);
  const MomentSummary m = marginal_moments(spec, a.t, a.s, McControl{a.samples, a.seed, 0.0});
  json j = to_json(m);
  j["t"] = a.t;
  if (a.s) j["s"] = *a.s;
  j["variant"] = std::string(to_string(spec.variant));
  write_text(a.out, dump(j));
  return kExitOk;
}

struct ClassifyArgs {
  SpecFlags spec;
  double s = 1.0;
  std::string out = "-";
};

int cmd_classify(const ClassifyArgs& a) {
  const ProcessSpec spec = resolve_spec(a.spec);
  DependenceReport rep;
  switch (spec.variant) {
    case Variant::NHGFSP: rep = classify_dependence_nhgfsp(spec, a.s); break;
    case Variant::RUN_AVG_GCP:
    case Variant::RUN_AVG_GSP: rep = classify_dependence_runavg(spec, a.s); break;
    case Variant::NGSP:
    case Variant::GSP:
    case Variant::NGCP:
    case Variant::GCP: rep = classify_dependence_ngsp(spec, a.s); break;
    default: throw SpecError("classify supports ngsp, nhgfsp and running-average variants");
  }
  json j = to_json(rep);
  j["s"] = a.s;
  write_text(a.out, dump(j));
  return kExitOk;
}

struct HittingArgs {
  SpecFlags spec;
  long n = 1;
  double t = 1.0;
  std::string backend = "convolution";
  std::string out = "-";
};

int cmd_hitting(const HittingArgs& a) {
  const ProcessSpec spec = resolve_spec(a.spec);
  const PmfBackend b = pmf_backend_from_string(a.backend);
  json j{{"n", a.n},
         {"t", a.t},
         {"backend", a.backend},
         {"arrival_time_cdf", to_json(arrival_time_cdf(spec, a.n, a.t, b))},
         {"first_passage_survival", to_json(first_passage_survival(spec, a.n, a.t, b))}};
  write_text(a.out, dump(j));
  return kExitOk;
}

// ---- verify ----------------------------------------------------------------------------------

struct VerifyArgs {
  std::vector<std::string> checks;
  bool all = false;
  bool list = false;
  int k = 0;
  std::string spec_file;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out = "-";
};

int cmd_verify(const VerifyArgs& a) {
  if (a.list) {
    for (const auto& name : check_catalog()) std::cout << name << '\n';
    return kExitOk;
  }
  CheckConfig cfg;
  cfg.k = a.k;
  cfg.samples = a.samples;
  cfg.seed = a.seed;
  if (!a.spec_file.empty()) {
    SpecFlags f;
    f.file = a.spec_file;
    cfg.spec = resolve_spec(f);
  }
  std::vector<VerificationReport> reports;
  if (a.all) {
    reports = run_all_checks(cfg);
  } else {
    if (a.checks.empty()) throw CLI::ValidationError("verify", "pass --check NAME or --all");
    for (const auto& name : a.checks) reports.push_back(run_check(name, cfg));
  }
  if (a.format == "table") {
    write_text(a.out, format_table(reports));
  } else {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    write_text(a.out, dump(arr));
  }
  return any_failed(reports) ? kExitVerification : kExitOk;
}

// ---- tick ------------------------------------------------------------------------------------

struct TickArgs {
  std::string input;
  SpecFlags spec;
  double tick_size = 1e-4;
  double t_end = 1000.0;
  double first_price = 100.0;
  double noise = 2.0;
  std::uint64_t seed = 0;
  std::string filtered_out;
  std::string out = "-";
};

json fit_series(const JumpSeries& s) {
  json j{{"events", s.event_times.size()}, {"interarrivals", s.interarrivals.size()}};
  if (s.interarrivals.size() < kMinFitSamples) {
    j["fits"] = nullptr;
    j["note"] = "fewer than " + std::to_string(kMinFitSamples) + " inter-arrival times";
    return j;
  }
  j["fits"] = json::array({to_json(fit_exponential(s.interarrivals)), to_json(fit_mittag_leffler(s.interarrivals))});
  return j;
}

int cmd_tick(const TickArgs& a) {
  std::vector<TickRecord> ticks;
  json report = json::object();
  std::optional<SyntheticStream> synth;
  if (a.input == "synthetic") {
    const ProcessSpec spec = resolve_spec(a.spec);
    RngStream path_rng(a.seed, 0), noise_rng(a.seed, 1);
    const SamplePath path = sample_path(spec, a.t_end, path_rng);
    synth = synthetic_ticks(path, a.first_price, a.tick_size, a.noise, noise_rng);
    ticks = synth->ticks;
    report["spec"] = to_json(spec);
    report["seed"] = a.seed;
    report["t_end"] = a.t_end;
  } else {
    std::ifstream in(a.input);
    if (!in) throw SpecError("cannot open tick file " + a.input);
    ticks = read_ticks_csv(in);
    report["input"] = a.input;
  }
  const auto filtered = bid_filter(ticks, a.tick_size);
  const auto [up, down] = extract_jumps(filtered);
  if (!a.filtered_out.empty()) {
    std::string csv = "timestamp,price,bid,direction\n";
    for (const auto& r : filtered)
      csv += format_number(r.timestamp) + "," + format_number(r.price) + "," + format_number(r.bid) + "," +
             std::to_string(r.direction) + "\n";
    write_text(a.filtered_out, csv);
  }
  report["tick_size"] = a.tick_size;
  report["records"] = ticks.size();
  report["filtered"] = filtered.size();
  report["up"] = fit_series(up);
  report["down"] = fit_series(down);
  int code = kExitOk;
  if (synth) {
    const bool exact = static_cast<long>(up.event_times.size()) == synth->planted_up &&
                       static_cast<long>(down.event_times.size()) == synth->planted_down;
    report["round_trip"] = {{"planted_up", synth->planted_up},
                            {"planted_down", synth->planted_down},
                            {"recovered_up", up.event_times.size()},
                            {"recovered_down", down.event_times.size()},
                            {"exact", exact}};
    if (!exact) code = kExitVerification;
  }
  write_text(a.out, dump(report));
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Skellam process toolkit: simulation, distributions, verification, tick data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SKELLAM_VERSION);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  SimulateArgs sim;
  sim.seed = seed;
  auto* c_sim = app.add_subcommand("simulate", "Simulate sample paths; writes path CSVs (t,state) and manifest.json");
  add_spec_flags(c_sim, sim.spec);
  c_sim->add_option("--t-end", sim.t_end, "Horizon, in the time units of the rates")->capture_default_str();
  c_sim->add_option("--paths", sim.paths, "Number of independent paths")->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Seed (default from SKELLAM_SEED, else 0)")->capture_default_str();
  c_sim->add_option("--out", sim.out, "Output directory")->capture_default_str();
  c_sim->add_flag("--paper-exact", sim.paper_exact, "Tabulated algorithms verbatim: one clock for both sides; time-varying variants start at 1e-4 and step by the frozen cumulative rate");
  c_sim->add_option("--grid-step", sim.h, "Subordinator grid step, time units (0 = t_end/16384)")->capture_default_str();
  c_sim->add_option("--ngsp-method", sim.ngsp_method, "NGSP sampler: thinning, or paper (frozen cumulative rate)")
      ->check(CLI::IsMember({"thinning", "paper"}))
      ->capture_default_str();

  PmfArgs pmf;
  auto* c_pmf = app.add_subcommand("pmf", "Marginal pmf tables as CSV (n,p) with a header comment line");
  add_spec_flags(c_pmf, pmf.spec);
  c_pmf->add_option("--t", pmf.times, "Times, comma separated")->delimiter(',')->capture_default_str();
  c_pmf->add_option("--backend", pmf.backend,
                    "convolution, bessel, mittag_leffler, monte_carlo or recurrence (default: natural)");
  c_pmf->add_option("--n-min", pmf.n_min, "Lowest state (default: automatic)");
  c_pmf->add_option("--n-max", pmf.n_max, "Highest state (default: automatic)");
  c_pmf->add_option("--out", pmf.out, "Output directory, or - for stdout")->capture_default_str();

  MomentsArgs mom;
  mom.seed = seed;
  auto* c_mom = app.add_subcommand("moments", "Mean, variance, optional Cov(X(s),X(t)) as JSON");
  add_spec_flags(c_mom, mom.spec);
  c_mom->add_option("--t", mom.t, "Time")->capture_default_str();
  c_mom->add_option("--s", mom.s, "Second time for the covariance");
  c_mom->add_option("--samples", mom.samples, "Monte Carlo draws where no closed form exists")->capture_default_str();
  c_mom->add_option("--seed", mom.seed, "Seed for Monte Carlo moments")->capture_default_str();
  c_mom->add_option("--out", mom.out, "Output file, or - for stdout")->capture_default_str();

  ClassifyArgs cls;
  auto* c_cls = app.add_subcommand("classify", "Correlation decay exponent and LRD/SRD class as JSON");
  add_spec_flags(c_cls, cls.spec);
  c_cls->add_option("--s", cls.s, "Fixed earlier time s")->capture_default_str();
  c_cls->add_option("--out", cls.out, "Output file, or - for stdout")->capture_default_str();

  HittingArgs hit;
  auto* c_hit = app.add_subcommand("hitting", "Arrival-time cdf and first-passage survival as JSON");
  add_spec_flags(c_hit, hit.spec);
  c_hit->add_option("--n", hit.n, "Level")->capture_default_str();
  c_hit->add_option("--t", hit.t, "Time")->capture_default_str();
  c_hit->add_option("--backend", hit.backend, "pmf backend")->capture_default_str();
  c_hit->add_option("--out", hit.out, "Output file, or - for stdout")->capture_default_str();

  VerifyArgs ver;
  ver.seed = seed;
  auto* c_ver = app.add_subcommand("verify", "Run verification checks; exit 2 if any check fails");
  c_ver->add_option("--check", ver.checks, "Check name (repeatable)");
  c_ver->add_flag("--all", ver.all, "Run the whole catalog");
  c_ver->add_flag("--list", ver.list, "List check names");
  c_ver->add_option("--k", ver.k, "k for the default spec lambda_j=1.2/j, mu_j=0.8/j (0 = per-check default)")
      ->capture_default_str();
  c_ver->add_option("--spec", ver.spec_file, "Spec JSON replacing the default spec")->check(CLI::ExistingFile);
  c_ver->add_option("--samples", ver.samples, "Monte Carlo size (0 = per-check default)")->capture_default_str();
  c_ver->add_option("--seed", ver.seed, "Seed")->capture_default_str();
  c_ver->add_option("--format", ver.format, "json or table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  c_ver->add_option("--out", ver.out, "Output file, or - for stdout")->capture_default_str();

  TickArgs tick;
  tick.seed = seed;
  auto* c_tick = app.add_subcommand("tick", "Bid filter, jump extraction and inter-arrival fits as JSON");
  c_tick->add_option("--input", tick.input, "CSV of timestamp,price (seconds, price units) or 'synthetic'")
      ->required();
  add_spec_flags(c_tick, tick.spec);
  c_tick->add_option("--tick-size", tick.tick_size, "Price tick; the spread is one tick")->capture_default_str();
  c_tick->add_option("--t-end", tick.t_end, "Synthetic horizon, seconds")->capture_default_str();
  c_tick->add_option("--first-price", tick.first_price, "Synthetic first price")->capture_default_str();
  c_tick->add_option("--noise", tick.noise, "Mean in-spread trades between synthetic jumps")->capture_default_str();
  c_tick->add_option("--seed", tick.seed, "Seed for synthetic streams")->capture_default_str();
  c_tick->add_option("--filtered", tick.filtered_out, "Also write the filtered records to this CSV");
  c_tick->add_option("--out", tick.out, "Output file, or - for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    set_worker_count(threads);
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_pmf->parsed()) return cmd_pmf(pmf);
    if (c_mom->parsed()) return cmd_moments(mom);
    if (c_cls->parsed()) return cmd_classify(cls);
    if (c_hit->parsed()) return cmd_hitting(hit);
    if (c_ver->parsed()) return cmd_verify(ver);
    if (c_tick->parsed()) return cmd_tick(tick);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
