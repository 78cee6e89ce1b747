// SPDX-License-Identifier: Apache-2.0
//
// rmc: rejection Monte Carlo sampling, integration and validation from the
// command line.
//
// Exit codes: 0 success, 1 usage or invalid input, 2 expression parse error,
// 3 sampling budget exhausted, 4 validation failed.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rmc/rmc.hpp"

namespace {

using json = nlohmann::ordered_json;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kBudget = 3,
  kValidationFailed = 4,
};

struct UsageError : rmc::Error {
  using rmc::Error::Error;
};

std::uint64_t parse_seed(const std::string& text) {
  std::string_view s = text;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw UsageError("seed '" + text + "' is not a decimal or 0x-prefixed 64-bit value");
  return v;
}

/// Shared flags of every subcommand.
struct Common {
  std::string density;
  std::string vars;
  std::string box;
  std::uint64_t n = 0;
  std::string seed = "0";
  bool auto_seed = false;
  std::optional<double> bound;
  std::string meta;
  double budget_factor = 1000.0;
  bool record_time = false;

  std::uint64_t resolved_seed = 0;

  void resolve_seed() {
    if (auto_seed) {
      std::random_device rd;
      resolved_seed = (std::uint64_t{rd()} << 32) ^ rd();
      seed = std::to_string(resolved_seed);
    } else {
      resolved_seed = parse_seed(seed);
    }
  }

  rmc::SamplerOptions sampler_options() const {
    rmc::SamplerOptions o;
    o.budget_factor = budget_factor;
    return o;
  }
};

void add_seed_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed, decimal or 0x-prefixed hex")
      ->capture_default_str();
  cmd->add_flag("--auto-seed", c.auto_seed,
                "Draw the seed from OS entropy (recorded in the metadata)");
}

void add_model_flags(CLI::App* cmd, Common& c, const char* density_flag,
                     const char* density_help) {
  cmd->add_option(density_flag, c.density, density_help)->required();
  cmd->add_option("--vars", c.vars, "Comma-separated variable names, e.g. x,y")
      ->required();
  cmd->add_option("--box", c.box, "Support box lo:hi,lo:hi,... in --vars order")
      ->required();
}

void add_run_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--n", c.n, "Number of accepted samples")
      ->required()
      ->check(CLI::PositiveNumber);
  add_seed_flags(cmd, c);
  cmd->add_option("--budget-factor", c.budget_factor,
                  "Proposal budget multiplier for the rejection loop")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--record-time", c.record_time,
                "Write wall_time_ms into the metadata (makes it run-dependent)");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open '" + path + "' for writing");
  return os;
}

void write_json(const std::string& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

json gof_json(const rmc::GofReport& r) {
  json j;
  j["kind"] = rmc::to_string(r.kind);
  j["statistic"] = r.statistic;
  j["threshold"] = r.threshold;
  if (r.kind == rmc::GofKind::ChiSquare) j["dof"] = r.dof;
  j["alpha"] = r.alpha;
  j["n"] = r.n;
  j["pass"] = r.pass;
  return j;
}

json base_meta(const char* command, json config, const Common& c) {
  json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["config"] = std::move(config);
  j["seed"] = c.resolved_seed;
  return j;
}

void add_run_meta(json& j, const rmc::RunMetadata& m, const Common& c) {
  j["requested_n"] = m.requested_n;
  j["proposals_drawn"] = m.proposals_drawn;
  j["accepted"] = m.accepted;
  j["acceptance_rate"] = m.acceptance_rate;
  j["bound_c"] = m.bound_c;
  if (c.record_time) j["wall_time_ms"] = m.wall_time_ms;
}

json common_config(const Common& c, const char* density_key) {
  json cfg;
  cfg[density_key] = c.density;
  cfg["vars"] = c.vars;
  cfg["box"] = c.box;
  if (c.n) cfg["n"] = c.n;
  cfg["seed"] = c.seed;
  cfg["bound"] = c.bound ? json(*c.bound) : json(nullptr);
  cfg["budget_factor"] = c.budget_factor;
  return cfg;
}

struct Model {
  rmc::VarOrder vars;
  rmc::Box box;
  rmc::ScalarField field;
};

Model load_model(const Common& c) {
  Model m;
  m.vars = rmc::VarOrder::parse(c.vars);
  m.box = rmc::Box::parse(c.box);
  if (m.box.dims() != m.vars.dims())
    throw UsageError("--box has " + std::to_string(m.box.dims()) +
                     " dimensions but --vars names " + std::to_string(m.vars.dims()));
  m.field = rmc::ScalarField::parse(c.density, m.vars);
  return m;
}

// sample ---------------------------------------------------------------------

struct SampleArgs {
  Common c;
  std::string method = "srmc";
  std::size_t bins = 64;
  std::string out = "samples.csv";
  std::string plot;
  std::uint64_t truncation_draws = 0;
};

int cmd_sample(SampleArgs& a) {
  a.c.resolve_seed();
  const auto m = load_model(a.c);
  if (!a.plot.empty() && m.box.dims() > 2)
    throw UsageError("--plot supports one- and two-dimensional targets only");

  rmc::ValidationOptions vopt;
  vopt.truncation_draws = a.truncation_draws;
  const auto target = rmc::validate_target(m.field, m.box, a.c.bound, vopt);
  const auto opts = a.c.sampler_options();

  rmc::SampleBatch batch;
  if (a.method == "srmc") {
    batch = rmc::srmc_sample(target, a.c.n, a.c.resolved_seed, opts);
  } else {
    const auto proposal = rmc::build_piecewise_proposal(m.field, m.box, a.bins);
    batch = rmc::grmc_sample(m.field, proposal, a.c.n, a.c.resolved_seed, opts);
  }

  {
    auto os = open_out(a.out);
    rmc::write_csv(os, batch, m.vars);
  }
  if (!a.plot.empty()) {
    auto os = open_out(a.plot);
    if (m.box.dims() == 2) {
      rmc::write_svg_scatter(os, batch, m.box, m.vars);
    } else {
      const auto first = std::min<std::uint64_t>(a.c.n, rmc::kChunkAcceptances);
      const auto trace =
          rmc::srmc_trace(target, a.c.resolved_seed, 0, ~std::uint64_t{0}, first);
      rmc::write_svg_rejection(os, target, trace);
    }
  }

  auto cfg = common_config(a.c, "density");
  cfg["method"] = a.method;
  if (a.method == "grmc") cfg["bins"] = a.bins;
  cfg["out"] = a.out;
  cfg["meta"] = a.c.meta;
  cfg["plot"] = a.plot.empty() ? json(nullptr) : json(a.plot);
  cfg["truncation_draws"] = a.truncation_draws;
  auto meta = base_meta("sample", cfg, a.c);
  add_run_meta(meta, batch.meta, a.c);
  meta["bound_estimated"] = target.bound_estimated();
  if (const auto& t = target.truncation()) {
    meta["truncation"] = {{"widened_box", t->widened.to_string()},
                          {"outside_fraction", t->outside_fraction},
                          {"std_error", t->std_error},
                          {"draws", t->draws}};
    if (t->outside_fraction > 1e-3)
      std::cerr << "warning: about " << t->outside_fraction
                << " of the density's mass lies outside the box; samples follow "
                   "the density truncated to the box\n";
  }
  write_json(a.c.meta, meta);

  std::cout << "accepted " << batch.meta.accepted << " of "
            << batch.meta.proposals_drawn << " proposals (acceptance rate "
            << batch.meta.acceptance_rate << ", c = " << batch.meta.bound_c
            << ")\n";
  std::cerr << "wall time " << batch.meta.wall_time_ms << " ms\n";
  return kOk;
}

// integrate ------------------------------------------------------------------

struct IntegrateArgs {
  Common c;
  std::string region;
  std::uint64_t reps = rmc::kDefaultReplications;
  std::string method = "screened";
};

int cmd_integrate(IntegrateArgs& a) {
  a.c.resolve_seed();
  const auto m = load_model(a.c);
  const auto region = rmc::Expression::parse(a.region, m.vars);

  const auto est =
      a.method == "screened"
          ? rmc::integrate_screened(m.field, region, m.box, a.c.n, a.reps,
                                    a.c.resolved_seed, a.c.sampler_options())
          : rmc::integrate_direct(m.field, region, m.box, a.c.n, a.reps,
                                  a.c.resolved_seed);

  auto cfg = common_config(a.c, "integrand");
  cfg.erase("bound");
  cfg["region"] = a.region;
  cfg["reps"] = a.reps;
  cfg["method"] = a.method;
  cfg["meta"] = a.c.meta;
  auto meta = base_meta("integrate", cfg, a.c);
  meta["value"] = est.value;
  meta["std_error"] = est.std_error;
  meta["replications"] = est.replications;
  meta["per_replication_values"] = est.per_replication_values;
  meta["n_uniform"] = est.n_uniform;
  if (a.method == "screened") {
    meta["n_screened"] = est.n_screened;
    meta["n_in_region"] = est.n_in_region;
    meta["proposals_drawn"] = est.proposals_drawn;
    meta["accepted"] = est.n_screened;
    meta["acceptance_rate"] =
        static_cast<double>(est.n_screened) / static_cast<double>(est.proposals_drawn);
    meta["bound_c"] = est.bound_c;
    meta["box_integrals"] = est.box_integrals;
    meta["region_fractions"] = est.region_fractions;
  }
  write_json(a.c.meta, meta);

  std::cout << rmc::format_number(est.value) << " +/- "
            << rmc::format_number(est.std_error) << '\n';
  return kOk;
}

// validate -------------------------------------------------------------------

struct ValidateArgs {
  Common c;
  std::string cdf;
  std::string reference;
  double alpha = 0.01;
  std::size_t bins = 8;
};

int cmd_validate(ValidateArgs& a) {
  a.c.resolve_seed();
  const auto m = load_model(a.c);
  const auto target = rmc::validate_target(m.field, m.box, a.c.bound);
  if (m.box.dims() == 1 && a.cdf.empty())
    throw UsageError("one-dimensional validation needs --cdf");

  // parse everything before sampling so bad expressions fail fast
  std::optional<rmc::Expression> cdf;
  if (m.box.dims() == 1) cdf = rmc::Expression::parse(a.cdf, m.vars);
  std::optional<rmc::ScalarField> reference;
  if (!a.reference.empty()) reference = rmc::ScalarField::parse(a.reference, m.vars);

  const auto batch =
      rmc::srmc_sample(target, a.c.n, a.c.resolved_seed, a.c.sampler_options());

  rmc::GofReport report;
  if (cdf) {
    auto xs = batch.column(0);
    std::sort(xs.begin(), xs.end());
    report = rmc::ks_test_1d(
        xs, [&](double x) { return cdf->eval(std::span<const double>(&x, 1)); },
        a.alpha);
  } else {
    const auto expected = reference ? rmc::validate_target(*reference, m.box) : target;
    report = rmc::chi_square_box(batch, expected, a.bins);
  }

  std::cout << rmc::to_string(report.kind) << " statistic "
            << rmc::format_number(report.statistic) << " threshold "
            << rmc::format_number(report.threshold);
  if (report.kind == rmc::GofKind::ChiSquare) std::cout << " dof " << report.dof;
  std::cout << " n " << report.n << ": " << (report.pass ? "pass" : "FAIL") << '\n';

  if (!a.c.meta.empty()) {
    auto cfg = common_config(a.c, "density");
    cfg["cdf"] = a.cdf.empty() ? json(nullptr) : json(a.cdf);
    cfg["reference"] = a.reference.empty() ? json(nullptr) : json(a.reference);
    cfg["alpha"] = a.alpha;
    cfg["bins"] = a.bins;
    cfg["meta"] = a.c.meta;
    auto meta = base_meta("validate", cfg, a.c);
    add_run_meta(meta, batch.meta, a.c);
    meta["gof"] = gof_json(report);
    write_json(a.c.meta, meta);
  }
  return report.pass ? kOk : kValidationFailed;
}

// bound ----------------------------------------------------------------------

struct BoundArgs {
  Common c;
  std::size_t grid = 0;
  double safety = 1.0;
};

int cmd_bound(BoundArgs& a) {
  const auto m = load_model(a.c);
  const auto grid = a.grid ? a.grid : rmc::default_bound_grid(m.box.dims());
  const auto est = rmc::estimate_bound_detail(m.field, m.box, grid, a.safety);

  std::cout << "bound " << rmc::format_number(est.bound) << '\n';
  std::cout << "max " << rmc::format_number(est.max_value) << " at ";
  for (std::size_t i = 0; i < est.argmax.size(); ++i)
    std::cout << (i ? ", " : "") << m.vars[i] << " = "
              << rmc::format_number(est.argmax[i]);
  std::cout << '\n';

  if (!a.c.meta.empty()) {
    json cfg;
    cfg["density"] = a.c.density;
    cfg["vars"] = a.c.vars;
    cfg["box"] = a.c.box;
    cfg["grid"] = grid;
    cfg["safety"] = a.safety;
    cfg["meta"] = a.c.meta;
    json meta;
    meta["schema_version"] = 1;
    meta["command"] = "bound";
    meta["config"] = cfg;
    meta["bound_c"] = est.bound;
    meta["max_value"] = est.max_value;
    meta["argmax"] = est.argmax;
    write_json(a.c.meta, meta);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rejection Monte Carlo sampling and integration"};
  app.require_subcommand(1);

  SampleArgs sample;
  auto* s = app.add_subcommand("sample", "Draw samples from a density");
  add_model_flags(s, sample.c, "--density", "Density expression f");
  add_run_flags(s, sample.c);
  s->add_option("--bound", sample.c.bound, "Envelope constant c >= max f");
  s->add_option("--method", sample.method, "srmc (uniform box) or grmc (piecewise)")
      ->capture_default_str()
      ->check(CLI::IsMember({"srmc", "grmc"}));
  s->add_option("--bins", sample.bins, "Bins per dimension for --method grmc")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  s->add_option("--out", sample.out, "Samples CSV path")->capture_default_str();
  s->add_option("--meta", sample.c.meta, "Metadata JSON path (default: <out>.json)");
  s->add_option("--plot", sample.plot, "SVG plot path");
  s->add_option("--truncation-draws", sample.truncation_draws,
                "Estimate the mass outside the box with this many draws");

  IntegrateArgs integrate;
  auto* in = app.add_subcommand("integrate", "Integrate g over a region inside a box");
  add_model_flags(in, integrate.c, "--integrand", "Integrand expression g");
  add_run_flags(in, integrate.c);
  in->add_option("--region", integrate.region, "Region indicator expression")
      ->required();
  in->add_option("--reps", integrate.reps, "Independent replications")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  in->add_option("--method", integrate.method, "screened or direct")
      ->capture_default_str()
      ->check(CLI::IsMember({"screened", "direct"}));
  integrate.c.meta = "integrate.json";
  in->add_option("--meta", integrate.c.meta, "Metadata JSON path")->capture_default_str();

  ValidateArgs validate;
  auto* v = app.add_subcommand("validate", "Sample and run a goodness-of-fit test");
  add_model_flags(v, validate.c, "--density", "Density expression f");
  add_run_flags(v, validate.c);
  v->add_option("--bound", validate.c.bound, "Envelope constant c >= max f");
  v->add_option("--cdf", validate.cdf, "CDF expression (one-dimensional KS test)");
  v->add_option("--reference", validate.reference,
                "Density the chi-square expectations use (default: --density)");
  v->add_option("--alpha", validate.alpha, "KS significance level, 0.05 or 0.01")
      ->capture_default_str()
      ->check(CLI::IsMember({0.05, 0.01}));
  v->add_option("--bins", validate.bins, "Chi-square bins per dimension")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  v->add_option("--meta", validate.c.meta, "Metadata JSON path");

  BoundArgs bound;
  auto* b = app.add_subcommand("bound", "Estimate an envelope constant on a grid");
  add_model_flags(b, bound.c, "--density", "Density expression f");
  b->add_option("--grid", bound.grid, "Grid points per dimension (default ~2^20 total)");
  b->add_option("--safety", bound.safety, "Multiplier on the grid maximum")
      ->capture_default_str();
  b->add_option("--meta", bound.c.meta, "Metadata JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return kUsage;
  }

  try {
    if (*s) {
      if (sample.c.meta.empty()) sample.c.meta = sample.out + ".json";
      return cmd_sample(sample);
    }
    if (*in) return cmd_integrate(integrate);
    if (*v) return cmd_validate(validate);
    if (*b) return cmd_bound(bound);
  } catch (const rmc::ParseError& e) {
    std::cerr << "parse error " << e.what() << '\n';
    return kParse;
  } catch (const rmc::BudgetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
