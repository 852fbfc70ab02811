// kawalab: batch laboratory for interacting jump dynamics.
// Subcommands: simulate | hierarchy | verify | combinatorics | metric.
// Exit codes: 0 success / all-pass, 1 validation error, 2 check failure,
// 3 internal invariant violation.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>

#include "kawalab/checks.hpp"
#include "kawalab/config_file.hpp"
#include "kawalab/io.hpp"

namespace {

using namespace kawalab;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  unsigned threads = 0;
};

template <std::size_t D>
ModelParams<D> model_from_config(const ConfigFile& cfg) {
  const auto kernel_family =
      kernel_family_from_string(cfg.get_string("model.kernel.family"));
  const double kernel_scale = cfg.get_double("model.kernel.scale");
  const auto pot_family =
      potential_family_from_string(cfg.get_string("model.potential.family"));
  const double pot_height = cfg.get_double("model.potential.height");
  const double pot_range = cfg.get_double("model.potential.range");
  const double alpha = cfg.get_double("model.alpha", 0.0);

  Domain<D> domain;
  if (cfg.get_bool("run.torus", false)) {
    const auto w = cfg.get_doubles("init.window");
    require(w.size() == 2 * D, "config: init.window needs lo hi per dimension");
    Box<D> box;
    for (std::size_t k = 0; k < D; ++k) {
      box.lo[k] = w[2 * k];
      box.hi[k] = w[2 * k + 1];
    }
    box.validate();
    domain.torus = box;
  }
  return ModelParams<D>(JumpKernel<D>(kernel_family, kernel_scale),
                        Potential<D>(pot_family, pot_height, pot_range), alpha,
                        domain);
}

template <std::size_t D>
InitialCondition<D> initial_from_config(const ConfigFile& cfg) {
  const std::string kind = cfg.get_string("init.kind", "poisson");
  if (kind == "poisson") {
    const double kappa = cfg.get_double("init.kappa");
    require(kappa > 0.0, "config: init.kappa must be positive");
    const auto w = cfg.get_doubles("init.window");
    require(w.size() == 2 * D, "config: init.window needs lo hi per dimension");
    Box<D> box;
    for (std::size_t k = 0; k < D; ++k) {
      box.lo[k] = w[2 * k];
      box.hi[k] = w[2 * k + 1];
    }
    box.validate();
    return InitialCondition<D>::poisson(kappa, box);
  }
  if (kind == "file") {
    return InitialCondition<D>::from_config(
        read_configuration_csv<D>(cfg.get_string("init.file")));
  }
  throw std::invalid_argument("config: init.kind must be poisson or file");
}

int config_dimension(const ConfigFile& cfg) {
  const auto d = cfg.get_u64("model.d", 1);
  require(d == 1 || d == 2, "config: model.d must be 1 or 2");
  return static_cast<int>(d);
}

template <std::size_t D>
void run_simulate(const ConfigFile& cfg, const CommonArgs& args) {
  const auto params = model_from_config<D>(cfg);
  const auto init = initial_from_config<D>(cfg);
  const double t_max = cfg.get_double("run.t_max");
  const auto query_times = cfg.get_doubles("run.query_times");
  const auto replicas = cfg.get_u64("run.replicas");
  require(replicas >= 1, "config: run.replicas must be at least 1");
  const std::uint64_t base_seed = args.has_seed_override
                                      ? args.seed_override
                                      : cfg.get_u64("run.base_seed");

  const auto ens = run_ensemble(init, replicas, t_max, params, base_seed,
                                query_times, args.threads);

  ArtifactDir dir(args.out_dir);
  write_text(dir.path("config.cfg"), cfg.serialize());
  std::uint64_t proposals = 0, accepted = 0;
  for (std::size_t r = 0; r < ens.replicas.size(); ++r) {
    const auto& rep = ens.replicas[r];
    proposals += rep.proposals;
    accepted += rep.events.size();
    write_events_csv(dir.path("events_" + std::to_string(r) + ".csv"), rep);
    for (std::size_t q = 0; q < rep.snapshots.size(); ++q) {
      const std::string stem =
          "snap_" + std::to_string(r) + "_" + std::to_string(q);
      write_configuration_csv(dir.path(stem + ".csv"),
                              rep.snapshots[q].second);
      write_json(dir.path(stem + ".json"),
                 configuration_envelope(rep.snapshots[q].second));
    }
  }
  nlohmann::json manifest = {
      {"tool", "kawalab"},
      {"version", kVersion},
      {"rng", Rng::kName},
      {"base_seed", base_seed},
      {"params_digest", params.digest()},
      {"seed_rule", "splitmix64(base_seed + replica * golden)"},
      {"replicas", replicas},
      {"query_times", query_times},
      {"proposals", proposals},
      {"accepted", accepted},
      {"acceptance_fraction",
       proposals ? static_cast<double>(accepted) / proposals : 0.0},
      {"ensemble_digest", ens.digest()},
  };
  write_json(dir.path("manifest.json"), manifest);
  dir.commit();
  std::cout << "wrote ensemble with digest " << ens.digest() << "\n";
}

void run_hierarchy(const ConfigFile& cfg, const CommonArgs& args) {
  require(config_dimension(cfg) == 1, "config: the hierarchy runs in d = 1");
  Grid1D grid{cfg.get_double("hierarchy.R", 5.0),
              cfg.get_u64("hierarchy.M", 64)};
  const int n_max = static_cast<int>(cfg.get_u64("hierarchy.n_max", 2));
  const int j_max = static_cast<int>(cfg.get_u64("hierarchy.j_max", 1));
  const auto closure =
      closure_from_string(cfg.get_string("hierarchy.closure", "zero"));
  const double t = cfg.get_double("hierarchy.t");
  const double kappa = cfg.get_double("hierarchy.kappa", 1.0);
  const std::string scheme = cfg.get_string("hierarchy.scheme", "rk4");

  const auto params = model_from_config<1>(cfg);
  const auto model = GridModel1D::build(grid, params.kernel, params.potential);
  auto k0 = CorrelationTable::poissonian(grid, n_max, kappa);
  if (cfg.has("hierarchy.cosine_amplitude")) {
    const double amp = cfg.get_double("hierarchy.cosine_amplitude");
    for (std::size_t i = 0; i < grid.nodes; ++i)
      k0.k1[i] = kappa * (1.0 + amp * std::cos(kPi * grid.node(i) /
                                               grid.half_length));
  }

  EvolveResult res;
  nlohmann::json certificate;
  if (scheme == "rk4") {
    EvolveOptions opt;
    opt.dt = cfg.get_double("hierarchy.dt", 0.005);
    opt.j_max = j_max;
    opt.closure = closure;
    opt.richardson = true;
    res = evolve_rk4(k0, t, model, opt);
    certificate = {{"scheme", "rk4"},
                   {"dt", opt.dt},
                   {"richardson_error", res.error_estimate}};
  } else if (scheme == "series") {
    SeriesOptions opt;
    opt.n_terms = static_cast<int>(cfg.get_u64("hierarchy.n_terms", 8));
    opt.j_max = j_max;
    opt.closure = closure;
    opt.theta0 = cfg.get_double("hierarchy.theta0", 0.0);
    opt.theta1 = cfg.get_double("hierarchy.theta1", 1.0);
    res = evolve_series(k0, t, model, opt);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : res.certificate)
      rows.push_back({{"order", row.order},
                      {"term_norm", row.term_norm},
                      {"envelope", row.envelope},
                      {"series_weight", row.series_weight}});
    certificate = {{"scheme", "series"},
                   {"n_terms", opt.n_terms},
                   {"radius", discrete_radius_T(opt.theta1, opt.theta0, model)},
                   {"within_certified_radius", res.within_certified_radius},
                   {"flagged", !res.within_certified_radius},
                   {"terms", rows}};
  } else {
    throw std::invalid_argument("config: hierarchy.scheme must be rk4|series");
  }

  ArtifactDir dir(args.out_dir);
  write_text(dir.path("config.cfg"), cfg.serialize());
  write_correlation_csv(dir.path(""), res.table);
  nlohmann::json meta = {
      {"tool", "kawalab"},
      {"version", kVersion},
      {"grid", {{"R", grid.half_length}, {"M", grid.nodes}}},
      {"n_max", n_max},
      {"j_max", j_max},
      {"closure", to_string(closure)},
      {"t", t},
      {"type_trace", res.type_trace},
      {"certificate", certificate},
  };
  write_json(dir.path("meta.json"), meta);
  dir.commit();
  std::cout << "hierarchy run complete\n";
}

int run_verify(const ConfigFile& cfg, const CommonArgs& args) {
  checks::CheckOptions opt;
  opt.base_seed = args.has_seed_override
                      ? args.seed_override
                      : cfg.get_u64("run.base_seed", opt.base_seed);
  opt.threads = args.threads;
  std::vector<std::string> wanted = cfg.has("verify.checks")
                                        ? cfg.get_words("verify.checks")
                                        : std::vector<std::string>{"all"};
  if (wanted.size() == 1 && wanted[0] == "all") {
    wanted.clear();
    for (const auto& e : checks::registry()) wanted.push_back(e.name);
  }
  std::vector<ReportRecord> records;
  for (const auto& name : wanted) {
    const auto rs = checks::run_check(name, opt);
    records.insert(records.end(), rs.begin(), rs.end());
  }
  print_records_table(std::cout, records);

  if (!args.out_dir.empty()) {
    ArtifactDir dir(args.out_dir);
    write_text(dir.path("config.cfg"), cfg.serialize());
    write_records_jsonl(dir.path("records.jsonl"), records);
    nlohmann::json manifest = {{"tool", "kawalab"},
                               {"version", kVersion},
                               {"base_seed", opt.base_seed},
                               {"checks", wanted}};
    write_json(dir.path("manifest.json"), manifest);
    dir.commit();
  }
  for (const auto& r : records)
    if (r.verdict == ReportRecord::Verdict::fail) return 2;
  return 0;
}

void run_combinatorics(const std::string& out_dir, unsigned long n_max,
                       unsigned long m_max, unsigned long k_max) {
  ArtifactDir dir(out_dir);
  {
    std::ofstream out(dir.path("stirling.csv"));
    out << "n,l,value\n";
    for (unsigned long n = 0; n <= n_max; ++n)
      for (unsigned long l = 0; l <= n; ++l)
        out << n << "," << l << "," << stirling2(n, l) << "\n";
  }
  {
    std::ofstream out(dir.path("touchard.csv"));
    out << "n,l,coefficient\n";
    for (unsigned long n = 0; n <= n_max; ++n) {
      const auto coeffs = touchard_coeffs(n);
      for (unsigned long l = 0; l < coeffs.size(); ++l)
        out << n << "," << l << "," << coeffs[l] << "\n";
    }
  }
  {
    std::ofstream out(dir.path("compositions.csv"));
    out << "m,n,weight,counts\n";
    std::ofstream sums(dir.path("composition_sums.csv"));
    sums << "m,n,set_size,weight_sum\n";
    for (unsigned long m = 1; m <= m_max; ++m) {
      for (unsigned long n = 0; n <= n_max; ++n) {
        BigRational total(0);
        const auto comps = enumerate_compositions(m, n);
        for (const auto& c : comps) {
          const auto w = composition_weight(c);
          total += w;
          out << m << "," << n << "," << w.numerator();
          if (w.denominator() != 1) out << "/" << w.denominator();
          out << ",";
          for (std::size_t i = 0; i < c.counts.size(); ++i)
            out << (i ? " " : "") << c.counts[i];
          out << "\n";
        }
        sums << m << "," << n << "," << comps.size() << ","
             << total.numerator();
        if (total.denominator() != 1) sums << "/" << total.denominator();
        sums << "\n";
      }
    }
  }
  {
    std::ofstream out(dir.path("wk.csv"));
    out << "m,n,k,closed_form,recurrence\n";
    for (unsigned long m = 1; m <= m_max; ++m)
      for (unsigned long n = 0; n <= n_max; ++n)
        for (unsigned long k = 0; k <= std::min(n, k_max); ++k)
          out << m << "," << n << "," << k << ","
              << wk(m, n, k, WkMode::closed_form) << ","
              << wk(m, n, k, WkMode::recurrence) << "\n";
  }
  dir.commit();
  std::cout << "wrote combinatorial tables\n";
}

void run_metric(const std::string& file_a, const std::string& file_b) {
  const std::size_t d = configuration_csv_dimension(file_a);
  require(d == configuration_csv_dimension(file_b),
          "metric: dimension mismatch between the two files");
  double value = 0.0;
  if (d == 1) {
    value = bl_metric(read_configuration_csv<1>(file_a),
                      read_configuration_csv<1>(file_b));
  } else if (d == 2) {
    value = bl_metric(read_configuration_csv<2>(file_a),
                      read_configuration_csv<2>(file_b));
  } else {
    throw std::invalid_argument("metric: only d = 1, 2 supported");
  }
  std::printf("%.17g\n", value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale laboratory for interacting jump dynamics"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", args.config_path, "run configuration file");
    sub->add_option("--out", args.out_dir, "artifact output directory");
    if (with_seed) {
      sub->add_option("--seed", args.seed_override, "base seed override")
          ->each([&](const std::string&) { args.has_seed_override = true; });
    }
    sub->add_option("--threads", args.threads, "worker threads (0 = auto)");
  };

  auto* sim = app.add_subcommand("simulate", "run a seeded path ensemble");
  add_common(sim, true);
  auto* hier = app.add_subcommand("hierarchy", "evolve truncated correlations");
  add_common(hier, false);
  auto* verify = app.add_subcommand("verify", "run the verification checks");
  add_common(verify, true);

  auto* comb = app.add_subcommand("combinatorics", "dump exact integer tables");
  std::string comb_out = "combinatorics_out";
  unsigned long comb_n = 10, comb_m = 6, comb_k = 8;
  comb->add_option("--out", comb_out, "output directory");
  comb->add_option("--n-max", comb_n, "largest n");
  comb->add_option("--m-max", comb_m, "largest m");
  comb->add_option("--k-max", comb_k, "largest k");

  auto* metric =
      app.add_subcommand("metric", "distance between two point files");
  std::string file_a, file_b;
  metric->add_option("file_a", file_a, "first configuration csv")->required();
  metric->add_option("file_b", file_b, "second configuration csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed() || hier->parsed() || verify->parsed()) {
      require(!args.config_path.empty(), "missing --config");
      const auto cfg = ConfigFile::parse_file(args.config_path);
      if (args.out_dir.empty()) args.out_dir = cfg.get_string("output.dir", "");
      if (sim->parsed() || hier->parsed())
        require(!args.out_dir.empty(), "missing --out (or output.dir)");
      if (sim->parsed()) {
        if (config_dimension(cfg) == 1)
          run_simulate<1>(cfg, args);
        else
          run_simulate<2>(cfg, args);
        return 0;
      }
      if (hier->parsed()) {
        run_hierarchy(cfg, args);
        return 0;
      }
      return run_verify(cfg, args);
    }
    if (comb->parsed()) {
      run_combinatorics(comb_out, comb_n, comb_m, comb_k);
      return 0;
    }
    if (metric->parsed()) {
      run_metric(file_a, file_b);
      return 0;
    }
  } catch (const kawalab::internal_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
