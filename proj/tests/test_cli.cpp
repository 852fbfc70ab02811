#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "kawalab/config_file.hpp"

using namespace kawalab;
namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* env = std::getenv("KAWALAB_BIN");
  REQUIRE(env != nullptr);
  return env;
}

int run(const std::string& cmd_tail, std::string* output = nullptr) {
  const std::string out_file = "cli_test_stdout.txt";
  const std::string cmd = binary() + " " + cmd_tail + " > " + out_file + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(out_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kFreeConfig = R"(
# minimal free-case run
model.kernel.family = gaussian
model.kernel.scale = 0.7
model.potential.family = box
model.potential.height = 0.0
model.potential.range = 1.0
model.d = 1
model.alpha = 0.0
init.kind = poisson
init.kappa = 0.5
init.window = -3 3
run.t_max = 0.5
run.query_times = 0.25 0.5
run.replicas = 5
run.base_seed = 42
)";

}  // namespace

TEST_CASE("config round-trip is the identity") {
  const auto cfg = ConfigFile::parse_string(kFreeConfig);
  const auto again = ConfigFile::parse_string(cfg.serialize());
  CHECK(cfg.values() == again.values());
  CHECK(cfg.serialize() == again.serialize());
  CHECK(cfg.get_double("model.kernel.scale") == 0.7);
  CHECK(cfg.get_doubles("run.query_times") == std::vector<double>{0.25, 0.5});
  CHECK_THROWS_AS(cfg.get_string("nope.key"), std::invalid_argument);
  CHECK_THROWS_AS(ConfigFile::parse_string("not a key value line"),
                  std::invalid_argument);
}

TEST_CASE("simulate produces a complete, reproducible artifact directory") {
  write_file("cli_free.cfg", kFreeConfig);
  REQUIRE(run("simulate --config cli_free.cfg --out cli_sim_out") == 0);
  CHECK(fs::exists("cli_sim_out/manifest.json"));
  CHECK(fs::exists("cli_sim_out/config.cfg"));
  CHECK(fs::exists("cli_sim_out/events_0.csv"));
  CHECK(fs::exists("cli_sim_out/events_4.csv"));
  CHECK(fs::exists("cli_sim_out/snap_0_0.csv"));
  CHECK(fs::exists("cli_sim_out/snap_4_1.csv"));
  const auto envelope =
      nlohmann::json::parse(slurp("cli_sim_out/snap_0_0.json"));
  CHECK(envelope["d"] == 1);
  CHECK(envelope.contains("count"));
  CHECK(envelope.contains("psi_total"));
  CHECK_FALSE(fs::exists("cli_sim_out.staging"));

  const auto manifest1 =
      nlohmann::json::parse(slurp("cli_sim_out/manifest.json"));
  CHECK(manifest1["replicas"] == 5);
  CHECK(manifest1["rng"] == "philox4x32-10");

  REQUIRE(run("simulate --config cli_free.cfg --out cli_sim_out2") == 0);
  const auto manifest2 =
      nlohmann::json::parse(slurp("cli_sim_out2/manifest.json"));
  CHECK(manifest1["ensemble_digest"] == manifest2["ensemble_digest"]);
  CHECK(slurp("cli_sim_out/events_2.csv") == slurp("cli_sim_out2/events_2.csv"));

  // A different seed changes the digest.
  REQUIRE(run("simulate --config cli_free.cfg --out cli_sim_out3 --seed 7") ==
          0);
  const auto manifest3 =
      nlohmann::json::parse(slurp("cli_sim_out3/manifest.json"));
  CHECK(manifest1["ensemble_digest"] != manifest3["ensemble_digest"]);
}

TEST_CASE("validation failures name the field and exit with code 1") {
  std::string cfg = kFreeConfig;
  cfg.replace(cfg.find("run.replicas = 5"), 16, "run.replicas = 0");
  write_file("cli_bad.cfg", cfg);
  std::string output;
  CHECK(run("simulate --config cli_bad.cfg --out cli_bad_out", &output) == 1);
  CHECK(output.find("replicas") != std::string::npos);
  CHECK(run("simulate --config cli_missing.cfg --out x", &output) == 1);
}

TEST_CASE("metric subcommand") {
  write_file("cli_points_a.csv", "x1\n0\n1.5\n-2\n");
  write_file("cli_points_b.csv", "x1\n0\n1.5\n-2\n");
  write_file("cli_points_c.csv", "x1\n0.25\n");
  std::string output;
  REQUIRE(run("metric cli_points_a.csv cli_points_b.csv", &output) == 0);
  CHECK(std::stod(output) == 0.0);
  REQUIRE(run("metric cli_points_a.csv cli_points_c.csv", &output) == 0);
  CHECK(std::stod(output) > 0.0);
}

TEST_CASE("combinatorics tables carry the exact weight sums") {
  REQUIRE(run("combinatorics --out cli_comb --m-max 4 --n-max 6") == 0);
  const auto sums = slurp("cli_comb/composition_sums.csv");
  // row (m=2, n=2): two compositions, weights summing to 2^2.
  CHECK(sums.find("2,2,2,4") != std::string::npos);
  CHECK(fs::exists("cli_comb/stirling.csv"));
  CHECK(fs::exists("cli_comb/touchard.csv"));
  CHECK(fs::exists("cli_comb/wk.csv"));
}

TEST_CASE("hierarchy artifacts and the out-of-radius flag") {
  std::string cfg = R"(
model.kernel.family = gaussian
model.kernel.scale = 0.6
model.potential.family = bump
model.potential.height = 0.3
model.potential.range = 1.0
model.d = 1
hierarchy.R = 4
hierarchy.M = 32
hierarchy.n_max = 2
hierarchy.j_max = 1
hierarchy.closure = zero
hierarchy.scheme = series
hierarchy.n_terms = 6
hierarchy.theta0 = 0
hierarchy.theta1 = 1
hierarchy.kappa = 1.0
hierarchy.t = 0.05
)";
  write_file("cli_hier.cfg", cfg);
  REQUIRE(run("hierarchy --config cli_hier.cfg --out cli_hier_out") == 0);
  CHECK(fs::exists("cli_hier_out/k1.csv"));
  CHECK(fs::exists("cli_hier_out/k2.csv"));
  auto meta = nlohmann::json::parse(slurp("cli_hier_out/meta.json"));
  CHECK(meta["certificate"]["flagged"] == false);

  // Far beyond the certified radius: flagged, not failed.
  cfg.replace(cfg.find("hierarchy.t = 0.05"), 18, "hierarchy.t = 9.00");
  write_file("cli_hier_far.cfg", cfg);
  REQUIRE(run("hierarchy --config cli_hier_far.cfg --out cli_hier_far") == 0);
  meta = nlohmann::json::parse(slurp("cli_hier_far/meta.json"));
  CHECK(meta["certificate"]["flagged"] == true);

  // rk4 route writes a Richardson estimate.
  cfg = slurp("cli_hier.cfg");
  cfg.replace(cfg.find("hierarchy.scheme = series"), 25,
              "hierarchy.scheme = rk4");
  write_file("cli_hier_rk4.cfg", cfg);
  REQUIRE(run("hierarchy --config cli_hier_rk4.cfg --out cli_hier_rk4") == 0);
  meta = nlohmann::json::parse(slurp("cli_hier_rk4/meta.json"));
  CHECK(meta["certificate"].contains("richardson_error"));
}

TEST_CASE("verify runs a configured subset and reports records") {
  std::string cfg = R"(
run.base_seed = 77
verify.checks = appendix_identities metric_axioms
)";
  write_file("cli_verify.cfg", cfg);
  std::string output;
  REQUIRE(run("verify --config cli_verify.cfg --out cli_verify_out", &output) ==
          0);
  CHECK(output.find("composition_weight_sums") != std::string::npos);
  CHECK(output.find("metric_axioms") != std::string::npos);
  CHECK(fs::exists("cli_verify_out/records.jsonl"));

  // Unknown check names are validation errors.
  write_file("cli_verify_bad.cfg", "verify.checks = nonsense\n");
  CHECK(run("verify --config cli_verify_bad.cfg", &output) == 1);
}

TEST_CASE("simulate in two dimensions") {
  const char* cfg = R"(
model.kernel.family = uniform_ball
model.kernel.scale = 0.5
model.potential.family = bump
model.potential.height = 0.3
model.potential.range = 0.6
model.d = 2
model.alpha = 0.1
init.kind = poisson
init.kappa = 0.4
init.window = -2 2 -2 2
run.t_max = 0.5
run.query_times = 0.5
run.replicas = 3
run.base_seed = 5
)";
  write_file("cli_2d.cfg", cfg);
  REQUIRE(run("simulate --config cli_2d.cfg --out cli_2d_out") == 0);
  const auto snap = slurp("cli_2d_out/snap_0_0.csv");
  CHECK(snap.rfind("x1,x2\n", 0) == 0);
}

TEST_CASE("simulate from a fixed configuration file") {
  write_file("cli_fixed_pts.csv", "x1\n0\n0.5\n-0.5\n");
  std::string cfg = R"(
model.kernel.family = gaussian
model.kernel.scale = 0.6
model.potential.family = box
model.potential.height = 0.4
model.potential.range = 0.7
model.d = 1
init.kind = file
init.file = cli_fixed_pts.csv
run.t_max = 0.4
run.query_times = 0.4
run.replicas = 4
run.base_seed = 12
)";
  write_file("cli_fixed.cfg", cfg);
  REQUIRE(run("simulate --config cli_fixed.cfg --out cli_fixed_out") == 0);
  const auto envelope =
      nlohmann::json::parse(slurp("cli_fixed_out/snap_1_0.json"));
  CHECK(envelope["count"] == 3);
}
