#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "spinbus/cli_io.hpp"
#include "spinbus/error.hpp"

using namespace spinbus;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("spinbus_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::string str() const { return path.string(); }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config validation") {
  // Unknown keys are rejected.
  json config = {{"experiment", "spectrum"},
                 {"seed", 1},
                 {"chain", {{"fixture", "two-site-ising"}}},
                 {"typo_key", 1}};
  CHECK_THROWS_AS(cli::run_experiment("spectrum", config), Error);

  // Experiment mismatch is rejected.
  json mismatch = {{"experiment", "noise"}};
  CHECK_THROWS_AS(cli::validate_config(mismatch, "spectrum"), Error);

  // Nested unknown keys are rejected too.
  json nested = {{"experiment", "spectrum"},
                 {"chain", {{"fixture", "two-site-ising"}, {"bogus", 2}}}};
  CHECK_THROWS_AS(cli::run_experiment("spectrum", nested), Error);

  // Wrong types are rejected.
  json bad_seed = {{"experiment", "spectrum"}, {"seed", -4}};
  CHECK_THROWS_AS(cli::run_experiment("spectrum", bad_seed), Error);
}

TEST_CASE("config hash tracks semantic content only") {
  json a = {{"experiment", "spectrum"}, {"seed", 7}};
  json b = json::parse("{ \"seed\": 7,   \"experiment\": \"spectrum\" }");
  CHECK(cli::config_hash(a) == cli::config_hash(b));
  json c = a;
  c["seed"] = 8;
  CHECK(cli::config_hash(a) != cli::config_hash(c));
}

TEST_CASE("spectrum on the trivial pair fixture") {
  json config = {{"experiment", "spectrum"},
                 {"chain", {{"fixture", "two-site-ising"}}}};
  const cli::ResultBundle bundle = cli::run_experiment("spectrum", config);
  REQUIRE(bundle.tables.size() == 1);
  const cli::Table& t = bundle.tables[0];
  REQUIRE(t.rows.size() == 4);
  CHECK(t.rows[0][1] == doctest::Approx(-1.0));
  CHECK(t.rows[1][1] == doctest::Approx(-1.0));
  CHECK(t.rows[2][1] == doctest::Approx(1.0));
  CHECK(t.rows[3][1] == doctest::Approx(1.0));
  CHECK(!bundle.provenance.empty());
}

TEST_CASE("serialization round trip and byte stability") {
  json config = {{"experiment", "spectrum"},
                 {"seed", 3},
                 {"chain", {{"fixture", "two-site-ising"}}}};
  const cli::ResultBundle bundle = cli::run_experiment("spectrum", config);

  TempDir dir_a, dir_b;
  cli::serialize_bundle(bundle, dir_a.str());
  cli::serialize_bundle(bundle, dir_b.str());

  const std::string bytes_a = read_file(dir_a.path / "spectrum.tsv");
  const std::string bytes_b = read_file(dir_b.path / "spectrum.tsv");
  CHECK(bytes_a == bytes_b);

  // Parse -> serialize is a fixed point of the table encoding.
  const cli::Table parsed = cli::parse_table((dir_a.path / "spectrum.tsv").string());
  CHECK(parsed.columns == bundle.tables[0].columns);
  REQUIRE(parsed.rows.size() == bundle.tables[0].rows.size());
  for (std::size_t r = 0; r < parsed.rows.size(); ++r)
    for (std::size_t c = 0; c < parsed.rows[r].size(); ++c)
      CHECK(parsed.rows[r][c] ==
            doctest::Approx(bundle.tables[0].rows[r][c]).epsilon(1e-11));

  cli::ResultBundle rebundle = bundle;
  rebundle.tables[0] = parsed;
  TempDir dir_c;
  cli::serialize_bundle(rebundle, dir_c.str());
  CHECK(read_file(dir_c.path / "spectrum.tsv") == bytes_a);

  // Metadata carries the hash and table index.
  const json meta = json::parse(read_file(dir_a.path / "metadata.json"));
  CHECK(meta["config_hash"] == bundle.config_hash);
  CHECK(meta["tables"]["spectrum"] == "spectrum.tsv");
}

TEST_CASE("rerunning an identical config reproduces identical bytes") {
  json config = {{"experiment", "hierarchy-bench"},
                 {"seed", 11},
                 {"chain", {{"ratio", 0.5}}},
                 {"k_ladder", {1, 2, 4, 8}},
                 {"compare_levels", 4}};
  TempDir dir_a, dir_b;
  cli::serialize_bundle(cli::run_experiment("hierarchy-bench", config),
                        dir_a.str());
  cli::serialize_bundle(cli::run_experiment("hierarchy-bench", config),
                        dir_b.str());
  CHECK(read_file(dir_a.path / "hierarchy_convergence.tsv") ==
        read_file(dir_b.path / "hierarchy_convergence.tsv"));
}

TEST_CASE("seed override is recorded") {
  json config = {{"experiment", "spectrum"},
                 {"seed", 3},
                 {"chain", {{"fixture", "two-site-ising"}}}};
  const cli::ResultBundle bundle = cli::run_experiment("spectrum", config, 99);
  CHECK(bundle.seed == 99);
  CHECK(bundle.config["seed"] == 99);
}

TEST_CASE("noise experiment with zero amplitude has zero linewidths") {
  json config = {{"experiment", "noise"},
                 {"seed", 5},
                 {"sweep", {{"type", "ratio"}, {"values", {0.4}}}},
                 {"chain", {{"n_couplers", 5}}},
                 {"noise", {{"amplitude_uphi0", 0.0}}},
                 {"n_runs", 4},
                 {"tracked_levels", 6}};
  const cli::ResultBundle bundle = cli::run_experiment("noise", config);
  const cli::Table* stats = nullptr;
  for (const auto& t : bundle.tables)
    if (t.name == "level_stats") stats = &t;
  REQUIRE(stats != nullptr);
  // std_transition column is identically zero.
  const auto it = std::find(stats->columns.begin(), stats->columns.end(),
                            "std_transition[GHz]");
  REQUIRE(it != stats->columns.end());
  const std::size_t col = it - stats->columns.begin();
  for (const auto& row : stats->rows) CHECK(row[col] == 0.0);
}

TEST_CASE("failure marker is written") {
  TempDir dir;
  cli::write_failure_marker(dir.str(), "spectrum", "synthetic failure", 3);
  const json report = json::parse(read_file(dir.path / "FAILED.json"));
  CHECK(report["exit_code"] == 3);
  CHECK(report["experiment"] == "spectrum");
}

TEST_CASE("explicit chain specs are accepted") {
  json config = {
      {"experiment", "spectrum"},
      {"chain",
       {{"sites",
         {{{"epsilon_ghz", 0.0}, {"delta_ghz", 1.0}, {"role", "coupler"}}}},
        {"edges", json::array()}}}};
  const cli::ResultBundle bundle = cli::run_experiment("spectrum", config);
  CHECK(bundle.tables[0].rows.size() == 2);
  CHECK(bundle.tables[0].rows[0][1] == doctest::Approx(-0.5));
}
