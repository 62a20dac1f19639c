#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ds/fields.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = "cli_scratch";

int run(const std::string& args) {
  const std::string cmd =
      std::string(DSTOOL_PATH) + " " + args + " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string base_config(const std::string& extra_top = "") {
  return std::string(R"({
  "seed": {
    "q0": [0.6, -0.2], "r0": [-0.35, 0.15],
    "m0": [0.8, 0.3], "n0": [-0.55, 0.7],
    "alpha": [0.13, 0.07], "beta": [-0.21, 0.11],
    "K": [0.37, -0.05], "A0": [0.12, 0.04]
  },
  "steps": [
    {
      "lambda": [1.1, 0.4], "lambda_prime": [0.7, -0.6],
      "a": [0.9, 0.2],
      "f": [[[1.2, 0.1], [0, 0]], [[0, 0], [0.95, 0.35]]],
      "lock": true
    }
  ],
  "grid": {"x_min": -1, "x_max": 1, "y_min": -1, "y_max": 1,
           "nx": 12, "ny": 12, "t": 0.1})") +
         extra_top + "\n}\n";
}

struct Scratch {
  Scratch() {
    fs::remove_all(kScratch);
    fs::create_directories(kScratch);
  }
};

}  // namespace

TEST_CASE("generate writes the expected files and is byte-deterministic") {
  Scratch scratch;
  put(kScratch / "run.json", base_config());
  const std::string cfg = (kScratch / "run.json").string();

  CHECK(run("generate --config " + cfg + " --out " + (kScratch / "a").string()) == 0);
  CHECK(fs::exists(kScratch / "a" / "fields_n0.csv"));
  CHECK(fs::exists(kScratch / "a" / "fields_n1.csv"));
  CHECK(fs::exists(kScratch / "a" / "resolved_config.json"));
  CHECK(!fs::exists(kScratch / "a" / "fields_n2.csv"));

  CHECK(run("generate --config " + cfg + " --out " + (kScratch / "b").string()) == 0);
  const std::string bytes = slurp(kScratch / "a" / "fields_n1.csv");
  REQUIRE(!bytes.empty());
  CHECK(bytes == slurp(kScratch / "b" / "fields_n1.csv"));

  // The resolved echo records the computed lock phases and shifted constants.
  const std::string echoed = slurp(kScratch / "a" / "resolved_config.json");
  CHECK(echoed.find("level_constants") != std::string::npos);
  CHECK(echoed.find("\"m\"") != std::string::npos);
}

TEST_CASE("verify passes on a locked one-step run and writes the report") {
  Scratch scratch;
  put(kScratch / "run.json", base_config());
  const std::string cfg = (kScratch / "run.json").string();
  const fs::path out = kScratch / "v";
  CHECK(run("verify --config " + cfg + " --out " + out.string()) == 0);
  const std::string report = slurp(out / "report.txt");
  REQUIRE(!report.empty());
  CHECK(report.find("PASS") != std::string::npos);
  CHECK(report.find("FAIL") == std::string::npos);
  CHECK(report.find("seed.spatial") != std::string::npos);
  CHECK(report.find("level1.pde.q") != std::string::npos);
  CHECK(report.find("level1.lax.s0") != std::string::npos);
  CHECK(report.find("step1.identities") != std::string::npos);
  CHECK(report.find("chain.jets") != std::string::npos);
}

TEST_CASE("compare distinguishes identical, perturbed, and misshapen inputs") {
  Scratch scratch;
  put(kScratch / "run.json", base_config());
  const std::string cfg = (kScratch / "run.json").string();
  const fs::path out = kScratch / "c";
  REQUIRE(run("generate --config " + cfg + " --out " + out.string()) == 0);
  const std::string n1 = (out / "fields_n1.csv").string();

  CHECK(run("compare " + n1 + " " + n1) == 0);

  ds::FieldGrid fg = ds::read_csv(n1);
  fg.q[7] += ds::cd(1e-3, 0.0);
  const std::string perturbed = (out / "perturbed.csv").string();
  ds::write_csv(fg, perturbed);
  CHECK(run("compare " + n1 + " " + perturbed + " --max-diff 1e-6") == 1);
  CHECK(run("compare " + n1 + " " + perturbed + " --max-diff 1e-2") == 0);

  ds::GridSpec g5 = fg.grid;
  g5.nx = 5;
  g5.ny = 5;
  ds::FieldGrid small;
  small.grid = g5;
  small.q.assign(25, ds::cd{});
  small.r.assign(25, ds::cd{});
  small.A1.assign(25, ds::cd{});
  small.A2.assign(25, ds::cd{});
  const std::string shaped = (out / "small.csv").string();
  ds::write_csv(small, shaped);
  CHECK(run("compare " + n1 + " " + shaped) == 1);
}

TEST_CASE("configuration mistakes exit with code 2") {
  Scratch scratch;
  put(kScratch / "no_seed.json", "{\"grid\": {\"nx\": 12, \"ny\": 12}}\n");
  CHECK(run("generate --config " + (kScratch / "no_seed.json").string()) == 2);

  std::string degenerate = base_config();
  const std::string from = "\"lambda_prime\": [0.7, -0.6]";
  degenerate.replace(degenerate.find(from), from.size(),
                     "\"lambda_prime\": [1.1, 0.4]");
  put(kScratch / "degenerate.json", degenerate);
  CHECK(run("generate --config " + (kScratch / "degenerate.json").string()) == 2);

  put(kScratch / "run.json", base_config());
  const std::string cfg = (kScratch / "run.json").string();
  CHECK(run("verify --config " + cfg + " --tolerance bogus=1e-5") == 2);
  CHECK(run("verify --config " + cfg + " --tolerance pde=-1") == 2);
  CHECK(run("generate --config " + cfg + " --depth 5") == 2);
  CHECK(run("generate --config " + (kScratch / "missing.json").string()) == 2);
  CHECK(run("frobnicate --config " + cfg) == 2);
  CHECK(run("generate") == 2);
}

TEST_CASE("spectral samples on a step pole exit with code 3") {
  Scratch scratch;
  put(kScratch / "pole.json",
      base_config(",\n  \"lambda_samples\": [[1.1, 0.4]]"));
  CHECK(run("verify --config " + (kScratch / "pole.json").string() + " --out " +
            (kScratch / "p").string()) == 3);
}

TEST_CASE("depth restriction truncates the chain") {
  Scratch scratch;
  put(kScratch / "run.json", base_config());
  const std::string cfg = (kScratch / "run.json").string();
  const fs::path out = kScratch / "d";
  CHECK(run("generate --config " + cfg + " --depth 0 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "fields_n0.csv"));
  CHECK(!fs::exists(out / "fields_n1.csv"));
}
