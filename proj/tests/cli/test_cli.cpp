#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kWork = fs::path(SDS_CLI_WORK_DIR);

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  std::ofstream(p) << text;
  return p;
}

struct Run {
  int code;
  std::string err;
};

Run sds(const std::string& args, const std::string& env = "") {
  const fs::path err = kWork / "stderr.txt";
  fs::create_directories(kWork);
  const std::string cmd = env + " '" SDS_BINARY "' " + args + " > /dev/null 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), slurp(err)};
}

const char* kSimulate = R"(
kind = "simulate"
[system]
family = "reflected_affine"
a_law = {type = "lognormal", mu = -0.1, sigma = 0.8}
b_law = {type = "exponential", rate = 1.0}
[plan]
horizon = 400
replicas = 150
seed = 4
starting_points = [0.0, 3.0]
[simulate]
format = "binary"
)";

}  // namespace

TEST_CASE("version flag") { CHECK(sds("--version").code == 0); }

TEST_CASE("dyadic witness config reports 2/3 at every epoch") {
  const fs::path out = kWork / "dyadic";
  fs::remove_all(out);
  const auto r = sds("run '" SDS_CONFIG_DIR "/dyadic_witness.toml' --out '" + out.string() + "'");
  REQUIRE(r.code == 0);
  const json rep = json::parse(slurp(out / "report.json"));
  const auto& epochs = rep["result"]["epochs"];
  REQUIRE(epochs.size() == 10);
  for (const auto& e : epochs) CHECK(e["distance"] == "2/3");
  const json man = json::parse(slurp(out / "manifest.json"));
  CHECK(man["kind"] == "dyadic");
  CHECK(man["seed"] == 7);
  CHECK(man["config"]["dyadic"]["y"] == "1/3");
  CHECK(man.contains("wall_time_seconds"));
  CHECK(fs::exists(out / "dyadic_epochs.csv"));
}

TEST_CASE("configuration errors exit with 2 and name the key") {
  auto r = sds("run '" SDS_CONFIG_DIR "/bad_horizon.toml' --out '" + (kWork / "bad").string() + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("plan.horizon") != std::string::npos);

  const auto unknown = write_config("unknown.toml", "kind = \"dyadic\"\n[dyadic]\nepoch = 3\n");
  r = sds("run '" + unknown.string() + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("dyadic.epoch: unknown key") != std::string::npos);

  CHECK(sds("run /nonexistent.toml").code == 2);
  CHECK(sds("run").code == 2);
  CHECK(sds("run x.toml --workers 0").code == 2);
  CHECK(sds("fly").code == 2);
}

TEST_CASE("data files do not depend on the worker count") {
  const auto cfg = write_config("sim.toml", kSimulate);
  REQUIRE(sds("run '" + cfg.string() + "' --workers 1 --out '" + (kWork / "w1").string() + "'").code == 0);
  REQUIRE(sds("run '" + cfg.string() + "' --workers 3 --out '" + (kWork / "w3").string() + "'").code == 0);
  const std::string a = slurp(kWork / "w1" / "trajectories.bin");
  CHECK(a.size() == 8 + 8 + 2 * 8 + 150 * (16 + 401 * 8 * 4));
  CHECK(a == slurp(kWork / "w3" / "trajectories.bin"));
  CHECK(slurp(kWork / "w1" / "report.json") == slurp(kWork / "w3" / "report.json"));
}

TEST_CASE("seed override and output root") {
  const auto cfg = write_config("seeded.toml", kSimulate);
  const fs::path root = kWork / "root";
  fs::remove_all(root);
  REQUIRE(sds("run '" + cfg.string() + "' --seed-override 99", "SDS_OUTPUT_ROOT='" + root.string() + "'").code == 0);
  const json man = json::parse(slurp(root / "seeded" / "manifest.json"));
  CHECK(man["seed"] == 99);
  REQUIRE(sds("run '" + cfg.string() + "' --out '" + (kWork / "s4").string() + "'").code == 0);
  CHECK(slurp(root / "seeded" / "trajectories.bin") != slurp(kWork / "s4" / "trajectories.bin"));
}

TEST_CASE("invariant run for Exp(1) steps") {
  const fs::path out = kWork / "invariant";
  const auto r = sds("run '" SDS_CONFIG_DIR "/invariant_exponential.toml' --out '" + out.string() + "'");
  REQUIRE(r.code == 0);
  const json rep = json::parse(slurp(out / "report.json"));
  CHECK(rep["result"]["ks"].get<double>() <= 0.02);
  CHECK(fs::exists(out / "histogram.csv"));
}
