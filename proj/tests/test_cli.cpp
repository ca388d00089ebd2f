#include <gtest/gtest.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tfa/errors.hpp"
#include "tfa/forms.hpp"
#include "tfa/pipeline.hpp"

using namespace tfa;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"([grid]
N = 256
band = 24
jq_min = 0
jq_max = 1
beta = 0, -1, 2
kmax = 12
modes = 8

[constants]
K = 4

[sweep]
M1 = 0..2
band = 8
kmax = 6
modes = 6

[run]
seed = 3
threads = 1
)";

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("tfa_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  std::string cmd = std::string(TFA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto at = s.find(from);
  if (at != std::string::npos) s.replace(at, from.size(), to);
  return s;
}

}  // namespace

TEST(Config, ParsesSectionsAndRanges) {
  RunConfig c = parse_config(kSmall);
  EXPECT_EQ(c.N, 256);
  EXPECT_EQ(c.band, 24);
  EXPECT_TRUE(c.has_sweep);
  EXPECT_EQ(c.M1, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(parse_config("[sweep]\nM1 = 1, 4, 9\n").M1, (std::vector<int>{1, 4, 9}));
  EXPECT_FALSE(parse_config("[grid]\nN = 512\n").has_sweep);
}

TEST(Config, RejectsBadInput) {
  auto key_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  EXPECT_NE(key_of("[grids]\nN = 256\n").find("grids"), std::string::npos);
  EXPECT_NE(key_of("[grid]\nNN = 256\n").find("grid.NN"), std::string::npos);
  EXPECT_NE(key_of("[grid]\nN = 300\n").find("grid.N"), std::string::npos);
  EXPECT_NE(key_of("[grid]\nN = abc\n").find("grid.N"), std::string::npos);
  EXPECT_NE(key_of("[grid]\nbeta = 1, 1, 2\n").find("grid.beta"), std::string::npos);
  EXPECT_NE(key_of("[constants]\nK = 1\n"), "accepted");
  EXPECT_NE(key_of("[exponents]\np = 2, 2, 2\n").find("exponents.p"), std::string::npos);
  EXPECT_NE(key_of("[sweep]\nM1 = 5..2\n").find("sweep.M1"), std::string::npos);
  EXPECT_NE(key_of("[run]\nseed = -4\n").find("run.seed"), std::string::npos);
}

TEST(TileDump, RoundTrips) {
  RunConfig c = parse_config(kSmall);
  Decomposition d = configured_decomposition(c);
  std::string a = tileset_json(d);
  Decomposition e = tileset_from_json(a);
  EXPECT_EQ(tileset_json(e), a);
  EXPECT_EQ(e.tiles.size(), d.tiles.size());
  EXPECT_THROW(tileset_from_json("{\"v\": [1]}"), ConfigError);
}

TEST(Cli, ExitCodes) {
  fs::path dir = scratch("exit");
  fs::path good = write(dir / "good.ini", kSmall);
  fs::path out = dir / "out";
  EXPECT_EQ(cli("decompose --config " + good.string() + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "tiles.json"));
  EXPECT_TRUE(fs::exists(out / "run_manifest.json"));

  fs::path nosweep = write(dir / "nosweep.ini", replace(kSmall, "[sweep]\nM1 = 0..2\nband = 8\nkmax = 6\nmodes = 6\n", ""));
  EXPECT_EQ(cli("sweep --config " + nosweep.string() + " --out " + out.string()), 2);
  EXPECT_EQ(cli("decompose --config " + (dir / "missing.ini").string()), 2);
  EXPECT_EQ(cli("decompose --config " + good.string() + " --bogus"), 2);
  EXPECT_EQ(cli("verify --suite nope --config " + good.string() + " --out " + out.string()), 2);

  // K = 2 leaves residue families that cannot be adjusted
  fs::path k2 = write(dir / "k2.ini", replace(kSmall, "K = 4", "K = 2"));
  EXPECT_EQ(cli("decompose --config " + k2.string() + " --out " + out.string()), 3);
  auto manifest = nlohmann::json::parse(slurp(out / "run_manifest.json"));
  EXPECT_EQ(manifest["exit_code"], 3);
  fs::path k2ok = write(dir / "k2ok.ini", replace(kSmall, "K = 4", "K = 2\nallow_overflow = true"));
  EXPECT_EQ(cli("decompose --config " + k2ok.string() + " --out " + out.string()), 0);
}

TEST(Cli, CorruptedDumpFailsVerify) {
  // three nested scales whose adjusted intervals break transitivity of the tile order
  auto D = [](int x) { return Dyadic::from_int(x).str(); };
  auto cube = [&](int jq, std::vector<std::pair<int, int>> adj) {
    nlohmann::json c{{"jq", jq}, {"j", 4 * jq}};
    nlohmann::json ctr = nlohmann::json::array(), a = nlohmann::json::array();
    for (auto [lo, hi] : adj) {
      ctr.push_back(Dyadic::ratio(lo + hi, 1).str());
      a.push_back({D(lo), D(hi)});
    }
    c["center"] = ctr;
    c["adjusted"] = a;
    return c;
  };
  nlohmann::json j;
  j["v"] = {-3.0, 2.0, 1.0};
  j["constants"] = {{"C0", 2}, {"K", 4}, {"Ndecay", 8}, {"lattice_shift", 2}};
  j["cubes"] = {cube(0, {{100, 101}, {0, 1}, {200, 201}}), cube(1, {{0, 10}, {-1, 2}, {300, 301}}),
                cube(2, {{-5, 15}, {50, 51}, {400, 401}})};
  j["families"] = {{0, 1, 2}};
  j["tiles"] = nlohmann::json::array();

  fs::path dir = scratch("corrupt");
  fs::path cfg = write(dir / "c.ini", kSmall);
  fs::path dump = write(dir / "tiles.json", j.dump());
  fs::path out = dir / "out";
  EXPECT_EQ(cli("verify --suite tiles --input " + dump.string() + " --config " + cfg.string() + " --out " +
                out.string()),
            1);
  auto v = nlohmann::json::parse(slurp(out / "verify.json"));
  EXPECT_FALSE(v["pass"].get<bool>());
  bool witnessed = false;
  for (const auto& r : v["invariants"])
    if (r["invariant"] == "order-transitivity" && !r["pass"].get<bool>()) witnessed = true;
  EXPECT_TRUE(witnessed);

  // the clean dump of the same run passes
  EXPECT_EQ(cli("decompose --config " + cfg.string() + " --out " + out.string()), 0);
  EXPECT_EQ(cli("verify --suite tiles --input " + (out / "tiles.json").string() + " --config " + cfg.string() +
                " --out " + out.string()),
            0);
}

TEST(Cli, DeterministicOutputs) {
  fs::path dir = scratch("det");
  fs::path cfg = write(dir / "c.ini", kSmall);
  for (const char* cmd : {"decompose", "select", "project", "evaluate", "sweep"}) {
    fs::path a = dir / "a", b = dir / "b";
    ASSERT_EQ(cli(std::string(cmd) + " --config " + cfg.string() + " --out " + a.string()), 0) << cmd;
    ASSERT_EQ(cli(std::string(cmd) + " --config " + cfg.string() + " --threads 3 --out " + b.string()), 0) << cmd;
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().filename() == "run_manifest.json") continue;
      EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << cmd << " " << e.path().filename();
    }
  }
  fs::path c = dir / "c", e = dir / "e";
  ASSERT_EQ(cli("select --config " + cfg.string() + " --out " + c.string()), 0);
  ASSERT_EQ(cli("select --config " + cfg.string() + " --seed 11 --out " + e.string()), 0);
  EXPECT_NE(slurp(c / "selection.csv"), slurp(e / "selection.csv"));
}

TEST(Cli, ShippedConfigsParse) {
  RunConfig d = load_config(TFA_CONFIG_DIR "/default.ini");
  EXPECT_TRUE(d.has_sweep);
  EXPECT_EQ(d.M1.size(), 11u);
  EXPECT_NO_THROW(load_config(TFA_CONFIG_DIR "/small.ini"));
}

TEST(Cli, DecomposeExamples) {
  fs::path dir = scratch("decomp");
  // beta = (0, 2, 1) is v = (1, 1, -2)
  fs::path nondeg = write(dir / "nd.ini", replace(kSmall, "beta = 0, -1, 2", "beta = 0, 2, 1"));
  ASSERT_EQ(cli("decompose --config " + nondeg.string() + " --out " + (dir / "nd").string()), 0);
  auto g = nlohmann::json::parse(slurp(dir / "nd" / "geometry.json"));
  EXPECT_EQ(g["v"], (std::vector<double>{-2, 1, 1}));
  EXPECT_GT(g["cubes"].size(), 0u);

  fs::path empty = write(dir / "e.ini", replace(kSmall, "jq_max = 1", "jq_max = -1"));
  ASSERT_EQ(cli("decompose --config " + empty.string() + " --out " + (dir / "e").string()), 0);
  auto t = nlohmann::json::parse(slurp(dir / "e" / "tiles.json"));
  EXPECT_TRUE(t["cubes"].empty());
  EXPECT_TRUE(t["tiles"].empty());
  fs::path bad = write(dir / "b.ini", replace(kSmall, "jq_max = 1", "jq_max = -2"));
  EXPECT_EQ(cli("decompose --config " + bad.string() + " --out " + (dir / "b").string()), 2);
}

TEST(Cli, SweepMatchesLibrary) {
  fs::path dir = scratch("sweep");
  fs::path cfg = write(dir / "s.ini", replace(replace(kSmall, "M1 = 0..2", "M1 = 3"), "N = 256", "N = 1024"));
  ASSERT_EQ(cli("sweep --config " + cfg.string() + " --out " + (dir / "o").string()), 0);
  RunConfig c = load_config(cfg);
  SweepConfig sc;
  sc.M1 = c.M1;
  sc.N = c.N;
  sc.band = c.sweep_band;
  sc.kmax = c.kmax;
  sc.modes = c.modes;
  sc.seed = c.seed;
  EXPECT_EQ(slurp(dir / "o" / "sweep.csv"), sweep_csv(uniformity_sweep(sc)));
}

TEST(Cli, ThreePointSweepSmoke) {
  fs::path dir = scratch("smoke");
  std::string text = slurp(TFA_CONFIG_DIR "/default.ini");
  fs::path cfg = write(dir / "s.ini", replace(text, "M1 = 0..10", "M1 = 0, 5, 10"));
  auto t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(cli("sweep --config " + cfg.string() + " --out " + (dir / "o").string()), 0);
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(s, 60.0);
  std::istringstream rows(slurp(dir / "o" / "sweep.csv"));
  std::string line;
  int n = 0;
  while (std::getline(rows, line)) ++n;
  EXPECT_EQ(n, 4);
}
