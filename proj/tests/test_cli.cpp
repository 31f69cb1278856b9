#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "ellcm/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("ellcm_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Run cli(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::path(testing::TempDir()) / "ellcm_cli_stdout.txt";
  const std::string cmd = env + " \"" ELLCM_CLI_PATH "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST(Cli, IdentitiesPassAndWriteTables) {
  const auto dir = scratch("identities");
  const auto r = cli("identities --tau 0+1i --points 100 --seed 7 --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = read_json(dir / "identities.json");
  EXPECT_EQ(j["schema"], 1);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["results"].size(), 24u);
  EXPECT_EQ(j["config"]["seed"], "7");
  EXPECT_TRUE(fs::exists(dir / "identities.csv"));
}

TEST(Cli, LowerHalfPlaneIsUsageError) {
  EXPECT_EQ(cli("identities --tau 0-1i").code, 1);
  EXPECT_EQ(cli("evolve --tau 0.2-0.5i").code, 1);
  EXPECT_EQ(cli("monodromy --tau-path i:-0.1i").code, 1);
}

TEST(Cli, UnreachableToleranceFails) {
  const auto dir = scratch("strict");
  EXPECT_EQ(cli("identities --tolerance 1e-30 --points 3 --heat-points 0 --out " + dir.string()).code,
            2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("lax-check --model nope").code, 1);
  EXPECT_EQ(cli("lax-check --rank x").code, 1);
  EXPECT_EQ(cli("lax-check --model simply-laced --family E6 --rank 3").code, 1);
  EXPECT_EQ(cli("evolve --t 1..1").code, 1);
  EXPECT_EQ(cli("evolve --no-such-flag").code, 1);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, CouplingsPrintsRenormalizedShortCoupling) {
  const auto r = cli("couplings --model bc --gs 1 --gl 2");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("g~_s^2 = g_s^2 + g_s g_l/2 = 2\n"), std::string::npos) << r.out;
  const auto t = cli("couplings --model twisted-bc --rank 1 --json");
  EXPECT_EQ(t.code, 0);
  EXPECT_EQ(json::parse(t.out)["couplings"]["inozemtsev_sq"].size(), 4u);
}

TEST(Cli, LaxCheckTwistedIsomonodromic) {
  const auto dir = scratch("lax");
  const auto r = cli("lax-check --model twisted-bc --rank 2 --mode isomonodromic --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = read_json(dir / "lax_check.json");
  EXPECT_LT(j["summary"]["isomonodromic"]["max_lax_residual"].get<double>(), 1e-6);
  EXPECT_EQ(j["samples"].size(), 20u);
}

TEST(Cli, LaxCheckDegenerateAndSpin) {
  const auto dir = scratch("lax_spin");
  EXPECT_EQ(cli("lax-check --model a-vector --rank 1 --out " + dir.string()).code, 0);
  EXPECT_EQ(cli("lax-check --model spin-sl --rank 3 --samples 5 --out " + dir.string()).code, 0);
  const auto csv = slurp(dir / "lax_check.csv");
  EXPECT_NE(csv.substr(0, csv.find('\n')).find("constraint_rate"), std::string::npos);
}

TEST(Cli, EvolveConservesHamiltonian) {
  const auto dir = scratch("evolve");
  const auto r = cli("evolve --model a-vector --rank 2 --mode isospectral --t 0..1 --out " +
                     dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = read_json(dir / "summary.json");
  EXPECT_LT(j["conservation"]["hamiltonian_drift"].get<double>(), 1e-9);
  const auto csv = slurp(dir / "trajectory.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 102);
}

TEST(Cli, CollisionIsNumericalAbort) {
  const auto dir = scratch("collision");
  const auto r = cli("evolve --g 0.3i --q 0.2,-0.2 --p -1,1 --out " + dir.string());
  EXPECT_EQ(r.code, 3) << r.out;
  const auto j = read_json(dir / "summary.json");
  EXPECT_EQ(j["status"], "aborted");
  EXPECT_GT(j["failed_at"].get<double>(), 0.0);
}

TEST(Cli, MonodromyTwistedRankOne) {
  const auto dir = scratch("monodromy");
  const auto r = cli("monodromy --model twisted-bc --rank 1 --tau-path i:i+0.1i --control --out " +
                     dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = read_json(dir / "monodromy.json");
  EXPECT_LT(j["drift"]["max_drift"].get<double>(), 1e-5);
  EXPECT_GT(j["control"]["max_drift"].get<double>(), 1e-3);
  EXPECT_EQ(j["monodromy"]["gamma_local"].size(), 4u);
  EXPECT_EQ(j["drift"]["taus"].size(), 5u);
  EXPECT_EQ(slurp(dir / "drift.svg").rfind("<svg", 0), 0u);
}

TEST(Cli, OutputsAreDeterministic) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& d : {a, b}) {
    ASSERT_EQ(cli("evolve --model spin-sl --rank 3 --samples 11 --seed 3 --out " + d.string()).code, 0);
    ASSERT_EQ(cli("lax-check --model bc --samples 4 --seed 3 --out " + d.string()).code, 0);
  }
  for (const auto* f : {"trajectory.csv", "summary.json", "lax_check.csv", "lax_check.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const auto c = scratch("det_c");
  ASSERT_EQ(cli("evolve --model spin-sl --rank 3 --samples 11 --seed 4 --out " + c.string()).code, 0);
  EXPECT_NE(slurp(a / "trajectory.csv"), slurp(c / "trajectory.csv"));
}

TEST(Cli, ConfigFileMergesUnderFlags) {
  const auto dir = scratch("config");
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"model": "bc", "rank": 3, "samples": 2, "seed": 11})";
  }
  ASSERT_EQ(cli("lax-check --config " + (dir / "cfg.json").string() + " --rank 1 --out " +
                dir.string())
                .code,
            0);
  const auto j = read_json(dir / "lax_check.json");
  EXPECT_EQ(j["config"]["model"], "bc");
  EXPECT_EQ(j["config"]["rank"], "1");
  EXPECT_EQ(j["config"]["seed"], "11");
  EXPECT_EQ(j["samples"].size(), 4u);  // two samples, both modes
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"not_an_option": 1})";
  }
  EXPECT_EQ(cli("lax-check --config " + (dir / "bad.json").string()).code, 1);
  EXPECT_EQ(cli("lax-check --config " + (dir / "missing.json").string()).code, 1);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto dir = scratch("env");
  EXPECT_EQ(cli("evolve --samples 3", "ECM_OUTPUT_DIR=" + dir.string()).code, 0);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Cli, ReportBundlesEverything) {
  const auto dir = scratch("report");
  const auto r = cli("report --model bc --rank 2 --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  for (const auto* f : {"report.json", "couplings.json", "root_system.json",
                        "identities/identities.json", "lax-check/lax_check.json",
                        "evolve/summary.json", "monodromy/monodromy.json", "monodromy/drift.svg"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto j = read_json(dir / "report.json");
  EXPECT_EQ(j["exit_code"], 0);
  EXPECT_EQ(j["version"], "0.1.0");
  const auto rs = read_json(dir / "root_system.json")["root_system"];
  EXPECT_EQ(rs["family"], "BC");
  EXPECT_EQ(rs["roots"].size(), 12u);
}

TEST(Cli, InProcessEntryPoint) {
  std::ostringstream out, err;
  EXPECT_EQ(ellcm::run_cli({"couplings", "--model", "bc", "--gs", "1", "--gl", "2"}, out, err), 0);
  EXPECT_NE(out.str().find("= 2\n"), std::string::npos);
  EXPECT_EQ(ellcm::run_cli({"identities", "--tau", "-i"}, out, err), 1);
  EXPECT_NE(err.str().find("upper half plane"), std::string::npos);
}
