#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("gattaca_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    write("three.bnet", gattaca::testing::kThreeNodeModel);
    write("switch.bnet", gattaca::testing::kSwitchModel);
    std::string wide = "targets, factors\n";
    for (int i = 0; i < 30; ++i) wide += "v" + std::to_string(i) + ", !v" + std::to_string(i) + "\n";
    write("wide.bnet", wide);
  }
  void TearDown() override { fs::remove_all(dir); }

  void write(const std::string& name, std::string_view text) const { std::ofstream(dir / name) << text; }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(GATTACA_CLI) + " " + args + " > " + (dir / "stdout.txt").string() +
                            " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string model(const std::string& name) const { return "--model " + (dir / name).string(); }
  std::string out(const std::string& name) const { return (dir / name).string(); }

  fs::path dir;
};

TEST_F(Cli, AttractorReport) {
  ASSERT_EQ(run("attractors " + model("three.bnet") + " --out " + out("a.json")), 0);
  const auto j = nlohmann::json::parse(read(dir / "a.json"));
  EXPECT_EQ(j["states"].get<int>(), 8);
  EXPECT_EQ(j["attractors"].size(), 4u);
}

TEST_F(Cli, ConstantNetworkHasOneAttractor) {
  write("const.bnet", "targets, factors\na, 1\n");
  ASSERT_EQ(run("attractors " + model("const.bnet") + " --out " + out("c.json")), 0);
  EXPECT_EQ(nlohmann::json::parse(read(dir / "c.json"))["attractors"].size(), 1u);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("attractors " + model("missing.bnet")), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("attractors " + model("three.bnet") + " --env x2=1"), 2);
  EXPECT_EQ(run("attractors " + model("wide.bnet")), 3);
  EXPECT_EQ(run("oracle " + model("three.bnet") + " --env x1=1 --target x2=0"), 4);
}

TEST_F(Cli, OracleLengths) {
  ASSERT_EQ(run("oracle " + model("three.bnet") + " --target x2=0 --out " + out("o.json")), 0);
  const auto j = nlohmann::json::parse(read(dir / "o.json"));
  EXPECT_DOUBLE_EQ(j["acpl"].get<double>(), 1.0);
  ASSERT_EQ(run("oracle " + model("switch.bnet") + " --target x5=1 --per-condition --out " + out("s.json")), 0);
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(read(dir / "s.json"))["acpl"].get<double>(), 1.0);
}

TEST_F(Cli, PasipIsReproducible) {
  const std::string args = "pasip " + model("three.bnet") + " --env x1=0 --seed 5 --out ";
  ASSERT_EQ(run(args + out("r1.json")), 0);
  ASSERT_EQ(run(args + out("r2.json")), 0);
  const std::string first = read(dir / "r1.json");
  EXPECT_EQ(first, read(dir / "r2.json"));
  EXPECT_EQ(nlohmann::json::parse(first).size(), 2u);
}

TEST_F(Cli, ConfigDumpParsesBack) {
  ASSERT_EQ(run("config --dump"), 0);
  const std::string dumped = read(dir / "stdout.txt");
  write("run.ini", dumped);
  ASSERT_EQ(run("config --dump --config " + out("run.ini")), 0);
  EXPECT_EQ(read(dir / "stdout.txt"), dumped);
  write("bad.ini", "[train]\nnot_a_key = 1\n");
  EXPECT_EQ(run("config --config " + out("bad.ini")), 2);
}

TEST_F(Cli, SimulateCsv) {
  ASSERT_EQ(run("simulate " + model("three.bnet") + " --steps 5 --start 0 --out " + out("t.csv")), 0);
  EXPECT_EQ(read(dir / "t.csv"), "step,state_hex\n0,0\n1,0\n2,0\n3,0\n4,0\n5,0\n");
}

}  // namespace
