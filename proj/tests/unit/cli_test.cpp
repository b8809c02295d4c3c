#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "downgrade/attacks.hpp"
#include "downgrade/scenario_io.hpp"

namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
  const int status = std::system((std::string(DOWNGRADE_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch() {
  auto d = fs::temp_directory_path() / "downgrade-cli-test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, ListSucceeds) { EXPECT_EQ(cli("list"), 0); }

TEST(Cli, RunMatchingAttack) {
  EXPECT_EQ(cli("run --attack 7"), 0);
  EXPECT_EQ(cli("run --attack 7 --patched --format md"), 0);
}

TEST(Cli, MatrixAllMatch) { EXPECT_EQ(cli("matrix --seed 3"), 0); }

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(cli("run --attack 99"), 2);
  EXPECT_EQ(cli("run --attack 1 --format xml"), 2);
  EXPECT_EQ(cli("session --scenario /nonexistent.json"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
}

TEST(Cli, MismatchExitsOne) {
  // An attack file whose declared damage the run cannot reproduce.
  const auto dir = scratch() / "mismatch";
  fs::create_directories(dir);
  auto spec = downgrade::get_attack(9);
  spec.declared.damage = downgrade::Damage::Broken;
  std::ofstream(dir / "09.json") << downgrade::attack_to_json(spec).dump(2);
  EXPECT_EQ(cli("matrix --data " + dir.string()), 1);
  fs::remove_all(dir);
}

TEST(Cli, SessionRunsScenarioFile) {
  const auto path = scratch() / "scenario.json";
  std::ofstream(path) << downgrade::scenario_to_json(downgrade::vulnerable_scenario(10)).dump(2);
  EXPECT_EQ(cli("session --scenario " + path.string()), 0);
}

TEST(Cli, ExportMatchesBundledData) {
  const auto dir = scratch() / "export";
  ASSERT_EQ(cli("export --dir " + dir.string()), 0);
  for (const auto& entry : fs::directory_iterator(dir / "attacks")) {
    std::ifstream a(entry.path()), b(downgrade::default_data_dir() / "attacks" / entry.path().filename());
    const std::string ta{std::istreambuf_iterator<char>(a), {}}, tb{std::istreambuf_iterator<char>(b), {}};
    EXPECT_EQ(ta, tb) << entry.path().filename();
  }
  fs::remove_all(dir);
}
