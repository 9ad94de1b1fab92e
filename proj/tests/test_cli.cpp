#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(std::string const& args) {
  std::string const cmd = std::string(SELSEG_CLI_PATH) + " " + args + " 2>&1";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  int const status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(fs::path const& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(std::string const& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("selseg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(std::string const& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ArgumentErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("segment --markers m.json").code, 2);
  EXPECT_EQ(run("sweep --fixture nope --out " + path("x")).code, 2);
  EXPECT_EQ(run("segment --image a.png --markers m.json --model bogus").code, 2);
  EXPECT_EQ(run("robustness --fixture disc --size 32 --trials 0 --out " + path("x")).code, 2);
}

TEST_F(Cli, MissingFilesExitThree) {
  EXPECT_EQ(run("segment --image /nonexistent/a.png --markers /nonexistent/m.json").code, 3);
}

TEST_F(Cli, FixtureThenSegmentReportsTc) {
  std::string const scene = path("disc");
  ASSERT_EQ(run("fixture --name disc --size 48 --out " + scene).code, 0);
  Outcome const r = run("segment --image " + scene + "/image.pgm --markers " + scene +
                    "/markers.json --gt " + scene + "/gt.pgm --out " + path("mask.png"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto const at = r.out.find("TC=");
  ASSERT_NE(at, std::string::npos) << r.out;
  EXPECT_GE(std::stod(r.out.substr(at + 3)), 0.99);
  EXPECT_TRUE(fs::exists(path("mask.png")));
}

TEST_F(Cli, StrictFlagReportsNonConvergence) {
  std::string const scene = path("disc");
  ASSERT_EQ(run("fixture --name disc --size 32 --out " + scene).code, 0);
  std::string const base =
      "segment --image " + scene + "/image.pgm --markers " + scene + "/markers.json --max-iters 2";
  EXPECT_EQ(run(base).code, 0);
  EXPECT_EQ(run(base + " --strict").code, 4);
}

TEST_F(Cli, GavAcceptsMixedSignExponents) {
  std::string const scene = path("two");
  ASSERT_EQ(run("fixture --name two-equal --size 32 --out " + scene).code, 0);
  Outcome const r = run("segment --image " + scene + "/image.pgm --markers " + scene +
                    "/markers.json --model gav --beta1 4 --beta2 -2");
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(Cli, SweepWritesOneRowPerCell) {
  Outcome const r = run("sweep --fixture disc --size 32 --out " + path("heat"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::string const csv = slurp(path("heat.csv"));
  EXPECT_EQ(lines(csv), 1u + 324u);
  EXPECT_TRUE(fs::exists(path("heat.json")));
  EXPECT_TRUE(fs::exists(path("heat.png")));
}

TEST_F(Cli, RobustnessIsDeterministicForASeed) {
  std::string const args = "robustness --fixture disc --size 32 --trials 5 --seed 7 --out ";
  ASSERT_EQ(run(args + path("a")).code, 0);
  ASSERT_EQ(run(args + path("b")).code, 0);
  std::string const a = slurp(path("a.csv"));
  EXPECT_EQ(lines(a), 6u);
  EXPECT_EQ(a, slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}
