#include <wmapf/ipp.hpp>
#include <wmapf/warehouse.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace wmapf;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir = fs::temp_directory_path() / ("wmapf_cli_" + std::to_string(::getpid()) + "_"
                                       + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int run(const std::string& args, std::string* out = nullptr) const
  {
    const fs::path log = dir / "stdout.txt";
    const std::string cmd = "cd '" + dir.string() + "' && WMAPF_OUTPUT_DIR='" + dir.string() + "' '"
                            WMAPF_CLI "' " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    if (out)
      *out = slurp(log);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p)
  {
    std::ifstream is(p);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  void small_instance()
  {
    ASSERT_EQ(run("generate-layout --template 1row --shelves 3 --positions 6 --out layout.json"), 0);
    ASSERT_EQ(run("generate-scenario --layout layout.json --orders 3 --seed 4 --out scen.json"), 0);
  }

  fs::path dir;
};

} // namespace

TEST_F(Cli, GenerateLayoutTemplates)
{
  ASSERT_EQ(run("generate-layout --template 3row --shelves 5 --workstations 2 --out l3.json"), 0);
  const auto l = load_layout(dir / "l3.json");
  EXPECT_EQ(l.workstations.size(), 2u);
  ASSERT_EQ(run("generate-layout --template large --out big.json"), 0);
  const auto big = load_layout(dir / "big.json");
  EXPECT_EQ(big.workstations.size(), 5u);
  EXPECT_EQ(big.agents.size(), 10u);
  EXPECT_EQ(run("generate-layout --template 4row"), 1);
  EXPECT_EQ(run("generate-layout --shelves 0"), 1);
}

TEST_F(Cli, PlanIsDeterministicAndPrintsItsReport)
{
  small_instance();
  std::string a, b;
  ASSERT_EQ(run("plan --layout layout.json --scenario scen.json --robots 2 --tick 1 --out p1.json", &a), 0);
  ASSERT_EQ(run("plan --layout layout.json --scenario scen.json --robots 2 --tick 1 --out p2.json", &b), 0);
  EXPECT_NE(a.find("instance,robots,feasible"), std::string::npos);
  EXPECT_NE(a.find("\np1,2,1,"), std::string::npos);
  auto ja = read_json_file(dir / "p1.json");
  auto jb = read_json_file(dir / "p2.json");
  // Everything but wall-clock timings.
  for (auto* j : {&ja, &jb})
  {
    (*j)["stats"].erase("wall_time");
    for (auto& t : (*j)["tasks"])
      t.erase("wall_time");
  }
  EXPECT_EQ(ja, jb);
  EXPECT_TRUE(plan_from_json(ja).plan.feasible);
}

TEST_F(Cli, InfeasibleAndErrorExitCodes)
{
  small_instance();
  // Parked robots block the single-lane aisles for good.
  std::string out;
  EXPECT_EQ(run("plan --layout layout.json --scenario scen.json --robots 2 --tick 1 --no-waiting-reservation "
                "--out bad.json", &out), 2);
  EXPECT_NE(out.find("infeasible"), std::string::npos);
  EXPECT_FALSE(plan_from_json(read_json_file(dir / "bad.json")).plan.feasible);
  EXPECT_EQ(run("simulate --plan bad.json"), 1);

  EXPECT_EQ(run("plan --layout layout.json --scenario scen.json --robots 9"), 1);
  EXPECT_EQ(run("plan --layout missing.json --scenario scen.json"), 1);
  EXPECT_EQ(run("plan --layout layout.json"), 1);
  EXPECT_EQ(run("simulate --plan nothing.json"), 1);
}

TEST_F(Cli, PlanSimulateReportRoundTrip)
{
  small_instance();
  ASSERT_EQ(run("plan --layout layout.json --scenario scen.json --robots 3 --tick 1 --out runs/r.json"), 0);
  std::string s1, s2;
  ASSERT_EQ(run("simulate --plan runs/r.json --seeds 5 --seed 7 --out runs/r.ttf.csv --trace runs/r.jsonl", &s1), 0);
  EXPECT_NE(s1.find("# seed 7"), std::string::npos);
  const auto first = slurp(dir / "runs/r.ttf.csv");
  ASSERT_EQ(run("simulate --plan runs/r.json --seeds 5 --seed 7 --out runs/r.ttf.csv", &s2), 0);
  EXPECT_EQ(slurp(dir / "runs/r.ttf.csv"), first);
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 6);
  EXPECT_FALSE(slurp(dir / "runs/r.jsonl").empty());

  ASSERT_EQ(run("simulate --plan runs/r.json --noise none --seeds 3 --out none.csv"), 0);
  const auto none = slurp(dir / "none.csv");
  EXPECT_EQ(std::count(none.begin(), none.end(), '\n'), 4);
  EXPECT_EQ(std::regex_search(none, std::regex(",[0-9]")), false);
  EXPECT_EQ(run("simulate --plan runs/r.json --delta 2"), 1);

  std::string rep;
  ASSERT_EQ(run("report --runs runs", &rep), 0);
  const auto csv = slurp(dir / "runs/report.csv");
  EXPECT_EQ(csv, rep);
  EXPECT_NE(csv.find("\nr,3,1,"), std::string::npos);
  const auto svg = slurp(dir / "runs/r.svg");
  const auto count = [&](const std::string& cls) {
    const std::regex re("<polyline class=\"" + cls + "\"");
    return std::distance(std::sregex_iterator(svg.begin(), svg.end(), re), std::sregex_iterator());
  };
  EXPECT_EQ(count("planned"), 3);
  EXPECT_EQ(count("realized"), 3);
}

TEST_F(Cli, EmptyRunDirectoryGivesEmptyReport)
{
  fs::create_directories(dir / "empty");
  std::string out;
  ASSERT_EQ(run("report --runs empty", &out), 0);
  EXPECT_EQ(out, "instance,robots,feasible,makespan_min,regret_pct,wall_time_s,visited,ttf_min\n");
}
