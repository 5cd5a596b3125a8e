#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "robustkit/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = RK_CLI_PATH;
const std::string kFixtures = RK_FIXTURES_DIR;

int run(const std::string& args) {
    const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string fixture(const std::string& name) { return "\"" + kFixtures + "/" + name + "\""; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "robustkit_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("solve " + fixture("knapsack.json")), 0);
    EXPECT_EQ(run("solve " + fixture("knapsack.json") + " --solver cuts"), 0);
    EXPECT_EQ(run("solve " + fixture("infeasible.json")), 2);
    EXPECT_EQ(run("solve " + fixture("unbounded.json")), 3);
    EXPECT_EQ(run("solve " + fixture("portfolio.json") + " --solver cuts --max-iter 1"), 4);
    EXPECT_EQ(run(""), 64);
    EXPECT_EQ(run("solve"), 64);
    EXPECT_EQ(run("solve " + fixture("knapsack.json") + " --solver magic"), 64);
    EXPECT_EQ(run("frobnicate"), 64);
    EXPECT_EQ(run("solve " + fixture("bad_nominal.json")), 65);
    EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, ParseErrorExitCode) {
    const fs::path bad = scratch("broken.json");
    std::ofstream(bad) << "{ \"format_version\": ";
    EXPECT_EQ(run("solve \"" + bad.string() + "\""), 65);
}

TEST(Cli, ResultAndCounterpartFiles) {
    const fs::path out = scratch("result.json"), det = scratch("counterpart.json");
    ASSERT_EQ(run("solve " + fixture("diamond.json") + " --out \"" + out.string() + "\" --export-counterpart \"" +
                  det.string() + "\""),
              0);
    const auto result = robustkit::io::json::parse(slurp(out));
    EXPECT_EQ(result["status"], "optimal");
    EXPECT_NEAR(result["objective"].get<double>(), 1.0, 1e-9);
    const auto cp = robustkit::io::json::parse(slurp(det));
    EXPECT_EQ(cp["kind"], "deterministic");
    EXPECT_EQ(cp["variables"].size(), 6U);
}

TEST(Cli, CheckAcceptsSolveOutput) {
    const fs::path out = scratch("facility_result.json");
    ASSERT_EQ(run("solve " + fixture("facility.json") + " --out \"" + out.string() + "\""), 0);
    EXPECT_EQ(run("check " + fixture("facility.json") + " --point \"" + out.string() + "\""), 0);
    const fs::path nominal = scratch("facility_nominal.json");
    ASSERT_EQ(run("solve " + fixture("facility.json") + " --solver nominal --out \"" + nominal.string() + "\""), 0);
    EXPECT_EQ(run("check " + fixture("facility.json") + " --point \"" + nominal.string() + "\""), 2);
}

TEST(Cli, SweepWritesCsv) {
    const fs::path out = scratch("sweep.csv");
    ASSERT_EQ(run("sweep knapsack --n 3 --alphas 0,0.5,1 --geometry poly --out \"" + out.string() + "\""), 0);
    const std::string csv = slurp(out);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_EQ(run("sweep knapsack --alphas 0,-1"), 64);
}
