// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "cli_runner.hpp"
#include "json.hpp"

namespace rmc::testing {
namespace {

using nlohmann::json;

const std::string kSineArgs =
    "--density 'sin(x)/sqrt(2)' --vars x --box 0.7853981634:2.3561944902";
const std::string kGaussArgs =
    "--density 'exp(-(x^2+y^2-0.4*x*y)/1.92)/6.1563' --vars x,y --box -5:5,-5:5";

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST(Cli, SampleGaussianWritesCsvAndMetadata) {
  CliSandbox box("gauss");
  const auto r = box.run("sample " + kGaussArgs + " --n 20000 --seed 42 --plot g.svg");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto csv = read_file(box / "samples.csv");
  EXPECT_EQ(csv.substr(0, 4), "x,y\n");
  EXPECT_EQ(count_lines(csv), 20001u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);

  const auto meta = json::parse(read_file(box / "samples.csv.json"));
  EXPECT_EQ(meta["schema_version"], 1);
  EXPECT_EQ(meta["command"], "sample");
  EXPECT_EQ(meta["seed"], 42);
  EXPECT_EQ(meta["accepted"], 20000);
  EXPECT_EQ(meta["config"]["seed"], "42");
  EXPECT_EQ(meta["config"]["box"], "-5:5,-5:5");
  EXPECT_TRUE(meta["bound_estimated"].get<bool>());
  EXPECT_FALSE(meta.contains("wall_time_ms"));
  // envelope is the grid maximum of f, 0.162439; acceptance 1 / (0.162439 * 100)
  const double rate = meta["acceptance_rate"];
  EXPECT_NEAR(rate, 0.0616, 0.002);
  EXPECT_NEAR(meta["bound_c"].get<double>(), 1 / 6.1563, 1e-9);

  const auto svg = read_file(box / "g.svg");
  EXPECT_NE(svg.find("viewBox=\"0 0 800 800\""), std::string::npos);
  EXPECT_NE(svg.find("r=\"1\""), std::string::npos);
  EXPECT_NE(svg.find("-5"), std::string::npos);
}

TEST(Cli, SampleSineHexSeedAndRecordTime) {
  CliSandbox box("sine");
  const auto r = box.run("sample " + kSineArgs +
                         " --n 10000 --seed 0x1 --out s.csv --meta s.json --record-time "
                         "--plot s.svg");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(count_lines(read_file(box / "s.csv")), 10001u);
  const auto meta = json::parse(read_file(box / "s.json"));
  EXPECT_EQ(meta["seed"], 1);
  EXPECT_EQ(meta["config"]["seed"], "0x1");
  EXPECT_TRUE(meta.contains("wall_time_ms"));
  const auto svg = read_file(box / "s.svg");
  EXPECT_NE(svg.find("id=\"accepted\""), std::string::npos);
  EXPECT_NE(svg.find("id=\"rejected\""), std::string::npos);

  // the same seed in decimal gives the same CSV
  ASSERT_EQ(box.run("sample " + kSineArgs + " --n 10000 --seed 1 --out d.csv").exit_code, 0);
  EXPECT_EQ(read_file(box / "s.csv"), read_file(box / "d.csv"));
}

TEST(Cli, GrmcMethod) {
  CliSandbox box("grmc");
  const auto r = box.run("sample " + kSineArgs + " --n 5000 --method grmc --bins 16");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto meta = json::parse(read_file(box / "samples.csv.json"));
  EXPECT_EQ(meta["config"]["method"], "grmc");
  EXPECT_GT(meta["acceptance_rate"].get<double>(), 0.7);
}

TEST(Cli, AutoSeedIsRecorded) {
  CliSandbox box("auto");
  ASSERT_EQ(box.run("sample " + kSineArgs + " --n 10 --auto-seed").exit_code, 0);
  const auto meta = json::parse(read_file(box / "samples.csv.json"));
  EXPECT_EQ(meta["config"]["seed"].get<std::string>(),
            std::to_string(meta["seed"].get<std::uint64_t>()));
}

TEST(Cli, MissingBoxIsUsageError) {
  CliSandbox box("usage");
  const auto r = box.run("sample --density 'sin(x)' --vars x --n 10");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("--box"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(box.run("").exit_code, 1);
  EXPECT_EQ(box.run("sample " + kSineArgs + " --n 0").exit_code, 1);
  EXPECT_EQ(box.run("sample " + kSineArgs + " --n 5 --seed banana").exit_code, 1);
  EXPECT_EQ(box.run("sample --density x --vars x,y --box 0:1 --n 5").exit_code, 1);
  EXPECT_EQ(box.run("--help").exit_code, 0);
}

TEST(Cli, InvalidModelExitsOne) {
  CliSandbox box("model");
  EXPECT_EQ(box.run("sample " + kGaussArgs + " --n 10 --bound 0.1").exit_code, 1);
  EXPECT_EQ(box.run("sample --density x --vars x --box -1:1 --n 10").exit_code, 1);
  EXPECT_EQ(box.run("sample --density x --vars x --box 1:1 --n 10").exit_code, 1);
}

TEST(Cli, ParseErrorsExitTwo) {
  CliSandbox box("parse");
  const auto r = box.run(
      "integrate --integrand 'x*y' --region 'y^2 <= x and (y >= 0' --vars x,y "
      "--box 0:4,0:2 --n 100");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("offset"), std::string::npos);
  EXPECT_EQ(box.run("sample --density 'sin(z)' --vars x --box 0:1 --n 5").exit_code, 2);
  EXPECT_EQ(box.run("sample --density 'x' --vars pi --box 0:1 --n 5").exit_code, 2);
}

TEST(Cli, BudgetExhaustionExitsThree) {
  CliSandbox box("budget");
  const auto r = box.run(
      "sample --density '0*x' --vars x --box 0:1 --bound 1 --n 10 --budget-factor 0.001");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("budget"), std::string::npos);
}

TEST(Cli, IntegrateExample) {
  CliSandbox box("integrate");
  const auto r = box.run(
      "integrate --integrand 'x*y' --region 'y^2 <= x and y >= 0 and y >= x - 2' "
      "--vars x,y --box 0:4,0:2 --n 20000 --reps 10 --seed 7");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find(" +/- "), std::string::npos);
  const auto meta = json::parse(read_file(box / "integrate.json"));
  EXPECT_EQ(meta["command"], "integrate");
  EXPECT_EQ(meta["per_replication_values"].size(), 10u);
  EXPECT_NEAR(meta["value"].get<double>(), 6.0, 0.2);
  EXPECT_EQ(std::stod(r.out), meta["value"].get<double>());
}

TEST(Cli, IntegrateWholeBoxAndDirect) {
  CliSandbox box("whole");
  const auto r = box.run(
      "integrate --integrand 'x*y' --region 'x <= 4' --vars x,y --box 0:4,0:2 "
      "--n 20000 --seed 3 --method direct --meta w.json");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto meta = json::parse(read_file(box / "w.json"));
  EXPECT_NEAR(meta["value"].get<double>(), 16.0, 0.3);
  EXPECT_FALSE(meta.contains("n_screened"));
}

TEST(Cli, ValidatePassAndFail) {
  CliSandbox box("validate");
  const auto pass = box.run("validate " + kSineArgs +
                            " --n 10000 --seed 1 --cdf '0.5 - cos(x)/sqrt(2)' --meta v.json");
  EXPECT_EQ(pass.exit_code, 0) << pass.out << pass.err;
  EXPECT_EQ(pass.out.rfind("ks statistic ", 0), 0u) << pass.out;
  EXPECT_NE(pass.out.find(": pass"), std::string::npos);
  const auto meta = json::parse(read_file(box / "v.json"));
  EXPECT_EQ(meta["gof"]["kind"], "ks");
  EXPECT_TRUE(meta["gof"]["pass"].get<bool>());

  // uniform CDF on the support: mis-specified
  const auto fail = box.run("validate " + kSineArgs +
                            " --n 10000 --seed 1 --cdf '(x - pi/4)/(pi/2)'");
  EXPECT_EQ(fail.exit_code, 4) << fail.out;
  EXPECT_NE(fail.out.find("FAIL"), std::string::npos);

  EXPECT_EQ(box.run("validate " + kSineArgs + " --n 100").exit_code, 1);
}

TEST(Cli, ValidateChiSquarePaths) {
  CliSandbox box("chisq");
  const auto two = box.run("validate " + kGaussArgs + " --n 20000 --seed 2");
  EXPECT_EQ(two.exit_code, 0) << two.out << two.err;
  EXPECT_EQ(two.out.rfind("chi-square statistic ", 0), 0u) << two.out;

  const auto wrong = box.run("validate " + kGaussArgs +
                             " --n 20000 --seed 2 --reference "
                             "'exp(-(x^2+y^2-1.6*x*y)/0.72)'");
  EXPECT_EQ(wrong.exit_code, 4) << wrong.out;

  const auto three = box.run(
      "validate --density 'x + y + z' --vars x,y,z --box 0:1,0:1,0:1 --n 5000 --bins 3 "
      "--seed 4");
  EXPECT_EQ(three.exit_code, 0) << three.out << three.err;
  EXPECT_NE(three.out.find("chi-square"), std::string::npos);
  EXPECT_NE(three.out.find("dof 26"), std::string::npos);
}

TEST(Cli, BoundCommand) {
  CliSandbox box("bound");
  const auto sine = box.run("bound " + kSineArgs + " --safety 1.2 --meta b.json");
  ASSERT_EQ(sine.exit_code, 0) << sine.err;
  const double b = std::stod(sine.out.substr(6));
  EXPECT_NEAR(b, 1.2 / std::sqrt(2.0), 1e-6);
  EXPECT_NE(sine.out.find("at x = "), std::string::npos);
  EXPECT_EQ(json::parse(read_file(box / "b.json"))["command"], "bound");

  const auto gauss = box.run("bound " + kGaussArgs);
  ASSERT_EQ(gauss.exit_code, 0);
  EXPECT_NEAR(std::stod(gauss.out.substr(6)), 0.16244, 1e-5);
  EXPECT_NE(gauss.out.find("x = 0, y = 0"), std::string::npos) << gauss.out;

  const auto flat = box.run("bound --density 3 --vars x --box 0:1");
  EXPECT_EQ(flat.out.rfind("bound 3\n", 0), 0u) << flat.out;
}

}  // namespace
}  // namespace rmc::testing
