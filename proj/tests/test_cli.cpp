#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hydroq/cli.hpp"
#include "support.hpp"

using namespace hydroq;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hydroq");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path write_scenario(const std::filesystem::path& dir) {
  const nlohmann::json j = {{"n_households", 1}, {"rng_seed", 7}, {"synthetic", {{"seed", 7}, {"days", 2}}},
                            {"power_bits", 1}, {"battery_bits", 1}, {"slack_bits", 2}, {"short_term_horizon", 2}};
  const auto p = dir / "scenario.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::vector<std::string> run_args(const std::filesystem::path& scenario, const std::filesystem::path& out, int threads = 1) {
  return {"--scenario", scenario.string(), "--out-dir", out.string(), "--seed", "4", "run", "--days", "1",
          "--sweeps", "100", "--restarts", "20", "--threads", std::to_string(threads)};
}

} // namespace

TEST(Cli, RunThenValidate) {
  const auto dir = fixtures::scratch_dir("cli_run");
  const auto sc = write_scenario(dir);
  ASSERT_EQ(run_cli(run_args(sc, dir / "out")), cli::kOk);
  for (const char* f : {"trajectory.csv", "summary.json", "stages.csv", "commitments.csv"}) EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
  EXPECT_EQ(run_cli({"--scenario", sc.string(), "--out-dir", (dir / "val").string(), "validate", (dir / "out/trajectory.csv").string()}),
            cli::kOk);
}

TEST(Cli, ValidateFlagsCorruptedSoc) {
  const auto dir = fixtures::scratch_dir("cli_corrupt");
  const auto sc = write_scenario(dir);
  ASSERT_EQ(run_cli(run_args(sc, dir / "out")), cli::kOk);
  std::istringstream in(slurp(dir / "out/trajectory.csv"));
  std::string header, line, text;
  std::getline(in, header);
  text = header + "\n";
  int row = 0;
  const auto cols = detail::split_csv(header);
  const auto soc_col = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), "soc_0") - cols.begin());
  while (std::getline(in, line)) {
    auto cells = detail::split_csv(line);
    if (row++ == 20) cells[soc_col] = "1.5";
    for (std::size_t k = 0; k < cells.size(); ++k) text += (k ? "," : "") + cells[k];
    text += "\n";
  }
  std::ofstream(dir / "bad.csv") << text;
  EXPECT_EQ(run_cli({"--scenario", sc.string(), "--out-dir", (dir / "val").string(), "validate", (dir / "bad.csv").string()}),
            cli::kValidationFailure);
  const std::string v = slurp(dir / "val/violations.csv");
  EXPECT_NE(v.find("SocBounds"), std::string::npos) << v;
}

TEST(Cli, ValidateEmptyFile) {
  const auto dir = fixtures::scratch_dir("cli_empty");
  const auto sc = write_scenario(dir);
  std::ofstream(dir / "empty.csv").flush();
  EXPECT_EQ(run_cli({"--scenario", sc.string(), "validate", (dir / "empty.csv").string()}), cli::kInputError);
  EXPECT_EQ(run_cli({"--scenario", sc.string(), "validate", (dir / "missing.csv").string()}), cli::kInputError);
}

TEST(Cli, InputErrors) {
  const auto dir = fixtures::scratch_dir("cli_input");
  const auto sc = write_scenario(dir);
  EXPECT_EQ(run_cli({"--scenario", (dir / "nope.json").string(), "run", "--days", "1"}), cli::kInputError);
  EXPECT_EQ(run_cli({"--scenario", sc.string(), "--out-dir", (dir / "o").string(), "run", "--days", "5"}), cli::kInputError);
  EXPECT_EQ(run_cli({"run", "--days", "x"}), cli::kInputError);
  EXPECT_EQ(run_cli({"--help"}), cli::kOk);
}

TEST(Cli, RemoteSamplerUnreachable) {
  const auto dir = fixtures::scratch_dir("cli_remote");
  const auto sc = write_scenario(dir);
  int port;
  {
    SamplerServer s;
    port = s.start();
  }
  EXPECT_EQ(run_cli({"--scenario", sc.string(), "--out-dir", (dir / "o").string(), "run", "--days", "1", "--solver", "remote",
                     "--sampler-url", "http://127.0.0.1:" + std::to_string(port), "--timeout", "1"}),
            cli::kSolverFailure);
}

TEST(Cli, ByteIdenticalAcrossRunsAndThreads) {
  const auto dir = fixtures::scratch_dir("cli_det");
  const auto sc = write_scenario(dir);
  ASSERT_EQ(run_cli(run_args(sc, dir / "a")), cli::kOk);
  ASSERT_EQ(run_cli(run_args(sc, dir / "b")), cli::kOk);
  ASSERT_EQ(run_cli(run_args(sc, dir / "c", 2)), cli::kOk);
  const std::string a = slurp(dir / "a/trajectory.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b/trajectory.csv"));
  EXPECT_EQ(a, slurp(dir / "c/trajectory.csv"));
}

TEST(Cli, BenchWritesTables) {
  const auto dir = fixtures::scratch_dir("cli_bench");
  ASSERT_EQ(run_cli({"--out-dir", dir.string(), "bench", "--households", "1..2", "--repeats", "1"}), cli::kOk);
  const std::string csv = slurp(dir / "bench.csv");
  EXPECT_NE(csv.find("brute"), std::string::npos);
  EXPECT_NE(csv.find("anneal"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "scaling.txt"));
}
