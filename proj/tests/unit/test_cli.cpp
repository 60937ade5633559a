#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include <nlohmann/json.hpp>
#include "pipeline.hpp"
#include "reachsched/config.hpp"

using namespace reachsched;
using namespace reachsched::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("reachsched_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

Options opts(const std::string& scenario, const fs::path& out) {
  Options o;
  o.config = reachsched::testing::scenario_path(scenario);
  o.out = out.string();
  return o;
}

int run_binary(const std::string& args) {
  const int status = std::system((std::string(REACHSCHED_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, VehiclePipelineEndToEnd) {
  const fs::path out = fresh_dir("vehicle");
  const Options o = opts("vehicle.json", out);
  ASSERT_EQ(cmd_plan(o), kExitOk);
  ASSERT_EQ(cmd_abstract(o), kExitOk);
  ASSERT_EQ(cmd_schedule(o), kExitOk);
  ASSERT_EQ(cmd_simulate(o), kExitOk);
  for (const char* f : {"reference.json", "reference.csv", "envelope.json", "ta_summary.json", "schedule.json",
                        "campaign_offline.json", "trace_offline_0.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const json campaign = json::parse(slurp(out / "campaign_offline.json"));
  EXPECT_EQ(campaign.at("valid_runs").get<int>(), 100);

  const json manifest = json::parse(slurp(out / "manifest.json"));
  const json& sched = manifest.at("stages").at("schedule");
  EXPECT_EQ(sched.at("exit_code").get<int>(), 0);
  EXPECT_EQ(sched.at("inputs").at("reference.json").get<std::string>(), sha256_hex(slurp(out / "reference.json")));
  EXPECT_EQ(sched.at("outputs").at("schedule.json").get<std::string>(), sha256_hex(slurp(out / "schedule.json")));
  EXPECT_EQ(manifest.at("stages").at("plan").at("config").at("sha256").get<std::string>(),
            sha256_hex(slurp(reachsched::testing::scenario_path("vehicle.json"))));

  Options online = o;
  online.mode = "online";
  EXPECT_EQ(cmd_simulate(online), kExitOk);
  EXPECT_TRUE(fs::exists(out / "campaign_online.json"));
  fs::remove_all(out);
}

TEST(Cli, ScheduleBeforePlan) {
  const fs::path out = fresh_dir("order");
  EXPECT_THROW(cmd_schedule(opts("vehicle.json", out)), StageOrderError);
  EXPECT_EQ(run_binary("schedule --config " + reachsched::testing::scenario_path("vehicle.json") + " --out " + out.string()),
            kExitError);
  fs::remove_all(out);
}

TEST(Cli, CoarsePendulumPartitionIsInfeasible) {
  const fs::path out = fresh_dir("coarse");
  json cfg = json::parse(slurp(reachsched::testing::scenario_path("pendulum.json")));
  cfg["abstraction"]["M"] = 10;
  const fs::path cfg_path = out / "pendulum_m10.json";
  std::ofstream(cfg_path) << cfg.dump(1);
  const std::string args = "--config " + cfg_path.string() + " --out " + out.string();
  EXPECT_EQ(run_binary("plan " + args), kExitOk);
  EXPECT_EQ(run_binary("abstract " + args), kExitInfeasible);
  const json manifest = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest.at("stages").at("abstract").at("exit_code").get<int>(), kExitInfeasible);
  fs::remove_all(out);
}

TEST(Cli, ArtifactsAreReproducible) {
  const fs::path a = fresh_dir("rep_a");
  const fs::path b = fresh_dir("rep_b");
  for (const fs::path& d : {a, b}) {
    const Options o = opts("vehicle.json", d);
    ASSERT_EQ(cmd_plan(o), kExitOk);
    ASSERT_EQ(cmd_abstract(o), kExitOk);
    ASSERT_EQ(cmd_schedule(o), kExitOk);
    ASSERT_EQ(cmd_simulate(o), kExitOk);
  }
  for (const char* f : {"reference.json", "reference.csv", "envelope.csv", "ta_summary.json", "schedule.json",
                        "campaign_offline.json", "trace_offline_0.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, SeedOverrideChangesReference) {
  const fs::path a = fresh_dir("seed");
  Options o = opts("vehicle.json", a);
  ASSERT_EQ(cmd_plan(o), kExitOk);
  const std::string first = slurp(a / "reference.json");
  o.seed = 5;
  ASSERT_EQ(cmd_plan(o), kExitOk);
  EXPECT_NE(slurp(a / "reference.json"), first);
  fs::remove_all(a);
}

TEST(Cli, VerifyClfExitCodes) {
  const fs::path out = fresh_dir("clf");
  Options good = opts("pendulum.json", out);
  good.grid_density = 11;
  EXPECT_EQ(cmd_verify_clf(good), kExitOk);
  Options q029 = opts("pendulum_q029.json", out);
  q029.grid_density = 11;
  EXPECT_EQ(cmd_verify_clf(q029), kExitCertificate);
  EXPECT_TRUE(fs::exists(out / "clf_report.json"));
  fs::remove_all(out);
}

TEST(Cli, BadArguments) {
  EXPECT_EQ(run_binary("plan --config /nonexistent.json"), kExitError);
  EXPECT_EQ(run_binary("frobnicate"), kExitError);
  EXPECT_EQ(run_binary("--help"), kExitOk);
}
