#include <iostream>

#include "CLI11.hpp"
#include "pipeline.hpp"
#include "reachsched/errors.hpp"

using namespace reachsched;

int main(int argc, char** argv) {
  CLI::App app{"reach-avoid communication scheduling pipeline"};
  app.require_subcommand(1);
  cli::Options opt;

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "scenario JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "artifact directory");
    sub->add_option("--seed", opt.seed, "override the RRT and runtime seeds");
    sub->add_option("--mode", opt.mode, "offline | online | traverse")
        ->check(CLI::IsMember({"offline", "online", "traverse"}));
  };

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const cli::Options&);
  };
  const Entry entries[] = {
      {"plan", "plan the reference trajectory", cli::cmd_plan},
      {"abstract", "build the timed symbolic system", cli::cmd_abstract},
      {"schedule", "compute the minimum-communication schedule", cli::cmd_schedule},
      {"simulate", "run the closed loop", cli::cmd_simulate},
      {"sweep", "compare partitions or bisect the disturbance bound", cli::cmd_sweep},
      {"verify-clf", "check the Lyapunov certificate on a grid", cli::cmd_verify_clf},
  };
  int (*chosen)(const cli::Options&) = nullptr;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    common(sub);
    if (std::string(e.name) == "sweep") {
      sub->add_option("--m-list", opt.m_list, "partition sizes, comma separated")->delimiter(',');
      sub->add_flag("--bisect-wmax", opt.bisect_wmax, "bisect the largest feasible w_max");
    }
    if (std::string(e.name) == "verify-clf") sub->add_option("--grid", opt.grid_density, "points per axis");
    sub->callback([&chosen, fn = e.fn] { chosen = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitError;
  }

  try {
    return chosen(opt);
  } catch (const cli::StageOrderError& e) {
    std::cerr << "stage-order error: " << e.what() << "\n";
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const PlanningFailure& e) {
    std::cerr << "planning failed: " << e.what() << "\n";
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return cli::kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return cli::kExitError;
}
