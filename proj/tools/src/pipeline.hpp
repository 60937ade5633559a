#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace reachsched::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitCertificate = 3;

/// A stage ran before the stage that produces its inputs.
class StageOrderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::vector<int> m_list;
  bool bisect_wmax = false;
  int grid_density = 21;
};

int cmd_plan(const Options& opt);
int cmd_abstract(const Options& opt);
int cmd_schedule(const Options& opt);
int cmd_simulate(const Options& opt);
int cmd_sweep(const Options& opt);
int cmd_verify_clf(const Options& opt);

std::string sha256_hex(const std::string& bytes);

}  // namespace reachsched::cli
