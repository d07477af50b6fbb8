#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace quire {

// exit codes shared by all subcommands
inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerifyFailed = 2;
inline constexpr int kExitResourceCap = 3;

struct RunConfig {
  std::string protocol = "aklt-alternating";
  double theta = 0.5235987755982988;    // pi/6
  double theta_a = 1.5707963267948966;  // pi/2
  double theta_b = 0.0;
  double gamma = 0.5235987755982988;
  double wire_theta = 0.7853981633974483;  // pi/4
  int n = 12;
  std::vector<int> ns;
  int trials = 1000;
  uint64_t seed = 0;
  int cap = 200;
  int diff = 0;
  double tol = 1e-9;
  bool exhaustive = false;
  std::string input;     // mps json (reduce/verify)
  std::string target;    // named state or mps json path (verify)
  std::string witness;   // witness json path (verify)
  std::string lattice;   // lattice json path or builtin name (peps)
  std::string out;       // output file
};

int cmd_reduce(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_cost(const RunConfig& cfg, std::ostream& log);
int cmd_peps(const RunConfig& cfg, std::ostream& log);
int cmd_syncwalk(const RunConfig& cfg, std::ostream& log);

}  // namespace quire
