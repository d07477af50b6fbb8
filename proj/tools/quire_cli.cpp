#include <iostream>

#include <CLI11.hpp>

#include "quire/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"quire -- matrix-product resource states, local-measurement reductions, and\n"
               "exact verification against brute-force expansion"};
  app.require_subcommand(1);

  quire::RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "root random seed (all randomness derives from it)")
        ->required();
    sub->add_option("--out", cfg.out, "output file path");
    sub->add_option("--tol", cfg.tol, "verification tolerance")->capture_default_str();
  };

  auto* reduce = app.add_subcommand("reduce", "run a reduction protocol and verify the trace");
  reduce->add_option("--protocol", cfg.protocol,
                     "aklt-alternating | general-family | fnw | wire-filter")
      ->capture_default_str();
  reduce->add_option("--n", cfg.n, "chain length")->capture_default_str();
  reduce->add_option("--theta", cfg.theta, "deformation angle (fnw)")->capture_default_str();
  reduce->add_option("--theta-a", cfg.theta_a, "first rotation axis (general-family)")->capture_default_str();
  reduce->add_option("--theta-b", cfg.theta_b, "second rotation axis (general-family)")->capture_default_str();
  reduce->add_option("--gamma", cfg.gamma, "wire bias (wire-filter)")->capture_default_str();
  reduce->add_option("--wire-theta", cfg.wire_theta, "wire rotation axis (wire-filter)")->capture_default_str();
  reduce->add_option("--input", cfg.input, "mps json file to reduce instead of a built-in chain");
  add_common(reduce);

  auto* verify = app.add_subcommand("verify", "compare an mps file against a target state");
  verify->add_option("--input", cfg.input, "mps json file")->required();
  verify->add_option("--target", cfg.target,
                     "named state (aklt-ixz, aklt-xyz, aklt-spin1, cluster, cluster-hhz, ghz) "
                     "or an mps json path")
      ->required();
  verify->add_option("--witness", cfg.witness, "witness json file (per-site unitaries)");
  verify->add_option("--tol", cfg.tol, "fidelity tolerance")->capture_default_str();
  verify->add_option("--out", cfg.out, "output file path");

  auto* cost = app.add_subcommand("cost", "consumed-per-survivor statistics over trials");
  cost->add_option("--protocol", cfg.protocol, "protocol name")->capture_default_str();
  cost->add_option("--n", cfg.ns, "chain lengths (repeat or comma-separate)")->delimiter(',');
  cost->add_option("--trials", cfg.trials, "Monte Carlo trials per length")->capture_default_str();
  cost->add_option("--theta", cfg.theta, "fnw angle")->capture_default_str();
  cost->add_option("--gamma", cfg.gamma, "filter bias")->capture_default_str();
  cost->add_option("--theta-a", cfg.theta_a, "family axis a")->capture_default_str();
  cost->add_option("--theta-b", cfg.theta_b, "family axis b")->capture_default_str();
  add_common(cost);

  auto* peps = app.add_subcommand("peps", "build and reduce a six-level lattice state");
  peps->add_option("--lattice", cfg.lattice, "lattice json file, or grid2x2 / grid2x3")
      ->required();
  peps->add_flag("--exhaustive", cfg.exhaustive, "enumerate all outcome assignments");
  add_common(peps);

  auto* sync = app.add_subcommand("syncwalk", "two-chain synchronization walk statistics");
  sync->add_option("--diff", cfg.diff, "offset in unmeasured sites")->capture_default_str();
  sync->add_option("--trials", cfg.trials, "Monte Carlo trials")->capture_default_str();
  sync->add_option("--cap", cfg.cap, "step cap per trial")->capture_default_str();
  add_common(sync);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : quire::kExitUsage;
  }

  if (reduce->parsed()) return quire::cmd_reduce(cfg, std::cout);
  if (verify->parsed()) return quire::cmd_verify(cfg, std::cout);
  if (cost->parsed()) return quire::cmd_cost(cfg, std::cout);
  if (peps->parsed()) return quire::cmd_peps(cfg, std::cout);
  if (sync->parsed()) return quire::cmd_syncwalk(cfg, std::cout);
  return quire::kExitUsage;
}
