#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "quire/protocols.hpp"
#include "quire/runner.hpp"

using namespace quire;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("reduce: aklt run passes and writes a trace") {
  TempFile tmp("cli_trace_a.txt");
  RunConfig cfg;
  cfg.protocol = "aklt-alternating";
  cfg.n = 10;
  cfg.seed = 7;
  cfg.out = tmp.path;
  std::ostringstream log;
  CHECK(cmd_reduce(cfg, log) == kExitPass);
  std::string payload = slurp(tmp.path);
  CHECK(payload.find("verdict PASS") != std::string::npos);
}

TEST_CASE("reduce: identical seeds give byte-identical files") {
  TempFile a("cli_trace_b1.txt"), b("cli_trace_b2.txt");
  RunConfig cfg;
  cfg.protocol = "fnw";
  cfg.theta = 0.6;
  cfg.n = 10;
  cfg.seed = 12345;
  cfg.out = a.path;
  std::ostringstream log1, log2;
  CHECK(cmd_reduce(cfg, log1) == kExitPass);
  cfg.out = b.path;
  CHECK(cmd_reduce(cfg, log2) == kExitPass);
  CHECK(slurp(a.path) == slurp(b.path));
  CHECK(slurp(a.path).size() > 0);
}

TEST_CASE("reduce: fnw theta out of range is a usage error") {
  RunConfig cfg;
  cfg.protocol = "fnw";
  cfg.theta = 1.9;
  cfg.n = 8;
  cfg.seed = 1;
  std::ostringstream log;
  CHECK(cmd_reduce(cfg, log) == kExitUsage);
}

TEST_CASE("reduce: wire filter at gamma = pi/4 reports zero retries") {
  RunConfig cfg;
  cfg.protocol = "wire-filter";
  cfg.gamma = 0.7853981633974483;
  cfg.n = 6;
  cfg.seed = 1;
  std::ostringstream log;
  CHECK(cmd_reduce(cfg, log) == kExitPass);
  CHECK(log.str().find("consumed 0") != std::string::npos);
}

TEST_CASE("reduce: a chain file in another recognized form is canonicalized first") {
  TempFile mps("cli_reduce_xyz.json");
  save_mps_file(make_chain(aklt_xyz_site(), 8, protocol_left_boundary(), protocol_right_boundary()),
                mps.path);
  RunConfig cfg;
  cfg.protocol = "aklt-alternating";
  cfg.input = mps.path;
  cfg.seed = 9;
  std::ostringstream log;
  CHECK(cmd_reduce(cfg, log) == kExitPass);
  CHECK(log.str().find("canonicalized") != std::string::npos);
}

TEST_CASE("verify: file against itself passes") {
  TempFile mps("cli_self.json");
  save_mps_file(make_chain(aklt_site(), 4, protocol_left_boundary(), protocol_right_boundary()),
                mps.path);
  RunConfig cfg;
  cfg.input = mps.path;
  cfg.target = mps.path;
  std::ostringstream log;
  CHECK(cmd_verify(cfg, log) == kExitPass);
}

TEST_CASE("verify: (X,Y,Z) chain against the (I,X,Z) form via the derived witness") {
  TempFile mps("cli_xyz.json");
  save_mps_file(make_chain(aklt_xyz_site(), 4, protocol_left_boundary(), protocol_right_boundary()),
                mps.path);
  RunConfig cfg;
  cfg.input = mps.path;
  cfg.target = "aklt-ixz";
  std::ostringstream log;
  CHECK(cmd_verify(cfg, log) == kExitPass);
}

TEST_CASE("verify: explicit witness file carries one state onto another") {
  // input = H-rotated cluster pair, witness = H per site, target = cluster file
  TempFile in("cli_wit_in.json"), tgt("cli_wit_tgt.json"), wit("cli_wit.json");
  double s = 1.0 / std::sqrt(2.0);
  // (H,HZ)/sqrt2 chain vs its physical-H mix (|+><0|, |-><1|)
  Mps mixed;
  mixed.sites.assign(3, Site({Mat(2, 2, {s, 0, s, 0}), Mat(2, 2, {0, s, 0, -s})}));
  mixed.left = Vec{s, s};
  mixed.right = Vec{1, 0};
  save_mps_file(mixed, in.path);
  save_mps_file(make_chain(wire_site(0.7853981633974483), 3, Vec{s, s}, Vec{1, 0}), tgt.path);
  {
    std::ofstream out(wit.path);
    std::string h_block =
        "\"u\": [[0.70710678118654752,0],[0.70710678118654752,0],"
        "[0.70710678118654752,0],[-0.70710678118654752,0]]";
    out << "{\"sites\": [{\"col\": 0, " << h_block << "},{\"col\": 1, " << h_block
        << "},{\"col\": 2, " << h_block << "}]}";
  }
  RunConfig cfg;
  cfg.input = in.path;
  cfg.target = tgt.path;
  cfg.witness = wit.path;
  std::ostringstream log;
  CHECK(cmd_verify(cfg, log) == kExitPass);
  // without the witness the two files differ
  RunConfig bare = cfg;
  bare.witness.clear();
  std::ostringstream log2;
  CHECK(cmd_verify(bare, log2) == kExitVerifyFailed);
}

TEST_CASE("verify: GHZ vs cluster fails with fidelity below one") {
  TempFile mps("cli_ghz.json");
  double s = 1.0 / std::sqrt(2.0);
  save_mps_file(make_chain(ghz_site(), 4, Vec{s, s}, Vec{1, 1}), mps.path);
  RunConfig cfg;
  cfg.input = mps.path;
  cfg.target = "cluster";
  std::ostringstream log;
  CHECK(cmd_verify(cfg, log) == kExitVerifyFailed);
  CHECK(log.str().find("verdict FAIL") != std::string::npos);
}

TEST_CASE("verify: parse failure is a usage error") {
  TempFile bad("cli_bad.json");
  {
    std::ofstream out(bad.path);
    out << "this is not json";
  }
  RunConfig cfg;
  cfg.input = bad.path;
  cfg.target = "cluster";
  std::ostringstream log;
  CHECK(cmd_verify(cfg, log) == kExitUsage);
}

TEST_CASE("cost: csv over several lengths, deterministic") {
  RunConfig cfg;
  cfg.protocol = "aklt-alternating";
  cfg.ns = {6, 8};
  cfg.trials = 200;
  cfg.seed = 3;
  std::ostringstream log1, log2;
  CHECK(cmd_cost(cfg, log1) == kExitPass);
  CHECK(cmd_cost(cfg, log2) == kExitPass);
  CHECK(log1.str() == log2.str());
  CHECK(log1.str().find("mean_cost") != std::string::npos);
}

TEST_CASE("peps: builtin 2x2 grid passes, seeded and exhaustive") {
  RunConfig cfg;
  cfg.lattice = "grid2x2";
  cfg.seed = 2;
  std::ostringstream log;
  CHECK(cmd_peps(cfg, log) == kExitPass);
  cfg.exhaustive = true;
  std::ostringstream log2;
  CHECK(cmd_peps(cfg, log2) == kExitPass);
}

TEST_CASE("syncwalk: odd diff reports zero (I,I) frequency") {
  RunConfig cfg;
  cfg.diff = 3;
  cfg.trials = 1000;
  cfg.cap = 100;
  cfg.seed = 5;
  std::ostringstream log;
  CHECK(cmd_syncwalk(cfg, log) == kExitPass);
  // ii_frequency is the last csv column
  std::string csv = log.str();
  CHECK(csv.substr(csv.rfind(',') + 1).find("0") == 0);
}
