#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quire/tabular.hpp"

namespace quire {

// --- site constructors -----------------------------------------------------

Site aklt_site();                 // (I, X, Z)/sqrt(3)
Site aklt_spin1_site();           // (Z, sqrt2 |0><1|, sqrt2 |1><0|)/sqrt(3)
Site aklt_xyz_site();             // (X, Y, Z)/sqrt(3)
Site family_site(double theta_a, double theta_b);  // (I, A, B)/sqrt(3)
Site fnw_site(double theta);      // (sin t Z, cos t |0><1|, cos t |1><0|)
Site fnw_canonical_site(double theta);  // (sin th I, cos th X, cos th Z), th = atan(sqrt2 tan t)
Site wire_site(double w_theta);   // (W, WZ)/sqrt(2), W = rot_pi_xz(w_theta)
Site biased_wire_site(double gamma, double w_theta);  // (sin g W, cos g W Z)

/// A d = 2 wire in one of the two normal forms: byproduct
/// (W/sqrt2, W S(phi)/sqrt2) or biased (sin g W, cos g W Z).
struct WireSpec {
  enum class Form { Byproduct, Biased };
  Form form = Form::Biased;
  double axis_theta = 0.7853981633974483;  // W = rot_pi_xz(axis_theta)
  double angle = 0.7853981633974483;       // phi (byproduct) or gamma (biased)

  Site site() const;
  static WireSpec byproduct(double axis_theta, double phi);
  static WireSpec biased(double axis_theta, double gamma);
};
Site cluster_site();              // exact path-cluster form (|+><0|, |-><1|)
Site ghz_site();                  // (I, Z)/sqrt(2)

Mps make_chain(const Site& s, int n, Vec left, Vec right);

/// Default boundaries used by the reduction protocols: |L> = |0>,
/// <R| = (1, i). Both survivor types at the chain's right end then close
/// into the target with a recorded diagonal phase on the last site.
Vec protocol_left_boundary();
Vec protocol_right_boundary();

double fnw_theta_hat(double theta);  // atan(sqrt(2) tan theta)

// --- traces ----------------------------------------------------------------

struct StepRecord {
  int site;             // original chain index
  std::string meas;     // N1 / N2 / basis / filter / rotbasis
  std::string outcome;
  double probability;   // normalized, as sampled
};

struct CostNumbers {
  double mean = 0, variance = 0, max = 0;
  int runs = 0;
};

struct ReductionTrace {
  std::string protocol;
  uint64_t seed = 0;
  int n = 0;
  std::vector<std::pair<std::string, double>> params;  // ordered key/value
  Vec left0, right0;                  // input boundaries
  std::vector<StepRecord> steps;
  std::vector<int> surviving;         // original indices, ascending
  int consumed = 0;
  bool complete = true;               // false when a walk hit its cap / chain end
  std::vector<std::pair<int, std::string>> byproducts;  // final-table column -> op name
  Table final_table;
  Witness witness;                    // applied to the final table for the target check
  std::string target_name;
  bool verified = false;
  double fidelity_target = 0;         // final table vs directly built target form
  double fidelity_oracle = 0;         // final table vs brute-force measured state
  bool oracle_checked = false;        // false when over the expansion cap
  int walk_steps_total = 0;

  // verification payloads (not serialized): the applied Kraus operator per
  // step, the collapsed level per step (-1 for keep outcomes), and the
  // ordered original levels of each surviving column
  std::vector<Mat> step_kraus;
  std::vector<int> collapse_level;
  std::vector<std::pair<int, std::vector<int>>> survivor_levels;
};

/// Deterministic text serialization (12 significant digits).
std::string serialize_trace(const ReductionTrace& t);

// --- scripted outcomes (for deterministic replays in tests) ----------------

struct OutcomeSource {
  Rng* rng = nullptr;
  std::vector<int> script;  // consumed front to back when non-empty
  size_t pos = 0;

  int pick(const std::vector<double>& probs);
};

// --- protocols ---------------------------------------------------------------

/// Alternating two-subspace measurement scheme on an (I,A,B)-type chain.
/// A/B default to X/Z (the spin-1 chain in its (I,X,Z) form). Failure
/// outcomes collapse single columns that are absorbed into their previous
/// surviving column; the final table is gauged into (W, WZ) wire form.
ReductionTrace alternating_reduce(const Mps& chain, uint64_t seed,
                                  std::vector<int> script = {},
                                  const StateVector* oracle_prior = nullptr);

/// Builds the (I,A,B) chain from two pi-rotation axes and reduces it to the
/// (C, CB) wire, C ~ A + B; presented in byproduct normal form with B
/// gauged to Z and C to rot((theta_a - theta_b)/2).
ReductionTrace general_family_reduce(double theta_a, double theta_b, int n, uint64_t seed,
                                     std::vector<int> script = {});

/// Rewrites any of the equivalent spin-1 chain forms -- (I,X,Z), (X,Y,Z), or
/// (Z, sqrt2|0><1|, sqrt2|1><0|) -- into the (I,X,Z) form, recording the
/// per-site diagonal/mixing unitaries. expand(result) equals the witness
/// applied to expand(input).
struct Canonicalized {
  Table table;
  Witness witness;
};
Canonicalized aklt_canonicalize(const Mps& chain);

/// Rewrites a chain of fnw_site(theta) columns into fnw_canonical_site form.
/// Exact up to the recorded physical unitaries; per-site verification at
/// small n lives in the tests.
struct FnwTransform {
  Table table;     // canonical-form chain
  Witness witness; // per-site physical unitaries applied along the way
};
FnwTransform fnw_transform(const Mps& chain, double theta);
Site fnw_transform_site(double theta) /* = fnw_canonical_site */;

/// Full deformed-chain reduction: canonical transform, alternating scheme
/// with random-walk cancellation of failure byproducts, output the biased
/// wire (sin th H, cos th HZ).
ReductionTrace fnw_reduce(double theta, int n, uint64_t seed, std::vector<int> script = {});

/// Filtering reduction of a biased wire (sin g W, cos g W Z) to (W, WZ).
/// Filter failures undo the collapsed W Z by a walk on <W, Z> before
/// retrying. For W = H the output is the (H, HZ) cluster wire.
ReductionTrace wire_filter_reduce(double gamma, double w_theta, int n, uint64_t seed,
                                  std::vector<int> script = {});

/// The filtering Kraus pair M0 = |0><0| + tan g |1><1|, M1 = sqrt(1-tan^2 g)|1><1|.
MeasurementOp filter_op(double gamma);

/// Measures sites [from, ...) of a (W,WZ)-form wire in adaptively chosen
/// bases until the net correlation-space operator is proportional to u.
/// The consumed columns are absorbed leftward (or into |L> when from = 0).
struct RotationResult {
  Table table;
  int sites_used = 0;
  cx phase;        // net = phase * u
  bool ok = false;
};
RotationResult implement_rotation(const Table& t, const Mat& u, int from, double w_theta,
                                  Rng& rng, int cap = 64);

/// Random-walk cancellation of a pending byproduct: the column at `site` must
/// be single-entry; successive columns are measured in the computational
/// basis, each collapsed matrix multiplying the pending operator, until it is
/// proportional to `target` (pass I to cancel outright). When the target is
/// the identity the cancelled block is absorbed away; otherwise the collapsed
/// singles are left in place for the caller. Throws when the cap or the chain
/// end is reached first.
std::pair<Table, int> pauli_walk_cancel(const Table& t, int site, const Mat& target, Rng& rng,
                                        int cap = 64);

// --- cost statistics ---------------------------------------------------------

struct CostReport {
  std::string protocol;
  std::vector<std::pair<std::string, double>> params;
  uint64_t seed = 0;
  int trials = 0;
  struct Row {
    int n;
    double mean_cost;    // consumed per surviving site
    double variance;
    double max_cost;
    double stderr_mean;
    int incomplete_runs;
    int zero_survivor_runs;
  };
  std::vector<Row> rows;
};

using TraceFactory = ReductionTrace (*)(int n, uint64_t seed, const std::vector<double>& params);

CostReport cost_stats(const std::string& protocol, const std::vector<double>& params,
                      const std::vector<int>& ns, int trials, uint64_t seed);

std::string cost_report_csv(const CostReport& r);

/// Exact expected consumed-per-surviving of the alternating scheme at size n
/// by full outcome-tree enumeration.
double enumerate_alternating_cost(int n);

// --- verification -------------------------------------------------------------

/// Brute-force route: expand the original chain, apply every sampled
/// measurement operator directly on the state vector, factor out consumed
/// sites and compare against the final table's expansion. Returns fidelity.
double oracle_fidelity(const ReductionTrace& trace, const Mps& original);
/// Same with a precomputed expansion of the original chain (batch runs).
double oracle_fidelity(const ReductionTrace& trace, const StateVector& prior);

/// Fidelity of witness(final table) against the named target state
/// (cluster via the CZ oracle, or the directly-built wire).
double target_fidelity(const ReductionTrace& trace);

}  // namespace quire
