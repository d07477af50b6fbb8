#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quire/linalg.hpp"
#include "quire/rng.hpp"

namespace quire {

/// Finite group of bond operators identified up to global phase.
struct ProjGroup {
  std::vector<Mat> elements;               // canonical phase, element 0 = I
  std::vector<std::vector<int>> table;     // table[i][j] = index of elem_i * elem_j
  std::vector<int> generator_indices;

  int order() const { return static_cast<int>(elements.size()); }
  int find(const Mat& m, double tol = 1e-9) const;  // -1 when absent
  int mul(int i, int j) const { return table[i][j]; }
};

/// Breadth-first closure under multiplication modulo global phase.
/// Throws std::length_error when the closure exceeds cap.
ProjGroup close_group(const std::vector<Mat>& generators, int cap = 256);

/// gcd of the lengths of closed walks at the identity on the Cayley graph of
/// the step set (left multiplication), scanned up to 2|G| steps.
int walk_period(const ProjGroup& g, const std::vector<Mat>& steps);

enum class DihedralVerdict { Dihedral, NotDihedral, NotFiniteAtCap };

/// Closes <rot_pi_xz(theta), Z> and tests the dihedral structure (an index-2
/// cyclic subgroup inverted by the reflection).
DihedralVerdict dihedral_check(double theta, int cap = 256, int* order_out = nullptr);

struct SyncReport {
  int diff = 0;
  int trials = 0;
  int cap = 0;
  uint64_t seed = 0;
  std::string target;          // "(I,I)" or "(I,Z)"
  double hit_frequency = 0;
  double mean_hit_time = 0;    // over hitting trials
  double stderr_hit_time = 0;
  double exact_frequency = 0;  // 64-state product-chain computation at the same cap
  double ii_frequency = 0;     // simultaneous (I,I) frequency, any diff
};

/// Two independent {H, HZ} walks offset by diff steps. Even diff: hitting
/// statistics of simultaneous (I, I). Odd diff: (I, I) is barred by the
/// period-2 structure; one declared Z byproduct restores the step parity and
/// the walk waits for the (I, Z) configuration instead.
SyncReport sync_simulate(int diff, int trials, int cap, uint64_t seed);

/// Exact hitting probability within cap for the same process, by evolving the
/// distribution on the 64-state product chain with an absorbing target.
double sync_exact_hit_probability(int diff, int cap);

std::string sync_report_csv(const SyncReport& r);

}  // namespace quire
