#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quire/linalg.hpp"
#include "quire/rng.hpp"

namespace quire {

// Amplitude convention, fixed once for the whole codebase:
//
//   amp(x1, ..., xn) = <R| A_n[x_n] ... A_2[x_2] A_1[x_1] |L>
//
// Site 1 is the leftmost site of the chain and its matrix is applied to |L>
// first. <R| is stored as a plain row vector r, contracted without
// conjugation: amp = sum_i r_i w_i. StateVector indexing makes x1 the most
// significant digit, so amplitudes read |x1 x2 ... xn> left to right.

/// One chain site: the d-tuple of bond matrices, one per physical outcome.
struct Site {
  std::vector<Mat> mats;
  std::vector<std::string> labels;  // outcome names; defaults to "0","1",...

  Site() = default;
  explicit Site(std::vector<Mat> m);
  Site(std::vector<Mat> m, std::vector<std::string> names);

  int phys_dim() const { return static_cast<int>(mats.size()); }
  int bond_dim() const { return mats.empty() ? 0 : mats[0].rows(); }
};

struct Mps {
  std::vector<Site> sites;
  Vec left;   // |L>
  Vec right;  // <R| as a row vector

  int size() const { return static_cast<int>(sites.size()); }
  int bond_dim() const { return static_cast<int>(left.size()); }
  void validate() const;  // throws on inconsistent shapes
};

struct StateVector {
  std::vector<int> dims;  // per-site physical dimension, chain order
  std::vector<cx> amps;   // x1 most significant
  bool zero = false;      // flagged when the contraction vanished

  size_t dim() const { return amps.size(); }
  size_t index(const std::vector<int>& outcomes) const;
  double norm_sq() const { return norm2(amps); }
};

inline constexpr size_t kExpandCap = 1u << 20;

/// Brute-force contraction of the MPS into amplitudes. Exact; refuses when
/// the product of physical dimensions exceeds cap.
StateVector expand(const Mps& m, size_t cap = kExpandCap);

/// True iff sum_x A[x]^dag A[x] = I within tol.
bool check_normalized(const Site& s, double tol = kPhaseTol);

/// Rescale by 1/sqrt(c) when sum_x A[x]^dag A[x] = c I. Throws when the sum
/// is not proportional to the identity.
Site normalize_site(const Site& s, double tol = kPhaseTol);

/// Finite Kraus measurement on one physical site.
struct MeasurementOp {
  std::vector<Mat> kraus;
  std::vector<std::string> names;

  int outcomes() const { return static_cast<int>(kraus.size()); }
  int phys_dim() const { return kraus.empty() ? 0 : kraus[0].cols(); }
  /// sum K^dag K = I within tol.
  bool complete(double tol = kPhaseTol) const;

  /// Two-outcome projective measurement onto a coordinate subset and its
  /// complement ("keep" outcome first).
  static MeasurementOp projective_split(int d, const std::vector<int>& keep,
                                        std::string keep_name = "keep",
                                        std::string rest_name = "rest");
  /// Full computational-basis measurement.
  static MeasurementOp computational(int d);
  /// Measurement in the basis given by the rows of a unitary.
  static MeasurementOp basis(const Mat& u);
  static MeasurementOp identity_op(int d);
};

struct BornResult {
  int outcome;
  Mps post;            // site entries replaced by the Kraus-image combinations
  double probability;  // exactly as computed from the expansion
};

/// Samples one outcome by the Born rule, probabilities computed from the full
/// expansion of m. The returned Mps keeps the measured site's physical
/// dimension; entries B_k = sum_j (K_out)_{kj} A_j.
BornResult born_measure(const Mps& m, int site_index, const MeasurementOp& meas, Rng& rng);

/// All outcome probabilities (normalized), via full expansion.
std::vector<double> born_probabilities(const Mps& m, int site_index, const MeasurementOp& meas);

// --- state-vector utilities (oracle side) ---

/// Apply a matrix to one site of the expanded state (op may be rectangular;
/// the site dimension changes accordingly).
StateVector apply_site_op(const StateVector& v, int site, const Mat& op);

/// Fix one site to a definite outcome and remove it from the state.
/// Throws when the site is entangled with the rest beyond tol.
StateVector factor_out_site(const StateVector& v, int site, int outcome, double tol = 1e-9);

/// Keep only the listed outcomes of one site (reindexes that axis).
StateVector slice_site(const StateVector& v, int site, const std::vector<int>& keep);

StateVector tensor(const StateVector& a, const StateVector& b);

// --- MPS file format (JSON) ---
// {"sites": [[ [[re,im],...row-major...], ... d matrices ], ...],
//  "left": [[re,im],...], "right": [[re,im],...], "labels": [["0","1",...],...]}

Mps mps_from_json(const std::string& text);
std::string mps_to_json(const Mps& m);
Mps load_mps_file(const std::string& path);
void save_mps_file(const Mps& m, const std::string& path);

}  // namespace quire
