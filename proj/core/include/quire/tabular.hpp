#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quire/mps.hpp"

namespace quire {

// Rewrites on tables follow the amplitude convention in mps.hpp:
// amp = <R| A_n[x_n] ... A_1[x_1] |L>, columns displayed left-to-right in
// chain order. A column's matrix therefore sits to the RIGHT of its right
// neighbor's matrix inside the product. The state-preserving moves are:
//
//   gauge_move(col, M):      col <- M^{-1} A,  col+1 <- A M
//   absorb into left:        left neighbor  <- S A
//   absorb into right:       right neighbor <- A S
//
// (inserting M M^{-1} between the two product factors, or merging the single
// matrix S with the factor adjacent to it).

enum class RewriteKind {
  GaugeMove,          // col <- M_inv A ; col+1 <- A M
  BoundaryGaugeLeft,  // col0 <- A M ; |L> <- M_inv |L>
  BoundaryGaugeRight, // last <- M_inv A ; <R| <- <R| M
  PhysicalUnitary,    // B_k = sum_j U_kj A_j
  Relabel,            // permute outcomes: new[i] = old[perm[i]]
  ProjectDelete,      // keep listed outcomes
  AbsorbSingle,       // single-entry column merged into a neighbor
  AbsorbBoundaryLeft, // first column single merged into |L>
  AbsorbBoundaryRight,// last column single merged into <R|
  Measure,            // column entries replaced by a Kraus image
  Rescale,            // column scaled by a positive scalar
};

struct Rewrite {
  RewriteKind kind;
  int col = -1;
  Mat a;                  // M / U / K / scale(1x1)
  Mat b;                  // M_inv where applicable
  std::vector<int> kept;  // ProjectDelete
  std::vector<int> perm;  // Relabel
  bool into_left = false; // AbsorbSingle direction
};

/// An Mps with per-column outcome labels, original-site bookkeeping and a
/// replayable rewrite log.
struct Table {
  Mps mps;
  std::vector<int> origin;  // original chain index per current column
  std::vector<Rewrite> log;

  static Table from_mps(Mps m);
  int cols() const { return mps.size(); }
  const Site& col(int c) const { return mps.sites.at(c); }
};

Table gauge_move(const Table& t, int col, const Mat& m, const Mat& m_inv);
Table boundary_gauge_left(const Table& t, const Mat& m, const Mat& m_inv);
Table boundary_gauge_right(const Table& t, const Mat& m, const Mat& m_inv);
Table physical_unitary(const Table& t, int col, const Mat& u);
Table relabel(const Table& t, int col, const std::vector<int>& perm);
Table project_delete(const Table& t, int col, const std::vector<int>& kept);
Table absorb_single(const Table& t, int col, bool into_left);
Table absorb_boundary_left(const Table& t);   // col 0 must be single-entry
Table absorb_boundary_right(const Table& t);  // last col must be single-entry
Table measure_rewrite(const Table& t, int col, const Mat& kraus);
Table rescale(const Table& t, int col, double scale);

/// Conjugate every column by R (gauge moves plus both boundary gauges);
/// exact, state-preserving.
Table uniform_conjugate(const Table& t, const Mat& r, const Mat& r_inv);

/// Reapply a rewrite log to a fresh table over the original chain.
Table replay(const Mps& original, const std::vector<Rewrite>& log);

/// Local-unitary equivalence witness: per-column physical unitaries plus one
/// global phase.
struct Witness {
  std::map<int, Mat> site_unitaries;  // keyed by column index of the table it applies to
  cx phase{1.0, 0.0};

  void require_unitary(double tol = kPhaseTol) const;
};

/// True iff expand(t1) equals the witness applied to expand(t2), up to global
/// phase and overall normalization, within tol. Writes the fidelity if asked.
bool equivalent(const Table& t1, const Table& t2, const Witness& w, double tol = 1e-9,
                double* fidelity_out = nullptr);

StateVector apply_witness(const Witness& w, const StateVector& v);

/// Name a matrix when it matches a dictionary operator up to phase (I, X, Y,
/// Z, H, HZ, ZH, XZ, S, Sd), else a short hash. Used by the text rendering.
std::string operator_name(const Mat& m, double tol = kPhaseTol);

/// Verbatim-style rendering: one cell per outcome per column.
std::string render(const Table& t);

}  // namespace quire
