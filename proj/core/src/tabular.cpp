#include "quire/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace quire {

Table Table::from_mps(Mps m) {
  m.validate();
  Table t;
  t.origin.resize(m.sites.size());
  for (size_t i = 0; i < m.sites.size(); ++i) t.origin[i] = static_cast<int>(i);
  t.mps = std::move(m);
  return t;
}

namespace {

void check_col(const Table& t, int col) {
  if (col < 0 || col >= t.cols()) throw std::out_of_range("table: column index");
}

Table logged(Table t, Rewrite r) {
  t.log.push_back(std::move(r));
  return t;
}

}  // namespace

Table gauge_move(const Table& t, int col, const Mat& m, const Mat& m_inv) {
  check_col(t, col);
  if (col + 1 >= t.cols()) throw std::invalid_argument("gauge_move: no right neighbor");
  if (!(m * m_inv).is_identity(kPhaseTol)) throw std::invalid_argument("gauge_move: M * M_inv != I");
  Table r = t;
  for (auto& a : r.mps.sites[col].mats) a = m_inv * a;
  for (auto& a : r.mps.sites[col + 1].mats) a = a * m;
  return logged(std::move(r), Rewrite{RewriteKind::GaugeMove, col, m, m_inv, {}, {}, false});
}

Table boundary_gauge_left(const Table& t, const Mat& m, const Mat& m_inv) {
  if (t.cols() == 0) throw std::invalid_argument("boundary_gauge_left: empty table");
  if (!(m * m_inv).is_identity(kPhaseTol)) throw std::invalid_argument("boundary gauge: M * M_inv != I");
  Table r = t;
  for (auto& a : r.mps.sites[0].mats) a = a * m;
  r.mps.left = m_inv.apply(r.mps.left);
  return logged(std::move(r), Rewrite{RewriteKind::BoundaryGaugeLeft, 0, m, m_inv, {}, {}, false});
}

Table boundary_gauge_right(const Table& t, const Mat& m, const Mat& m_inv) {
  if (t.cols() == 0) throw std::invalid_argument("boundary_gauge_right: empty table");
  if (!(m * m_inv).is_identity(kPhaseTol)) throw std::invalid_argument("boundary gauge: M * M_inv != I");
  Table r = t;
  int last = r.cols() - 1;
  for (auto& a : r.mps.sites[last].mats) a = m_inv * a;
  r.mps.right = m.apply_left(r.mps.right);
  return logged(std::move(r), Rewrite{RewriteKind::BoundaryGaugeRight, last, m, m_inv, {}, {}, false});
}

Table physical_unitary(const Table& t, int col, const Mat& u) {
  check_col(t, col);
  const Site& s = t.col(col);
  if (u.rows() != s.phys_dim() || !u.is_unitary(kPhaseTol))
    throw std::invalid_argument("physical_unitary: U not unitary of the column dimension");
  Table r = t;
  Site ns = s;
  for (int k = 0; k < s.phys_dim(); ++k) {
    Mat b(s.bond_dim(), s.bond_dim());
    for (int j = 0; j < s.phys_dim(); ++j)
      if (u(k, j) != cx{}) b = b + s.mats[j] * u(k, j);
    ns.mats[k] = b;
  }
  r.mps.sites[col] = ns;
  return logged(std::move(r), Rewrite{RewriteKind::PhysicalUnitary, col, u, {}, {}, {}, false});
}

Table relabel(const Table& t, int col, const std::vector<int>& perm) {
  check_col(t, col);
  const Site& s = t.col(col);
  if (static_cast<int>(perm.size()) != s.phys_dim())
    throw std::invalid_argument("relabel: permutation arity mismatch");
  Site ns;
  for (int i : perm) {
    ns.mats.push_back(s.mats.at(i));
    ns.labels.push_back(s.labels.at(i));
  }
  Table r = t;
  r.mps.sites[col] = std::move(ns);
  return logged(std::move(r), Rewrite{RewriteKind::Relabel, col, {}, {}, {}, perm, false});
}

Table project_delete(const Table& t, int col, const std::vector<int>& kept) {
  check_col(t, col);
  if (kept.empty()) throw std::invalid_argument("project_delete: kept set empty");
  const Site& s = t.col(col);
  Site ns;
  for (int k : kept) {
    ns.mats.push_back(s.mats.at(k));
    ns.labels.push_back(s.labels.at(k));
  }
  Table r = t;
  r.mps.sites[col] = std::move(ns);
  return logged(std::move(r), Rewrite{RewriteKind::ProjectDelete, col, {}, {}, kept, {}, false});
}

Table absorb_single(const Table& t, int col, bool into_left) {
  check_col(t, col);
  const Site& s = t.col(col);
  if (s.phys_dim() != 1) throw std::invalid_argument("absorb_single: column has more than one entry");
  int nb = into_left ? col - 1 : col + 1;
  if (nb < 0 || nb >= t.cols()) throw std::invalid_argument("absorb_single: no neighbor on that side");
  Table r = t;
  const Mat& single = s.mats[0];
  for (auto& a : r.mps.sites[nb].mats) a = into_left ? single * a : a * single;
  r.mps.sites.erase(r.mps.sites.begin() + col);
  r.origin.erase(r.origin.begin() + col);
  return logged(std::move(r), Rewrite{RewriteKind::AbsorbSingle, col, {}, {}, {}, {}, into_left});
}

Table absorb_boundary_left(const Table& t) {
  if (t.cols() == 0 || t.col(0).phys_dim() != 1)
    throw std::invalid_argument("absorb_boundary_left: first column not single-entry");
  Table r = t;
  r.mps.left = r.mps.sites[0].mats[0].apply(r.mps.left);
  r.mps.sites.erase(r.mps.sites.begin());
  r.origin.erase(r.origin.begin());
  return logged(std::move(r), Rewrite{RewriteKind::AbsorbBoundaryLeft, 0, {}, {}, {}, {}, true});
}

Table absorb_boundary_right(const Table& t) {
  int last = t.cols() - 1;
  if (t.cols() == 0 || t.col(last).phys_dim() != 1)
    throw std::invalid_argument("absorb_boundary_right: last column not single-entry");
  Table r = t;
  r.mps.right = r.mps.sites[last].mats[0].apply_left(r.mps.right);
  r.mps.sites.pop_back();
  r.origin.pop_back();
  return logged(std::move(r), Rewrite{RewriteKind::AbsorbBoundaryRight, last, {}, {}, {}, {}, false});
}

Table measure_rewrite(const Table& t, int col, const Mat& kraus) {
  check_col(t, col);
  const Site& s = t.col(col);
  if (kraus.cols() != s.phys_dim()) throw std::invalid_argument("measure_rewrite: dimension mismatch");
  Site ns;
  for (int row = 0; row < kraus.rows(); ++row) {
    Mat b(s.bond_dim(), s.bond_dim());
    for (int j = 0; j < s.phys_dim(); ++j)
      if (kraus(row, j) != cx{}) b = b + s.mats[j] * kraus(row, j);
    ns.mats.push_back(b);
    ns.labels.push_back(row < static_cast<int>(s.labels.size()) ? s.labels[row]
                                                                : std::to_string(row));
  }
  Table r = t;
  r.mps.sites[col] = std::move(ns);
  return logged(std::move(r), Rewrite{RewriteKind::Measure, col, kraus, {}, {}, {}, false});
}

Table rescale(const Table& t, int col, double scale) {
  check_col(t, col);
  if (!(scale > 0)) throw std::invalid_argument("rescale: scale must be positive");
  Table r = t;
  for (auto& a : r.mps.sites[col].mats) a = a * cx(scale, 0);
  return logged(std::move(r), Rewrite{RewriteKind::Rescale, col, Mat(1, 1, {scale}), {}, {}, {}, false});
}

Table uniform_conjugate(const Table& t, const Mat& r, const Mat& r_inv) {
  Table out = t;
  out = boundary_gauge_left(out, r, r_inv);
  for (int c = 0; c + 1 < out.cols(); ++c) out = gauge_move(out, c, r, r_inv);
  out = boundary_gauge_right(out, r, r_inv);
  return out;
}

Table replay(const Mps& original, const std::vector<Rewrite>& log) {
  Table t = Table::from_mps(original);
  for (const auto& rw : log) {
    switch (rw.kind) {
      case RewriteKind::GaugeMove: t = gauge_move(t, rw.col, rw.a, rw.b); break;
      case RewriteKind::BoundaryGaugeLeft: t = boundary_gauge_left(t, rw.a, rw.b); break;
      case RewriteKind::BoundaryGaugeRight: t = boundary_gauge_right(t, rw.a, rw.b); break;
      case RewriteKind::PhysicalUnitary: t = physical_unitary(t, rw.col, rw.a); break;
      case RewriteKind::Relabel: t = relabel(t, rw.col, rw.perm); break;
      case RewriteKind::ProjectDelete: t = project_delete(t, rw.col, rw.kept); break;
      case RewriteKind::AbsorbSingle: t = absorb_single(t, rw.col, rw.into_left); break;
      case RewriteKind::AbsorbBoundaryLeft: t = absorb_boundary_left(t); break;
      case RewriteKind::AbsorbBoundaryRight: t = absorb_boundary_right(t); break;
      case RewriteKind::Measure: t = measure_rewrite(t, rw.col, rw.a); break;
      case RewriteKind::Rescale: t = rescale(t, rw.col, rw.a(0, 0).real()); break;
    }
  }
  return t;
}

void Witness::require_unitary(double tol) const {
  for (const auto& [col, u] : site_unitaries)
    if (!u.is_unitary(tol)) throw std::invalid_argument("witness: non-unitary entry");
}

StateVector apply_witness(const Witness& w, const StateVector& v) {
  StateVector out = v;
  for (const auto& [col, u] : w.site_unitaries) out = apply_site_op(out, col, u);
  for (auto& a : out.amps) a *= w.phase;
  return out;
}

bool equivalent(const Table& t1, const Table& t2, const Witness& w, double tol, double* fidelity_out) {
  if (t1.cols() != t2.cols()) throw std::invalid_argument("equivalent: column count mismatch");
  for (int c = 0; c < t1.cols(); ++c)
    if (t1.col(c).phys_dim() != t2.col(c).phys_dim())
      throw std::invalid_argument("equivalent: physical dimension mismatch");
  w.require_unitary();
  StateVector v1 = expand(t1.mps);
  StateVector v2 = apply_witness(w, expand(t2.mps));
  double f = fidelity(v1.amps, v2.amps);
  if (fidelity_out) *fidelity_out = f;
  return f >= 1.0 - tol;
}

std::string operator_name(const Mat& m, double tol) {
  static const std::vector<std::pair<std::string, Mat>> dict = [] {
    std::vector<std::pair<std::string, Mat>> d;
    d.emplace_back("I", pauli('I'));
    d.emplace_back("X", pauli('X'));
    d.emplace_back("Y", pauli('Y'));
    d.emplace_back("Z", pauli('Z'));
    d.emplace_back("H", pauli('H'));
    d.emplace_back("HZ", pauli('H') * pauli('Z'));
    d.emplace_back("ZH", pauli('Z') * pauli('H'));
    d.emplace_back("XZ", pauli('X') * pauli('Z'));
    d.emplace_back("HX", pauli('H') * pauli('X'));
    d.emplace_back("XH", pauli('X') * pauli('H'));
    d.emplace_back("S", s_phi(3.14159265358979323846 / 2));
    return d;
  }();
  double scale = m.norm_max();
  if (scale < tol) return "0";
  if (m.rows() == 2 && m.cols() == 2) {
    Mat normalized = m * cx(1.0 / scale, 0);
    for (const auto& [name, op] : dict) {
      Mat opn = op * cx(1.0 / op.norm_max(), 0);
      if (equal_up_to_phase(normalized, opn, 1e-6)) return name;
    }
  }
  // short content hash
  uint64_t h = 1469598103934665603ull;
  for (const auto& e : m.data()) {
    auto mix = [&h](double d) {
      int64_t q = static_cast<int64_t>(std::llround(d * 1e6));
      h = (h ^ static_cast<uint64_t>(q)) * 1099511628211ull;
    };
    mix(e.real() / scale);
    mix(e.imag() / scale);
  }
  std::ostringstream os;
  os << "#" << std::hex << (h & 0xffff);
  return os.str();
}

std::string render(const Table& t) {
  int max_d = 0;
  for (int c = 0; c < t.cols(); ++c) max_d = std::max(max_d, t.col(c).phys_dim());
  std::vector<std::vector<std::string>> cells(max_d, std::vector<std::string>(t.cols()));
  std::vector<size_t> width(t.cols(), 0);
  for (int c = 0; c < t.cols(); ++c)
    for (int x = 0; x < max_d; ++x) {
      std::string s = x < t.col(c).phys_dim() ? operator_name(t.col(c).mats[x]) : "";
      width[c] = std::max(width[c], s.size());
      cells[x][c] = std::move(s);
    }
  std::ostringstream os;
  for (int x = 0; x < max_d; ++x) {
    for (int c = 0; c < t.cols(); ++c) {
      std::string s = cells[x][c];
      s.resize(width[c], ' ');
      os << s << (c + 1 < t.cols() ? " " : "");
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace quire
