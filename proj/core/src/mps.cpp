#include "quire/mps.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace quire {

Site::Site(std::vector<Mat> m) : mats(std::move(m)) {
  labels.reserve(mats.size());
  for (size_t i = 0; i < mats.size(); ++i) labels.push_back(std::to_string(i));
}

Site::Site(std::vector<Mat> m, std::vector<std::string> names)
    : mats(std::move(m)), labels(std::move(names)) {
  if (mats.size() != labels.size()) throw std::invalid_argument("Site: label count mismatch");
}

void Mps::validate() const {
  int delta = bond_dim();
  if (delta < 1) throw std::invalid_argument("Mps: empty boundary vectors");
  if (static_cast<int>(right.size()) != delta) throw std::invalid_argument("Mps: boundary size mismatch");
  for (const auto& s : sites) {
    if (s.mats.empty()) throw std::invalid_argument("Mps: site with no matrices");
    for (const auto& a : s.mats)
      if (a.rows() != delta || a.cols() != delta)
        throw std::invalid_argument("Mps: bond dimension mismatch");
  }
}

size_t StateVector::index(const std::vector<int>& outcomes) const {
  if (outcomes.size() != dims.size()) throw std::invalid_argument("StateVector::index: arity");
  size_t idx = 0;
  for (size_t i = 0; i < dims.size(); ++i) {
    if (outcomes[i] < 0 || outcomes[i] >= dims[i]) throw std::out_of_range("StateVector::index");
    idx = idx * dims[i] + outcomes[i];
  }
  return idx;
}

namespace {

// Depth-first over outcome strings, carrying the partial product
// A[x_k]...A[x_1]|L> in preallocated per-level buffers.
struct Expander {
  const Mps& m;
  StateVector& out;
  int delta;
  std::vector<cx> buf;  // (n+1) x delta

  Expander(const Mps& mm, StateVector& o) : m(mm), out(o), delta(mm.bond_dim()) {
    buf.assign(static_cast<size_t>(m.size() + 1) * delta, cx{});
    for (int i = 0; i < delta; ++i) buf[i] = m.left[i];
  }

  void run(int site, size_t base, size_t stride) {
    const cx* v = buf.data() + static_cast<size_t>(site) * delta;
    if (site == m.size()) {
      cx amp{};
      for (int i = 0; i < delta; ++i) amp += m.right[i] * v[i];
      out.amps[base] = amp;
      return;
    }
    const Site& s = m.sites[site];
    cx* w = buf.data() + static_cast<size_t>(site + 1) * delta;
    size_t child_stride = stride / s.mats.size();
    for (size_t x = 0; x < s.mats.size(); ++x) {
      const Mat& a = s.mats[x];
      for (int r = 0; r < delta; ++r) {
        cx acc{};
        for (int c = 0; c < delta; ++c) acc += a(r, c) * v[c];
        w[r] = acc;
      }
      run(site + 1, base + x * child_stride, child_stride);
    }
  }
};

}  // namespace

StateVector expand(const Mps& m, size_t cap) {
  m.validate();
  size_t total = 1;
  for (const auto& s : m.sites) {
    if (total > cap / s.mats.size()) throw std::length_error("expand: dimension cap exceeded");
    total *= s.mats.size();
  }
  StateVector out;
  out.dims.reserve(m.sites.size());
  for (const auto& s : m.sites) out.dims.push_back(s.phys_dim());
  out.amps.assign(total, cx{});
  Expander ex(m, out);
  ex.run(0, 0, total);
  out.zero = (out.norm_sq() < 1e-300);
  return out;
}

bool check_normalized(const Site& s, double tol) {
  if (s.mats.empty()) return false;
  Mat sum(s.bond_dim(), s.bond_dim());
  for (const auto& a : s.mats) sum = sum + a.adjoint() * a;
  return sum.is_identity(tol);
}

Site normalize_site(const Site& s, double tol) {
  Mat sum(s.bond_dim(), s.bond_dim());
  for (const auto& a : s.mats) sum = sum + a.adjoint() * a;
  cx c;
  if (!sum.is_scalar_multiple_of_identity(tol * s.mats.size() * 10, &c) || c.real() <= 0)
    throw std::invalid_argument("normalize_site: sum A^dag A not proportional to identity");
  double scale = 1.0 / std::sqrt(c.real());
  Site r = s;
  for (auto& a : r.mats) a = a * scale;
  return r;
}

bool MeasurementOp::complete(double tol) const {
  if (kraus.empty()) return false;
  int d = kraus[0].cols();
  Mat sum(d, d);
  for (const auto& k : kraus) sum = sum + k.adjoint() * k;
  return sum.is_identity(tol);
}

MeasurementOp MeasurementOp::projective_split(int d, const std::vector<int>& keep,
                                              std::string keep_name, std::string rest_name) {
  std::vector<bool> in(d, false);
  for (int k : keep) in.at(k) = true;
  Mat p(d, d), q(d, d);
  for (int i = 0; i < d; ++i) (in[i] ? p : q)(i, i) = 1.0;
  return MeasurementOp{{p, q}, {std::move(keep_name), std::move(rest_name)}};
}

MeasurementOp MeasurementOp::computational(int d) {
  MeasurementOp m;
  for (int i = 0; i < d; ++i) {
    m.kraus.push_back(Mat::ketbra(d, i, i));
    m.names.push_back(std::to_string(i));
  }
  return m;
}

MeasurementOp MeasurementOp::basis(const Mat& u) {
  if (!u.is_unitary(kPhaseTol)) throw std::invalid_argument("MeasurementOp::basis: not unitary");
  MeasurementOp m;
  int d = u.rows();
  for (int b = 0; b < d; ++b) {
    Mat k(d, d);  // |b><m_b| with <m_b| = conj(row b of u)
    for (int j = 0; j < d; ++j) k(b, j) = std::conj(u(b, j));
    m.kraus.push_back(k);
    m.names.push_back("b" + std::to_string(b));
  }
  return m;
}

MeasurementOp MeasurementOp::identity_op(int d) {
  return MeasurementOp{{Mat::identity(d)}, {"id"}};
}

namespace {

Mps kraus_image(const Mps& m, int site_index, const Mat& k) {
  Mps post = m;
  const Site& s = m.sites[site_index];
  int d = s.phys_dim();
  Site ns = s;
  for (int row = 0; row < d; ++row) {
    Mat b(s.bond_dim(), s.bond_dim());
    for (int col = 0; col < d; ++col) {
      cx coeff = k(row, col);
      if (coeff != cx{}) b = b + s.mats[col] * coeff;
    }
    ns.mats[row] = b;
  }
  post.sites[site_index] = ns;
  return post;
}

}  // namespace

std::vector<double> born_probabilities(const Mps& m, int site_index, const MeasurementOp& meas) {
  if (site_index < 0 || site_index >= m.size()) throw std::out_of_range("born: site index");
  if (meas.phys_dim() != m.sites[site_index].phys_dim())
    throw std::invalid_argument("born: measurement dimension mismatch");
  if (!meas.complete()) throw std::invalid_argument("born: Kraus set not complete");

  StateVector prior = expand(m);
  double total = prior.norm_sq();
  if (total < 1e-300) throw std::runtime_error("born: zero prior state");

  std::vector<double> probs;
  probs.reserve(meas.outcomes());
  for (const auto& k : meas.kraus) probs.push_back(apply_site_op(prior, site_index, k).norm_sq() / total);
  return probs;
}

BornResult born_measure(const Mps& m, int site_index, const MeasurementOp& meas, Rng& rng) {
  std::vector<double> probs = born_probabilities(m, site_index, meas);
  double mass = 0;
  for (double& p : probs) {
    if (p < 1e-15) p = 0;  // exclude numerically-dead branches from the support
    mass += p;
  }
  if (mass <= 0) throw std::runtime_error("born: all outcomes below probability floor");
  int outcome = rng.sample(probs);
  return BornResult{outcome, kraus_image(m, site_index, meas.kraus[outcome]), probs[outcome] / mass};
}

StateVector apply_site_op(const StateVector& v, int site, const Mat& op) {
  if (site < 0 || site >= static_cast<int>(v.dims.size())) throw std::out_of_range("apply_site_op: site");
  int d = v.dims[site];
  if (op.cols() != d) throw std::invalid_argument("apply_site_op: dimension mismatch");
  int dnew = op.rows();

  size_t inner = 1;
  for (size_t i = site + 1; i < v.dims.size(); ++i) inner *= v.dims[i];
  size_t outer = v.amps.size() / (inner * d);

  StateVector out;
  out.dims = v.dims;
  out.dims[site] = dnew;

  bool diagonal = (dnew == d);
  for (int r = 0; diagonal && r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (r != c && op(r, c) != cx{}) diagonal = false;

  if (diagonal) {
    out.amps = v.amps;
    for (size_t o = 0; o < outer; ++o)
      for (int c = 0; c < d; ++c) {
        cx coeff = op(c, c);
        cx* dst = out.amps.data() + (o * d + c) * inner;
        if (coeff == cx(1, 0)) continue;
        for (size_t i = 0; i < inner; ++i) dst[i] *= coeff;
      }
  } else {
    out.amps.assign(outer * dnew * inner, cx{});
    for (size_t o = 0; o < outer; ++o)
      for (int r = 0; r < dnew; ++r)
        for (int c = 0; c < d; ++c) {
          cx coeff = op(r, c);
          if (coeff == cx{}) continue;
          const cx* src = v.amps.data() + (o * d + c) * inner;
          cx* dst = out.amps.data() + (o * dnew + r) * inner;
          for (size_t i = 0; i < inner; ++i) dst[i] += coeff * src[i];
        }
  }
  out.zero = (out.norm_sq() < 1e-300);
  return out;
}

StateVector slice_site(const StateVector& v, int site, const std::vector<int>& keep) {
  int d = v.dims.at(site);
  Mat sel(static_cast<int>(keep.size()), d);
  for (size_t r = 0; r < keep.size(); ++r) sel(static_cast<int>(r), keep[r]) = 1.0;
  return apply_site_op(v, site, sel);
}

StateVector factor_out_site(const StateVector& v, int site, int outcome, double tol) {
  int d = v.dims.at(site);
  if (outcome < 0 || outcome >= d) throw std::out_of_range("factor_out_site: outcome");

  size_t inner = 1;
  for (size_t i = site + 1; i < v.dims.size(); ++i) inner *= v.dims[i];
  size_t outer = v.amps.size() / (inner * d);

  StateVector out;
  out.dims = v.dims;
  out.dims.erase(out.dims.begin() + site);
  out.amps.resize(outer * inner);

  double kept_norm = 0, rest_norm = 0;
  for (size_t o = 0; o < outer; ++o)
    for (int c = 0; c < d; ++c) {
      const cx* src = v.amps.data() + (o * d + c) * inner;
      if (c == outcome) {
        cx* dst = out.amps.data() + o * inner;
        for (size_t i = 0; i < inner; ++i) {
          dst[i] = src[i];
          kept_norm += std::norm(src[i]);
        }
      } else {
        for (size_t i = 0; i < inner; ++i) rest_norm += std::norm(src[i]);
      }
    }
  if (rest_norm > tol * tol * std::max(1.0, kept_norm + rest_norm))
    throw std::runtime_error("factor_out_site: site still entangled/occupied elsewhere");
  out.zero = (kept_norm < 1e-300);
  return out;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  StateVector out;
  out.dims = a.dims;
  out.dims.insert(out.dims.end(), b.dims.begin(), b.dims.end());
  out.amps.resize(a.amps.size() * b.amps.size());
  for (size_t i = 0; i < a.amps.size(); ++i)
    for (size_t j = 0; j < b.amps.size(); ++j) out.amps[i * b.amps.size() + j] = a.amps[i] * b.amps[j];
  out.zero = a.zero || b.zero;
  return out;
}

// --- JSON I/O ---

namespace {

using nlohmann::json;

json cx_to_json(const cx& c) { return json::array({c.real(), c.imag()}); }

cx cx_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("mps json: bad complex entry");
  return cx(j[0].get<double>(), j[1].get<double>());
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (const auto& c : v) a.push_back(cx_to_json(c));
  return a;
}

Vec vec_from_json(const json& j) {
  Vec v;
  for (const auto& e : j) v.push_back(cx_from_json(e));
  return v;
}

}  // namespace

Mps mps_from_json(const std::string& text) {
  json j = json::parse(text);
  Mps m;
  m.left = vec_from_json(j.at("left"));
  m.right = vec_from_json(j.at("right"));
  int delta = static_cast<int>(m.left.size());
  for (const auto& js : j.at("sites")) {
    std::vector<Mat> mats;
    for (const auto& jm : js) {
      Vec flat = vec_from_json(jm);
      if (static_cast<int>(flat.size()) != delta * delta)
        throw std::invalid_argument("mps json: matrix size does not match bond dimension");
      Mat a(delta, delta);
      for (int r = 0; r < delta; ++r)
        for (int c = 0; c < delta; ++c) a(r, c) = flat[static_cast<size_t>(r) * delta + c];
      mats.push_back(a);
    }
    m.sites.emplace_back(std::move(mats));
  }
  if (j.contains("labels")) {
    auto& jl = j.at("labels");
    for (size_t i = 0; i < jl.size() && i < m.sites.size(); ++i) {
      std::vector<std::string> names = jl[i].get<std::vector<std::string>>();
      if (names.size() == m.sites[i].mats.size()) m.sites[i].labels = names;
    }
  }
  m.validate();
  return m;
}

std::string mps_to_json(const Mps& m) {
  json j;
  j["left"] = vec_to_json(m.left);
  j["right"] = vec_to_json(m.right);
  json sites = json::array();
  json labels = json::array();
  for (const auto& s : m.sites) {
    json site = json::array();
    for (const auto& a : s.mats) site.push_back(vec_to_json(a.data()));
    sites.push_back(site);
    labels.push_back(s.labels);
  }
  j["sites"] = sites;
  j["labels"] = labels;
  return j.dump(2);
}

Mps load_mps_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mps file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return mps_from_json(ss.str());
}

void save_mps_file(const Mps& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mps file: " + path);
  out << mps_to_json(m) << "\n";
}

}  // namespace quire
