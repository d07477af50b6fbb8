#include "quire/linalg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace quire {

Mat::Mat(int rows, int cols, std::initializer_list<cx> entries) : Mat(rows, cols) {
  if (static_cast<size_t>(rows) * cols != entries.size())
    throw std::invalid_argument("Mat: entry count does not match shape");
  size_t i = 0;
  for (cx e : entries) a_[i++] = e;
}

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::ketbra(int n, int r, int c) {
  Mat m(n, n);
  m(r, c) = 1.0;
  return m;
}

Mat Mat::diag(std::initializer_list<cx> d) {
  return diag(std::vector<cx>(d));
}

Mat Mat::diag(const std::vector<cx>& d) {
  Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

Mat Mat::operator*(const Mat& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("Mat::operator*: shape mismatch");
  Mat r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      cx v = (*this)(i, k);
      if (v == cx{}) continue;
      for (int j = 0; j < o.cols_; ++j) r(i, j) += v * o(k, j);
    }
  return r;
}

Mat Mat::operator+(const Mat& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Mat::operator+: shape mismatch");
  Mat r = *this;
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
  return r;
}

Mat Mat::operator-(const Mat& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Mat::operator-: shape mismatch");
  Mat r = *this;
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] -= o.a_[i];
  return r;
}

Mat Mat::operator*(cx s) const {
  Mat r = *this;
  for (auto& e : r.a_) e *= s;
  return r;
}

std::vector<cx> Mat::apply(std::span<const cx> v) const {
  if (static_cast<int>(v.size()) != cols_) throw std::invalid_argument("Mat::apply: size mismatch");
  std::vector<cx> r(rows_);
  for (int i = 0; i < rows_; ++i) {
    cx s{};
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

std::vector<cx> Mat::apply_left(std::span<const cx> row) const {
  if (static_cast<int>(row.size()) != rows_) throw std::invalid_argument("Mat::apply_left: size mismatch");
  std::vector<cx> r(cols_);
  for (int j = 0; j < cols_; ++j) {
    cx s{};
    for (int i = 0; i < rows_; ++i) s += row[i] * (*this)(i, j);
    r[j] = s;
  }
  return r;
}

Mat Mat::adjoint() const {
  Mat r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

Mat Mat::conjugate() const {
  Mat r = *this;
  for (auto& e : r.a_) e = std::conj(e);
  return r;
}

Mat Mat::transpose() const {
  Mat r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

cx Mat::trace() const {
  cx t{};
  for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double Mat::norm_max() const {
  double m = 0;
  for (const auto& e : a_) m = std::max(m, std::abs(e));
  return m;
}

double Mat::norm_fro() const {
  double s = 0;
  for (const auto& e : a_) s += std::norm(e);
  return std::sqrt(s);
}

bool Mat::is_identity(double tol) const {
  if (!square()) return false;
  return ((*this) - identity(rows_)).norm_max() <= tol;
}

bool Mat::is_unitary(double tol) const {
  if (!square()) return false;
  return (adjoint() * (*this)).is_identity(tol);
}

bool Mat::is_scalar_multiple_of_identity(double tol, cx* c) const {
  if (!square()) return false;
  cx d = trace() / static_cast<double>(rows_);
  if (((*this) - identity(rows_) * d).norm_max() > tol) return false;
  if (c) *c = d;
  return true;
}

Mat Mat::inverse2() const {
  if (rows_ != 2 || cols_ != 2) throw std::invalid_argument("inverse2: not 2x2");
  cx det = (*this)(0, 0) * (*this)(1, 1) - (*this)(0, 1) * (*this)(1, 0);
  if (std::abs(det) < 1e-14) throw std::invalid_argument("inverse2: singular matrix");
  Mat r(2, 2);
  r(0, 0) = (*this)(1, 1) / det;
  r(0, 1) = -(*this)(0, 1) / det;
  r(1, 0) = -(*this)(1, 0) / det;
  r(1, 1) = (*this)(0, 0) / det;
  return r;
}

std::string Mat::str() const {
  std::ostringstream os;
  os.precision(6);
  for (int i = 0; i < rows_; ++i) {
    os << (i == 0 ? "[" : " ");
    for (int j = 0; j < cols_; ++j) {
      cx e = (*this)(i, j);
      os << "(" << e.real() << (e.imag() < 0 ? "" : "+") << e.imag() << "i)";
      if (j + 1 < cols_) os << " ";
    }
    os << (i + 1 == rows_ ? "]" : "\n");
  }
  return os.str();
}

Mat kron(const Mat& a, const Mat& b) {
  Mat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      cx v = a(i, j);
      if (v == cx{}) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          r(i * b.rows() + k, j * b.cols() + l) = v * b(k, l);
    }
  return r;
}

cx dot(std::span<const cx> a, std::span<const cx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  cx s{};
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

cx inner(std::span<const cx> a, std::span<const cx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner: size mismatch");
  cx s{};
  for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm2(std::span<const cx> v) {
  double s = 0;
  for (const auto& e : v) s += std::norm(e);
  return s;
}

Mat pauli(char name) {
  switch (name) {
    case 'I': return Mat::identity(2);
    case 'X': return Mat(2, 2, {0, 1, 1, 0});
    case 'Y': return Mat(2, 2, {0, cx(0, -1), cx(0, 1), 0});
    case 'Z': return Mat(2, 2, {1, 0, 0, -1});
    case 'H': {
      double s = 1.0 / std::sqrt(2.0);
      return Mat(2, 2, {s, s, s, -s});
    }
    default: throw std::invalid_argument(std::string("pauli: unknown operator '") + name + "'");
  }
}

Mat rot_pi_xz(double theta) {
  double s = std::sin(theta), c = std::cos(theta);
  return Mat(2, 2, {c, s, s, -c});
}

Mat s_phi(double phi) {
  return Mat::diag({std::polar(1.0, -phi / 2.0), std::polar(1.0, phi / 2.0)});
}

bool equal_up_to_phase(std::span<const cx> a, std::span<const cx> b, double tol) {
  if (a.size() != b.size()) throw std::invalid_argument("equal_up_to_phase: shape mismatch");
  size_t k = 0;
  double best = 0;
  for (size_t i = 0; i < b.size(); ++i) {
    double m = std::abs(b[i]);
    if (m > best) { best = m; k = i; }
  }
  if (best == 0) throw std::invalid_argument("equal_up_to_phase: b is zero");
  cx c = a[k] / b[k];
  if (std::abs(std::abs(c) - 1.0) > tol) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - c * b[i]) > tol) return false;
  return true;
}

bool equal_up_to_phase(const Mat& a, const Mat& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("equal_up_to_phase: shape mismatch");
  return equal_up_to_phase(std::span<const cx>(a.data()), std::span<const cx>(b.data()), tol);
}

void canonicalize_phase(std::vector<cx>& v, double tol) {
  for (const auto& e : v) {
    double m = std::abs(e);
    if (m > tol) {
      cx ph = e / m;
      for (auto& x : v) x /= ph;
      return;
    }
  }
}

Mat canonicalize_phase(const Mat& m, double tol) {
  std::vector<cx> v = m.data();
  canonicalize_phase(v, tol);
  Mat r(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = v[static_cast<size_t>(i) * m.cols() + j];
  return r;
}

double fidelity(std::span<const cx> a, std::span<const cx> b) {
  double na = norm2(a), nb = norm2(b);
  if (na == 0 || nb == 0) return 0;
  return std::norm(inner(a, b)) / (na * nb);
}

}  // namespace quire
