#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace quire {

using cx = std::complex<double>;

inline constexpr double kPhaseTol = 1e-9;  // global-phase tolerance used repo-wide

/// Dense complex matrix, row-major. Sized for bond/physical operators
/// (dimensions stay below ~64), so no sparsity or blocking.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}
  Mat(int rows, int cols, std::initializer_list<cx> entries);

  static Mat identity(int n);
  static Mat zero(int rows, int cols) { return Mat(rows, cols); }
  /// |r><c| in an n-dimensional space.
  static Mat ketbra(int n, int r, int c);
  static Mat diag(std::initializer_list<cx> d);
  static Mat diag(const std::vector<cx>& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  cx& operator()(int r, int c) { return a_[static_cast<size_t>(r) * cols_ + c]; }
  const cx& operator()(int r, int c) const { return a_[static_cast<size_t>(r) * cols_ + c]; }

  const std::vector<cx>& data() const { return a_; }

  Mat operator*(const Mat& o) const;
  Mat operator+(const Mat& o) const;
  Mat operator-(const Mat& o) const;
  Mat operator*(cx s) const;
  friend Mat operator*(cx s, const Mat& m) { return m * s; }

  std::vector<cx> apply(std::span<const cx> v) const;        // M v
  std::vector<cx> apply_left(std::span<const cx> r) const;   // r M (row vector)

  Mat adjoint() const;
  Mat conjugate() const;
  Mat transpose() const;
  cx trace() const;

  double norm_max() const;
  double norm_fro() const;

  bool is_identity(double tol) const;
  bool is_unitary(double tol) const;
  /// True when M = c*I for some scalar c; writes c if requested.
  bool is_scalar_multiple_of_identity(double tol, cx* c = nullptr) const;

  /// 2x2 inverse only (all gauge matrices in this codebase are 2x2 or unitary).
  Mat inverse2() const;

  std::string str() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<cx> a_;
};

using Vec = std::vector<cx>;

Mat kron(const Mat& a, const Mat& b);

cx dot(std::span<const cx> a, std::span<const cx> b);       // plain sum a_i b_i (no conjugation)
cx inner(std::span<const cx> a, std::span<const cx> b);     // sum conj(a_i) b_i
double norm2(std::span<const cx> v);                        // sum |v_i|^2

/// The standard 2x2 operators; name is one of I, X, Y, Z, H.
Mat pauli(char name);

/// sin(theta) X + cos(theta) Z: the pi-rotation about the Bloch axis
/// (sin theta, 0, cos theta). Squares to the identity for every theta.
Mat rot_pi_xz(double theta);

/// diag(e^{-i phi/2}, e^{i phi/2}).
Mat s_phi(double phi);

/// True when a = c*b for a unit complex c, within tol (max-entry norm).
/// c is read off at the largest-magnitude entry of b.
bool equal_up_to_phase(const Mat& a, const Mat& b, double tol = kPhaseTol);
bool equal_up_to_phase(std::span<const cx> a, std::span<const cx> b, double tol = kPhaseTol);

/// Rescale so the first entry with magnitude > tol becomes real positive.
void canonicalize_phase(std::vector<cx>& v, double tol = 1e-12);
Mat canonicalize_phase(const Mat& m, double tol = 1e-12);

/// |<a|b>|^2 / (|a|^2 |b|^2); the figure of merit for all equivalence checks.
double fidelity(std::span<const cx> a, std::span<const cx> b);

}  // namespace quire
