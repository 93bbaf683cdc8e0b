#pragma once

// Numerical substrate on the circle S^1 = R / 2piZ: equispaced grids,
// centered discrete Fourier transforms, trigonometric interpolation and
// winding numbers.

#include <complex>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace gindex {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383279;

// Threshold below which a function value counts as zero for inversion.
inline constexpr double kNearZero = 1e-8;

class PeriodicGrid {
 public:
  explicit PeriodicGrid(int size);

  int size() const noexcept { return size_; }
  double node(int j) const noexcept { return kTwoPi * j / size_; }
  std::vector<double> nodes() const;

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  int size_;
};

// Galerkin truncation of L^2(S^1): the modes -cutoff..cutoff.
class FrequencyWindow {
 public:
  explicit FrequencyWindow(int cutoff);

  int cutoff() const noexcept { return cutoff_; }
  int dim() const noexcept { return 2 * cutoff_ + 1; }
  int index(int mode) const noexcept { return mode + cutoff_; }
  int mode(int index) const noexcept { return index - cutoff_; }
  bool contains(int mode) const noexcept { return mode >= -cutoff_ && mode <= cutoff_; }

  friend bool operator==(const FrequencyWindow&, const FrequencyWindow&) = default;

 private:
  int cutoff_;
};

// Lowest mode stored by a centered transform of length m.
inline int lowest_mode(int m) noexcept { return -(m / 2); }

// Centered DFT: c_k = (1/M) sum_j f(x_j) e^{-i k x_j}, returned for
// k = -floor(M/2) .. ceil(M/2)-1 in increasing order.
std::vector<cplx> dft(std::span<const cplx> values);

// Inverse of dft(): values f(x_j) = sum_k c_k e^{i k x_j}.
std::vector<cplx> idft(std::span<const cplx> coeffs);

// Complex-valued function on a PeriodicGrid. Both the nodal values and the
// centered Fourier coefficients are held; the object is immutable.
class PeriodicFunction {
 public:
  static PeriodicFunction from_values(const PeriodicGrid& grid, std::vector<cplx> values);
  static PeriodicFunction from_coeffs(const PeriodicGrid& grid, std::vector<cplx> coeffs);
  // Sparse trigonometric polynomial sum_k c_k e^{ikx}; modes must fit the grid.
  static PeriodicFunction from_modes(const PeriodicGrid& grid,
                                     std::span<const std::pair<int, cplx>> modes);
  static PeriodicFunction from_function(const PeriodicGrid& grid,
                                        const std::function<cplx(double)>& f);
  static PeriodicFunction constant(const PeriodicGrid& grid, cplx value);
  static PeriodicFunction mode(const PeriodicGrid& grid, int k);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  int size() const noexcept { return grid_.size(); }
  const std::vector<cplx>& values() const noexcept { return values_; }
  const std::vector<cplx>& coeffs() const noexcept { return coeffs_; }
  cplx value(int j) const noexcept { return values_[static_cast<size_t>(j)]; }
  // Fourier coefficient of mode k, zero outside the stored range.
  cplx coeff(int k) const noexcept;

  // Trigonometric interpolant at an arbitrary point. The Nyquist mode of an
  // even grid is split symmetrically between +-M/2.
  cplx operator()(double x) const;

  double sup_norm() const;
  double min_abs() const;
  // sqrt((1/M) sum_j |f(x_j)|^2)
  double l2_norm() const;

  PeriodicFunction conj() const;
  PeriodicFunction scaled(cplx s) const;

 private:
  PeriodicFunction(PeriodicGrid grid, std::vector<cplx> values, std::vector<cplx> coeffs);

  PeriodicGrid grid_;
  std::vector<cplx> values_;
  std::vector<cplx> coeffs_;
};

struct WindingResult {
  int winding = 0;
  // |raw/2pi - winding|, the distance of the raw sum from the integer.
  double residual = 0.0;
};

// Sum of principal-branch increments of arg f between consecutive nodes,
// divided by 2pi. Throws NearZeroValue if min |f| <= 1e-8 and
// UnresolvedWinding if the rounding residual exceeds 0.1.
WindingResult winding_number(const PeriodicFunction& f);

PeriodicFunction sum(const PeriodicFunction& f, const PeriodicFunction& g);
PeriodicFunction difference(const PeriodicFunction& f, const PeriodicFunction& g);
PeriodicFunction product(const PeriodicFunction& f, const PeriodicFunction& g);
// Throws DivisionNearZero when min |f| < 1e-8.
PeriodicFunction reciprocal(const PeriodicFunction& f);

// x_j -> f(map(x_j)) evaluated by trigonometric interpolation of f.
PeriodicFunction compose(const PeriodicFunction& f, const std::function<double(double)>& map);
// Same, with the target points already sampled (one per node).
PeriodicFunction compose(const PeriodicFunction& f, std::span<const double> targets);

inline PeriodicFunction operator+(const PeriodicFunction& f, const PeriodicFunction& g) {
  return sum(f, g);
}
inline PeriodicFunction operator-(const PeriodicFunction& f, const PeriodicFunction& g) {
  return difference(f, g);
}
inline PeriodicFunction operator*(const PeriodicFunction& f, const PeriodicFunction& g) {
  return product(f, g);
}

}  // namespace gindex
