#include "gindex/circle.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/FFT>

#include "gindex/error.hpp"

namespace gindex {

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return engine;
}

void require_same_grid(const PeriodicFunction& f, const PeriodicFunction& g) {
  if (!(f.grid() == g.grid())) {
    throw Error(ErrorKind::GridMismatch, "grids of size " + std::to_string(f.size()) + " and " +
                                             std::to_string(g.size()));
  }
}

}  // namespace

PeriodicGrid::PeriodicGrid(int size) : size_(size) {
  if (size < 4) throw Error(ErrorKind::InvalidParameter, "grid size must be >= 4");
}

std::vector<double> PeriodicGrid::nodes() const {
  std::vector<double> x(static_cast<size_t>(size_));
  for (int j = 0; j < size_; ++j) x[static_cast<size_t>(j)] = node(j);
  return x;
}

FrequencyWindow::FrequencyWindow(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 1) throw Error(ErrorKind::InvalidParameter, "window cutoff must be positive");
}

std::vector<cplx> dft(std::span<const cplx> values) {
  const int m = static_cast<int>(values.size());
  std::vector<cplx> in(values.begin(), values.end());
  std::vector<cplx> raw;
  fft_engine().fwd(raw, in);
  std::vector<cplx> out(static_cast<size_t>(m));
  const int k0 = lowest_mode(m);
  const double inv = 1.0 / m;
  for (int i = 0; i < m; ++i) {
    const int k = k0 + i;
    out[static_cast<size_t>(i)] = raw[static_cast<size_t>(((k % m) + m) % m)] * inv;
  }
  return out;
}

std::vector<cplx> idft(std::span<const cplx> coeffs) {
  const int m = static_cast<int>(coeffs.size());
  std::vector<cplx> raw(static_cast<size_t>(m));
  const int k0 = lowest_mode(m);
  for (int i = 0; i < m; ++i) {
    const int k = k0 + i;
    raw[static_cast<size_t>(((k % m) + m) % m)] = coeffs[static_cast<size_t>(i)];
  }
  std::vector<cplx> out;
  fft_engine().inv(out, raw);
  return out;
}

PeriodicFunction::PeriodicFunction(PeriodicGrid grid, std::vector<cplx> values,
                                   std::vector<cplx> coeffs)
    : grid_(grid), values_(std::move(values)), coeffs_(std::move(coeffs)) {}

PeriodicFunction PeriodicFunction::from_values(const PeriodicGrid& grid,
                                               std::vector<cplx> values) {
  if (static_cast<int>(values.size()) != grid.size()) {
    throw Error(ErrorKind::GridMismatch, "value count does not match grid size");
  }
  auto c = dft(values);
  return PeriodicFunction(grid, std::move(values), std::move(c));
}

PeriodicFunction PeriodicFunction::from_coeffs(const PeriodicGrid& grid,
                                               std::vector<cplx> coeffs) {
  if (static_cast<int>(coeffs.size()) != grid.size()) {
    throw Error(ErrorKind::GridMismatch, "coefficient count does not match grid size");
  }
  auto v = idft(coeffs);
  return PeriodicFunction(grid, std::move(v), std::move(coeffs));
}

PeriodicFunction PeriodicFunction::from_modes(const PeriodicGrid& grid,
                                              std::span<const std::pair<int, cplx>> modes) {
  const int m = grid.size();
  const int k0 = lowest_mode(m);
  std::vector<cplx> c(static_cast<size_t>(m));
  for (const auto& [k, v] : modes) {
    if (k < k0 || k >= k0 + m) {
      throw Error(ErrorKind::InvalidParameter,
                  "mode " + std::to_string(k) + " does not fit a grid of size " + std::to_string(m));
    }
    c[static_cast<size_t>(k - k0)] += v;
  }
  return from_coeffs(grid, std::move(c));
}

PeriodicFunction PeriodicFunction::from_function(const PeriodicGrid& grid,
                                                 const std::function<cplx(double)>& f) {
  std::vector<cplx> v(static_cast<size_t>(grid.size()));
  for (int j = 0; j < grid.size(); ++j) v[static_cast<size_t>(j)] = f(grid.node(j));
  return from_values(grid, std::move(v));
}

PeriodicFunction PeriodicFunction::constant(const PeriodicGrid& grid, cplx value) {
  std::vector<cplx> v(static_cast<size_t>(grid.size()), value);
  std::vector<cplx> c(static_cast<size_t>(grid.size()));
  c[static_cast<size_t>(-lowest_mode(grid.size()))] = value;
  return PeriodicFunction(grid, std::move(v), std::move(c));
}

PeriodicFunction PeriodicFunction::mode(const PeriodicGrid& grid, int k) {
  const std::pair<int, cplx> one{k, cplx(1.0)};
  return from_modes(grid, std::span(&one, 1));
}

cplx PeriodicFunction::coeff(int k) const noexcept {
  const int m = size();
  const int i = k - lowest_mode(m);
  if (i < 0 || i >= m) return {};
  return coeffs_[static_cast<size_t>(i)];
}

cplx PeriodicFunction::operator()(double x) const {
  const int m = size();
  const int k0 = lowest_mode(m);
  // e^{ikx} by repeated multiplication, reseeded every 64 modes
  const cplx step = std::polar(1.0, x);
  cplx e = std::polar(1.0, static_cast<double>(k0) * x);
  cplx acc{};
  for (int i = 0; i < m; ++i) {
    const int k = k0 + i;
    if (i % 64 == 0) e = std::polar(1.0, static_cast<double>(k) * x);
    const cplx c = coeffs_[static_cast<size_t>(i)];
    if (m % 2 == 0 && k == k0) {
      acc += c * std::cos(static_cast<double>(k) * x);
    } else {
      acc += c * e;
    }
    e *= step;
  }
  return acc;
}

double PeriodicFunction::sup_norm() const {
  double s = 0.0;
  for (const auto& v : values_) s = std::max(s, std::abs(v));
  return s;
}

double PeriodicFunction::min_abs() const {
  double s = std::abs(values_.front());
  for (const auto& v : values_) s = std::min(s, std::abs(v));
  return s;
}

double PeriodicFunction::l2_norm() const {
  double s = 0.0;
  for (const auto& v : values_) s += std::norm(v);
  return std::sqrt(s / size());
}

PeriodicFunction PeriodicFunction::conj() const {
  std::vector<cplx> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), [](cplx z) { return std::conj(z); });
  return from_values(grid_, std::move(v));
}

PeriodicFunction PeriodicFunction::scaled(cplx s) const {
  std::vector<cplx> v(values_.size()), c(coeffs_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), [s](cplx z) { return s * z; });
  std::transform(coeffs_.begin(), coeffs_.end(), c.begin(), [s](cplx z) { return s * z; });
  return PeriodicFunction(grid_, std::move(v), std::move(c));
}

WindingResult winding_number(const PeriodicFunction& f) {
  if (f.min_abs() <= kNearZero) {
    throw Error(ErrorKind::NearZeroValue, "function vanishes on the grid (min |f| = " +
                                              std::to_string(f.min_abs()) + ")");
  }
  const auto& v = f.values();
  const size_t m = v.size();
  double total = 0.0;
  for (size_t j = 0; j < m; ++j) total += std::arg(v[(j + 1) % m] / v[j]);
  const double raw = total / kTwoPi;
  const double rounded = std::round(raw);
  WindingResult out{static_cast<int>(rounded), std::abs(raw - rounded)};
  if (out.residual > 0.1) {
    throw Error(ErrorKind::UnresolvedWinding,
                "rounding residual " + std::to_string(out.residual) + " exceeds 0.1");
  }
  return out;
}

PeriodicFunction sum(const PeriodicFunction& f, const PeriodicFunction& g) {
  require_same_grid(f, g);
  std::vector<cplx> v(f.values().size());
  for (size_t j = 0; j < v.size(); ++j) v[j] = f.values()[j] + g.values()[j];
  return PeriodicFunction::from_values(f.grid(), std::move(v));
}

PeriodicFunction difference(const PeriodicFunction& f, const PeriodicFunction& g) {
  require_same_grid(f, g);
  std::vector<cplx> v(f.values().size());
  for (size_t j = 0; j < v.size(); ++j) v[j] = f.values()[j] - g.values()[j];
  return PeriodicFunction::from_values(f.grid(), std::move(v));
}

PeriodicFunction product(const PeriodicFunction& f, const PeriodicFunction& g) {
  require_same_grid(f, g);
  std::vector<cplx> v(f.values().size());
  for (size_t j = 0; j < v.size(); ++j) v[j] = f.values()[j] * g.values()[j];
  return PeriodicFunction::from_values(f.grid(), std::move(v));
}

PeriodicFunction reciprocal(const PeriodicFunction& f) {
  if (f.min_abs() < kNearZero) {
    throw Error(ErrorKind::DivisionNearZero,
                "min |f| = " + std::to_string(f.min_abs()) + " below 1e-8");
  }
  std::vector<cplx> v(f.values().size());
  for (size_t j = 0; j < v.size(); ++j) v[j] = 1.0 / f.values()[j];
  return PeriodicFunction::from_values(f.grid(), std::move(v));
}

PeriodicFunction compose(const PeriodicFunction& f, const std::function<double(double)>& map) {
  std::vector<double> t(static_cast<size_t>(f.size()));
  for (int j = 0; j < f.size(); ++j) t[static_cast<size_t>(j)] = map(f.grid().node(j));
  return compose(f, std::span<const double>(t));
}

PeriodicFunction compose(const PeriodicFunction& f, std::span<const double> targets) {
  if (static_cast<int>(targets.size()) != f.size()) {
    throw Error(ErrorKind::GridMismatch, "composition needs one target per node");
  }
  std::vector<cplx> v(targets.size());
  for (size_t j = 0; j < targets.size(); ++j) v[j] = f(targets[j]);
  return PeriodicFunction::from_values(f.grid(), std::move(v));
}

}  // namespace gindex
