#pragma once

// Semiclassical symbol calculus on the h-lattice xi = h k: star products with
// exact Taylor jets in xi, the symbol parametrix r_N, localized traces
// tau_g, Laurent fits and the algebraic index.

#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "gindex/crossed_symbol.hpp"
#include "gindex/quantize.hpp"

namespace gindex {

// Sample points xi_k = h k, |k| <= cutoff, times an x-grid of grid_size nodes.
struct Lattice {
  double h = 0.1;
  int cutoff = 64;
  int grid_size = 64;

  int dim() const noexcept { return 2 * cutoff + 1; }
  double xi(int k) const noexcept { return h * k; }
  friend bool operator==(const Lattice&, const Lattice&) = default;
};

// A symbol sampled on a Lattice with a Taylor jet of length `length` in xi
// at every sample point. Layout: ((k + cutoff) * length + d) * grid_size + i.
class JetField {
 public:
  JetField(Lattice lattice, int length);

  // sum_i f_i(x) p_i(xi) (h-powers of the terms are ignored).
  static JetField sample(const std::vector<SeparableTerm>& terms, const Lattice& lattice,
                         int length);
  static JetField constant(const Lattice& lattice, int length, cplx value);

  const Lattice& lattice() const noexcept { return lat_; }
  int length() const noexcept { return len_; }
  cplx& at(int k, int d, int i) { return data_[offset(k, d, i)]; }
  cplx at(int k, int d, int i) const { return data_[offset(k, d, i)]; }
  // Contiguous x-row of jet coefficient d at lattice index k.
  const cplx* row(int k, int d) const { return &data_[offset(k, d, 0)]; }
  cplx* row(int k, int d) { return &data_[offset(k, d, 0)]; }

  JetField truncated(int length) const;
  double sup_norm() const;  // over values (d = 0)
  // max |value| over lattice points with |xi| > radius
  double sup_outside(double radius) const;

  JetField& operator+=(const JetField& o);
  JetField& operator-=(const JetField& o);
  JetField& operator*=(cplx s);

 private:
  size_t offset(int k, int d, int i) const noexcept {
    return (static_cast<size_t>(k + lat_.cutoff) * static_cast<size_t>(len_) +
            static_cast<size_t>(d)) * static_cast<size_t>(lat_.grid_size) + static_cast<size_t>(i);
  }

  Lattice lat_;
  int len_;
  std::vector<cplx> data_;
};

// Pointwise jet product, truncated to out_length.
JetField multiply(const JetField& a, const JetField& b, int out_length);
// Jets of (1/n!) d^n a / dxi^n.
JetField xi_derivative(const JetField& a, int n);
// d^n a / dx^n by spectral differentiation.
JetField x_derivative(const JetField& a, int n);
// b o C for an affine C(x, xi) = (s (x - c), s xi).
JetField transport(const JetField& b, const CanonicalTransform& c);

// sum_g sum_{j < order} h^j a_{g,j} Phi_g at a single h.
class StarSeries {
 public:
  StarSeries(GroupActionPtr action, Lattice lattice, int order);

  static StarSeries unit(GroupActionPtr action, const Lattice& lattice, int order);
  // Each element's SemiclassicalSymbol contributes its terms at their h-powers.
  static StarSeries from_symbols(GroupActionPtr action, const Lattice& lattice, int order,
                                 const std::vector<std::pair<GroupElement, SemiclassicalSymbol>>& spec);

  const GroupActionPtr& action() const noexcept { return action_; }
  const GroupSpec& group() const noexcept { return action_->group(); }
  const Lattice& lattice() const noexcept { return lat_; }
  int order() const noexcept { return order_; }
  const std::map<std::pair<GroupElement, int>, JetField>& terms() const noexcept { return terms_; }
  std::vector<GroupElement> support() const;

  // Throws OrderOverflow for j >= order; fields are truncated to order - j.
  void add(const GroupElement& g, int j, const JetField& f);
  void prune(double tol);
  double sup_norm() const;
  double sup_outside(double radius) const;

  StarSeries& operator+=(const StarSeries& o);
  StarSeries& operator-=(const StarSeries& o);
  StarSeries& operator*=(cplx s);

 private:
  GroupActionPtr action_;
  Lattice lat_;
  int order_;
  std::map<std::pair<GroupElement, int>, JetField> terms_;
};

StarSeries operator+(StarSeries a, const StarSeries& b);
StarSeries operator-(StarSeries a, const StarSeries& b);

// (a * b)_{gh} = sum_n ((-i)^n / n!) d_xi^n a_g . d_x^n (b_h o C_g) h^n, collected
// by total h-order < order. Throws NonIsometricAction, OrderOverflow.
StarSeries star_h(const StarSeries& a, const StarSeries& b);

// Matrix of sum_g sum_j h^j op_h(a_{g,j}) Phi_g on the lattice window.
Eigen::MatrixXcd realize(const StarSeries& a);

// Elliptic element of B = (A x| G)^+ given by principal data:
//   a_g = fill psi_0 delta_{g,e} + sigma_g^+ psi_+ + sigma_g^- psi_-,
// psi_+- switching on over [eps, 2 eps]. Lattice discreteness errors behave
// like exp(-c eps / h), so eps = 3 keeps them below fit noise for h <= 0.2.
struct BSymbol {
  CrossedSymbol sigma;
  double eps = 3.0;
  cplx fill = 1.0;

  StarSeries series(const Lattice& lattice, int order) const;
  // Semiclassical symbols per element (for op_h at a fixed h).
  std::vector<std::pair<GroupElement, SemiclassicalSymbol>> symbols() const;
};

// r_0 = fill psi_0 delta_e + rho^+ psi_+ + rho^- psi_- for rho = sigma^{-1}.
StarSeries cutoff_inverse(const CrossedSymbol& rho, double eps, cplx fill, const Lattice& lattice,
                          int order);

struct SymbolParametrix {
  StarSeries r;
  StarSeries left_residual;   // 1 - r * a
  StarSeries right_residual;  // 1 - a * r
};

// r_N = r_0 * (1 + w + ... + w^N), w = 1 - a * r_0. r0_fill defaults to 1/fill.
// Throws NotElliptic.
SymbolParametrix symbol_parametrix_h(const BSymbol& a, const Lattice& lattice, int N,
                                     std::optional<cplx> r0_fill = std::nullopt);

// sum_{l in class} tr(op_h(x_l) Phi_l) over the lattice window. Throws
// TraceDivergence when the absolute diagonal mass in the outer fifth of the
// window does not shrink relative to the band inside it.
cplx tau(const StarSeries& x, const ConjugacyClass& cls);

struct LaurentFit {
  int j_min = -1;
  int j_max = 2;
  std::vector<cplx> coeffs;  // c_{j_min} .. c_{j_max}
  double residual = 0.0;
  double condition = 0.0;

  cplx coeff(int j) const;
};

struct TraceSeries {
  std::vector<double> h;
  std::vector<cplx> values;
  std::optional<LaurentFit> fit;
};

// Default h-grid: 8 log-spaced points from 0.2 down to 0.02.
std::vector<double> default_h_grid();

// Evaluates tau on builder(h) for every h (largest first).
TraceSeries tau_g(const std::function<StarSeries(double)>& builder, const ConjugacyClass& cls,
                  const std::vector<double>& h_grid);

// Least squares in powers h^{j_min}..h^{j_max}; throws IllConditionedFit
// above condition 1e8.
LaurentFit laurent_fit(const std::vector<double>& h, const std::vector<cplx>& values, int j_min,
                       int j_max);

struct PowerLaw {
  std::vector<double> h;
  std::vector<cplx> values;
  double slope = 0.0;      // least squares slope of log|tau| against log h
  double max_abs = 0.0;
  double expected = 0.0;   // -dim(fixed set)/2, or NaN for an empty fixed set
  bool pass = false;
};

// Lattice cutoff large enough for the symbol at step h.
int lattice_cutoff(double radius, double h, int minimum);

// a supported on a single element g; traces over h_grid.
PowerLaw trace_power_law(GroupActionPtr action, const GroupElement& g,
                         const SemiclassicalSymbol& a, const std::vector<double>& h_grid,
                         int grid_size = 64, int min_cutoff = 64, double tol = 0.05);

struct AlgebraicIndexOptions {
  int order = 4;  // N
  int grid_size = 64;
  int min_cutoff = 16;
  std::optional<cplx> r0_fill;
  double negative_power_tol = 1e-3;
};

struct AlgebraicIndex {
  ConjugacyClass cls;
  TraceSeries series;
  LaurentFit fit;
  cplx c_minus1{};
  cplx c0{};
  // |c_{-1}| relative to max|values| * h_min
  double negative_power = 0.0;
  bool negative_power_violation = false;
};

// tau_g(1 - r_N * a) - tau_g(1 - a * r_N) over h_grid, fitted on powers
// -1..N-2. Throws NonIsometricAction, ResidualNotTraceClass.
AlgebraicIndex algebraic_index(const BSymbol& a, const ConjugacyClass& cls,
                               const std::vector<double>& h_grid,
                               const AlgebraicIndexOptions& opt = {});

// All classes at once (one parametrix per h).
std::vector<AlgebraicIndex> algebraic_indices(const BSymbol& a,
                                              const std::vector<ConjugacyClass>& classes,
                                              const std::vector<double>& h_grid,
                                              const AlgebraicIndexOptions& opt = {});

struct EgorovReport {
  std::vector<double> h;
  std::vector<double> defect;
  double slope = 0.0;
  double truncation_defect = 0.0;
};

// ||Phi_g op_h(a) Phi_g^* - op_h(a o C_g)|| on the inner half window.
EgorovReport egorov_defect(GroupActionPtr action, const GroupElement& g,
                           const SemiclassicalSymbol& a, const std::vector<double>& h_grid,
                           int cutoff, int grid_size = 256);

struct CompositionReport {
  int order = 0;
  std::vector<double> h;
  std::vector<double> defect;
  double slope = 0.0;
};

// ||op_h(a) op_h(b) - op_h(a *_N b)|| over h_grid, window hN_F >= 2 radius.
CompositionReport composition_defect(GroupActionPtr action,
                                     const std::vector<std::pair<GroupElement, SemiclassicalSymbol>>& a,
                                     const std::vector<std::pair<GroupElement, SemiclassicalSymbol>>& b,
                                     int order, const std::vector<double>& h_grid,
                                     int grid_size = 64);

// Least squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gindex
