#pragma once

// Fredholm index by singular values, matrix-level parametrices and the
// conjugacy-class localized indices ind_g = Tr_g(1 - E A) - Tr_g(1 - A E).

#include <functional>
#include <vector>

#include "gindex/crossed_symbol.hpp"
#include "gindex/quantize.hpp"

namespace gindex {

// Builds the operator on a given window (one call per window size).
using OperatorFactory = std::function<LabeledOperator(const FrequencyWindow&)>;

// Orientation of the index relative to the sheet windings: with our sheet
// and quantization conventions the calibration run gives
// index = s * (wind(minus) - wind(plus)) with s = +1.
inline constexpr int kIndexSign = 1;

struct WindowIndex {
  int cutoff = 0;
  int index = 0;
  int kernel_dim = 0;
  int cokernel_dim = 0;
  double sv_gap = 0.0;
  double sv_max = 0.0;
};

struct IndexReport {
  int index = 0;
  int kernel_dim = 0;
  int cokernel_dim = 0;
  double sv_gap = 0.0;
  std::vector<WindowIndex> stabilization;
};

struct IndexOptions {
  double zero_tol = 1e-8;  // relative to the largest singular value
  double min_gap = 1e3;
  // Extra modes for the tall sections; <= 0 selects max(16, cutoff / 4).
  int pad = 0;
};

// Index of one window: the operator is built on cutoff + pad and restricted
// to the columns |k| <= cutoff (and likewise for the adjoint).
WindowIndex window_index(const OperatorFactory& factory, int cutoff, const IndexOptions& opt = {});

// Throws NoSpectralGap if no window has sv_gap >= min_gap and NonStabilized
// if the windows disagree.
IndexReport numerical_index(const OperatorFactory& factory, const std::vector<int>& cutoffs,
                            const IndexOptions& opt = {});

// s * (wind(minus) - wind(plus)) for a trivial-group symbol with one term.
int winding_index_oracle(const CrossedSymbol& a, int sign = kIndexSign);

struct Parametrix {
  LabeledOperator E;
  LabeledOperator left_remainder;   // 1 - E A
  LabeledOperator right_remainder;  // 1 - A E
};

// E0 = sum_g op(r_g) Phi_g, S1 = 1 - E0 A, E = sum_{j<N} S1^j E0.
// Parts with entries below prune_tol are dropped along the way.
Parametrix parametrix(const LabeledOperator& A, const CrossedSymbol& r, int N,
                      double prune_tol = 1e-14);

// sum_{l in class} sum_{|k| <= inner} (X_l Phi_l)[k, k]
cplx localized_trace(const LabeledOperator& X, const ConjugacyClass& cls, int inner);

// Default inner range: half the window.
inline int inner_cutoff(const FrequencyWindow& w) { return w.cutoff() / 2; }

struct LocalizedValue {
  ConjugacyClass cls;
  cplx value{};
  double drift = 0.0;
  std::vector<std::pair<int, cplx>> per_window;
};

struct LocalizedOptions {
  int order = 4;  // parametrix order N
  double drift_tol = 1e-3;
  double prune_tol = 1e-14;
};

// ind_<g> for every requested class (all classes meeting the remainders when
// `classes` is empty), stabilized over the cutoffs. Throws NonStabilized when
// the two largest cutoffs differ by more than drift_tol.
std::vector<LocalizedValue> localized_indices(const OperatorFactory& factory,
                                              const CrossedSymbol& r,
                                              const std::vector<int>& cutoffs,
                                              std::vector<ConjugacyClass> classes = {},
                                              const LocalizedOptions& opt = {});

LocalizedValue localized_index(const OperatorFactory& factory, const CrossedSymbol& r,
                               const ConjugacyClass& cls, const std::vector<int>& cutoffs,
                               const LocalizedOptions& opt = {});

struct LocalizedIndexReport {
  std::vector<LocalizedValue> classes;
  cplx sum{};
  int fredholm_index = 0;
  double residual = 0.0;
  bool rounded_match = false;
};

LocalizedIndexReport decomposition_check(const OperatorFactory& factory, const CrossedSymbol& r,
                                         const std::vector<int>& cutoffs,
                                         const std::vector<int>& index_cutoffs,
                                         const LocalizedOptions& lopt = {},
                                         const IndexOptions& iopt = {});

struct Prop7Result {
  cplx value{};
  double drift = 0.0;
  bool pass = false;
};

// |ind_{g0}| < tol for an element with chi(g0) != 0; throws NoHomomorphism.
Prop7Result prop7_check(const OperatorFactory& factory, const CrossedSymbol& r,
                        const GroupElement& g0, const std::vector<int>& cutoffs,
                        const LocalizedOptions& opt = {}, double tol = 1e-3);

// Operator norm of realize(X) restricted to rows and columns kmin <= |k| <= kmax.
double band_norm(const LabeledOperator& X, int kmin, int kmax);

}  // namespace gindex
