#pragma once

// Kohn-Nirenberg quantization on a Fourier window and the g-graded operators
// sum_g K_g Phi_g.
//
// Matrix convention: A[j, k] = (1/M) sum_x a(x, k) e^{-i(j-k)x}, i.e. column k
// of op(a) holds the Fourier coefficients of x -> a(x, k) shifted by k.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "gindex/crossed_symbol.hpp"
#include "gindex/groups.hpp"
#include "gindex/jet.hpp"

namespace gindex {

// Classical symbol of order m <= 0:
//   a(x, k) = sigma_{sgn k}(x) <k>^m + sum_j lower[j-1]_{sgn k}(x) <k>^{m-j}
// with <k> = max(1, |k|) and k = 0 read on the plus sheet. Modes |k| < k_min
// are set to 0, or to `fill` times the identity when `unit` is set.
struct FullSymbol {
  PrincipalSymbol principal;
  int order = 0;
  int k_min = 0;
  bool unit = false;
  cplx fill = 1.0;
  std::vector<PrincipalSymbol> lower;

  static FullSymbol from_principal(PrincipalSymbol p, int order = 0);
  const PeriodicGrid& grid() const noexcept { return principal.grid(); }
};

Eigen::MatrixXcd op_classical(const FullSymbol& a, const FrequencyWindow& window);

// Generic KN matrix: `column(k, values)` fills x_j -> a(x_j, k) on a grid of
// size grid_size; coefficients beyond the grid's range are dropped.
Eigen::MatrixXcd op_columns(const FrequencyWindow& window, int grid_size,
                            const std::function<void(int, std::vector<cplx>&)>& column);

// Term h^{h_power} f(x) p(xi).
struct SeparableTerm {
  PeriodicFunction x;
  Profile xi;
  int h_power = 0;
};

// Finite sum of separable terms; a semiclassical symbol a(x, xi, h).
struct SemiclassicalSymbol {
  std::vector<SeparableTerm> terms;

  // Largest |xi| carrying mass (infinity for order-0 profiles).
  double radius() const;
  // Largest xi-order among the terms.
  double order() const;
  cplx operator()(double x, double xi, double h) const;
};

// A[j, k] = sum_i h^{p_i} c_{j-k}(f_i) p_i(h k). Throws WindowTooSmallForH
// when h * cutoff is below the xi-support radius.
Eigen::MatrixXcd op_h(const SemiclassicalSymbol& a, double h, const FrequencyWindow& window);

// op_h of an arbitrary function a(x, xi) sampled on a grid of size grid_size.
Eigen::MatrixXcd op_h_function(const std::function<cplx(double, double)>& a, double h,
                               const FrequencyWindow& window, int grid_size);

// Lazily quantized Phi_g for one (action, window); thread safe.
class TransformCache {
 public:
  TransformCache(GroupActionPtr action, FrequencyWindow window)
      : action_(std::move(action)), window_(window) {}

  const QuantizedTransform& get(const GroupElement& g) const;
  const GroupActionPtr& action() const noexcept { return action_; }
  const FrequencyWindow& window() const noexcept { return window_; }

 private:
  GroupActionPtr action_;
  FrequencyWindow window_;
  mutable std::mutex mutex_;
  mutable std::map<GroupElement, std::unique_ptr<QuantizedTransform>> cache_;
};

using TransformCachePtr = std::shared_ptr<const TransformCache>;

// sum_g K_g Phi_g with the grading kept.
class LabeledOperator {
 public:
  LabeledOperator(GroupActionPtr action, FrequencyWindow window);
  explicit LabeledOperator(TransformCachePtr cache);

  static LabeledOperator unit(TransformCachePtr cache);
  static LabeledOperator delta(TransformCachePtr cache, const GroupElement& g, Eigen::MatrixXcd k);

  const GroupActionPtr& action() const noexcept { return cache_->action(); }
  const GroupSpec& group() const noexcept { return cache_->action()->group(); }
  const FrequencyWindow& window() const noexcept { return cache_->window(); }
  const TransformCachePtr& transforms() const noexcept { return cache_; }
  const QuantizedTransform& phi(const GroupElement& g) const { return cache_->get(g); }

  const std::map<GroupElement, Eigen::MatrixXcd>& parts() const noexcept { return parts_; }
  std::vector<GroupElement> support() const;
  const Eigen::MatrixXcd* find(const GroupElement& g) const;

  // Throws WindowMismatch for wrong-sized matrices.
  void set(const GroupElement& g, Eigen::MatrixXcd k);
  void add(const GroupElement& g, const Eigen::MatrixXcd& k);
  // Removes parts with max |entry| <= tol.
  void prune(double tol);
  double max_abs() const;

  LabeledOperator& operator+=(const LabeledOperator& o);
  LabeledOperator& operator-=(const LabeledOperator& o);
  LabeledOperator& operator*=(cplx s);

 private:
  TransformCachePtr cache_;
  std::map<GroupElement, Eigen::MatrixXcd> parts_;
};

LabeledOperator operator+(LabeledOperator a, const LabeledOperator& b);
LabeledOperator operator-(LabeledOperator a, const LabeledOperator& b);

// parts[g] = op_classical(a_g).
LabeledOperator assemble(TransformCachePtr cache,
                         const std::vector<std::pair<GroupElement, FullSymbol>>& spec);

// parts[gh] += K_g (Phi_g L_h Phi_g^{-1}). Throws GroupMismatch / WindowMismatch.
LabeledOperator labeled_multiply(const LabeledOperator& a, const LabeledOperator& b);

// sum_g K_g Phi_g as a dense matrix.
Eigen::MatrixXcd realize(const LabeledOperator& a);

}  // namespace gindex
