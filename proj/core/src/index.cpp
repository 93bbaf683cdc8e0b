#include "gindex/index.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gindex/error.hpp"

namespace gindex {

namespace {

Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues();
}

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.empty()) throw Error(ErrorKind::InvalidParameter, "empty window schedule");
  return v;
}

}  // namespace

WindowIndex window_index(const OperatorFactory& factory, int cutoff, const IndexOptions& opt) {
  if (cutoff < 8) throw Error(ErrorKind::WindowTooSmall, "index windows need N_F >= 8");
  const int pad = opt.pad > 0 ? opt.pad : std::max(16, cutoff / 4);
  const LabeledOperator A = factory(FrequencyWindow(cutoff + pad));
  const Eigen::MatrixXcd M = realize(A);
  const int n = 2 * cutoff + 1;
  const Eigen::VectorXd st = singular_values(M.middleCols(pad, n));
  const Eigen::VectorXd sa = singular_values(M.middleRows(pad, n).adjoint());

  WindowIndex w;
  w.cutoff = cutoff;
  w.sv_max = std::max(st.maxCoeff(), sa.maxCoeff());
  const double thr = opt.zero_tol * w.sv_max;
  double nonzero_min = INFINITY;
  double zero_max = 1e-16 * w.sv_max;
  auto scan = [&](const Eigen::VectorXd& s, int& count) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[i] < thr) {
        ++count;
        zero_max = std::max(zero_max, s[i]);
      } else {
        nonzero_min = std::min(nonzero_min, s[i]);
      }
    }
  };
  scan(st, w.kernel_dim);
  scan(sa, w.cokernel_dim);
  w.index = w.kernel_dim - w.cokernel_dim;
  // Without numerical zeros the gap is the margin above the threshold.
  w.sv_gap = nonzero_min / (w.kernel_dim + w.cokernel_dim > 0 ? zero_max : std::max(thr, zero_max));
  return w;
}

IndexReport numerical_index(const OperatorFactory& factory, const std::vector<int>& cutoffs,
                            const IndexOptions& opt) {
  IndexReport r;
  for (int c : sorted(cutoffs)) r.stabilization.push_back(window_index(factory, c, opt));
  const bool gap = std::any_of(r.stabilization.begin(), r.stabilization.end(),
                               [&](const WindowIndex& w) { return w.sv_gap >= opt.min_gap; });
  if (!gap) {
    throw Error(ErrorKind::NoSpectralGap, "singular value gap below " + std::to_string(opt.min_gap) +
                                              " at every window");
  }
  const WindowIndex& last = r.stabilization.back();
  for (const auto& w : r.stabilization) {
    if (w.index != last.index) {
      throw Error(ErrorKind::NonStabilized, "index " + std::to_string(w.index) + " at N_F=" +
                                                std::to_string(w.cutoff) + " but " +
                                                std::to_string(last.index) + " at N_F=" +
                                                std::to_string(last.cutoff));
    }
  }
  r.index = last.index;
  r.kernel_dim = last.kernel_dim;
  r.cokernel_dim = last.cokernel_dim;
  r.sv_gap = last.sv_gap;
  return r;
}

int winding_index_oracle(const CrossedSymbol& a, int sign) {
  if (a.group().kind() != GroupKind::trivial) {
    throw Error(ErrorKind::UnsupportedGroup, "winding oracle needs the trivial group");
  }
  const PrincipalSymbol* s = a.find(a.group().identity());
  if (!s) throw Error(ErrorKind::NearZeroValue, "symbol vanishes identically");
  return sign * (winding_number(s->minus).winding - winding_number(s->plus).winding);
}

Parametrix parametrix(const LabeledOperator& A, const CrossedSymbol& r, int N, double prune_tol) {
  if (N < 1) throw Error(ErrorKind::InvalidParameter, "parametrix order must be >= 1");
  const TransformCachePtr& T = A.transforms();
  std::vector<std::pair<GroupElement, FullSymbol>> spec;
  for (const auto& [g, s] : r.terms()) spec.emplace_back(g, FullSymbol::from_principal(s, 0));
  const LabeledOperator E0 = assemble(T, spec);
  const LabeledOperator unit = LabeledOperator::unit(T);

  LabeledOperator S1 = unit - labeled_multiply(E0, A);
  S1.prune(prune_tol);
  LabeledOperator E = E0;
  for (int j = 1; j < N; ++j) {
    E = E0 + labeled_multiply(S1, E);
    E.prune(prune_tol);
  }
  LabeledOperator L = unit - labeled_multiply(E, A);
  LabeledOperator R = unit - labeled_multiply(A, E);
  L.prune(prune_tol);
  R.prune(prune_tol);
  return {std::move(E), std::move(L), std::move(R)};
}

cplx localized_trace(const LabeledOperator& X, const ConjugacyClass& cls, int inner) {
  cplx acc{};
  for (const auto& l : cls.members) {
    if (const auto* part = X.find(l)) acc += X.phi(l).trace_product(*part, inner);
  }
  return acc;
}

std::vector<LocalizedValue> localized_indices(const OperatorFactory& factory,
                                              const CrossedSymbol& r,
                                              const std::vector<int>& cutoffs,
                                              std::vector<ConjugacyClass> classes,
                                              const LocalizedOptions& opt) {
  const auto cs = sorted(cutoffs);
  std::vector<LocalizedValue> out;
  for (int c : cs) {
    const LabeledOperator A = factory(FrequencyWindow(c));
    const Parametrix P = parametrix(A, r, opt.order, opt.prune_tol);
    if (out.empty()) {
      if (classes.empty()) {
        const GroupSpec& G = A.group();
        if (G.is_finite()) {
          classes = G.conjugacy_classes();
        } else {
          std::set<GroupElement> supp;
          for (const auto& g : P.left_remainder.support()) supp.insert(g);
          for (const auto& g : P.right_remainder.support()) supp.insert(g);
          const std::vector<GroupElement> v(supp.begin(), supp.end());
          classes = G.classes_meeting(v);
          if (classes.empty()) classes.push_back(G.conjugacy_class(G.identity()));
        }
      }
      for (auto& cl : classes) out.push_back({cl, {}, 0.0, {}});
    }
    const int inner = inner_cutoff(A.window());
    for (auto& v : out) {
      const cplx val = localized_trace(P.left_remainder, v.cls, inner) -
                       localized_trace(P.right_remainder, v.cls, inner);
      v.per_window.emplace_back(c, val);
    }
  }
  for (auto& v : out) {
    v.value = v.per_window.back().second;
    if (v.per_window.size() >= 2) {
      v.drift = std::abs(v.value - v.per_window[v.per_window.size() - 2].second);
    }
    if (v.drift > opt.drift_tol) {
      throw Error(ErrorKind::NonStabilized,
                  "localized index drifts by " + std::to_string(v.drift) + " between the two largest windows");
    }
  }
  return out;
}

LocalizedValue localized_index(const OperatorFactory& factory, const CrossedSymbol& r,
                               const ConjugacyClass& cls, const std::vector<int>& cutoffs,
                               const LocalizedOptions& opt) {
  return localized_indices(factory, r, cutoffs, {cls}, opt).front();
}

LocalizedIndexReport decomposition_check(const OperatorFactory& factory, const CrossedSymbol& r,
                                         const std::vector<int>& cutoffs,
                                         const std::vector<int>& index_cutoffs,
                                         const LocalizedOptions& lopt, const IndexOptions& iopt) {
  LocalizedIndexReport rep;
  rep.classes = localized_indices(factory, r, cutoffs, {}, lopt);
  for (const auto& v : rep.classes) rep.sum += v.value;
  rep.fredholm_index = numerical_index(factory, index_cutoffs, iopt).index;
  rep.residual = std::abs(rep.sum - static_cast<double>(rep.fredholm_index));
  rep.rounded_match = std::lround(rep.sum.real()) == rep.fredholm_index;
  return rep;
}

Prop7Result prop7_check(const OperatorFactory& factory, const CrossedSymbol& r,
                        const GroupElement& g0, const std::vector<int>& cutoffs,
                        const LocalizedOptions& opt, double tol) {
  if (r.group().chi(g0) == 0) {
    throw Error(ErrorKind::NoHomomorphism, "no homomorphism to Z is nonzero on " + r.group().name(g0));
  }
  const LocalizedValue v = localized_index(factory, r, r.group().conjugacy_class(g0), cutoffs, opt);
  return {v.value, v.drift, std::abs(v.value) < tol};
}

double band_norm(const LabeledOperator& X, int kmin, int kmax) {
  const Eigen::MatrixXcd M = realize(X);
  const FrequencyWindow& w = X.window();
  std::vector<int> idx;
  for (int k = -w.cutoff(); k <= w.cutoff(); ++k) {
    if (std::abs(k) >= kmin && std::abs(k) <= kmax) idx.push_back(w.index(k));
  }
  if (idx.empty()) return 0.0;
  Eigen::MatrixXcd sub(idx.size(), idx.size());
  for (size_t i = 0; i < idx.size(); ++i) {
    for (size_t j = 0; j < idx.size(); ++j) sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = M(idx[i], idx[j]);
  }
  return singular_values(sub).maxCoeff();
}

}  // namespace gindex
