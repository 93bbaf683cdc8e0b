#include "gindex/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gindex/error.hpp"

namespace gindex {

FullSymbol FullSymbol::from_principal(PrincipalSymbol p, int order) {
  if (order > 0) throw Error(ErrorKind::InvalidParameter, "classical symbols need order <= 0");
  FullSymbol a{std::move(p), 0, 0, false, 1.0, {}};
  a.order = order;
  return a;
}

namespace {

void put_column(Eigen::MatrixXcd& m, const FrequencyWindow& w, int k,
                const PeriodicFunction& f, cplx scale) {
  const int col = w.index(k);
  for (int r = 0; r < w.dim(); ++r) m(r, col) += scale * f.coeff(w.mode(r) - k);
}

}  // namespace

Eigen::MatrixXcd op_classical(const FullSymbol& a, const FrequencyWindow& w) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(w.dim(), w.dim());
  for (int k = -w.cutoff(); k <= w.cutoff(); ++k) {
    if (std::abs(k) < a.k_min) {
      if (a.unit) m(w.index(k), w.index(k)) = a.fill;
      continue;
    }
    const int sheet = k >= 0 ? 1 : -1;
    const double bracket = std::max(1, std::abs(k));
    put_column(m, w, k, a.principal.sheet(sheet), std::pow(bracket, a.order));
    for (size_t j = 0; j < a.lower.size(); ++j) {
      put_column(m, w, k, a.lower[j].sheet(sheet),
                 std::pow(bracket, a.order - static_cast<int>(j) - 1));
    }
  }
  return m;
}

Eigen::MatrixXcd op_columns(const FrequencyWindow& w, int grid_size,
                            const std::function<void(int, std::vector<cplx>&)>& column) {
  Eigen::MatrixXcd m(w.dim(), w.dim());
  std::vector<cplx> values(static_cast<size_t>(grid_size));
  const int k0 = lowest_mode(grid_size);
  for (int c = 0; c < w.dim(); ++c) {
    const int k = w.mode(c);
    column(k, values);
    const auto coeffs = dft(values);
    for (int r = 0; r < w.dim(); ++r) {
      const int n = w.mode(r) - k - k0;
      m(r, c) = (n >= 0 && n < grid_size) ? coeffs[static_cast<size_t>(n)] : cplx{};
    }
  }
  return m;
}

double SemiclassicalSymbol::radius() const {
  double r = 0.0;
  for (const auto& t : terms) r = std::max(r, t.xi.radius());
  return r;
}

double SemiclassicalSymbol::order() const {
  double o = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) o = std::max(o, t.xi.order());
  return o;
}

cplx SemiclassicalSymbol::operator()(double x, double xi, double h) const {
  cplx acc{};
  for (const auto& t : terms) acc += std::pow(h, t.h_power) * t.x(x) * t.xi(xi);
  return acc;
}

Eigen::MatrixXcd op_h(const SemiclassicalSymbol& a, double h, const FrequencyWindow& w) {
  if (!(h > 0.0 && h <= 1.0)) throw Error(ErrorKind::InvalidParameter, "h must lie in (0, 1]");
  const double radius = a.radius();
  if (std::isfinite(radius) && h * w.cutoff() < radius) {
    throw Error(ErrorKind::WindowTooSmallForH,
                "h*N_F = " + std::to_string(h * w.cutoff()) + " below the xi-support radius " +
                    std::to_string(radius));
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(w.dim(), w.dim());
  for (const auto& t : a.terms) {
    const double hp = std::pow(h, t.h_power);
    for (int k = -w.cutoff(); k <= w.cutoff(); ++k) {
      const double p = t.xi(h * k);
      if (p != 0.0) put_column(m, w, k, t.x, hp * p);
    }
  }
  return m;
}

Eigen::MatrixXcd op_h_function(const std::function<cplx(double, double)>& a, double h,
                               const FrequencyWindow& w, int grid_size) {
  const PeriodicGrid grid(grid_size);
  return op_columns(w, grid_size, [&](int k, std::vector<cplx>& v) {
    for (int j = 0; j < grid_size; ++j) v[static_cast<size_t>(j)] = a(grid.node(j), h * k);
  });
}

// ---------------------------------------------------------------------------

const QuantizedTransform& TransformCache::get(const GroupElement& g) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(g);
  if (it == cache_.end()) {
    it = cache_.emplace(g, std::make_unique<QuantizedTransform>(action_->quantize(g, window_))).first;
  }
  return *it->second;
}

LabeledOperator::LabeledOperator(GroupActionPtr action, FrequencyWindow window)
    : cache_(std::make_shared<const TransformCache>(std::move(action), window)) {}

LabeledOperator::LabeledOperator(TransformCachePtr cache) : cache_(std::move(cache)) {
  if (!cache_) throw Error(ErrorKind::InvalidParameter, "labeled operator without transforms");
}

LabeledOperator LabeledOperator::unit(TransformCachePtr cache) {
  LabeledOperator a(std::move(cache));
  a.set(a.group().identity(), Eigen::MatrixXcd::Identity(a.window().dim(), a.window().dim()));
  return a;
}

LabeledOperator LabeledOperator::delta(TransformCachePtr cache, const GroupElement& g,
                                       Eigen::MatrixXcd k) {
  LabeledOperator a(std::move(cache));
  a.set(g, std::move(k));
  return a;
}

std::vector<GroupElement> LabeledOperator::support() const {
  std::vector<GroupElement> out;
  for (const auto& [g, k] : parts_) out.push_back(g);
  return out;
}

const Eigen::MatrixXcd* LabeledOperator::find(const GroupElement& g) const {
  auto it = parts_.find(g);
  return it == parts_.end() ? nullptr : &it->second;
}

void LabeledOperator::set(const GroupElement& g, Eigen::MatrixXcd k) {
  if (k.rows() != window().dim() || k.cols() != window().dim()) {
    throw Error(ErrorKind::WindowMismatch, "part of size " + std::to_string(k.rows()) + "x" +
                                               std::to_string(k.cols()) + " on a window of dim " +
                                               std::to_string(window().dim()));
  }
  if (!group().contains(g)) throw Error(ErrorKind::InvalidParameter, "element outside the group");
  parts_.insert_or_assign(g, std::move(k));
}

void LabeledOperator::add(const GroupElement& g, const Eigen::MatrixXcd& k) {
  auto it = parts_.find(g);
  if (it == parts_.end()) {
    set(g, k);
  } else {
    if (k.rows() != it->second.rows() || k.cols() != it->second.cols()) {
      throw Error(ErrorKind::WindowMismatch, "adding parts of different sizes");
    }
    it->second += k;
  }
}

void LabeledOperator::prune(double tol) {
  std::erase_if(parts_, [&](const auto& kv) { return kv.second.cwiseAbs().maxCoeff() <= tol; });
}

double LabeledOperator::max_abs() const {
  double m = 0.0;
  for (const auto& [g, k] : parts_) m = std::max(m, k.cwiseAbs().maxCoeff());
  return m;
}

namespace {

void require_compatible(const LabeledOperator& a, const LabeledOperator& b) {
  if (a.transforms() == b.transforms()) return;
  if (!(a.group() == b.group()) ||
      a.action()->realization().kind != b.action()->realization().kind ||
      a.action()->realization().epsilon != b.action()->realization().epsilon) {
    throw Error(ErrorKind::GroupMismatch, "labeled operators over different group actions");
  }
  if (!(a.window() == b.window())) {
    throw Error(ErrorKind::WindowMismatch, "labeled operators on different windows");
  }
}

}  // namespace

LabeledOperator& LabeledOperator::operator+=(const LabeledOperator& o) {
  require_compatible(*this, o);
  for (const auto& [g, k] : o.parts_) add(g, k);
  return *this;
}

LabeledOperator& LabeledOperator::operator-=(const LabeledOperator& o) {
  require_compatible(*this, o);
  for (const auto& [g, k] : o.parts_) add(g, -k);
  return *this;
}

LabeledOperator& LabeledOperator::operator*=(cplx s) {
  for (auto& [g, k] : parts_) k *= s;
  return *this;
}

LabeledOperator operator+(LabeledOperator a, const LabeledOperator& b) { return a += b; }
LabeledOperator operator-(LabeledOperator a, const LabeledOperator& b) { return a -= b; }

LabeledOperator assemble(TransformCachePtr cache,
                         const std::vector<std::pair<GroupElement, FullSymbol>>& spec) {
  LabeledOperator a(std::move(cache));
  for (const auto& [g, s] : spec) a.add(g, op_classical(s, a.window()));
  return a;
}

LabeledOperator labeled_multiply(const LabeledOperator& a, const LabeledOperator& b) {
  require_compatible(a, b);
  const GroupSpec& G = a.group();
  LabeledOperator out(a.transforms());
  for (const auto& [g, kg] : a.parts()) {
    const QuantizedTransform& phi = a.phi(g);
    const bool trivial = phi.tag() == QuantizedTransform::Tag::identity;
    for (const auto& [h, lh] : b.parts()) {
      if (trivial) {
        out.add(G.multiply(g, h), kg * lh);
      } else {
        const Eigen::MatrixXcd moved =
            phi.is_monomial() ? phi.conjugate(lh, phi) : phi.conjugate(lh, a.phi(G.inverse(g)));
        out.add(G.multiply(g, h), kg * moved);
      }
    }
  }
  return out;
}

Eigen::MatrixXcd realize(const LabeledOperator& a) {
  const int n = a.window().dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [g, k] : a.parts()) m += a.phi(g).right_apply(k);
  return m;
}

}  // namespace gindex
