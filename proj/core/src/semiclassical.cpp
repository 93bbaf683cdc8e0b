#include "gindex/semiclassical.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <numeric>

#include "gindex/error.hpp"

namespace gindex {

namespace {

constexpr cplx kI{0.0, 1.0};

std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void require_same_lattice(const JetField& a, const JetField& b) {
  if (!(a.lattice() == b.lattice())) {
    throw Error(ErrorKind::GridMismatch, "jet fields on different lattices");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// JetField

JetField::JetField(Lattice lattice, int length) : lat_(lattice), len_(length) {
  if (length < 1) throw Error(ErrorKind::InvalidParameter, "jet length must be >= 1");
  if (lattice.cutoff < 1 || lattice.grid_size < 4 || !(lattice.h > 0)) {
    throw Error(ErrorKind::InvalidParameter, "invalid lattice");
  }
  data_.assign(static_cast<size_t>(lattice.dim()) * static_cast<size_t>(length) *
                   static_cast<size_t>(lattice.grid_size),
               cplx{});
}

JetField JetField::sample(const std::vector<SeparableTerm>& terms, const Lattice& lat, int length) {
  JetField out(lat, length);
  const PeriodicGrid grid(lat.grid_size);
  for (const auto& t : terms) {
    std::vector<cplx> f(static_cast<size_t>(lat.grid_size));
    if (t.x.size() == lat.grid_size) {
      f = t.x.values();
    } else {
      for (int i = 0; i < lat.grid_size; ++i) f[static_cast<size_t>(i)] = t.x(grid.node(i));
    }
    for (int k = -lat.cutoff; k <= lat.cutoff; ++k) {
      const Jet j = t.xi.jet(lat.xi(k), length);
      for (int d = 0; d < length; ++d) {
        if (j[d] == cplx{}) continue;
        cplx* r = out.row(k, d);
        for (int i = 0; i < lat.grid_size; ++i) r[i] += j[d] * f[static_cast<size_t>(i)];
      }
    }
  }
  return out;
}

JetField JetField::constant(const Lattice& lat, int length, cplx value) {
  JetField out(lat, length);
  for (int k = -lat.cutoff; k <= lat.cutoff; ++k) {
    cplx* r = out.row(k, 0);
    for (int i = 0; i < lat.grid_size; ++i) r[i] = value;
  }
  return out;
}

JetField JetField::truncated(int length) const {
  if (length >= len_) return *this;
  JetField out(lat_, length);
  for (int k = -lat_.cutoff; k <= lat_.cutoff; ++k) {
    for (int d = 0; d < length; ++d) std::copy_n(row(k, d), lat_.grid_size, out.row(k, d));
  }
  return out;
}

double JetField::sup_norm() const { return sup_outside(-1.0); }

double JetField::sup_outside(double radius) const {
  double m = 0.0;
  for (int k = -lat_.cutoff; k <= lat_.cutoff; ++k) {
    if (std::abs(lat_.xi(k)) <= radius) continue;
    const cplx* r = row(k, 0);
    for (int i = 0; i < lat_.grid_size; ++i) m = std::max(m, std::abs(r[i]));
  }
  return m;
}

JetField& JetField::operator+=(const JetField& o) {
  require_same_lattice(*this, o);
  const int n = std::min(len_, o.len_);
  for (int k = -lat_.cutoff; k <= lat_.cutoff; ++k) {
    for (int d = 0; d < n; ++d) {
      cplx* r = row(k, d);
      const cplx* s = o.row(k, d);
      for (int i = 0; i < lat_.grid_size; ++i) r[i] += s[i];
    }
  }
  return *this;
}

JetField& JetField::operator-=(const JetField& o) {
  require_same_lattice(*this, o);
  const int n = std::min(len_, o.len_);
  for (int k = -lat_.cutoff; k <= lat_.cutoff; ++k) {
    for (int d = 0; d < n; ++d) {
      cplx* r = row(k, d);
      const cplx* s = o.row(k, d);
      for (int i = 0; i < lat_.grid_size; ++i) r[i] -= s[i];
    }
  }
  return *this;
}

JetField& JetField::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

JetField multiply(const JetField& a, const JetField& b, int out_length) {
  require_same_lattice(a, b);
  const Lattice& lat = a.lattice();
  const int n = std::min({out_length, a.length(), b.length()});
  JetField out(lat, n);
  const int M = lat.grid_size;
  for (int k = -lat.cutoff; k <= lat.cutoff; ++k) {
    for (int d = 0; d < n; ++d) {
      cplx* r = out.row(k, d);
      for (int e = 0; e <= d; ++e) {
        const cplx* x = a.row(k, e);
        const cplx* y = b.row(k, d - e);
        for (int i = 0; i < M; ++i) r[i] += x[i] * y[i];
      }
    }
  }
  return out;
}

JetField xi_derivative(const JetField& a, int n) {
  if (n == 0) return a;
  if (n >= a.length()) throw Error(ErrorKind::OrderOverflow, "xi derivative exceeds the jet length");
  const Lattice& lat = a.lattice();
  JetField out(lat, a.length() - n);
  for (int k = -lat.cutoff; k <= lat.cutoff; ++k) {
    for (int d = 0; d < out.length(); ++d) {
      const double c = binomial(n + d, n);
      const cplx* s = a.row(k, n + d);
      cplx* r = out.row(k, d);
      for (int i = 0; i < lat.grid_size; ++i) r[i] = c * s[i];
    }
  }
  return out;
}

JetField x_derivative(const JetField& a, int n) {
  if (n == 0) return a;
  const Lattice& lat = a.lattice();
  const int M = lat.grid_size;
  const int k0 = lowest_mode(M);
  std::vector<cplx> factor(static_cast<size_t>(M));
  for (int m = 0; m < M; ++m) {
    const int mode = k0 + m;
    factor[static_cast<size_t>(m)] =
        (M % 2 == 0 && mode == k0) ? cplx{} : std::pow(kI * static_cast<double>(mode), n);
  }
  JetField out(lat, a.length());
  for (int k = -lat.cutoff; k <= lat.cutoff; ++k) {
    for (int d = 0; d < a.length(); ++d) {
      const cplx* s = a.row(k, d);
      auto c = dft(std::span<const cplx>(s, static_cast<size_t>(M)));
      bool zero = true;
      for (int m = 0; m < M; ++m) {
        c[static_cast<size_t>(m)] *= factor[static_cast<size_t>(m)];
        zero = zero && c[static_cast<size_t>(m)] == cplx{};
      }
      if (zero) continue;
      const auto v = idft(c);
      std::copy(v.begin(), v.end(), out.row(k, d));
    }
  }
  return out;
}

JetField transport(const JetField& b, const CanonicalTransform& c) {
  if (c.kind() != CanonicalTransform::Kind::affine) {
    throw Error(ErrorKind::NonIsometricAction, "jet transport needs an affine canonical map");
  }
  const int s = c.sign();
  const double shift = c.shift();
  if (s == 1 && shift == 0.0) return b;
  const Lattice& lat = b.lattice();
  const int M = lat.grid_size;
  JetField out(lat, b.length());
  // x_i -> s (x_i - shift) lands on a node when the shift is a grid multiple.
  const double steps = shift * M / kTwoPi;
  const bool on_grid = std::abs(steps - std::round(steps)) < 1e-9;
  const int shift_idx = static_cast<int>(std::lround(steps));
  const int k0 = lowest_mode(M);
  for (int k = -lat.cutoff; k <= lat.cutoff; ++k) {
    for (int d = 0; d < b.length(); ++d) {
      const cplx scale = (s < 0 && d % 2 == 1) ? -1.0 : 1.0;
      const cplx* src = b.row(s * k, d);
      cplx* dst = out.row(k, d);
      if (on_grid) {
        for (int i = 0; i < M; ++i) {
          const int j = ((s * (i - shift_idx)) % M + M) % M;
          dst[i] = scale * src[j];
        }
        continue;
      }
      const auto cf = dft(std::span<const cplx>(src, static_cast<size_t>(M)));
      std::vector<cplx> moved(static_cast<size_t>(M), cplx{});
      for (int m = 0; m < M; ++m) {
        const int mode = k0 + m;
        int target = s * mode;
        if (target >= -k0) target = mode;  // Nyquist stays put
        moved[static_cast<size_t>(target - k0)] +=
            cf[static_cast<size_t>(m)] * std::polar(1.0, -mode * s * shift);
      }
      const auto v = idft(moved);
      for (int i = 0; i < M; ++i) dst[i] = scale * v[static_cast<size_t>(i)];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// StarSeries

StarSeries::StarSeries(GroupActionPtr action, Lattice lattice, int order)
    : action_(std::move(action)), lat_(lattice), order_(order) {
  if (!action_) throw Error(ErrorKind::InvalidParameter, "star series without group action");
  if (order < 1) throw Error(ErrorKind::InvalidParameter, "star series order must be >= 1");
}

StarSeries StarSeries::unit(GroupActionPtr action, const Lattice& lattice, int order) {
  StarSeries s(std::move(action), lattice, order);
  s.add(s.group().identity(), 0, JetField::constant(lattice, order, 1.0));
  return s;
}

StarSeries StarSeries::from_symbols(
    GroupActionPtr action, const Lattice& lattice, int order,
    const std::vector<std::pair<GroupElement, SemiclassicalSymbol>>& spec) {
  StarSeries s(std::move(action), lattice, order);
  for (const auto& [g, sym] : spec) {
    std::map<int, std::vector<SeparableTerm>> by_power;
    for (const auto& t : sym.terms) by_power[t.h_power].push_back(t);
    for (const auto& [j, terms] : by_power) {
      if (j < 0 || j >= order) {
        throw Error(ErrorKind::OrderOverflow, "symbol term h^" + std::to_string(j) +
                                                  " outside the series order " + std::to_string(order));
      }
      s.add(g, j, JetField::sample(terms, lattice, order - j));
    }
  }
  return s;
}

std::vector<GroupElement> StarSeries::support() const {
  std::vector<GroupElement> out;
  for (const auto& [key, f] : terms_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

void StarSeries::add(const GroupElement& g, int j, const JetField& f) {
  if (j < 0 || j >= order_) {
    throw Error(ErrorKind::OrderOverflow, "h-order " + std::to_string(j) + " beyond truncation " +
                                              std::to_string(order_));
  }
  if (!(f.lattice() == lat_)) throw Error(ErrorKind::GridMismatch, "term on a foreign lattice");
  if (f.length() < order_ - j) {
    throw Error(ErrorKind::OrderOverflow, "jet too short for h-order " + std::to_string(j));
  }
  if (!group().contains(g)) throw Error(ErrorKind::InvalidParameter, "element outside the group");
  auto key = std::make_pair(g, j);
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    terms_.emplace(key, f.truncated(order_ - j));
  } else {
    it->second += f;
  }
}

void StarSeries::prune(double tol) {
  std::erase_if(terms_, [&](const auto& kv) {
    const JetField& f = kv.second;
    double m = 0.0;
    for (int k = -lat_.cutoff; k <= lat_.cutoff; ++k) {
      for (int d = 0; d < f.length(); ++d) {
        const cplx* r = f.row(k, d);
        for (int i = 0; i < lat_.grid_size; ++i) m = std::max(m, std::abs(r[i]));
      }
    }
    return m <= tol;
  });
}

double StarSeries::sup_norm() const { return sup_outside(-1.0); }

double StarSeries::sup_outside(double radius) const {
  double m = 0.0;
  for (const auto& [key, f] : terms_) m = std::max(m, f.sup_outside(radius));
  return m;
}

namespace {

void require_compatible(const StarSeries& a, const StarSeries& b) {
  if (!(a.group() == b.group()) ||
      a.action()->realization().kind != b.action()->realization().kind) {
    throw Error(ErrorKind::GroupMismatch, "star series over different group actions");
  }
  if (!(a.lattice() == b.lattice())) throw Error(ErrorKind::GridMismatch, "different lattices");
  if (a.order() != b.order()) {
    throw Error(ErrorKind::OrderOverflow, "star series truncated at different orders");
  }
}

}  // namespace

StarSeries& StarSeries::operator+=(const StarSeries& o) {
  require_compatible(*this, o);
  for (const auto& [key, f] : o.terms_) add(key.first, key.second, f);
  return *this;
}

StarSeries& StarSeries::operator-=(const StarSeries& o) {
  require_compatible(*this, o);
  for (const auto& [key, f] : o.terms_) {
    JetField neg = f;
    neg *= -1.0;
    add(key.first, key.second, neg);
  }
  return *this;
}

StarSeries& StarSeries::operator*=(cplx s) {
  for (auto& [key, f] : terms_) f *= s;
  return *this;
}

StarSeries operator+(StarSeries a, const StarSeries& b) { return a += b; }
StarSeries operator-(StarSeries a, const StarSeries& b) { return a -= b; }

StarSeries star_h(const StarSeries& a, const StarSeries& b) {
  require_compatible(a, b);
  if (!a.action()->is_isometric()) {
    throw Error(ErrorKind::NonIsometricAction,
                std::string("star products need an isometric action, got ") +
                    to_string(a.action()->realization().kind));
  }
  const int N = a.order();
  const GroupSpec& G = a.group();
  StarSeries out(a.action(), a.lattice(), N);
  for (const auto& [ka, fa] : a.terms()) {
    const auto& [g, j] = ka;
    const CanonicalTransform cg = a.action()->transform(g);
    for (const auto& [kb, fb] : b.terms()) {
      const auto& [hh, l] = kb;
      if (j + l >= N) continue;
      const JetField moved = transport(fb, cg);
      const GroupElement gh = G.multiply(g, hh);
      cplx phase = 1.0;
      for (int n = 0; j + l + n < N; ++n) {
        const int q = j + l + n;
        if (n >= fa.length()) break;
        const JetField prod = multiply(xi_derivative(fa, n), x_derivative(moved, n), N - q);
        if (n == 0) {
          out.add(gh, q, prod);
        } else {
          JetField scaled = prod;
          scaled *= phase;
          out.add(gh, q, scaled);
        }
        phase *= -kI;
      }
    }
  }
  return out;
}

namespace {

// Twiddles e^{-i m x_i} / M for m = -M/2 .. M/2-1.
struct CoefficientTable {
  int M;
  int k0;
  std::vector<cplx> w;

  explicit CoefficientTable(int m) : M(m), k0(lowest_mode(m)), w(static_cast<size_t>(m) * m) {
    for (int r = 0; r < M; ++r) {
      for (int i = 0; i < M; ++i) {
        w[static_cast<size_t>(r) * M + i] =
            std::polar(1.0 / M, -static_cast<double>(k0 + r) * kTwoPi * i / M);
      }
    }
  }

  // Fourier coefficient of mode m of the row, 0 outside the resolved range.
  cplx coeff(const cplx* row, int mode) const {
    const int r = mode - k0;
    if (r < 0 || r >= M) return {};
    const cplx* t = &w[static_cast<size_t>(r) * M];
    cplx acc{};
    for (int i = 0; i < M; ++i) acc += row[i] * t[i];
    return acc;
  }
};

}  // namespace

Eigen::MatrixXcd realize(const StarSeries& a) {
  const Lattice& lat = a.lattice();
  const FrequencyWindow win(lat.cutoff);
  const int n = win.dim();
  const int M = lat.grid_size;
  const int k0 = lowest_mode(M);
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(n, n);
  for (const GroupElement& g : a.support()) {
    Eigen::MatrixXcd part = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& [key, f] : a.terms()) {
      if (key.first != g) continue;
      const double hj = std::pow(lat.h, key.second);
      for (int p = -lat.cutoff; p <= lat.cutoff; ++p) {
        const auto c = dft(std::span<const cplx>(f.row(p, 0), static_cast<size_t>(M)));
        for (int r = 0; r < n; ++r) {
          const int m = win.mode(r) - p - k0;
          if (m >= 0 && m < M) part(r, win.index(p)) += hj * c[static_cast<size_t>(m)];
        }
      }
    }
    total += a.action()->quantize(g, win).right_apply(part);
  }
  return total;
}

// ---------------------------------------------------------------------------
// B-symbols and the parametrix

namespace {

std::vector<std::pair<GroupElement, SemiclassicalSymbol>> cutoff_symbols(const CrossedSymbol& s,
                                                                        double eps, cplx fill) {
  const GroupSpec& G = s.group();
  std::vector<std::pair<GroupElement, SemiclassicalSymbol>> out;
  bool has_e = false;
  for (const auto& [g, p] : s.terms()) {
    SemiclassicalSymbol sym;
    sym.terms.push_back({p.plus, Profile::psi_plus(eps), 0});
    sym.terms.push_back({p.minus, Profile::psi_minus(eps), 0});
    if (G.is_identity(g)) {
      sym.terms.push_back({PeriodicFunction::constant(s.grid(), fill), Profile::psi_zero(eps), 0});
      has_e = true;
    }
    out.emplace_back(g, std::move(sym));
  }
  if (!has_e) {
    SemiclassicalSymbol sym;
    sym.terms.push_back({PeriodicFunction::constant(s.grid(), fill), Profile::psi_zero(eps), 0});
    out.emplace_back(G.identity(), std::move(sym));
  }
  return out;
}

}  // namespace

StarSeries BSymbol::series(const Lattice& lattice, int order) const {
  return StarSeries::from_symbols(sigma.action(), lattice, order, symbols());
}

std::vector<std::pair<GroupElement, SemiclassicalSymbol>> BSymbol::symbols() const {
  return cutoff_symbols(sigma, eps, fill);
}

StarSeries cutoff_inverse(const CrossedSymbol& rho, double eps, cplx fill, const Lattice& lattice,
                          int order) {
  return StarSeries::from_symbols(rho.action(), lattice, order, cutoff_symbols(rho, eps, fill));
}

SymbolParametrix symbol_parametrix_h(const BSymbol& a, const Lattice& lattice, int N,
                                     std::optional<cplx> r0_fill) {
  if (std::abs(a.fill) < kNearZero) {
    throw Error(ErrorKind::NotElliptic, "the unit fill near the zero section vanishes");
  }
  const CrossedSymbol rho = invert_principal(a.sigma);
  const StarSeries A = a.series(lattice, N);
  const StarSeries r0 = cutoff_inverse(rho, a.eps, r0_fill.value_or(1.0 / a.fill), lattice, N);
  const StarSeries unit = StarSeries::unit(a.sigma.action(), lattice, N);
  const StarSeries w = unit - star_h(A, r0);
  StarSeries S = unit;
  for (int i = 0; i < N; ++i) {
    S = unit + star_h(w, S);
    S.prune(1e-300);
  }
  StarSeries r = star_h(r0, S);
  StarSeries left = unit - star_h(r, A);
  StarSeries right = unit - star_h(A, r);
  return {std::move(r), std::move(left), std::move(right)};
}

// ---------------------------------------------------------------------------
// Traces

cplx tau(const StarSeries& x, const ConjugacyClass& cls) {
  const Lattice& lat = x.lattice();
  const FrequencyWindow win(std::max(lat.cutoff, 8));
  const CoefficientTable table(lat.grid_size);
  // absolute partial sums over |k| <= K, 0.8 K, 0.64 K
  const int K = lat.cutoff;
  const int K1 = static_cast<int>(std::floor(0.8 * K));
  const int K2 = static_cast<int>(std::floor(0.64 * K));
  cplx full{};
  double abs0 = 0.0, abs1 = 0.0, abs2 = 0.0;
  for (const auto& l : cls.members) {
    bool any = false;
    for (const auto& [key, f] : x.terms()) any = any || key.first == l;
    if (!any) continue;
    const QuantizedTransform q = x.action()->quantize(l, win);
    if (!q.is_monomial()) {
      throw Error(ErrorKind::NonIsometricAction, "tau needs monomial transforms");
    }
    for (int k = -K; k <= K; ++k) {
      const int t = win.mode(q.targets()[static_cast<size_t>(win.index(k))]);
      if (std::abs(t) > K) continue;
      cplx v{};
      for (const auto& [key, f] : x.terms()) {
        if (key.first != l) continue;
        v += std::pow(lat.h, key.second) * table.coeff(f.row(t, 0), k - t);
      }
      v *= q.phases()[static_cast<size_t>(win.index(k))];
      full += v;
      abs0 += std::abs(v);
      if (std::abs(k) <= K1) abs1 += std::abs(v);
      if (std::abs(k) <= K2) abs2 += std::abs(v);
    }
  }
  const double d1 = abs0 - abs1;
  const double d2 = abs1 - abs2;
  if (d1 > 1e-10 * std::max(1.0, abs0) && d1 >= 0.9 * d2) {
    throw Error(ErrorKind::TraceDivergence,
                "trace tail does not decay at h=" + std::to_string(lat.h) + " (increments " +
                    fmt_sci(d2) + " then " + fmt_sci(d1) + ")");
  }
  return full;
}

cplx LaurentFit::coeff(int j) const {
  if (j < j_min || j > j_max) return {};
  return coeffs[static_cast<size_t>(j - j_min)];
}

std::vector<double> default_h_grid() {
  std::vector<double> h(8);
  for (int i = 0; i < 8; ++i) h[static_cast<size_t>(i)] = 0.2 * std::pow(0.1, i / 7.0);
  return h;
}

TraceSeries tau_g(const std::function<StarSeries(double)>& builder, const ConjugacyClass& cls,
                  const std::vector<double>& h_grid) {
  TraceSeries s;
  s.h = h_grid;
  std::sort(s.h.begin(), s.h.end(), std::greater<>());
  for (double h : s.h) s.values.push_back(tau(builder(h), cls));
  return s;
}

LaurentFit laurent_fit(const std::vector<double>& h, const std::vector<cplx>& values, int j_min,
                       int j_max) {
  if (j_max < j_min) throw Error(ErrorKind::InvalidParameter, "empty power range");
  const int p = j_max - j_min + 1;
  const int n = static_cast<int>(h.size());
  if (n < p + 1 || values.size() != h.size()) {
    throw Error(ErrorKind::InvalidParameter, "laurent fit needs at least " + std::to_string(p + 1) +
                                                 " points");
  }
  Eigen::MatrixXd V(n, p);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < p; ++c) V(i, c) = std::pow(h[static_cast<size_t>(i)], j_min + c);
  }
  Eigen::VectorXd scale = V.colwise().norm().transpose();
  for (int c = 0; c < p; ++c) V.col(c) /= scale[c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  LaurentFit fit;
  fit.j_min = j_min;
  fit.j_max = j_max;
  fit.condition = sv[0] / sv[p - 1];
  if (!(fit.condition <= 1e8)) {
    throw Error(ErrorKind::IllConditionedFit, "condition number " + std::to_string(fit.condition));
  }
  Eigen::VectorXcd y(n);
  for (int i = 0; i < n; ++i) y[i] = values[static_cast<size_t>(i)];
  const Eigen::VectorXd cr = svd.solve(y.real());
  const Eigen::VectorXd ci = svd.solve(y.imag());
  Eigen::VectorXcd c(p);
  for (int k = 0; k < p; ++k) c[k] = cplx(cr[k], ci[k]);
  const Eigen::VectorXcd resid = V.cast<cplx>() * c - y;
  // floor keeps identically vanishing series from reporting pure roundoff
  fit.residual = resid.norm() / std::max(y.norm(), 1e-8);
  for (int k = 0; k < p; ++k) fit.coeffs.push_back(c[k] / scale[k]);
  return fit;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

int lattice_cutoff(double radius, double h, int minimum) {
  if (!std::isfinite(radius)) {
    throw Error(ErrorKind::WindowTooSmallForH, "symbol has no finite xi-radius");
  }
  return std::max(minimum, static_cast<int>(std::ceil(1.25 * radius / h)) + 2);
}

PowerLaw trace_power_law(GroupActionPtr action, const GroupElement& g,
                         const SemiclassicalSymbol& a, const std::vector<double>& h_grid,
                         int grid_size, int min_cutoff, double tol) {
  if (a.order() >= -2.0) {
    throw Error(ErrorKind::ResidualNotTraceClass, "trace asymptotics need symbol order < -2");
  }
  const ConjugacyClass cls = action->group().conjugacy_class(g);
  const double radius = a.radius();
  const TraceSeries s = tau_g(
      [&](double h) {
        const Lattice lat{h, lattice_cutoff(radius, h, min_cutoff), grid_size};
        return StarSeries::from_symbols(action, lat, 1, {{g, a}});
      },
      cls, h_grid);
  PowerLaw p;
  p.h = s.h;
  p.values = s.values;
  std::vector<double> mags;
  for (const auto& v : s.values) mags.push_back(std::abs(v));
  p.slope = loglog_slope(s.h, mags);
  p.max_abs = *std::max_element(mags.begin(), mags.end());

  const CanonicalTransform c = action->transform(g);
  const bool identity = c.kind() == CanonicalTransform::Kind::affine && c.sign() == 1 &&
                        std::abs(std::remainder(c.shift(), kTwoPi)) < 1e-12;
  if (identity) {
    p.expected = -1.0;
  } else if (c.kind() == CanonicalTransform::Kind::affine && c.sign() == -1) {
    p.expected = 0.0;
  } else {
    p.expected = std::numeric_limits<double>::quiet_NaN();
  }
  if (std::isnan(p.expected)) {
    // empty fixed set: the trace is negligible once h <= 0.05
    double worst = 0.0;
    for (size_t i = 0; i < s.h.size(); ++i) {
      if (s.h[i] <= 0.05 + 1e-12) worst = std::max(worst, mags[i]);
    }
    p.pass = worst < 1e-6;
  } else {
    p.pass = std::abs(p.slope - p.expected) <= tol;
  }
  return p;
}

std::vector<AlgebraicIndex> algebraic_indices(const BSymbol& a,
                                              const std::vector<ConjugacyClass>& classes,
                                              const std::vector<double>& h_grid,
                                              const AlgebraicIndexOptions& opt) {
  if (!a.sigma.action()->is_isometric()) {
    throw Error(ErrorKind::NonIsometricAction, "the algebraic index needs an isometric action");
  }
  const int N = opt.order;
  if (N < 3) throw Error(ErrorKind::InvalidParameter, "algebraic index needs N >= 3");
  std::vector<double> hs = h_grid;
  std::sort(hs.begin(), hs.end(), std::greater<>());
  std::vector<AlgebraicIndex> out(classes.size());
  for (size_t c = 0; c < classes.size(); ++c) {
    out[c].cls = classes[c];
    out[c].series.h = hs;
  }
  const double radius = 2.0 * a.eps;
  for (double h : hs) {
    const Lattice lat{h, lattice_cutoff(radius, h, opt.min_cutoff), opt.grid_size};
    const SymbolParametrix P = symbol_parametrix_h(a, lat, N, opt.r0_fill);
    const double scale = std::max(1.0, P.r.sup_norm());
    const double outside = std::max(P.left_residual.sup_outside(radius * 1.0001),
                                    P.right_residual.sup_outside(radius * 1.0001));
    if (outside > 1e-9 * scale) {
      throw Error(ErrorKind::ResidualNotTraceClass,
                  "residual of size " + std::to_string(outside) + " beyond |xi| = 2 eps");
    }
    for (size_t c = 0; c < classes.size(); ++c) {
      out[c].series.values.push_back(tau(P.left_residual, classes[c]) -
                                     tau(P.right_residual, classes[c]));
    }
  }
  const double h_min = hs.back();
  for (auto& r : out) {
    r.fit = laurent_fit(r.series.h, r.series.values, -1, N - 2);
    r.series.fit = r.fit;
    r.c_minus1 = r.fit.coeff(-1);
    r.c0 = r.fit.coeff(0);
    double vmax = 0.0;
    for (const auto& v : r.series.values) vmax = std::max(vmax, std::abs(v));
    r.negative_power = std::abs(r.c_minus1) / h_min / std::max(vmax, 1.0);
    r.negative_power_violation = r.negative_power > opt.negative_power_tol;
  }
  return out;
}

AlgebraicIndex algebraic_index(const BSymbol& a, const ConjugacyClass& cls,
                               const std::vector<double>& h_grid,
                               const AlgebraicIndexOptions& opt) {
  return algebraic_indices(a, {cls}, h_grid, opt).front();
}

// ---------------------------------------------------------------------------
// Egorov and composition defects

namespace {

double opnorm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()[0];
}

}  // namespace

EgorovReport egorov_defect(GroupActionPtr action, const GroupElement& g,
                           const SemiclassicalSymbol& a, const std::vector<double>& h_grid,
                           int cutoff, int grid_size) {
  const FrequencyWindow win(cutoff);
  const QuantizedTransform q = action->quantize(g, win);
  const CanonicalTransform c = action->transform(g);
  const Eigen::MatrixXcd phi = q.matrix();
  const int inner = cutoff / 2;
  const int lo = win.index(-inner);
  const int n = 2 * inner + 1;
  EgorovReport rep;
  rep.truncation_defect = q.truncation_defect();
  rep.h = h_grid;
  std::sort(rep.h.begin(), rep.h.end(), std::greater<>());
  for (double h : rep.h) {
    const Eigen::MatrixXcd A = op_h(a, h, win);
    const Eigen::MatrixXcd B = op_h_function(
        [&](double x, double xi) {
          const auto [y, eta] = c.apply(x, xi);
          return a(y, eta, h);
        },
        h, win, grid_size);
    const Eigen::MatrixXcd left = phi.middleRows(lo, n) * A;
    const Eigen::MatrixXcd moved = left * phi.middleRows(lo, n).adjoint();
    rep.defect.push_back(opnorm(moved - B.block(lo, lo, n, n)));
  }
  rep.slope = loglog_slope(rep.h, rep.defect);
  return rep;
}

CompositionReport composition_defect(
    GroupActionPtr action, const std::vector<std::pair<GroupElement, SemiclassicalSymbol>>& a,
    const std::vector<std::pair<GroupElement, SemiclassicalSymbol>>& b, int order,
    const std::vector<double>& h_grid, int grid_size) {
  double radius = 0.0;
  for (const auto& [g, s] : a) radius = std::max(radius, s.radius());
  for (const auto& [g, s] : b) radius = std::max(radius, s.radius());
  CompositionReport rep;
  rep.order = order;
  rep.h = h_grid;
  std::sort(rep.h.begin(), rep.h.end(), std::greater<>());
  for (double h : rep.h) {
    const int K = std::max(16, static_cast<int>(std::ceil(2.0 * radius / h)) + grid_size / 2);
    const Lattice lat{h, K, grid_size};
    const StarSeries A = StarSeries::from_symbols(action, lat, order, a);
    const StarSeries B = StarSeries::from_symbols(action, lat, order, b);
    const StarSeries C = star_h(A, B);
    rep.defect.push_back(opnorm(realize(A) * realize(B) - realize(C)));
  }
  rep.slope = loglog_slope(rep.h, rep.defect);
  return rep;
}

}  // namespace gindex
