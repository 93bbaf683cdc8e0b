#include "gindex/crossed_symbol.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "gindex/error.hpp"

namespace gindex {

PrincipalSymbol PrincipalSymbol::constant(const PeriodicGrid& grid, cplx value) {
  return {PeriodicFunction::constant(grid, value), PeriodicFunction::constant(grid, value)};
}

double PrincipalSymbol::sup_norm() const { return std::max(plus.sup_norm(), minus.sup_norm()); }
double PrincipalSymbol::min_abs() const { return std::min(plus.min_abs(), minus.min_abs()); }

CrossedSymbol::CrossedSymbol(GroupActionPtr action, PeriodicGrid grid)
    : action_(std::move(action)), grid_(grid) {
  if (!action_) throw Error(ErrorKind::InvalidParameter, "crossed symbol without group action");
}

CrossedSymbol CrossedSymbol::unit(GroupActionPtr action, const PeriodicGrid& grid) {
  CrossedSymbol a(std::move(action), grid);
  a.set(a.group().identity(), PrincipalSymbol::constant(grid, 1.0));
  return a;
}

CrossedSymbol CrossedSymbol::delta(GroupActionPtr action, const GroupElement& g,
                                   PrincipalSymbol s) {
  CrossedSymbol a(std::move(action), s.grid());
  a.set(g, std::move(s));
  return a;
}

std::vector<GroupElement> CrossedSymbol::support() const {
  std::vector<GroupElement> out;
  for (const auto& [g, s] : terms_) out.push_back(g);
  return out;
}

const PrincipalSymbol* CrossedSymbol::find(const GroupElement& g) const {
  auto it = terms_.find(g);
  return it == terms_.end() ? nullptr : &it->second;
}

void CrossedSymbol::set(const GroupElement& g, PrincipalSymbol s) {
  if (!(s.plus.grid() == grid_) || !(s.minus.grid() == grid_)) {
    throw Error(ErrorKind::GridMismatch, "symbol coefficient on a foreign grid");
  }
  if (!group().contains(g)) {
    throw Error(ErrorKind::InvalidParameter, "element outside the group");
  }
  terms_.insert_or_assign(g, std::move(s));
}

void CrossedSymbol::add(const GroupElement& g, const PrincipalSymbol& s) {
  auto it = terms_.find(g);
  if (it == terms_.end()) {
    set(g, s);
  } else {
    it->second = {it->second.plus + s.plus, it->second.minus + s.minus};
  }
}

void CrossedSymbol::prune(double tol) {
  std::erase_if(terms_, [&](const auto& kv) { return kv.second.sup_norm() < tol; });
}

double CrossedSymbol::distance(const CrossedSymbol& other) const {
  double d = 0.0;
  for (const auto& [g, s] : terms_) {
    const auto* o = other.find(g);
    d = std::max(d, o ? std::max((s.plus - o->plus).sup_norm(), (s.minus - o->minus).sup_norm())
                      : s.sup_norm());
  }
  for (const auto& [g, s] : other.terms_) {
    if (!find(g)) d = std::max(d, s.sup_norm());
  }
  return d;
}

PrincipalSymbol transport(const PrincipalSymbol& b, const CanonicalTransform& c) {
  if (c.kind() == CanonicalTransform::Kind::affine && c.sign() == 1 && c.shift() == 0.0) return b;
  const PeriodicGrid& grid = b.grid();
  auto one_sheet = [&](int s) {
    std::vector<double> t(static_cast<size_t>(grid.size()));
    for (int j = 0; j < grid.size(); ++j) t[static_cast<size_t>(j)] = c.base(s, grid.node(j));
    return compose(b.sheet(c.sheet_image(s)), std::span<const double>(t));
  };
  return {one_sheet(1), one_sheet(-1)};
}

CrossedSymbol star_principal(const CrossedSymbol& a, const CrossedSymbol& b) {
  if (!(a.group() == b.group()) || a.action() != b.action()) {
    if (!(a.group() == b.group()) ||
        a.action()->realization().kind != b.action()->realization().kind ||
        a.action()->realization().epsilon != b.action()->realization().epsilon) {
      throw Error(ErrorKind::GroupMismatch, "star product of symbols over different actions");
    }
  }
  if (!(a.grid() == b.grid())) throw Error(ErrorKind::GridMismatch, "star product grids differ");
  const GroupSpec& G = a.group();
  CrossedSymbol out(a.action(), a.grid());
  for (const auto& [g, ag] : a.terms()) {
    const CanonicalTransform cg = a.action()->transform(g);
    for (const auto& [h, bh] : b.terms()) {
      const PrincipalSymbol t = transport(bh, cg);
      out.add(G.multiply(g, h), {ag.plus * t.plus, ag.minus * t.minus});
    }
  }
  return out;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::elliptic: return "elliptic";
    case Verdict::not_elliptic: return "not_elliptic";
    case Verdict::undecided: return "undecided";
  }
  return "?";
}

namespace {

// Coefficients a_g o C_{h^-1} for all (h, g), indexed [h][g] in element order.
struct TransportTable {
  std::vector<GroupElement> elements;
  std::vector<std::vector<std::optional<PrincipalSymbol>>> values;

  explicit TransportTable(const CrossedSymbol& a) : elements(a.group().elements()) {
    const GroupSpec& G = a.group();
    const size_t n = elements.size();
    values.resize(n);
    for (size_t h = 0; h < n; ++h) {
      const CanonicalTransform c = a.action()->transform(G.inverse(elements[h]));
      values[h].resize(n);
      for (size_t g = 0; g < n; ++g) {
        if (const auto* s = a.find(elements[g])) values[h][g] = transport(*s, c);
      }
    }
  }

  size_t index_of(const GroupElement& g) const {
    return static_cast<size_t>(std::find(elements.begin(), elements.end(), g) - elements.begin());
  }

  Eigen::MatrixXcd matrix(const GroupSpec& G, int sheet, int node) const {
    const auto n = static_cast<Eigen::Index>(elements.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index h = 0; h < n; ++h) {
      for (Eigen::Index k = 0; k < n; ++k) {
        const size_t g = index_of(G.multiply(elements[static_cast<size_t>(h)],
                                             G.inverse(elements[static_cast<size_t>(k)])));
        const auto& v = values[static_cast<size_t>(h)][g];
        if (v) m(h, k) = v->sheet(sheet).value(node);
      }
    }
    return m;
  }
};

EllipticityReport dominance(const CrossedSymbol& a, double tol) {
  const GroupSpec& G = a.group();
  const PrincipalSymbol* ae = a.find(G.identity());
  if (!ae) {
    throw Error(ErrorKind::UnsupportedGroup,
                "no identity coefficient: dominance criterion does not apply");
  }
  EllipticityReport r;
  double lo = INFINITY;
  for (int s : {1, -1}) {
    const auto& v = ae->sheet(s).values();
    for (int j = 0; j < a.grid().size(); ++j) {
      const double m = std::abs(v[static_cast<size_t>(j)]);
      if (m < lo) {
        lo = m;
        r.sheet = s;
        r.x = a.grid().node(j);
      }
    }
  }
  double rest = 0.0;
  for (const auto& [g, s] : a.terms()) {
    if (!G.is_identity(g)) rest += s.sup_norm();
  }
  r.min_value = lo - rest;
  if (r.min_value > tol) {
    r.verdict = Verdict::elliptic;
  } else if (rest == 0.0) {
    r.verdict = Verdict::not_elliptic;
  } else {
    r.verdict = Verdict::undecided;
  }
  return r;
}

}  // namespace

Eigen::MatrixXcd regular_representation(const CrossedSymbol& a, int sheet, int node) {
  return TransportTable(a).matrix(a.group(), sheet, node);
}

EllipticityReport is_elliptic(const CrossedSymbol& a, double tol) {
  if (!a.group().is_finite()) return dominance(a, tol);
  const TransportTable table(a);
  EllipticityReport r;
  r.min_value = INFINITY;
  for (int s : {1, -1}) {
    for (int j = 0; j < a.grid().size(); ++j) {
      const Eigen::MatrixXcd m = table.matrix(a.group(), s, j);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
      const double smin = svd.singularValues().minCoeff();
      if (smin < r.min_value) {
        r.min_value = smin;
        r.sheet = s;
        r.x = a.grid().node(j);
      }
    }
  }
  r.verdict = r.min_value > tol ? Verdict::elliptic : Verdict::not_elliptic;
  return r;
}

CrossedSymbol invert_principal(const CrossedSymbol& a, double tol) {
  const GroupSpec& G = a.group();
  const PeriodicGrid& grid = a.grid();
  const EllipticityReport rep = is_elliptic(a, tol);
  if (rep.verdict != Verdict::elliptic) {
    throw Error(ErrorKind::NotElliptic, std::string("symbol is ") + to_string(rep.verdict) +
                                            " (min value " + std::to_string(rep.min_value) + ")");
  }

  if (G.is_finite()) {
    const TransportTable table(a);
    const size_t n = table.elements.size();
    const auto M = static_cast<size_t>(grid.size());
    // vals[g][sheet][node]
    std::vector<std::array<std::vector<cplx>, 2>> vals(n);
    for (auto& v : vals) v = {std::vector<cplx>(M), std::vector<cplx>(M)};
    for (int s : {1, -1}) {
      const size_t si = s > 0 ? 0 : 1;
      for (size_t j = 0; j < M; ++j) {
        const Eigen::MatrixXcd inv = table.matrix(G, s, static_cast<int>(j)).inverse();
        // r_g(p) = [pi_p(a)^{-1}]_{e, g^-1}
        for (size_t g = 0; g < n; ++g) {
          vals[g][si][j] = inv(0, static_cast<Eigen::Index>(table.index_of(G.inverse(table.elements[g]))));
        }
      }
    }
    CrossedSymbol r(a.action(), grid);
    for (size_t g = 0; g < n; ++g) {
      PrincipalSymbol s{PeriodicFunction::from_values(grid, std::move(vals[g][0])),
                        PeriodicFunction::from_values(grid, std::move(vals[g][1]))};
      if (s.sup_norm() > 1e-14) r.set(table.elements[g], std::move(s));
    }
    return r;
  }

  // Neumann series a^{-1} = sum_n (-q)^n * a_e^{-1}, q = a_e^{-1} * (a - a_e).
  const PrincipalSymbol& ae = *a.find(G.identity());
  const PrincipalSymbol inv_e{reciprocal(ae.plus), reciprocal(ae.minus)};
  CrossedSymbol mq(a.action(), grid);
  double rho = 0.0;
  for (const auto& [g, s] : a.terms()) {
    if (G.is_identity(g)) continue;
    PrincipalSymbol q{(inv_e.plus * s.plus).scaled(-1.0), (inv_e.minus * s.minus).scaled(-1.0)};
    rho += q.sup_norm();
    mq.set(g, std::move(q));
  }
  if (rho >= 1.0) {
    throw Error(ErrorKind::NeumannDivergence,
                "perturbation norm " + std::to_string(rho) + " is not below 1");
  }
  CrossedSymbol sum = CrossedSymbol::unit(a.action(), grid);
  CrossedSymbol term = sum;
  for (int n = 1; n < 10000; ++n) {
    term = star_principal(term, mq);
    term.prune(1e-17);
    for (const auto& [g, s] : term.terms()) sum.add(g, s);
    if (std::pow(rho, n + 1) / (1.0 - rho) < 1e-10) break;
  }
  return star_principal(sum, CrossedSymbol::delta(a.action(), G.identity(), inv_e));
}

}  // namespace gindex
