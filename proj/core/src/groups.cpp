#include "gindex/groups.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gindex/error.hpp"

namespace gindex {

namespace {

int mod(int a, int m) { return ((a % m) + m) % m; }

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

const char* to_string(GroupKind kind) noexcept {
  switch (kind) {
    case GroupKind::trivial: return "trivial";
    case GroupKind::cyclic: return "cyclic";
    case GroupKind::dihedral: return "dihedral";
    case GroupKind::integer_shift: return "integer_shift";
  }
  return "?";
}

bool ConjugacyClass::contains(const GroupElement& g) const {
  return std::find(members.begin(), members.end(), g) != members.end();
}

// ---------------------------------------------------------------------------
// GroupSpec

GroupSpec GroupSpec::build(const GroupDescriptor& d) {
  switch (d.kind) {
    case GroupKind::trivial:
      return GroupSpec(GroupDescriptor{GroupKind::trivial, 1, d.theta, d.generator});
    case GroupKind::cyclic:
      if (d.m < 1) throw Error(ErrorKind::InvalidParameter, "cyclic group needs m >= 1");
      break;
    case GroupKind::dihedral:
      if (d.m < 2) throw Error(ErrorKind::InvalidParameter, "dihedral group needs m >= 2");
      break;
    case GroupKind::integer_shift:
      if (!(d.theta > 0.0 && d.theta < kTwoPi)) {
        throw Error(ErrorKind::InvalidParameter, "integer_shift needs theta in (0, 2pi)");
      }
      break;
  }
  if (d.generator.empty() || d.generator == "e") {
    throw Error(ErrorKind::InvalidParameter, "invalid generator label");
  }
  return GroupSpec(d);
}

int GroupSpec::order() const noexcept {
  switch (desc_.kind) {
    case GroupKind::trivial: return 1;
    case GroupKind::cyclic: return desc_.m;
    case GroupKind::dihedral: return 2 * desc_.m;
    case GroupKind::integer_shift: return 0;
  }
  return 0;
}

GroupElement GroupSpec::normalize(GroupElement g) const {
  switch (desc_.kind) {
    case GroupKind::trivial: return {};
    case GroupKind::cyclic: return {mod(g.rot, desc_.m), 0};
    case GroupKind::dihedral: return {mod(g.rot, desc_.m), mod(g.flip, 2)};
    case GroupKind::integer_shift: return {g.rot, 0};
  }
  return g;
}

bool GroupSpec::contains(const GroupElement& g) const noexcept {
  switch (desc_.kind) {
    case GroupKind::trivial: return g == GroupElement{};
    case GroupKind::cyclic: return g.flip == 0 && g.rot >= 0 && g.rot < desc_.m;
    case GroupKind::dihedral:
      return (g.flip == 0 || g.flip == 1) && g.rot >= 0 && g.rot < desc_.m;
    case GroupKind::integer_shift: return g.flip == 0;
  }
  return false;
}

GroupElement GroupSpec::multiply(const GroupElement& g, const GroupElement& h) const {
  if (desc_.kind == GroupKind::dihedral) {
    // s^b1 r^a1 s^b2 r^a2 = s^(b1+b2) r^((-1)^b2 a1 + a2)
    const int a1 = h.flip ? -g.rot : g.rot;
    return normalize({a1 + h.rot, g.flip + h.flip});
  }
  return normalize({g.rot + h.rot, 0});
}

GroupElement GroupSpec::inverse(const GroupElement& g) const {
  if (desc_.kind == GroupKind::dihedral) {
    return g.flip ? g : normalize({-g.rot, 0});
  }
  return normalize({-g.rot, 0});
}

GroupElement GroupSpec::power(const GroupElement& g, int n) const {
  GroupElement base = n < 0 ? inverse(g) : g;
  GroupElement acc = identity();
  for (int i = 0; i < std::abs(n); ++i) acc = multiply(acc, base);
  return acc;
}

std::vector<GroupElement> GroupSpec::elements() const {
  if (!is_finite()) {
    throw Error(ErrorKind::UnsupportedGroup, "integer_shift has infinitely many elements");
  }
  std::vector<GroupElement> out;
  const int flips = desc_.kind == GroupKind::dihedral ? 2 : 1;
  const int rots = desc_.kind == GroupKind::trivial ? 1 : desc_.m;
  for (int b = 0; b < flips; ++b) {
    for (int a = 0; a < rots; ++a) out.push_back({a, b});
  }
  return out;
}

int GroupSpec::element_order(const GroupElement& g) const {
  if (is_identity(g)) return 1;
  if (!is_finite()) return 0;
  GroupElement acc = g;
  for (int n = 1; n <= order(); ++n) {
    if (is_identity(acc)) return n;
    acc = multiply(acc, g);
  }
  return 0;
}

ConjugacyClass GroupSpec::conjugacy_class(const GroupElement& g) const {
  ConjugacyClass c;
  c.torsion = is_torsion(g);
  if (!is_finite()) {
    c.members = {normalize(g)};
    return c;
  }
  std::set<GroupElement> seen;
  for (const auto& x : elements()) seen.insert(multiply(multiply(x, g), inverse(x)));
  c.members.assign(seen.begin(), seen.end());
  return c;
}

std::vector<ConjugacyClass> GroupSpec::conjugacy_classes() const {
  std::vector<ConjugacyClass> out;
  std::set<GroupElement> covered;
  for (const auto& g : elements()) {
    if (covered.count(g)) continue;
    auto c = conjugacy_class(g);
    covered.insert(c.members.begin(), c.members.end());
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ConjugacyClass> GroupSpec::classes_meeting(
    std::span<const GroupElement> support) const {
  std::vector<ConjugacyClass> out;
  for (const auto& g : support) {
    const bool known = std::any_of(out.begin(), out.end(),
                                   [&](const ConjugacyClass& c) { return c.contains(g); });
    if (!known) out.push_back(conjugacy_class(g));
  }
  return out;
}

int GroupSpec::chi(const GroupElement& g) const noexcept {
  return desc_.kind == GroupKind::integer_shift ? g.rot : 0;
}

std::string GroupSpec::name(const GroupElement& g) const {
  if (is_identity(g)) return "e";
  switch (desc_.kind) {
    case GroupKind::integer_shift: return std::to_string(g.rot);
    case GroupKind::dihedral: {
      std::string s = g.flip ? "s" : "";
      if (g.rot == 1) s += "r";
      if (g.rot > 1) s += "r" + std::to_string(g.rot);
      return s;
    }
    default:
      return g.rot == 1 ? desc_.generator : desc_.generator + std::to_string(g.rot);
  }
}

GroupElement GroupSpec::parse(const std::string& label) const {
  if (label == "e") return identity();
  if (desc_.kind == GroupKind::integer_shift) {
    try {
      size_t pos = 0;
      const int n = std::stoi(label, &pos);
      if (pos == label.size()) return {n, 0};
    } catch (const std::exception&) {
    }
  } else if (is_finite()) {
    for (const auto& g : elements()) {
      if (name(g) == label) return g;
    }
  }
  throw Error(ErrorKind::SchemaError, "unknown group element '" + label + "' in " +
                                          to_string(desc_.kind) + " group");
}

// ---------------------------------------------------------------------------
// CircleDiffeo

CircleDiffeo CircleDiffeo::affine(int sign, double shift) {
  if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidParameter, "sign must be +-1");
  return CircleDiffeo(sign, shift, 0.0);
}

CircleDiffeo CircleDiffeo::conjugated_rotation(double angle, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) {
    throw Error(ErrorKind::NotADiffeo,
                "phi(x) = x + eps sin x has phi' = 1 + eps cos x changing sign for eps = " +
                    std::to_string(eps));
  }
  return CircleDiffeo(1, angle, eps);
}

CircleDiffeo CircleDiffeo::with_finite_order(int m) const {
  CircleDiffeo c = *this;
  c.finite_order_ = m;
  return c;
}

double CircleDiffeo::phi_inverse(double x) const {
  double y = x;
  for (int it = 0; it < 60; ++it) {
    const double step = (y + eps_ * std::sin(y) - x) / (1.0 + eps_ * std::cos(y));
    y -= step;
    if (std::abs(step) < 1e-16 * (1.0 + std::abs(y))) break;
  }
  return y;
}

double CircleDiffeo::forward(double x) const {
  if (eps_ == 0.0) return sign_ * x + shift_;
  const double y = phi_inverse(x) + shift_;
  return y + eps_ * std::sin(y);
}

double CircleDiffeo::inverse(double x) const {
  if (eps_ == 0.0) return sign_ * (x - shift_);
  const double y = phi_inverse(x) - shift_;
  return y + eps_ * std::sin(y);
}

double CircleDiffeo::derivative(double x) const {
  if (eps_ == 0.0) return sign_;
  const double y = phi_inverse(x);
  return (1.0 + eps_ * std::cos(y + shift_)) / (1.0 + eps_ * std::cos(y));
}

double CircleDiffeo::inverse_derivative(double x) const {
  if (eps_ == 0.0) return sign_;
  const double y = phi_inverse(x);
  return (1.0 + eps_ * std::cos(y - shift_)) / (1.0 + eps_ * std::cos(y));
}

CircleDiffeo::Samples CircleDiffeo::sample(const PeriodicGrid& grid) const {
  auto fwd = PeriodicFunction::from_function(grid, [&](double x) { return forward(x) - sign_ * x; });
  auto inv = PeriodicFunction::from_function(grid, [&](double x) { return inverse(x) - sign_ * x; });
  auto der = PeriodicFunction::from_function(grid, [&](double x) { return derivative(x); });
  return {fwd, inv, der};
}

// ---------------------------------------------------------------------------
// CanonicalTransform

CanonicalTransform CanonicalTransform::from_diffeo(const CircleDiffeo& alpha) {
  CanonicalTransform c;
  if (alpha.is_affine()) {
    c.kind_ = Kind::affine;
    c.sign_ = alpha.sign();
    c.shift_ = alpha.shift();
  } else {
    c.kind_ = Kind::curved;
    c.alpha_ = alpha;
  }
  return c;
}

CanonicalTransform CanonicalTransform::half_wave(double t) {
  CanonicalTransform c;
  c.kind_ = Kind::half_wave;
  c.t_ = t;
  return c;
}

double CanonicalTransform::base(int sheet, double x) const {
  switch (kind_) {
    case Kind::affine: return sign_ * (x - shift_);
    case Kind::curved: return alpha_->inverse(x);
    case Kind::half_wave: return x + t_ * sheet;
  }
  return x;
}

std::pair<double, double> CanonicalTransform::apply(double x, double xi) const {
  switch (kind_) {
    case Kind::affine: return {sign_ * (x - shift_), sign_ * xi};
    case Kind::curved: {
      const double y = alpha_->inverse(x);
      return {y, alpha_->derivative(y) * xi};
    }
    case Kind::half_wave: return {x + (xi > 0 ? t_ : (xi < 0 ? -t_ : 0.0)), xi};
  }
  return {x, xi};
}

// ---------------------------------------------------------------------------
// QuantizedTransform

const char* to_string(QuantizedTransform::Tag tag) noexcept {
  switch (tag) {
    case QuantizedTransform::Tag::identity: return "identity";
    case QuantizedTransform::Tag::rotation: return "rotation";
    case QuantizedTransform::Tag::reflection: return "reflection";
    case QuantizedTransform::Tag::weighted_diffeo_shift: return "weighted_diffeo_shift";
    case QuantizedTransform::Tag::half_wave: return "half_wave";
  }
  return "?";
}

QuantizedTransform QuantizedTransform::monomial(GroupElement g, Tag tag, FrequencyWindow window,
                                                std::vector<int> targets,
                                                std::vector<cplx> phases) {
  QuantizedTransform q(g, tag, window);
  q.monomial_ = true;
  q.targets_ = std::move(targets);
  q.phases_ = std::move(phases);
  return q;
}

QuantizedTransform QuantizedTransform::dense(GroupElement g, FrequencyWindow window,
                                             Eigen::MatrixXcd matrix, double defect) {
  QuantizedTransform q(g, Tag::weighted_diffeo_shift, window);
  q.monomial_ = false;
  q.dense_ = std::move(matrix);
  q.defect_ = defect;
  return q;
}

Eigen::MatrixXcd QuantizedTransform::matrix() const {
  if (!monomial_) return dense_;
  const int n = window_.dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) m(targets_[static_cast<size_t>(k)], k) = phases_[static_cast<size_t>(k)];
  return m;
}

Eigen::MatrixXcd QuantizedTransform::right_apply(const Eigen::MatrixXcd& k) const {
  if (!monomial_) return k * dense_;
  Eigen::MatrixXcd out(k.rows(), k.cols());
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    out.col(c) = phases_[static_cast<size_t>(c)] * k.col(targets_[static_cast<size_t>(c)]);
  }
  return out;
}

Eigen::MatrixXcd QuantizedTransform::left_apply(const Eigen::MatrixXcd& l) const {
  if (!monomial_) return dense_ * l;
  Eigen::MatrixXcd out(l.rows(), l.cols());
  for (Eigen::Index r = 0; r < l.rows(); ++r) {
    out.row(targets_[static_cast<size_t>(r)]) = phases_[static_cast<size_t>(r)] * l.row(r);
  }
  return out;
}

Eigen::MatrixXcd QuantizedTransform::conjugate(const Eigen::MatrixXcd& l,
                                               const QuantizedTransform& inverse) const {
  if (!monomial_) return dense_ * l * inverse.matrix();
  const Eigen::Index n = l.rows();
  Eigen::MatrixXcd out(n, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const cplx pb = std::conj(phases_[static_cast<size_t>(b)]);
    const int tb = targets_[static_cast<size_t>(b)];
    for (Eigen::Index a = 0; a < n; ++a) {
      out(targets_[static_cast<size_t>(a)], tb) = phases_[static_cast<size_t>(a)] * l(a, b) * pb;
    }
  }
  return out;
}

cplx QuantizedTransform::trace_product(const Eigen::MatrixXcd& x, int inner) const {
  cplx acc{};
  for (int k = -inner; k <= inner; ++k) {
    const int i = window_.index(k);
    if (monomial_) {
      acc += x(i, targets_[static_cast<size_t>(i)]) * phases_[static_cast<size_t>(i)];
    } else {
      acc += (x.row(i) * dense_.col(i))(0, 0);
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// GroupAction

const char* to_string(Realization::Kind kind) noexcept {
  switch (kind) {
    case Realization::Kind::none: return "none";
    case Realization::Kind::rotation: return "rotation";
    case Realization::Kind::reflection: return "reflection";
    case Realization::Kind::conjugated_rotation: return "conjugated_rotation";
    case Realization::Kind::half_wave: return "half_wave";
  }
  return "?";
}

GroupAction::GroupAction(GroupSpec group, Realization realization)
    : group_(std::move(group)), realization_(realization) {
  using K = Realization::Kind;
  const auto bad = [&](const std::string& why) {
    throw Error(ErrorKind::InvalidParameter, std::string(to_string(realization_.kind)) +
                                                 " realization of a " + to_string(group_.kind()) +
                                                 " group: " + why);
  };
  switch (group_.kind()) {
    case GroupKind::trivial:
      realization_.kind = K::none;
      break;
    case GroupKind::cyclic:
      if (realization_.kind == K::none) realization_.kind = K::rotation;
      if (realization_.kind == K::half_wave) bad("half-wave flows generate Z, not Z/m");
      if (realization_.kind == K::reflection && group_.descriptor().m != 2) {
        bad("a reflection generates Z/2 only");
      }
      if (realization_.kind == K::conjugated_rotation) {
        (void)CircleDiffeo::conjugated_rotation(0.0, realization_.epsilon);
      }
      break;
    case GroupKind::dihedral:
      if (realization_.kind == K::none) realization_.kind = K::rotation;
      if (realization_.kind != K::rotation) bad("dihedral groups act by rotations and a reflection");
      break;
    case GroupKind::integer_shift:
      if (realization_.kind == K::none) realization_.kind = K::rotation;
      if (realization_.kind != K::rotation && realization_.kind != K::half_wave) {
        bad("Z acts by an irrational-type rotation or the half-wave flow");
      }
      break;
  }
}

bool GroupAction::is_isometric() const noexcept {
  using K = Realization::Kind;
  switch (realization_.kind) {
    case K::none:
    case K::rotation:
    case K::reflection: return true;
    case K::conjugated_rotation: return realization_.epsilon == 0.0;
    case K::half_wave: return false;
  }
  return false;
}

double GroupAction::half_wave_time(const GroupElement& g) const {
  return g.rot * group_.descriptor().theta;
}

CircleDiffeo GroupAction::diffeo(const GroupElement& g) const {
  using K = Realization::Kind;
  if (!group_.contains(g)) throw Error(ErrorKind::InvalidParameter, "element outside group");
  const auto& d = group_.descriptor();
  switch (group_.kind()) {
    case GroupKind::trivial: return CircleDiffeo::affine(1, 0.0).with_finite_order(1);
    case GroupKind::cyclic: {
      const int ord = group_.element_order(g);
      if (realization_.kind == K::reflection) {
        return CircleDiffeo::affine(g.rot ? -1 : 1, 0.0).with_finite_order(ord);
      }
      const double angle = kTwoPi * g.rot / d.m;
      if (realization_.kind == K::conjugated_rotation && g.rot != 0) {
        return CircleDiffeo::conjugated_rotation(angle, realization_.epsilon).with_finite_order(ord);
      }
      return CircleDiffeo::affine(1, angle).with_finite_order(ord);
    }
    case GroupKind::dihedral: {
      const int sign = g.flip ? -1 : 1;
      return CircleDiffeo::affine(sign, sign * kTwoPi * g.rot / d.m)
          .with_finite_order(group_.element_order(g));
    }
    case GroupKind::integer_shift:
      if (realization_.kind == K::half_wave) {
        throw Error(ErrorKind::InvalidParameter, "the half-wave flow is not induced by a circle map");
      }
      return CircleDiffeo::affine(1, g.rot * d.theta);
  }
  return CircleDiffeo::affine(1, 0.0);
}

CanonicalTransform GroupAction::transform(const GroupElement& g) const {
  if (realization_.kind == Realization::Kind::half_wave) {
    return CanonicalTransform::half_wave(half_wave_time(g));
  }
  return CanonicalTransform::from_diffeo(diffeo(g));
}

QuantizedTransform GroupAction::quantize(const GroupElement& g,
                                         const FrequencyWindow& window) const {
  using Tag = QuantizedTransform::Tag;
  if (window.cutoff() < 8) {
    throw Error(ErrorKind::WindowTooSmall, "window cutoff " + std::to_string(window.cutoff()) +
                                               " below 8");
  }
  const int n = window.dim();
  std::vector<int> targets(static_cast<size_t>(n));
  std::vector<cplx> phases(static_cast<size_t>(n));

  if (realization_.kind == Realization::Kind::half_wave) {
    const double t = half_wave_time(g);
    for (int i = 0; i < n; ++i) {
      const int k = window.mode(i);
      targets[static_cast<size_t>(i)] = i;
      phases[static_cast<size_t>(i)] = std::polar(1.0, t * std::abs(k));
    }
    return QuantizedTransform::monomial(g, group_.is_identity(g) ? Tag::identity : Tag::half_wave,
                                        window, std::move(targets), std::move(phases));
  }

  const CircleDiffeo alpha = diffeo(g);
  if (alpha.is_affine()) {
    // u o alpha^{-1}: e^{ikx} -> e^{-ik sign shift} e^{i (sign k) x}
    const int s = alpha.sign();
    for (int i = 0; i < n; ++i) {
      const int k = window.mode(i);
      targets[static_cast<size_t>(i)] = window.index(s * k);
      phases[static_cast<size_t>(i)] = std::polar(1.0, -static_cast<double>(k) * s * alpha.shift());
    }
    Tag tag = s < 0 ? Tag::reflection : (alpha.shift() == 0.0 ? Tag::identity : Tag::rotation);
    return QuantizedTransform::monomial(g, tag, window, std::move(targets), std::move(phases));
  }

  // Weighted shift u -> |(alpha^{-1})'|^{1/2} u o alpha^{-1}, column by column.
  const int grid_size = next_pow2(std::max(64, 8 * window.cutoff()));
  const PeriodicGrid grid(grid_size);
  std::vector<double> inv(static_cast<size_t>(grid_size)), weight(static_cast<size_t>(grid_size));
  for (int j = 0; j < grid_size; ++j) {
    const double x = grid.node(j);
    inv[static_cast<size_t>(j)] = alpha.inverse(x);
    weight[static_cast<size_t>(j)] = std::sqrt(std::abs(alpha.inverse_derivative(x)));
  }
  Eigen::MatrixXcd m(n, n);
  std::vector<cplx> col(static_cast<size_t>(grid_size));
  const int k0 = lowest_mode(grid_size);
  for (int i = 0; i < n; ++i) {
    const int k = window.mode(i);
    for (int j = 0; j < grid_size; ++j) {
      col[static_cast<size_t>(j)] =
          weight[static_cast<size_t>(j)] * std::polar(1.0, k * inv[static_cast<size_t>(j)]);
    }
    const auto c = dft(col);
    for (int r = 0; r < n; ++r) m(r, i) = c[static_cast<size_t>(window.mode(r) - k0)];
  }
  const int inner = window.cutoff() / 2;
  const Eigen::MatrixXcd b = m.middleCols(window.index(-inner), 2 * inner + 1);
  Eigen::MatrixXcd gram = b.adjoint() * b;
  gram.diagonal().array() -= 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  const double defect = es.eigenvalues().cwiseAbs().maxCoeff();
  return QuantizedTransform::dense(g, window, std::move(m), defect);
}

GroupActionPtr make_action(const GroupDescriptor& descriptor, Realization realization) {
  return std::make_shared<const GroupAction>(GroupSpec::build(descriptor), realization);
}

}  // namespace gindex
