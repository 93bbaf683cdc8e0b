#pragma once

// Finite extensions of Z^d used as symmetry groups, their realization by
// circle maps, the induced canonical transformations of S*S^1 and the exact
// unitaries Phi_g acting on a Fourier window.
//
// Transport convention used throughout the library:
//
//     Phi_g op(a) Phi_g^{-1} = op(a o C_g)        (exactly for isometries)
//
// with Phi_g u = |(alpha_g^{-1})'|^{1/2} u o alpha_g^{-1}. Consequently
// C_g has base map alpha_g^{-1} and C_{gh} = C_h o C_g.

#include <Eigen/Dense>
#include <compare>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gindex/circle.hpp"

namespace gindex {

enum class GroupKind { trivial, cyclic, dihedral, integer_shift };

const char* to_string(GroupKind kind) noexcept;

// cyclic: r^rot; dihedral: s^flip r^rot; integer_shift: the integer rot.
struct GroupElement {
  int rot = 0;
  int flip = 0;

  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

struct GroupDescriptor {
  GroupKind kind = GroupKind::trivial;
  int m = 1;            // cyclic / dihedral order parameter
  double theta = 1.0;   // integer_shift rotation angle (or half-wave time)
  std::string generator = "r";  // label of the cyclic generator
};

struct ConjugacyClass {
  std::vector<GroupElement> members;
  bool torsion = true;

  const GroupElement& representative() const { return members.front(); }
  bool contains(const GroupElement& g) const;
};

class GroupSpec {
 public:
  // Throws InvalidParameter on m < 1, dihedral m < 2 or theta outside (0, 2pi).
  static GroupSpec build(const GroupDescriptor& descriptor);

  const GroupDescriptor& descriptor() const noexcept { return desc_; }
  GroupKind kind() const noexcept { return desc_.kind; }
  bool is_finite() const noexcept { return desc_.kind != GroupKind::integer_shift; }
  // Number of elements; 0 for infinite groups.
  int order() const noexcept;

  GroupElement identity() const noexcept { return {}; }
  GroupElement multiply(const GroupElement& g, const GroupElement& h) const;
  GroupElement inverse(const GroupElement& g) const;
  GroupElement power(const GroupElement& g, int n) const;
  bool is_identity(const GroupElement& g) const noexcept { return g == GroupElement{}; }

  // All elements (finite groups only; throws UnsupportedGroup otherwise).
  std::vector<GroupElement> elements() const;
  // Order of g, or 0 if g has infinite order.
  int element_order(const GroupElement& g) const;
  bool is_torsion(const GroupElement& g) const { return element_order(g) != 0; }

  ConjugacyClass conjugacy_class(const GroupElement& g) const;
  // Full partition (finite groups only).
  std::vector<ConjugacyClass> conjugacy_classes() const;
  // Classes meeting a finite set of elements, in first-appearance order.
  std::vector<ConjugacyClass> classes_meeting(std::span<const GroupElement> support) const;

  // The homomorphism chi: G -> Z (identity on integer_shift, zero otherwise).
  int chi(const GroupElement& g) const noexcept;

  std::string name(const GroupElement& g) const;
  // Inverse of name(); throws SchemaError for unknown names.
  GroupElement parse(const std::string& name) const;
  bool contains(const GroupElement& g) const noexcept;

  friend bool operator==(const GroupSpec& a, const GroupSpec& b) {
    return a.desc_.kind == b.desc_.kind && a.desc_.m == b.desc_.m && a.desc_.theta == b.desc_.theta;
  }

 private:
  explicit GroupSpec(GroupDescriptor d) : desc_(std::move(d)) {}
  GroupElement normalize(GroupElement g) const;

  GroupDescriptor desc_;
};

// Orientation-preserving or reversing diffeomorphism alpha of S^1.
class CircleDiffeo {
 public:
  // x -> sign * x + shift
  static CircleDiffeo affine(int sign, double shift);
  // phi o R_angle o phi^{-1} with phi(x) = x + eps sin x; needs 0 <= eps < 1.
  static CircleDiffeo conjugated_rotation(double angle, double eps);

  double forward(double x) const;
  double inverse(double x) const;
  double derivative(double x) const;          // alpha'(x)
  double inverse_derivative(double x) const;  // (alpha^{-1})'(x)

  bool orientation_preserving() const noexcept { return sign_ > 0; }
  bool is_affine() const noexcept { return eps_ == 0.0; }
  int sign() const noexcept { return sign_; }
  double shift() const noexcept { return shift_; }
  double epsilon() const noexcept { return eps_; }
  std::optional<int> finite_order() const noexcept { return finite_order_; }
  CircleDiffeo with_finite_order(int m) const;

  struct Samples {
    PeriodicFunction forward_displacement;  // alpha(x) - sign*x
    PeriodicFunction inverse_displacement;  // alpha^{-1}(x) - sign*x
    PeriodicFunction derivative;            // alpha'(x)
  };
  Samples sample(const PeriodicGrid& grid) const;

 private:
  CircleDiffeo(int sign, double shift, double eps) : sign_(sign), shift_(shift), eps_(eps) {}
  double phi_inverse(double x) const;

  int sign_ = 1;
  double shift_ = 0.0;  // rotation angle for conjugated rotations
  double eps_ = 0.0;
  std::optional<int> finite_order_;
};

// The action of g on S*S^1 = {+,-} x S^1 and on T*S^1, normalized so that
// Phi_g op(a) Phi_g^{-1} ~ op(a o C_g).
class CanonicalTransform {
 public:
  enum class Kind { affine, curved, half_wave };

  static CanonicalTransform from_diffeo(const CircleDiffeo& alpha);
  static CanonicalTransform half_wave(double t);

  Kind kind() const noexcept { return kind_; }
  bool is_isometric() const noexcept { return kind_ == Kind::affine; }
  bool swaps_sheets() const noexcept { return kind_ == Kind::affine && sign_ < 0; }

  // Sheet (+1/-1) that the point on `sheet` lands on.
  int sheet_image(int sheet) const noexcept { return swaps_sheets() ? -sheet : sheet; }
  // Base point image of (sheet, x).
  double base(int sheet, double x) const;
  // Full action on T*S^1 (xi != 0 selects the sheet).
  std::pair<double, double> apply(double x, double xi) const;

  // Affine data: C(x, xi) = (sign (x - shift), sign xi).
  int sign() const noexcept { return sign_; }
  double shift() const noexcept { return shift_; }

 private:
  CanonicalTransform() = default;

  Kind kind_ = Kind::affine;
  int sign_ = 1;
  double shift_ = 0.0;
  double t_ = 0.0;
  std::optional<CircleDiffeo> alpha_;
};

// Phi_g on a Fourier window. Isometric and half-wave families are monomial
// (Phi e_k = phase_k e_{target_k}) and exactly unitary; the weighted diffeo
// shift is stored densely together with its truncation defect.
class QuantizedTransform {
 public:
  enum class Tag { identity, rotation, reflection, weighted_diffeo_shift, half_wave };

  static QuantizedTransform monomial(GroupElement g, Tag tag, FrequencyWindow window,
                                     std::vector<int> targets, std::vector<cplx> phases);
  static QuantizedTransform dense(GroupElement g, FrequencyWindow window, Eigen::MatrixXcd matrix,
                                  double defect);

  const GroupElement& element() const noexcept { return element_; }
  Tag tag() const noexcept { return tag_; }
  const FrequencyWindow& window() const noexcept { return window_; }
  bool is_monomial() const noexcept { return monomial_; }
  std::span<const int> targets() const noexcept { return targets_; }
  std::span<const cplx> phases() const noexcept { return phases_; }
  // Unitarity defect ||Phi* Phi - I|| on the inner half-window (0 for monomial).
  double truncation_defect() const noexcept { return defect_; }

  Eigen::MatrixXcd matrix() const;

  // K * Phi
  Eigen::MatrixXcd right_apply(const Eigen::MatrixXcd& k) const;
  // Phi * L
  Eigen::MatrixXcd left_apply(const Eigen::MatrixXcd& l) const;
  // Phi L Phi^{-1}; `inverse` is Phi_{g^{-1}} and is only read for dense transforms.
  Eigen::MatrixXcd conjugate(const Eigen::MatrixXcd& l, const QuantizedTransform& inverse) const;
  // sum_{|k| <= inner} (X Phi)[k, k]
  cplx trace_product(const Eigen::MatrixXcd& x, int inner) const;

 private:
  QuantizedTransform(GroupElement g, Tag tag, FrequencyWindow window)
      : element_(g), tag_(tag), window_(window) {}

  GroupElement element_;
  Tag tag_;
  FrequencyWindow window_;
  bool monomial_ = true;
  std::vector<int> targets_;
  std::vector<cplx> phases_;
  Eigen::MatrixXcd dense_;
  double defect_ = 0.0;
};

const char* to_string(QuantizedTransform::Tag tag) noexcept;

struct Realization {
  enum class Kind { none, rotation, reflection, conjugated_rotation, half_wave };
  Kind kind = Kind::none;
  double epsilon = 0.3;  // conjugating map phi(x) = x + epsilon sin x
};

const char* to_string(Realization::Kind kind) noexcept;

// A group together with its realization by quantized canonical
// transformations. Immutable; shared between symbols and operators.
class GroupAction {
 public:
  // Throws InvalidParameter on an incompatible (group, realization) pair and
  // NotADiffeo when epsilon >= 1.
  GroupAction(GroupSpec group, Realization realization);

  const GroupSpec& group() const noexcept { return group_; }
  const Realization& realization() const noexcept { return realization_; }
  // Rotations and reflections only (exact Egorov transport).
  bool is_isometric() const noexcept;

  // Circle map alpha_g; throws InvalidParameter for the half-wave family.
  CircleDiffeo diffeo(const GroupElement& g) const;
  CanonicalTransform transform(const GroupElement& g) const;
  // Throws WindowTooSmall when the cutoff is below 8.
  QuantizedTransform quantize(const GroupElement& g, const FrequencyWindow& window) const;

 private:
  double half_wave_time(const GroupElement& g) const;

  GroupSpec group_;
  Realization realization_;
};

using GroupActionPtr = std::shared_ptr<const GroupAction>;

GroupActionPtr make_action(const GroupDescriptor& descriptor, Realization realization);

}  // namespace gindex
