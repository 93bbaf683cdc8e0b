#pragma once

// Principal symbols of G-operators: finitely supported maps g -> function on
// S*S^1 = {+,-} x S^1, multiplied in the crossed product C(S*S^1) x G.

#include <map>
#include <optional>
#include <vector>

#include "gindex/circle.hpp"
#include "gindex/groups.hpp"

namespace gindex {

struct PrincipalSymbol {
  PeriodicFunction plus;   // xi > 0
  PeriodicFunction minus;  // xi < 0

  static PrincipalSymbol constant(const PeriodicGrid& grid, cplx value);
  const PeriodicFunction& sheet(int s) const { return s > 0 ? plus : minus; }
  const PeriodicGrid& grid() const noexcept { return plus.grid(); }
  double sup_norm() const;
  double min_abs() const;
};

// a = sum_g a_g delta_g. Terms are kept in a sorted map; absent elements are 0.
class CrossedSymbol {
 public:
  CrossedSymbol(GroupActionPtr action, PeriodicGrid grid);

  static CrossedSymbol unit(GroupActionPtr action, const PeriodicGrid& grid);
  static CrossedSymbol delta(GroupActionPtr action, const GroupElement& g, PrincipalSymbol s);

  const GroupActionPtr& action() const noexcept { return action_; }
  const GroupSpec& group() const noexcept { return action_->group(); }
  const PeriodicGrid& grid() const noexcept { return grid_; }
  const std::map<GroupElement, PrincipalSymbol>& terms() const noexcept { return terms_; }
  std::vector<GroupElement> support() const;
  const PrincipalSymbol* find(const GroupElement& g) const;

  // Throws GridMismatch / InvalidParameter for foreign grids or elements.
  void set(const GroupElement& g, PrincipalSymbol s);
  // Adds to an existing coefficient.
  void add(const GroupElement& g, const PrincipalSymbol& s);
  // Drops coefficients whose sup norm is below tol.
  void prune(double tol);

  // max_g sup |a_g - b_g|
  double distance(const CrossedSymbol& other) const;

 private:
  GroupActionPtr action_;
  PeriodicGrid grid_;
  std::map<GroupElement, PrincipalSymbol> terms_;
};

// b o C_g on both sheets (sheet permutation included).
PrincipalSymbol transport(const PrincipalSymbol& b, const CanonicalTransform& c);

// (a * b)_k = sum_{gh = k} a_g (b_h o C_g). Throws GroupMismatch, GridMismatch.
CrossedSymbol star_principal(const CrossedSymbol& a, const CrossedSymbol& b);

enum class Verdict { elliptic, not_elliptic, undecided };
const char* to_string(Verdict v) noexcept;

struct EllipticityReport {
  Verdict verdict = Verdict::undecided;
  // Finite G: smallest singular value of the regular representation.
  // integer_shift: the dominance margin min|a_e| - sum_{g != e} max|a_g|.
  double min_value = 0.0;
  int sheet = 1;
  double x = 0.0;
};

// Pointwise left-regular representation at (sheet, node j):
// entry (h, k) = a_{h k^-1}(C_{h^-1}(p)), rows/cols in group.elements() order.
Eigen::MatrixXcd regular_representation(const CrossedSymbol& a, int sheet, int node);

// tol defaults to 1e-6. Throws UnsupportedGroup for integer_shift symbols
// lacking an identity coefficient.
EllipticityReport is_elliptic(const CrossedSymbol& a, double tol = 1e-6);

// Throws NotElliptic or NeumannDivergence.
CrossedSymbol invert_principal(const CrossedSymbol& a, double tol = 1e-6);

}  // namespace gindex
