#pragma once

// Truncated Taylor series in one real variable and the xi-profiles built
// from them. A Jet of length n at xi0 stores t_0..t_{n-1} with
// p(xi0 + d) = sum t_k d^k + O(d^n), so d^k p / dxi^k = k! t_k.

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gindex/circle.hpp"

namespace gindex {

class Jet {
 public:
  Jet() = default;
  explicit Jet(int length, cplx value = 0.0);
  static Jet variable(double xi0, int length);  // d -> xi0 + d

  int length() const noexcept { return static_cast<int>(c_.size()); }
  cplx operator[](int k) const noexcept { return c_[static_cast<size_t>(k)]; }
  cplx& operator[](int k) noexcept { return c_[static_cast<size_t>(k)]; }
  const std::vector<cplx>& coeffs() const noexcept { return c_; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(cplx s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, cplx s) { return a *= s; }
  friend Jet operator*(const Jet& a, const Jet& b);

  Jet reciprocal() const;  // throws DivisionNearZero
  Jet exp() const;
  Jet pow(double alpha) const;  // needs t_0 != 0

 private:
  std::vector<cplx> c_;
};

// Real functions of xi used to build separable symbols f(x) p(xi).
class Profile {
 public:
  enum class Kind {
    constant,       // value
    bump,           // exp(1 - 1/(1-u^2)), u = (xi - center)/radius
    gaussian,       // exp(-((xi - center)/width)^2)
    inverse_power,  // (1 + xi^2)^(-power/2)
    xi_times,       // xi * child
    product,        // prod children
    psi_plus,       // 0 on xi <= eps, 1 on xi >= 2 eps
    psi_minus,      // psi_plus(-xi)
    psi_zero,       // 1 - psi_plus - psi_minus
    psi_inf,        // psi_plus + psi_minus
  };

  static Profile constant(double value);
  static Profile bump(double center, double radius);
  static Profile gaussian(double center, double width);
  static Profile inverse_power(double power);
  static Profile xi_times(Profile child);
  static Profile product(std::vector<Profile> children);
  static Profile psi_plus(double eps);
  static Profile psi_minus(double eps);
  static Profile psi_zero(double eps);
  static Profile psi_inf(double eps);

  Kind kind() const noexcept { return kind_; }
  double operator()(double xi) const;
  Jet jet(double xi, int length) const;

  // |xi| beyond which |p| stays below 1e-8 of its maximum; infinity when the
  // profile does not decay (order 0 or positive).
  double radius() const;
  // Symbol order in xi (large negative for compactly supported / Schwartz).
  double order() const;

  nlohmann::json to_json() const;
  static Profile from_json(const nlohmann::json& j);

 private:
  Profile(Kind k, double a, double b) : kind_(k), a_(a), b_(b) {}

  Kind kind_ = Kind::constant;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<Profile> children_;
};

inline constexpr double kSchwartzOrder = -1e9;

}  // namespace gindex
