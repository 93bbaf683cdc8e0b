#include "gindex/jet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "gindex/error.hpp"

namespace gindex {

Jet::Jet(int length, cplx value) : c_(static_cast<size_t>(std::max(length, 1)), 0.0) {
  c_[0] = value;
}

Jet Jet::variable(double xi0, int length) {
  Jet j(length, xi0);
  if (length > 1) j[1] = 1.0;
  return j;
}

Jet& Jet::operator+=(const Jet& o) {
  for (int k = 0; k < std::min(length(), o.length()); ++k) (*this)[k] += o[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (int k = 0; k < std::min(length(), o.length()); ++k) (*this)[k] -= o[k];
  return *this;
}

Jet& Jet::operator*=(cplx s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  const int n = std::min(a.length(), b.length());
  Jet out(n);
  for (int k = 0; k < n; ++k) {
    cplx acc{};
    for (int i = 0; i <= k; ++i) acc += a[i] * b[k - i];
    out[k] = acc;
  }
  return out;
}

Jet Jet::reciprocal() const {
  if (std::abs(c_[0]) < 1e-300) throw Error(ErrorKind::DivisionNearZero, "jet reciprocal at zero");
  const int n = length();
  Jet v(n, 1.0 / c_[0]);
  for (int k = 1; k < n; ++k) {
    cplx acc{};
    for (int i = 1; i <= k; ++i) acc += (*this)[i] * v[k - i];
    v[k] = -acc * v[0];
  }
  return v;
}

Jet Jet::exp() const {
  const int n = length();
  Jet v(n, std::exp(c_[0]));
  for (int k = 1; k < n; ++k) {
    cplx acc{};
    for (int i = 1; i <= k; ++i) acc += static_cast<double>(i) * (*this)[i] * v[k - i];
    v[k] = acc / static_cast<double>(k);
  }
  return v;
}

Jet Jet::pow(double alpha) const {
  if (std::abs(c_[0]) < 1e-300) throw Error(ErrorKind::DivisionNearZero, "jet power at zero");
  const int n = length();
  Jet v(n, std::pow(c_[0], alpha));
  for (int k = 1; k < n; ++k) {
    cplx acc{};
    for (int i = 1; i <= k; ++i) acc += (alpha * i - (k - i)) * (*this)[i] * v[k - i];
    v[k] = acc / (static_cast<double>(k) * c_[0]);
  }
  return v;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// C^infinity step: 0 for t <= 0, 1 for t >= 1.
Jet smoothstep(const Jet& t) {
  const int n = t.length();
  const double t0 = t[0].real();
  if (t0 <= 0.0) return Jet(n, 0.0);
  if (t0 >= 1.0) return Jet(n, 1.0);
  const Jet f = (t.reciprocal() * -1.0).exp();
  const Jet g = ((Jet(n, 1.0) - t).reciprocal() * -1.0).exp();
  return f * (f + g).reciprocal();
}

}  // namespace

Profile Profile::constant(double value) { return {Kind::constant, value, 0.0}; }

Profile Profile::bump(double center, double radius) {
  if (!(radius > 0)) throw Error(ErrorKind::InvalidParameter, "bump radius must be positive");
  return {Kind::bump, center, radius};
}

Profile Profile::gaussian(double center, double width) {
  if (!(width > 0)) throw Error(ErrorKind::InvalidParameter, "gaussian width must be positive");
  return {Kind::gaussian, center, width};
}

Profile Profile::inverse_power(double power) {
  if (!(power > 0)) throw Error(ErrorKind::InvalidParameter, "inverse_power needs power > 0");
  return {Kind::inverse_power, power, 0.0};
}

Profile Profile::xi_times(Profile child) {
  Profile p{Kind::xi_times, 0.0, 0.0};
  p.children_.push_back(std::move(child));
  return p;
}

Profile Profile::product(std::vector<Profile> children) {
  if (children.empty()) throw Error(ErrorKind::InvalidParameter, "empty profile product");
  Profile p{Kind::product, 0.0, 0.0};
  p.children_ = std::move(children);
  return p;
}

namespace {
double check_eps(double eps) {
  if (!(eps > 0)) throw Error(ErrorKind::InvalidParameter, "cutoff eps must be positive");
  return eps;
}
}  // namespace

Profile Profile::psi_plus(double eps) { return {Kind::psi_plus, check_eps(eps), 0.0}; }
Profile Profile::psi_minus(double eps) { return {Kind::psi_minus, check_eps(eps), 0.0}; }
Profile Profile::psi_zero(double eps) { return {Kind::psi_zero, check_eps(eps), 0.0}; }
Profile Profile::psi_inf(double eps) { return {Kind::psi_inf, check_eps(eps), 0.0}; }

double Profile::operator()(double xi) const { return jet(xi, 1)[0].real(); }

Jet Profile::jet(double xi, int n) const {
  const Jet var = Jet::variable(xi, n);
  switch (kind_) {
    case Kind::constant: return Jet(n, a_);
    case Kind::bump: {
      const double u0 = (xi - a_) / b_;
      if (std::abs(u0) >= 1.0) return Jet(n, 0.0);
      Jet u = var;
      u[0] -= a_;
      u *= 1.0 / b_;
      const Jet w = Jet(n, 1.0) - u * u;
      return (Jet(n, 1.0) - w.reciprocal()).exp();
    }
    case Kind::gaussian: {
      Jet u = var;
      u[0] -= a_;
      u *= 1.0 / b_;
      return (u * u * -1.0).exp();
    }
    case Kind::inverse_power: return (Jet(n, 1.0) + var * var).pow(-a_ / 2.0);
    case Kind::xi_times: return var * children_[0].jet(xi, n);
    case Kind::product: {
      Jet acc(n, 1.0);
      for (const auto& c : children_) acc = acc * c.jet(xi, n);
      return acc;
    }
    case Kind::psi_plus:
    case Kind::psi_minus:
    case Kind::psi_zero:
    case Kind::psi_inf: {
      Jet tp = var;
      tp[0] -= a_;
      tp *= 1.0 / a_;
      Jet tm = var * -1.0;
      tm[0] -= a_;
      tm *= 1.0 / a_;
      if (kind_ == Kind::psi_plus) return smoothstep(tp);
      if (kind_ == Kind::psi_minus) return smoothstep(tm);
      const Jet inf = smoothstep(tp) + smoothstep(tm);
      return kind_ == Kind::psi_inf ? inf : Jet(n, 1.0) - inf;
    }
  }
  return Jet(n, 0.0);
}

double Profile::radius() const {
  switch (kind_) {
    case Kind::constant: return a_ == 0.0 ? 0.0 : kInf;
    case Kind::bump: return std::abs(a_) + b_;
    case Kind::gaussian: return std::abs(a_) + b_ * std::sqrt(std::log(1e8));
    case Kind::inverse_power: return std::pow(1e8, 1.0 / a_);
    case Kind::xi_times: {
      const Profile& c = children_[0];
      if (c.kind_ == Kind::inverse_power) return c.a_ > 1.0 ? std::pow(1e8, 1.0 / (c.a_ - 1.0)) : kInf;
      return c.radius();
    }
    case Kind::product: {
      double r = kInf;
      for (const auto& c : children_) r = std::min(r, c.radius());
      return r;
    }
    case Kind::psi_zero: return 2.0 * a_;
    case Kind::psi_plus:
    case Kind::psi_minus:
    case Kind::psi_inf: return kInf;
  }
  return kInf;
}

double Profile::order() const {
  switch (kind_) {
    case Kind::constant: return a_ == 0.0 ? kSchwartzOrder : 0.0;
    case Kind::bump:
    case Kind::gaussian:
    case Kind::psi_zero: return kSchwartzOrder;
    case Kind::inverse_power: return -a_;
    case Kind::xi_times: return std::max(kSchwartzOrder, children_[0].order() + 1.0);
    case Kind::product: {
      double o = 0.0;
      for (const auto& c : children_) o += c.order();
      return std::max(kSchwartzOrder, o);
    }
    case Kind::psi_plus:
    case Kind::psi_minus:
    case Kind::psi_inf: return 0.0;
  }
  return 0.0;
}

nlohmann::json Profile::to_json() const {
  using nlohmann::json;
  switch (kind_) {
    case Kind::constant: return json{{"profile", "constant"}, {"value", a_}};
    case Kind::bump: return json{{"profile", "bump"}, {"center", a_}, {"radius", b_}};
    case Kind::gaussian: return json{{"profile", "gaussian"}, {"center", a_}, {"width", b_}};
    case Kind::inverse_power: return json{{"profile", "inverse_power"}, {"power", a_}};
    case Kind::xi_times: return json{{"profile", "xi_times"}, {"of", children_[0].to_json()}};
    case Kind::product: {
      json f = json::array();
      for (const auto& c : children_) f.push_back(c.to_json());
      return json{{"profile", "product"}, {"factors", f}};
    }
    case Kind::psi_plus: return json{{"profile", "psi_plus"}, {"eps", a_}};
    case Kind::psi_minus: return json{{"profile", "psi_minus"}, {"eps", a_}};
    case Kind::psi_zero: return json{{"profile", "psi_zero"}, {"eps", a_}};
    case Kind::psi_inf: return json{{"profile", "psi_inf"}, {"eps", a_}};
  }
  return {};
}

Profile Profile::from_json(const nlohmann::json& j) {
  auto num = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
      throw Error(ErrorKind::SchemaError, std::string("profile field '") + key + "' missing or not a number");
    }
    return j.at(key).get<double>();
  };
  if (j.is_number()) return constant(j.get<double>());
  if (!j.is_object() || !j.contains("profile") || !j.at("profile").is_string()) {
    throw Error(ErrorKind::SchemaError, "profile must be an object with a 'profile' name");
  }
  const std::string name = j.at("profile").get<std::string>();
  if (name == "constant") return constant(num("value"));
  if (name == "bump") return bump(num("center"), num("radius"));
  if (name == "gaussian") return gaussian(num("center"), num("width"));
  if (name == "inverse_power") return inverse_power(num("power"));
  if (name == "xi_times") {
    if (!j.contains("of")) throw Error(ErrorKind::SchemaError, "xi_times needs 'of'");
    return xi_times(from_json(j.at("of")));
  }
  if (name == "product") {
    if (!j.contains("factors") || !j.at("factors").is_array()) {
      throw Error(ErrorKind::SchemaError, "product needs a 'factors' array");
    }
    std::vector<Profile> f;
    for (const auto& c : j.at("factors")) f.push_back(from_json(c));
    return product(std::move(f));
  }
  if (name == "psi_plus") return psi_plus(num("eps"));
  if (name == "psi_minus") return psi_minus(num("eps"));
  if (name == "psi_zero") return psi_zero(num("eps"));
  if (name == "psi_inf") return psi_inf(num("eps"));
  throw Error(ErrorKind::SchemaError, "unknown profile '" + name + "'");
}

}  // namespace gindex
