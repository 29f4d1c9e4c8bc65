#include "stefan/sigma_profile.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "stefan/errors.hpp"

namespace stefan {

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
double integrate(F f, double lo, double hi) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-13, &error);
  if (!std::isfinite(value)) throw NumericalError("sigma quadrature did not converge");
  return value;
}

}  // namespace

SigmaProfile SigmaProfile::zero() { return {}; }

SigmaProfile SigmaProfile::exponential(double c0, double lambda) {
  SigmaProfile s;
  s.kind = SigmaKind::Exponential;
  s.c0 = c0;
  s.lambda = lambda;
  s.validate();
  return s;
}

SigmaProfile SigmaProfile::power_tail(double c0, double a, double r0) {
  SigmaProfile s;
  s.kind = SigmaKind::PowerTail;
  s.c0 = c0;
  s.a = a;
  s.r0 = r0;
  s.validate();
  return s;
}

SigmaProfile SigmaProfile::compact(double c0, double h) {
  SigmaProfile s;
  s.kind = SigmaKind::Compact;
  s.c0 = c0;
  s.h = h;
  s.validate();
  return s;
}

void SigmaProfile::validate() const {
  if (kind == SigmaKind::Zero) return;
  if (!(c0 >= 0.0)) throw InputError("sigma.c0 must be >= 0");
  switch (kind) {
    case SigmaKind::Exponential:
      if (!(lambda > 0.0)) throw InputError("sigma.lambda must be > 0");
      break;
    case SigmaKind::PowerTail:
      if (!(a > 0.0) || !(r0 > 0.0)) throw InputError("sigma.a and sigma.r0 must be > 0");
      break;
    case SigmaKind::Compact:
      if (!(h > 0.0)) throw InputError("sigma.h must be > 0");
      break;
    case SigmaKind::Zero:
      break;
  }
}

double SigmaProfile::operator()(double r) const {
  if (r < 0.0) r = 0.0;
  switch (kind) {
    case SigmaKind::Zero:
      return 0.0;
    case SigmaKind::Exponential:
      return c0 * lambda * std::exp(-lambda * r);
    case SigmaKind::PowerTail:
      return c0 * a * std::pow(r0, a) / std::pow(r0 + r, 1.0 + a);
    case SigmaKind::Compact:
      return r <= h ? c0 / h : 0.0;
  }
  return 0.0;
}

std::string to_string(SigmaKind kind) {
  switch (kind) {
    case SigmaKind::Zero:
      return "zero";
    case SigmaKind::Exponential:
      return "exponential";
    case SigmaKind::PowerTail:
      return "power_tail";
    case SigmaKind::Compact:
      return "compact";
  }
  return "zero";
}

SigmaKind sigma_kind_from_string(const std::string& name) {
  if (name == "zero") return SigmaKind::Zero;
  if (name == "exponential") return SigmaKind::Exponential;
  if (name == "power_tail") return SigmaKind::PowerTail;
  if (name == "compact") return SigmaKind::Compact;
  throw ConfigError("unknown sigma.kind '" + name + "' (zero|exponential|power_tail|compact)");
}

double shell_mass_closed_form(const SigmaProfile& s, double radius) {
  const double R = radius;
  switch (s.kind) {
    case SigmaKind::Zero:
      return 0.0;
    case SigmaKind::Exponential: {
      const double il = 1.0 / s.lambda;
      return 4.0 * kPi * s.c0 * (R * R + 2.0 * R * il + 2.0 * il * il);
    }
    case SigmaKind::Compact: {
      const double outer = R + s.h;
      return 4.0 * kPi * s.c0 / s.h * (outer * outer * outer - R * R * R) / 3.0;
    }
    case SigmaKind::PowerTail: {
      if (!(s.a > 2.0)) throw InputError("power-tail sigma with a <= 2: sigma(r) r^2 is not integrable");
      // substitute u = r0 + r, (R + r) = u + d
      const double d = R - s.r0;
      return 4.0 * kPi * s.c0 *
             (s.a * s.r0 * s.r0 / (s.a - 2.0) + 2.0 * s.a * d * s.r0 / (s.a - 1.0) + d * d);
    }
  }
  return 0.0;
}

double shell_mass_quadrature(const SigmaProfile& s, double radius) {
  const auto integrand = [&](double r) { return s(r) * 4.0 * kPi * (radius + r) * (radius + r); };
  switch (s.kind) {
    case SigmaKind::Zero:
      return 0.0;
    case SigmaKind::Compact:
      return integrate(integrand, 0.0, s.h);
    case SigmaKind::PowerTail:
      if (!(s.a > 2.0)) throw InputError("power-tail sigma with a <= 2: sigma(r) r^2 is not integrable");
      [[fallthrough]];
    case SigmaKind::Exponential:
      return integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
  }
  return 0.0;
}

double integrate_profile(const SigmaProfile& s) {
  switch (s.kind) {
    case SigmaKind::Zero:
      return 0.0;
    case SigmaKind::Compact:
      return integrate([&](double r) { return s(r); }, 0.0, s.h);
    case SigmaKind::Exponential:
    case SigmaKind::PowerTail:
      return integrate([&](double r) { return s(r); }, 0.0, std::numeric_limits<double>::infinity());
  }
  return 0.0;
}

}  // namespace stefan
