#pragma once

#include <string>

namespace stefan {

enum class SigmaKind { Zero, Exponential, PowerTail, Compact };

/// Radial volatility profile sigma(r), r = distance to the nearest sphere.
/// Every non-zero kind is normalised so that its integral over [0, inf) is c0.
struct SigmaProfile {
  SigmaKind kind = SigmaKind::Zero;
  double c0 = 0.0;
  double lambda = 1.0;  // Exponential
  double a = 3.0;       // PowerTail exponent, sigma ~ r^-(1+a)
  double r0 = 1.0;      // PowerTail offset
  double h = 1.0;       // Compact support width

  static SigmaProfile zero();
  static SigmaProfile exponential(double c0, double lambda);
  static SigmaProfile power_tail(double c0, double a, double r0);
  static SigmaProfile compact(double c0, double h);

  double operator()(double r) const;
  double integral() const { return kind == SigmaKind::Zero ? 0.0 : c0; }
  bool is_zero() const { return kind == SigmaKind::Zero || c0 == 0.0; }

  void validate() const;
};

std::string to_string(SigmaKind kind);
SigmaKind sigma_kind_from_string(const std::string& name);

/// Closed form of  int_0^inf sigma(r) 4 pi (R + r)^2 dr, i.e. the noise mass in
/// the shell around one isolated sphere of radius R. Throws InputError when
/// sigma(r) r^2 is not integrable (power tail with a <= 2).
double shell_mass_closed_form(const SigmaProfile& sigma, double radius);

/// Same quantity by adaptive Gauss-Kronrod quadrature.
double shell_mass_quadrature(const SigmaProfile& sigma, double radius);

/// int_0^inf sigma(r) dr by adaptive quadrature; should reproduce c0.
double integrate_profile(const SigmaProfile& sigma);

}  // namespace stefan
