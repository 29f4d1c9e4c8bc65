#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace stefan {

// Integrals of a scalar field u(x, t) over balls B(R) centred at the origin of
// R^3, their boundary spheres, and the complement, for a radius that moves in
// time. g(R) = int_{B(R)} u satisfies
//   g'(R)  = int_{dB(R)} u
//   g''(R) = (2/R) int_{dB(R)} u + int_{dB(R)} grad u . eta
// and the checks below confirm these by quadrature and by Monte Carlo.

using Vec3 = std::array<double, 3>;

struct TestField {
  std::string name;
  std::function<double(const Vec3&, double)> value;
  std::function<Vec3(const Vec3&, double)> gradient;
  std::function<double(const Vec3&, double)> time_derivative;
  double support_radius = std::numeric_limits<double>::infinity();  // u = 0 beyond
  bool time_dependent = false;

  // Closed forms in (R, t); empty when not available.
  std::function<double(double, double)> ball_exact;
  std::function<double(double, double)> surface_exact;
  std::function<double(double, double)> flux_exact;
};

/// u = 1, |x|^2, exp(-|x|), t |x|.
std::vector<TestField> field_catalog();
TestField find_field(const std::string& name);

/// u = t (9 - |x|^2)^3 inside |x| < 3, zero outside; C^2 with compact support,
/// so the complement integral is finite.
TestField compact_bump_field();

// Quadrature: product Gauss-Legendre of order 32 in (cos theta, phi), adaptive
// Gauss-Kronrod in the radius. Throws NumericalError when the radial estimate
// does not converge.
double ball_integral(const TestField& u, double radius, double t);
double surface_integral(const TestField& u, double radius, double t);
double normal_flux(const TestField& u, double radius, double t);
/// int over r_lo < |x| < r_hi; negative when r_hi < r_lo.
double shell_integral(const TestField& u, double r_lo, double r_hi, double t);
/// int over |x| > radius, up to the field's support.
double outer_integral(const TestField& u, double radius, double t);
/// Same pair for u_t.
double ball_integral_dt(const TestField& u, double radius, double t);
double outer_integral_dt(const TestField& u, double radius, double t);

struct IdentityCheck {
  std::string field;
  std::string identity;  // closed_form_ball, closed_form_surface, closed_form_flux, g_y, g_yy, g_ty
  double radius = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Closed forms against quadrature (1e-10), five-point finite differences of g
/// in R against the surface / second-derivative formulas (1e-8 / 1e-6), and for
/// time-dependent fields d/dR int_B u_t against int_dB u_t (1e-8).
std::vector<IdentityCheck> check_identities(const TestField& u, const std::vector<double>& radii, double t,
                                            double h = 1e-3);

enum class Domain { Inner, Outer };

struct ReductionCheck {
  std::string field;
  Domain domain = Domain::Inner;
  double max_residual = 0.0;  // relative to max(1, |rhs|)
  double tolerance = 1e-6;
  bool pass = false;
};

/// Centred difference of t -> int_{D(R(t))} u(., t) against
///   int_D u_t + s R'(t) int_{dB} u,   s = +1 inside, -1 outside,
/// for R(t) = 1 + 0.1 sin t at the given sample times.
ReductionCheck verify_deterministic_reduction(const TestField& u, Domain domain, const std::vector<double>& times,
                                              double h = 1e-4, double tolerance = 1e-6);

struct ItoCheck {
  std::string field;
  double r0 = 0.0;
  double sigma_r = 0.0;
  double horizon = 0.0;  // after any shrinking
  std::size_t horizon_halvings = 0;
  std::size_t n_paths = 0;
  double estimate = 0.0;      // mean of (g(R(t)) - g(R0)) / t
  double std_error = 0.0;
  double prediction = 0.0;    // sigma_R^2 / 2 * g''(R0)
  double z = 0.0;
  double lemma_extra = 0.0;   // sigma_R^2 / R0 * int_dB u, reported only
  double z_with_extra = 0.0;
  bool pass = false;
};

/// R(t) = R0 + sigma_R W(t) with W sampled in steps of dt; path k is seeded by
/// mix_seed(seed, k). If any path reaches R <= 0 the horizon is halved and the
/// ensemble redrawn. Passes when |z| <= 3.
ItoCheck verify_ito_correction(const TestField& u, double r0, double sigma_r, double t, std::size_t n_paths,
                               double dt, std::uint64_t seed, std::size_t threads = 0);

struct ItoSuiteConfig {
  std::vector<double> radii = {0.5, 1.0, 2.0};
  double identity_time = 1.0;
  double fd_step = 1e-3;
  std::vector<double> reduction_times = {0.3, 0.9, 1.7, 2.6, 4.0};
  double reduction_step = 1e-4;
  double r0 = 1.0;
  double sigma_r = 0.05;
  double horizon = 0.1;
  std::size_t n_paths = 10'000;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

struct ItoSuiteReport {
  std::vector<IdentityCheck> identities;
  std::vector<ReductionCheck> reductions;
  std::vector<ItoCheck> ito;
  bool pass() const;
};

/// Identities on the catalog and the bump field, inner reductions on the
/// catalog, the outer reduction on the bump, and the statistical check on the
/// time-independent catalog fields.
ItoSuiteReport run_ito_suite(const ItoSuiteConfig& cfg);

void write_ito_report(std::ostream& out, const ItoSuiteReport& report);

}  // namespace stefan
