#include "stefan/ito_geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <ostream>

#include "stefan/brownian.hpp"
#include "stefan/errors.hpp"
#include "stefan/parallel.hpp"
#include "stefan/text_format.hpp"

namespace stefan {

namespace {

constexpr double kPi = std::numbers::pi;
using Angular = boost::math::quadrature::gauss<double, 32>;
using Radial = boost::math::quadrature::gauss_kronrod<double, 15>;

double norm(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

// int over the unit sphere of f(r * omega, omega), mu = cos(theta).
template <class F>
double sphere_average_sum(double r, F&& f) {
  return Angular::integrate(
      [&](double mu) {
        const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        return Angular::integrate(
            [&](double phi) {
              const Vec3 omega{s * std::cos(phi), s * std::sin(phi), mu};
              const Vec3 x{r * omega[0], r * omega[1], r * omega[2]};
              return f(x, omega);
            },
            0.0, 2.0 * kPi);
      },
      -1.0, 1.0);
}

template <class F>
double radial_integral(double a, double b, F&& scalar) {
  if (a == b) return 0.0;
  if (b < a) return -radial_integral(b, a, scalar);
  double error = 0.0;
  double l1 = 0.0;
  // Integrate over s in [0, 1]. The library's per-panel error floor is
  // 2 eps |panel estimate| before rescaling, so narrow raw intervals could never
  // meet a tight relative tolerance.
  const double width = b - a;
  const auto integrand = [&](double s) {
    const double r = a + width * s;
    return width * r * r * sphere_average_sum(r, [&](const Vec3& x, const Vec3&) { return scalar(x); });
  };
  const double value = Radial::integrate(integrand, 0.0, 1.0, 15, 1e-13, &error, &l1);
  if (!std::isfinite(value) || error > 1e-9 * std::max(l1, 1e-300)) {
    throw NumericalError("radial quadrature did not converge on [" + format_double(a) + ", " + format_double(b) +
                         "], error estimate " + format_double(error));
  }
  return value;
}

double outer_upper(const TestField& u, double radius) {
  if (!(radius > 0.0)) throw InputError("radius must be > 0");
  return std::max(radius, u.support_radius);
}

double rel_error(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
}

IdentityCheck make_check(const TestField& u, std::string identity, double radius, double lhs, double rhs,
                         double tolerance) {
  IdentityCheck c;
  c.field = u.name;
  c.identity = std::move(identity);
  c.radius = radius;
  c.lhs = lhs;
  c.rhs = rhs;
  // Both sides vanish identically for the flux of a constant.
  c.rel_error = (lhs == 0.0 && rhs == 0.0) ? 0.0 : (std::abs(rhs) < 1e-300 ? std::abs(lhs) : rel_error(lhs, rhs));
  c.tolerance = tolerance;
  c.pass = c.rel_error <= tolerance;
  return c;
}

double radius_path(double t) { return 1.0 + 0.1 * std::sin(t); }
double radius_path_rate(double t) { return 0.1 * std::cos(t); }

}  // namespace

std::vector<TestField> field_catalog() {
  std::vector<TestField> out;

  TestField one;
  one.name = "constant";
  one.value = [](const Vec3&, double) { return 1.0; };
  one.gradient = [](const Vec3&, double) { return Vec3{0.0, 0.0, 0.0}; };
  one.time_derivative = [](const Vec3&, double) { return 0.0; };
  one.ball_exact = [](double r, double) { return 4.0 / 3.0 * kPi * r * r * r; };
  one.surface_exact = [](double r, double) { return 4.0 * kPi * r * r; };
  one.flux_exact = [](double, double) { return 0.0; };
  out.push_back(std::move(one));

  TestField sq;
  sq.name = "norm_sq";
  sq.value = [](const Vec3& x, double) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; };
  sq.gradient = [](const Vec3& x, double) { return Vec3{2.0 * x[0], 2.0 * x[1], 2.0 * x[2]}; };
  sq.time_derivative = [](const Vec3&, double) { return 0.0; };
  sq.ball_exact = [](double r, double) { return 4.0 * kPi * std::pow(r, 5) / 5.0; };
  sq.surface_exact = [](double r, double) { return 4.0 * kPi * std::pow(r, 4); };
  sq.flux_exact = [](double r, double) { return 8.0 * kPi * r * r * r; };
  out.push_back(std::move(sq));

  TestField ex;
  ex.name = "exp_neg_norm";
  ex.value = [](const Vec3& x, double) { return std::exp(-norm(x)); };
  ex.gradient = [](const Vec3& x, double) {
    const double r = norm(x);
    if (r == 0.0) return Vec3{0.0, 0.0, 0.0};
    const double s = -std::exp(-r) / r;
    return Vec3{s * x[0], s * x[1], s * x[2]};
  };
  ex.time_derivative = [](const Vec3&, double) { return 0.0; };
  ex.ball_exact = [](double r, double) { return 4.0 * kPi * (2.0 - std::exp(-r) * (r * r + 2.0 * r + 2.0)); };
  ex.surface_exact = [](double r, double) { return 4.0 * kPi * r * r * std::exp(-r); };
  ex.flux_exact = [](double r, double) { return -4.0 * kPi * r * r * std::exp(-r); };
  out.push_back(std::move(ex));

  TestField tn;
  tn.name = "t_norm";
  tn.time_dependent = true;
  tn.value = [](const Vec3& x, double t) { return t * norm(x); };
  tn.gradient = [](const Vec3& x, double t) {
    const double r = norm(x);
    if (r == 0.0) return Vec3{0.0, 0.0, 0.0};
    return Vec3{t * x[0] / r, t * x[1] / r, t * x[2] / r};
  };
  tn.time_derivative = [](const Vec3& x, double) { return norm(x); };
  tn.ball_exact = [](double r, double t) { return kPi * t * std::pow(r, 4); };
  tn.surface_exact = [](double r, double t) { return 4.0 * kPi * t * r * r * r; };
  tn.flux_exact = [](double r, double t) { return 4.0 * kPi * t * r * r; };
  out.push_back(std::move(tn));

  return out;
}

TestField find_field(const std::string& name) {
  for (auto& f : field_catalog()) {
    if (f.name == name) return f;
  }
  if (name == "bump") return compact_bump_field();
  throw ConfigError("unknown test field '" + name + "'");
}

TestField compact_bump_field() {
  TestField b;
  b.name = "bump";
  b.time_dependent = true;
  b.support_radius = 3.0;
  const auto profile = [](double r2) {
    const double d = 9.0 - r2;
    return d > 0.0 ? d * d * d : 0.0;
  };
  b.value = [profile](const Vec3& x, double t) { return t * profile(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); };
  b.gradient = [](const Vec3& x, double t) {
    const double d = 9.0 - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (d <= 0.0) return Vec3{0.0, 0.0, 0.0};
    const double s = -6.0 * t * d * d;
    return Vec3{s * x[0], s * x[1], s * x[2]};
  };
  b.time_derivative = [profile](const Vec3& x, double) { return profile(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); };
  b.ball_exact = [](double r, double t) {
    r = std::min(r, 3.0);
    const double r3 = r * r * r;
    return 4.0 * kPi * t *
           (243.0 * r3 - 243.0 / 5.0 * r3 * r * r + 27.0 / 7.0 * r3 * r3 * r - r3 * r3 * r3 / 9.0);
  };
  b.surface_exact = [](double r, double t) {
    const double d = std::max(0.0, 9.0 - r * r);
    return 4.0 * kPi * r * r * t * d * d * d;
  };
  b.flux_exact = [](double r, double t) {
    const double d = std::max(0.0, 9.0 - r * r);
    return -24.0 * kPi * t * r * r * r * d * d;
  };
  return b;
}

double ball_integral(const TestField& u, double radius, double t) {
  if (!(radius > 0.0)) throw InputError("radius must be > 0");
  return radial_integral(0.0, radius, [&](const Vec3& x) { return u.value(x, t); });
}

double shell_integral(const TestField& u, double r_lo, double r_hi, double t) {
  if (r_lo < 0.0 || r_hi < 0.0) throw InputError("shell radii must be >= 0");
  return radial_integral(r_lo, r_hi, [&](const Vec3& x) { return u.value(x, t); });
}

double outer_integral(const TestField& u, double radius, double t) {
  const double upper = outer_upper(u, radius);
  if (!std::isfinite(upper)) throw InputError("outer integral needs a compactly supported field");
  return radial_integral(radius, upper, [&](const Vec3& x) { return u.value(x, t); });
}

double ball_integral_dt(const TestField& u, double radius, double t) {
  if (!(radius > 0.0)) throw InputError("radius must be > 0");
  return radial_integral(0.0, radius, [&](const Vec3& x) { return u.time_derivative(x, t); });
}

double outer_integral_dt(const TestField& u, double radius, double t) {
  const double upper = outer_upper(u, radius);
  if (!std::isfinite(upper)) throw InputError("outer integral needs a compactly supported field");
  return radial_integral(radius, upper, [&](const Vec3& x) { return u.time_derivative(x, t); });
}

double surface_integral(const TestField& u, double radius, double t) {
  if (!(radius > 0.0)) throw InputError("radius must be > 0");
  return radius * radius * sphere_average_sum(radius, [&](const Vec3& x, const Vec3&) { return u.value(x, t); });
}

double normal_flux(const TestField& u, double radius, double t) {
  if (!(radius > 0.0)) throw InputError("radius must be > 0");
  return radius * radius * sphere_average_sum(radius, [&](const Vec3& x, const Vec3& eta) {
           const auto g = u.gradient(x, t);
           return g[0] * eta[0] + g[1] * eta[1] + g[2] * eta[2];
         });
}

std::vector<IdentityCheck> check_identities(const TestField& u, const std::vector<double>& radii, double t,
                                            double h) {
  std::vector<IdentityCheck> out;
  for (double r : radii) {
    if (!(r > 2.0 * h)) throw InputError("radius too small for the finite-difference step");
    const double ball = ball_integral(u, r, t);
    const double surface = surface_integral(u, r, t);
    const double flux = normal_flux(u, r, t);
    if (u.ball_exact) out.push_back(make_check(u, "closed_form_ball", r, ball, u.ball_exact(r, t), 1e-10));
    if (u.surface_exact) out.push_back(make_check(u, "closed_form_surface", r, surface, u.surface_exact(r, t), 1e-10));
    if (u.flux_exact) out.push_back(make_check(u, "closed_form_flux", r, flux, u.flux_exact(r, t), 1e-10));

    // Differences of g are taken as thin shell integrals, which avoids
    // cancellation between two nearly equal ball integrals.
    const auto d = [&](double k) { return shell_integral(u, r, r + k * h, t); };
    const double dp1 = d(1.0), dm1 = d(-1.0), dp2 = d(2.0), dm2 = d(-2.0);
    const double g_y = (8.0 * (dp1 - dm1) - (dp2 - dm2)) / (12.0 * h);
    const double g_yy = (-dp2 + 16.0 * dp1 + 16.0 * dm1 - dm2) / (12.0 * h * h);
    out.push_back(make_check(u, "g_y", r, g_y, surface, 1e-8));
    out.push_back(make_check(u, "g_yy", r, g_yy, 2.0 / r * surface + flux, 1e-6));

    if (u.time_dependent) {
      const auto dt = [&](double k) {
        return radial_integral(r, r + k * h, [&](const Vec3& x) { return u.time_derivative(x, t); });
      };
      const double g_ty = (8.0 * (dt(1.0) - dt(-1.0)) - (dt(2.0) - dt(-2.0))) / (12.0 * h);
      const double surface_t =
          r * r * sphere_average_sum(r, [&](const Vec3& x, const Vec3&) { return u.time_derivative(x, t); });
      out.push_back(make_check(u, "g_ty", r, g_ty, surface_t, 1e-8));
    }
  }
  return out;
}

ReductionCheck verify_deterministic_reduction(const TestField& u, Domain domain, const std::vector<double>& times,
                                              double h, double tolerance) {
  ReductionCheck out;
  out.field = u.name;
  out.domain = domain;
  out.tolerance = tolerance;
  const auto g = [&](double t) {
    const double r = radius_path(t);
    return domain == Domain::Inner ? ball_integral(u, r, t) : outer_integral(u, r, t);
  };
  for (double t : times) {
    const double lhs = (g(t + h) - g(t - h)) / (2.0 * h);
    const double r = radius_path(t);
    const double interior = domain == Domain::Inner ? ball_integral_dt(u, r, t) : outer_integral_dt(u, r, t);
    const double sign = domain == Domain::Inner ? 1.0 : -1.0;
    const double rhs = interior + sign * radius_path_rate(t) * surface_integral(u, r, t);
    out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  out.pass = out.max_residual <= tolerance;
  return out;
}

ItoCheck verify_ito_correction(const TestField& u, double r0, double sigma_r, double t, std::size_t n_paths,
                               double dt, std::uint64_t seed, std::size_t threads) {
  if (!(r0 > 0.0)) throw InputError("R0 must be > 0");
  if (!(sigma_r >= 0.0)) throw InputError("sigma_R must be >= 0");
  if (!(t > 0.0) || !(dt > 0.0)) throw InputError("horizon and dt must be > 0");
  if (n_paths < 2) throw InputError("need at least two paths");
  if (u.time_dependent) throw InputError("the statistical check needs a time-independent field");

  ItoCheck out;
  out.field = u.name;
  out.r0 = r0;
  out.sigma_r = sigma_r;
  out.n_paths = n_paths;

  const double surface = surface_integral(u, r0, 0.0);
  const double flux = normal_flux(u, r0, 0.0);
  const double s2 = sigma_r * sigma_r;
  out.prediction = 0.5 * s2 * (2.0 / r0 * surface + flux);
  out.lemma_extra = s2 / r0 * surface;

  std::vector<double> end_radius(n_paths);
  std::vector<unsigned char> hit_zero(n_paths);
  double horizon = t;
  for (;;) {
    const std::size_t steps = bin_count(horizon, std::min(dt, horizon));
    const double step = horizon / static_cast<double>(steps);
    const double scale = sigma_r * std::sqrt(step);
    parallel_for(n_paths, threads, [&](std::size_t k) {
      NormalStream normals(mix_seed(seed, k));
      double r = r0;
      unsigned char bad = 0;
      for (std::size_t j = 0; j < steps; ++j) {
        r += scale * normals.next();
        if (r <= 0.0) bad = 1;
      }
      end_radius[k] = r;
      hit_zero[k] = bad;
    });
    if (std::none_of(hit_zero.begin(), hit_zero.end(), [](unsigned char b) { return b != 0; })) break;
    if (++out.horizon_halvings > 40) throw NumericalError("radius path reaches zero at every horizon tried");
    horizon *= 0.5;
  }
  out.horizon = horizon;

  std::vector<double> increments(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t k) {
    increments[k] = shell_integral(u, r0, end_radius[k], 0.0) / horizon;
  });
  double sum = 0.0;
  for (double x : increments) sum += x;
  out.estimate = sum / static_cast<double>(n_paths);
  double sq = 0.0;
  for (double x : increments) sq += (x - out.estimate) * (x - out.estimate);
  out.std_error = std::sqrt(sq / static_cast<double>(n_paths - 1) / static_cast<double>(n_paths));

  const auto zscore = [&](double target) {
    if (out.std_error == 0.0) return out.estimate == target ? 0.0 : std::numeric_limits<double>::infinity();
    return (out.estimate - target) / out.std_error;
  };
  out.z = zscore(out.prediction);
  out.z_with_extra = zscore(out.prediction + out.lemma_extra);
  out.pass = std::abs(out.z) <= 3.0;
  return out;
}

bool ItoSuiteReport::pass() const {
  return std::all_of(identities.begin(), identities.end(), [](const auto& c) { return c.pass; }) &&
         std::all_of(reductions.begin(), reductions.end(), [](const auto& c) { return c.pass; }) &&
         std::all_of(ito.begin(), ito.end(), [](const auto& c) { return c.pass; });
}

ItoSuiteReport run_ito_suite(const ItoSuiteConfig& cfg) {
  ItoSuiteReport report;
  auto fields = field_catalog();
  const auto bump = compact_bump_field();
  for (const auto& u : fields) {
    auto checks = check_identities(u, cfg.radii, cfg.identity_time, cfg.fd_step);
    report.identities.insert(report.identities.end(), checks.begin(), checks.end());
  }
  auto bump_checks = check_identities(bump, cfg.radii, cfg.identity_time, cfg.fd_step);
  report.identities.insert(report.identities.end(), bump_checks.begin(), bump_checks.end());

  for (const auto& u : fields) {
    report.reductions.push_back(
        verify_deterministic_reduction(u, Domain::Inner, cfg.reduction_times, cfg.reduction_step));
  }
  report.reductions.push_back(
      verify_deterministic_reduction(bump, Domain::Outer, cfg.reduction_times, cfg.reduction_step));

  std::uint64_t stream = 0;
  for (const auto& u : fields) {
    if (u.time_dependent) continue;
    report.ito.push_back(verify_ito_correction(u, cfg.r0, cfg.sigma_r, cfg.horizon, cfg.n_paths, cfg.dt,
                                               mix_seed(cfg.seed, stream++), cfg.threads));
  }
  return report;
}

void write_ito_report(std::ostream& out, const ItoSuiteReport& report) {
  out << "# identities: field,identity,R,lhs,rhs,rel_error,tolerance,result\n";
  for (const auto& c : report.identities) {
    out << "identity," << c.field << ',' << c.identity << ',' << format_double(c.radius) << ','
        << format_double(c.lhs) << ',' << format_double(c.rhs) << ',' << format_double(c.rel_error) << ','
        << format_double(c.tolerance) << ',' << (c.pass ? "PASS" : "FAIL") << '\n';
  }
  out << "# reductions: field,domain,max_residual,tolerance,result\n";
  for (const auto& c : report.reductions) {
    out << "reduction," << c.field << ',' << (c.domain == Domain::Inner ? "inner" : "outer") << ','
        << format_double(c.max_residual) << ',' << format_double(c.tolerance) << ',' << (c.pass ? "PASS" : "FAIL")
        << '\n';
  }
  out << "# ito: field,R0,sigma_R,horizon,paths,estimate,std_error,prediction,z,extra_term,z_with_extra,result\n";
  for (const auto& c : report.ito) {
    out << "ito," << c.field << ',' << format_double(c.r0) << ',' << format_double(c.sigma_r) << ','
        << format_double(c.horizon) << ',' << c.n_paths << ',' << format_double(c.estimate) << ','
        << format_double(c.std_error) << ',' << format_double(c.prediction) << ',' << format_double(c.z) << ','
        << format_double(c.lemma_extra) << ',' << format_double(c.z_with_extra) << ','
        << (c.pass ? "PASS" : "FAIL") << '\n';
  }
  out << "suite=" << (report.pass() ? "PASS" : "FAIL") << '\n';
}

}  // namespace stefan
