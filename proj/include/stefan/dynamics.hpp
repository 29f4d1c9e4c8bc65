#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stefan/lob_ingest.hpp"
#include "stefan/sigma_profile.hpp"

namespace stefan {

// Mean-field dynamics for I fixed-centre spheres in R^3 coupled through the
// far-field value v_inf. Each ball is tracked by its cubed radius z = R^3,
// whose rate 3 (v_inf R - 1) stays bounded as R -> 0.

enum class DynamicsOrder { Deterministic, Stochastic1, Stochastic2 };

std::string to_string(DynamicsOrder order);

/// How the noise mass int sigma(dist(x, spheres)) dx over the liquid phase is evaluated.
///  LumpedMass:      the whole integral is replaced by c0 = int_0^inf sigma(r) dr.
///  ShellQuadrature: sum over balls of int_0^inf sigma(r) 4 pi (R_i + r)^2 dr
///                   (exact for well separated balls).
enum class SigmaMode { LumpedMass, ShellQuadrature };

std::string to_string(SigmaMode mode);
SigmaMode sigma_mode_from_string(const std::string& name);

struct BallState {
  std::size_t index = 0;
  std::vector<double> center;
  double z = 0.0;
  std::optional<double> vanished_at;

  bool active() const { return !vanished_at.has_value(); }
  double radius() const;
};

struct SystemState {
  double t = 0.0;
  double v_inf = 0.0;
  std::vector<BallState> balls;

  std::size_t active_count() const;
  std::vector<double> radii() const;
};

/// State at t = 0: v_inf = params.v_inf0, z_i = R_i(0)^3.
SystemState initial_state(const MarketParams& params);

/// v_inf = I / sum R_i(0), the quasi-static consistent far field.
double default_v_inf0(std::span<const double> radii0);

struct StateRates {
  double dv_inf = 0.0;
  std::vector<double> dz;
};

/// The second-order rational term (v - 1/R)^2 / (v - 1/R + R^2) had a
/// denominator below eps_den and was clamped.
struct GuardHit {
  std::size_t ball = 0;
  double clamped_value = 0.0;
};

struct StochasticRates {
  StateRates rates;
  std::vector<GuardHit> guards;
};

/// Complete description of the right-hand side used by the integrators.
struct ModelSpec {
  DynamicsOrder order = DynamicsOrder::Deterministic;
  double alpha = 1.0;
  double cs = 1.0;  // |Omega| = cs^3; used by the second-order system only
  SigmaProfile sigma;
  SigmaMode sigma_mode = SigmaMode::LumpedMass;
  bool second_order_corrections = true;
  double eps_den = 1e-8;

  void validate() const;
};

/// Kernel output: dv_inf = drift + noise_gain * forcing.
struct KernelOutput {
  double drift = 0.0;
  double noise_gain = 0.0;
  std::size_t guard_count = 0;
  std::size_t last_guard_ball = 0;
  double last_guard_value = 0.0;
};

/// Allocation-free evaluation used in the integrator hot loop. `active[i] == 0`
/// marks a vanished ball, which contributes nothing and has dz = 0.
/// z values below 0 from round-off are treated as 0.
KernelOutput evaluate_rates(const ModelSpec& model, double v_inf, std::span<const double> z,
                            std::span<const unsigned char> active, std::span<double> dz);

StateRates rhs_deterministic(const SystemState& state, double alpha);

/// order must be Stochastic1 or Stochastic2; noise_value is the current forcing dW/dt.
StochasticRates rhs_stochastic(const SystemState& state, double alpha, DynamicsOrder order,
                               const SigmaProfile& sigma, double noise_value, double cs,
                               SigmaMode mode = SigmaMode::LumpedMass, bool corrections = true,
                               double eps_den = 1e-8);

double sigma_mass(const SystemState& state, const SigmaProfile& sigma, SigmaMode mode);

/// Quasi-static density: 0 inside any active ball, otherwise
/// v_inf + sum_i (1 - R_i v_inf) / |x - x_c^i|. Throws std::domain_error if x
/// sits on the centre of a ball it is not inside (only possible for vanished balls).
double density(const SystemState& state, std::span<const double> x);

/// Sum of z_i = R_i^3; (4 pi / 3) times this is the solid-phase volume.
double total_cubed_volume(const SystemState& state);

/// Radius of the last surviving ball if the solid volume is conserved.
double quasi_static_final_radius(std::span<const double> radii0);

}  // namespace stefan
