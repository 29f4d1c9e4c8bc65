#include "stefan/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stefan/errors.hpp"

namespace stefan {

namespace {

constexpr double kPi = std::numbers::pi;

double cube_root_clamped(double z) { return z > 0.0 ? std::cbrt(z) : 0.0; }

void unpack(const SystemState& state, std::vector<double>& z, std::vector<unsigned char>& active) {
  z.resize(state.balls.size());
  active.resize(state.balls.size());
  for (std::size_t i = 0; i < state.balls.size(); ++i) {
    z[i] = state.balls[i].z;
    active[i] = state.balls[i].active() ? 1 : 0;
  }
}

}  // namespace

std::string to_string(DynamicsOrder order) {
  switch (order) {
    case DynamicsOrder::Deterministic:
      return "deterministic";
    case DynamicsOrder::Stochastic1:
      return "stochastic1";
    case DynamicsOrder::Stochastic2:
      return "stochastic2";
  }
  return "deterministic";
}

std::string to_string(SigmaMode mode) { return mode == SigmaMode::LumpedMass ? "lumped" : "shell"; }

SigmaMode sigma_mode_from_string(const std::string& name) {
  // "paper" is kept as an alias of the original flag spelling.
  if (name == "lumped" || name == "paper") return SigmaMode::LumpedMass;
  if (name == "shell") return SigmaMode::ShellQuadrature;
  throw ConfigError("unknown sigma mode '" + name + "' (lumped|shell)");
}

double BallState::radius() const { return active() ? cube_root_clamped(z) : 0.0; }

std::size_t SystemState::active_count() const {
  std::size_t count = 0;
  for (const auto& b : balls) count += b.active() ? 1 : 0;
  return count;
}

std::vector<double> SystemState::radii() const {
  std::vector<double> out;
  out.reserve(balls.size());
  for (const auto& b : balls) out.push_back(b.radius());
  return out;
}

double default_v_inf0(std::span<const double> radii0) {
  double sum = 0.0;
  for (double r : radii0) sum += r;
  return static_cast<double>(radii0.size()) / sum;
}

SystemState initial_state(const MarketParams& params) {
  SystemState s;
  s.t = 0.0;
  s.v_inf = params.v_inf0;
  for (std::size_t i = 0; i < params.ball_count; ++i) {
    BallState b;
    b.index = i;
    b.center = params.centers.size() > i ? params.centers[i] : std::vector<double>{};
    const double r = params.radii0[i];
    b.z = r * r * r;
    s.balls.push_back(std::move(b));
  }
  return s;
}

void ModelSpec::validate() const {
  if (!(alpha > 0.0)) throw InputError("alpha must be > 0");
  if (!(cs > 0.0)) throw InputError("cs must be > 0");
  if (!(eps_den > 0.0)) throw InputError("eps_den must be > 0");
  sigma.validate();
}

KernelOutput evaluate_rates(const ModelSpec& model, double v, std::span<const double> z,
                            std::span<const unsigned char> active, std::span<double> dz) {
  KernelOutput out;
  double coupling = 0.0;  // sum over active balls of (1 - R v)
  double corrections = 0.0;
  double shell_mass = 0.0;
  const bool second_order = model.order == DynamicsOrder::Stochastic2;
  const bool shell = model.sigma_mode == SigmaMode::ShellQuadrature && model.order != DynamicsOrder::Deterministic;

  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!active[i]) {
      dz[i] = 0.0;
      continue;
    }
    const double r = cube_root_clamped(z[i]);
    dz[i] = 3.0 * v * r - 3.0;
    coupling += 1.0 - r * v;
    if (shell) shell_mass += shell_mass_closed_form(model.sigma, r);

    // The correction terms carry powers of 1/R; a ball sitting exactly at R = 0
    // is about to be removed and contributes none.
    if (second_order && model.second_order_corrections && r > 0.0) {
      const double inv_r = 1.0 / r;
      const double x = v - inv_r;
      const double x2 = x * x;
      double den = x + r * r;
      if (std::abs(den) < model.eps_den) {
        den = std::copysign(model.eps_den, den);
        ++out.guard_count;
        out.last_guard_ball = i;
        out.last_guard_value = x2 / den;
      }
      corrections += -4.0 * kPi * x - 4.0 * kPi * x2 - 2.0 * kPi * inv_r * x2 * x + 4.0 * kPi * x2 / den;
    }
  }

  const double mass = model.order == DynamicsOrder::Deterministic
                          ? 0.0
                          : (model.sigma_mode == SigmaMode::LumpedMass ? model.sigma.integral() : shell_mass);

  switch (model.order) {
    case DynamicsOrder::Deterministic:
      out.drift = 4.0 * kPi * std::cbrt(1.0 / model.alpha) * coupling;
      break;
    case DynamicsOrder::Stochastic1:
      out.drift = 4.0 * kPi * std::cbrt(1.0 / model.alpha) * coupling;
      out.noise_gain = std::pow(model.alpha, -4.0 / 3.0) * mass;
      break;
    case DynamicsOrder::Stochastic2: {
      const double inv_volume = 1.0 / (model.cs * model.cs * model.cs);
      out.drift = 4.0 * kPi * model.alpha * inv_volume * coupling + inv_volume * corrections;
      out.noise_gain = inv_volume * mass;
      break;
    }
  }
  return out;
}

StateRates rhs_deterministic(const SystemState& state, double alpha) {
  ModelSpec model;
  model.order = DynamicsOrder::Deterministic;
  model.alpha = alpha;
  std::vector<double> z;
  std::vector<unsigned char> active;
  unpack(state, z, active);
  StateRates rates;
  rates.dz.resize(z.size());
  rates.dv_inf = evaluate_rates(model, state.v_inf, z, active, rates.dz).drift;
  return rates;
}

StochasticRates rhs_stochastic(const SystemState& state, double alpha, DynamicsOrder order, const SigmaProfile& sigma,
                               double noise_value, double cs, SigmaMode mode, bool corrections, double eps_den) {
  if (order == DynamicsOrder::Deterministic) {
    throw std::invalid_argument("rhs_stochastic requires a stochastic order");
  }
  ModelSpec model;
  model.order = order;
  model.alpha = alpha;
  model.cs = cs;
  model.sigma = sigma;
  model.sigma_mode = mode;
  model.second_order_corrections = corrections;
  model.eps_den = eps_den;

  std::vector<double> z;
  std::vector<unsigned char> active;
  unpack(state, z, active);
  StochasticRates out;
  out.rates.dz.resize(z.size());
  const auto k = evaluate_rates(model, state.v_inf, z, active, out.rates.dz);
  out.rates.dv_inf = k.drift + k.noise_gain * noise_value;

  // Report every clamped ball, not only the last one the kernel remembers.
  if (k.guard_count > 0) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!active[i] || z[i] <= 0.0) continue;
      const double r = std::cbrt(z[i]);
      const double x = state.v_inf - 1.0 / r;
      const double den = x + r * r;
      if (std::abs(den) < eps_den) out.guards.push_back({i, x * x / std::copysign(eps_den, den)});
    }
  }
  return out;
}

double sigma_mass(const SystemState& state, const SigmaProfile& sigma, SigmaMode mode) {
  if (mode == SigmaMode::LumpedMass) return sigma.integral();
  double total = 0.0;
  for (const auto& b : state.balls) {
    if (b.active()) total += shell_mass_closed_form(sigma, b.radius());
  }
  return total;
}

double density(const SystemState& state, std::span<const double> x) {
  double value = state.v_inf;
  for (const auto& b : state.balls) {
    if (!b.active()) continue;
    if (b.center.size() != x.size()) throw InputError("density: point dimension does not match ball centres");
    double sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) sq += (x[k] - b.center[k]) * (x[k] - b.center[k]);
    const double dist = std::sqrt(sq);
    const double r = b.radius();
    if (dist < r) return 0.0;
    if (dist == 0.0) throw std::domain_error("density: point coincides with a ball centre outside the ball");
    value += (1.0 - r * state.v_inf) / dist;
  }
  return value;
}

double total_cubed_volume(const SystemState& state) {
  double sum = 0.0;
  for (const auto& b : state.balls) {
    if (b.active()) sum += b.z;
  }
  return sum;
}

double quasi_static_final_radius(std::span<const double> radii0) {
  double sum = 0.0;
  for (double r : radii0) sum += r * r * r;
  return std::cbrt(sum);
}

}  // namespace stefan
