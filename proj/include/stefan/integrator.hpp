#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "stefan/brownian.hpp"
#include "stefan/dynamics.hpp"
#include "stefan/lob_ingest.hpp"

namespace stefan {

enum class IntegrationMethod {
  Rk45Adaptive,   // Dormand-Prince 5(4), PI step control
  Rk4Fixed,       // classical RK4 at dt_fixed
  EulerMaruyama,  // explicit Euler at dt_fixed; with noise, v_inf += gain * dW per bin
};

std::string to_string(IntegrationMethod method);
IntegrationMethod integration_method_from_string(const std::string& name);

struct IntegratorConfig {
  IntegrationMethod method = IntegrationMethod::Rk45Adaptive;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double dt_fixed = 1e-4;
  double eps_vanish = 1e-12;  // on z = R^3
  double t_end = 15.0;
  double output_stride = 0.1;
  std::vector<double> extra_output_times;  // merged into the stride grid
  std::size_t max_steps = 2'000'000'000;
  std::size_t max_guard_events = 10'000;

  void validate() const;
};

struct VanishEvent {
  std::size_t ball = 0;
  double t = 0.0;
};

struct GuardEvent {
  double t = 0.0;
  std::size_t ball = 0;
  double value = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
  std::vector<VanishEvent> vanish_events;
  std::vector<GuardEvent> guard_events;
  std::size_t guard_event_total = 0;  // may exceed guard_events.size() when capped
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  const SystemState& terminal() const { return states.back(); }
};

/// Advances (v_inf, z) from the params' initial state to cfg.t_end.
///
/// With a noise path, the forcing is piecewise constant on the path's bins and
/// every step is clipped to bin boundaries; the adaptive controller restarts at
/// each bin. A ball whose z drops to eps_vanish is localised by bisection on the
/// step length to 1e-10 * t_end, frozen at z = 0 and excluded from then on.
/// Output holds every multiple of output_stride, t_end, and every event time.
///
/// Throws InputError if a stochastic model with non-zero sigma has no path, and
/// NumericalError on non-finite state or step-size underflow.
Trajectory integrate(const MarketParams& params, const ModelSpec& model, const IntegratorConfig& cfg,
                     const BrownianPath* path = nullptr);

/// Brute-force classical RK4 at dt_fixed, same event handling as integrate().
Trajectory reference_integrate(const MarketParams& params, const ModelSpec& model, IntegratorConfig cfg,
                               double dt_fixed, const BrownianPath* path = nullptr);

/// `t,v_inf,R_1,...,R_I` rows at 17 significant digits, then `# vanish,i,t`
/// and `# guard,t,value` comment lines (ball indices 1-based).
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

struct TrajectoryTable {
  std::vector<double> times;
  std::vector<double> v_inf;
  std::vector<std::vector<double>> radii;  // per row
  std::vector<VanishEvent> vanish_events;
};

TrajectoryTable read_trajectory_csv(std::istream& in);

}  // namespace stefan
