#include "stefan/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "stefan/errors.hpp"
#include "stefan/text_format.hpp"

namespace stefan {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                 b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// Fixed stride grid 0, s, 2s, ... strictly below t_end, then t_end itself.
std::vector<double> output_grid(double t_end, double stride, const std::vector<double>& extra) {
  std::vector<double> grid;
  const std::size_t n = bin_count(t_end, stride);
  for (std::size_t k = 1; k < n; ++k) grid.push_back(static_cast<double>(k) * stride);
  for (double t : extra) {
    if (t > 0.0 && t < t_end) grid.push_back(t);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.push_back(t_end);
  return grid;
}

class Engine {
 public:
  Engine(const MarketParams& params, const ModelSpec& model, const IntegratorConfig& cfg)
      : params_(params), model_(model), cfg_(cfg), n_(params.ball_count + 1) {
    y_.assign(n_, 0.0);
    y_[0] = params.v_inf0;
    for (std::size_t i = 0; i < params.ball_count; ++i) y_[i + 1] = std::pow(params.radii0[i], 3);
    active_.assign(params.ball_count, 1);
    vanished_at_.assign(params.ball_count, -1.0);
    for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_, &err_}) k->assign(n_, 0.0);
    probe_.assign(n_, 0.0);
  }

  Trajectory run(const BrownianPath* path) {
    const bool noisy = path != nullptr;
    const auto outputs = output_grid(cfg_.t_end, cfg_.output_stride, cfg_.extra_output_times);
    std::size_t next_output = 0;
    record(0.0);

    const std::size_t segments = noisy ? bin_count(cfg_.t_end, path->dt) : 1;
    for (std::size_t j = 0; j < segments; ++j) {
      const double seg_end =
          (j + 1 == segments) ? cfg_.t_end : std::min(cfg_.t_end, static_cast<double>(j + 1) * path->dt);
      const double forcing = noisy ? path->bin_forcing(j) : 0.0;
      if (noisy || j == 0) restart_controller(seg_end - t_);
      while (t_ < seg_end) {
        const double stop = std::min(seg_end, outputs[next_output]);
        advance_to(stop, forcing);
        if (stop == outputs[next_output]) {
          record(stop);
          if (next_output + 1 < outputs.size()) ++next_output;
        }
      }
    }
    return std::move(traj_);
  }

 private:
  const MarketParams& params_;
  const ModelSpec& model_;
  const IntegratorConfig& cfg_;
  std::size_t n_;
  double t_ = 0.0;
  std::vector<double> y_;
  std::vector<unsigned char> active_;
  std::vector<double> vanished_at_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_, err_, probe_;
  Trajectory traj_;
  double h_ = 0.0;
  double err_prev_ = 1e-4;
  std::size_t step_guards_ = 0;
  std::size_t step_guard_ball_ = 0;
  double step_guard_value_ = 0.0;
  std::size_t steps_ = 0;

  void eval(const std::vector<double>& y, double forcing, std::vector<double>& k) {
    const auto out = evaluate_rates(model_, y[0], std::span<const double>(y).subspan(1), active_,
                                    std::span<double>(k).subspan(1));
    k[0] = out.drift + out.noise_gain * forcing;
    if (out.guard_count > 0) {
      step_guards_ += out.guard_count;
      step_guard_ball_ = out.last_guard_ball;
      step_guard_value_ = out.last_guard_value;
    }
  }

  void axpy_stage(const std::vector<double>& y, double h, std::initializer_list<std::pair<double, const std::vector<double>*>> terms,
                  std::vector<double>& out) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (const auto& [c, k] : terms) acc += c * (*k)[i];
      out[i] = y[i] + h * acc;
    }
  }

  // One Dormand-Prince step from y; writes the 5th-order solution to out and
  // (optionally) the embedded error estimate to err_.
  void dopri_step(const std::vector<double>& y, double h, double f, std::vector<double>& out, bool with_error) {
    eval(y, f, k1_);
    axpy_stage(y, h, {{a21, &k1_}}, tmp_);
    eval(tmp_, f, k2_);
    axpy_stage(y, h, {{a31, &k1_}, {a32, &k2_}}, tmp_);
    eval(tmp_, f, k3_);
    axpy_stage(y, h, {{a41, &k1_}, {a42, &k2_}, {a43, &k3_}}, tmp_);
    eval(tmp_, f, k4_);
    axpy_stage(y, h, {{a51, &k1_}, {a52, &k2_}, {a53, &k3_}, {a54, &k4_}}, tmp_);
    eval(tmp_, f, k5_);
    axpy_stage(y, h, {{a61, &k1_}, {a62, &k2_}, {a63, &k3_}, {a64, &k4_}, {a65, &k5_}}, tmp_);
    eval(tmp_, f, k6_);
    axpy_stage(y, h, {{b1, &k1_}, {b3, &k3_}, {b4, &k4_}, {b5, &k5_}, {b6, &k6_}}, out);
    if (!with_error) return;
    eval(out, f, k7_);
    for (std::size_t i = 0; i < n_; ++i) {
      err_[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
    }
  }

  void rk4_step(const std::vector<double>& y, double h, double f, std::vector<double>& out) {
    eval(y, f, k1_);
    axpy_stage(y, 0.5 * h, {{1.0, &k1_}}, tmp_);
    eval(tmp_, f, k2_);
    axpy_stage(y, 0.5 * h, {{1.0, &k2_}}, tmp_);
    eval(tmp_, f, k3_);
    axpy_stage(y, h, {{1.0, &k3_}}, tmp_);
    eval(tmp_, f, k4_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = y[i] + h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

  void euler_step(const std::vector<double>& y, double h, double f, std::vector<double>& out) {
    eval(y, f, k1_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = y[i] + h * k1_[i];
  }

  void plain_step(const std::vector<double>& y, double h, double f, std::vector<double>& out) {
    switch (cfg_.method) {
      case IntegrationMethod::Rk45Adaptive:
        dopri_step(y, h, f, out, false);
        break;
      case IntegrationMethod::Rk4Fixed:
        rk4_step(y, h, f, out);
        break;
      case IntegrationMethod::EulerMaruyama:
        euler_step(y, h, f, out);
        break;
    }
  }

  double error_norm() const {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i > 0 && !active_[i - 1]) continue;
      const double scale = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
      const double e = err_[i] / scale;
      sum += e * e;
      ++count;
    }
    return std::sqrt(sum / static_cast<double>(count));
  }

  bool any_crossed(const std::vector<double>& y) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (active_[i] && y[i + 1] <= cfg_.eps_vanish) return true;
    }
    return false;
  }

  void check_finite(const std::vector<double>& y, double t) const {
    for (double x : y) {
      if (!std::isfinite(x)) {
        std::ostringstream msg;
        msg << "non-finite state at t=" << format_double(t) << ": v_inf=" << format_double(y[0]) << " z=[";
        for (std::size_t i = 1; i < n_; ++i) msg << (i > 1 ? "," : "") << format_double(y[i]);
        msg << "]";
        throw NumericalError(msg.str());
      }
    }
  }

  void restart_controller(double span) {
    err_prev_ = 1e-4;
    if (cfg_.method != IntegrationMethod::Rk45Adaptive) return;
    h_ = span;
    if (h_ <= 0.0) h_ = cfg_.t_end;
  }

  void count_step() {
    if (++steps_ > cfg_.max_steps) {
      throw NumericalError("step limit exceeded at t=" + format_double(t_));
    }
  }

  void accept(double h_taken, bool lands, double stop) {
    if (step_guards_ > 0) {
      traj_.guard_event_total += 1;
      if (traj_.guard_events.size() < cfg_.max_guard_events) {
        traj_.guard_events.push_back({t_, step_guard_ball_, step_guard_value_});
      }
    }
    y_.swap(ynew_);
    t_ = lands ? stop : t_ + h_taken;
    ++traj_.accepted_steps;
    check_finite(y_, t_);
  }

  // Localises the earliest crossing inside [t_, t_ + h] and applies it.
  void resolve_vanish(double h, double forcing) {
    double lo = 0.0, hi = h;
    const double tol = 1e-10 * cfg_.t_end;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      step_guards_ = 0;
      plain_step(y_, mid, forcing, probe_);
      if (any_crossed(probe_)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    step_guards_ = 0;
    plain_step(y_, hi, forcing, ynew_);
    accept(hi, false, 0.0);
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (active_[i] && y_[i + 1] <= cfg_.eps_vanish) {
        active_[i] = 0;
        y_[i + 1] = 0.0;
        vanished_at_[i] = t_;
        traj_.vanish_events.push_back({i, t_});
      }
    }
    record(t_);
  }

  void advance_to(double stop, double forcing) {
    // Bin and output grids are built independently and can disagree in the
    // last bit; such a gap is closed without taking a step.
    if (stop - t_ <= 1e-13 * std::max(1.0, std::abs(stop))) {
      t_ = std::max(t_, stop);
      return;
    }
    if (cfg_.method == IntegrationMethod::Rk45Adaptive) {
      advance_adaptive(stop, forcing);
    } else {
      advance_fixed(stop, forcing);
    }
  }

  void advance_fixed(double stop, double forcing) {
    while (t_ < stop) {
      const std::size_t n_steps = std::max<std::size_t>(1, bin_count(stop - t_, cfg_.dt_fixed));
      const double h = (stop - t_) / static_cast<double>(n_steps);
      const double t0 = t_;
      bool event = false;
      for (std::size_t k = 0; k < n_steps; ++k) {
        count_step();
        step_guards_ = 0;
        plain_step(y_, h, forcing, ynew_);
        if (any_crossed(ynew_)) {
          resolve_vanish(h, forcing);
          event = true;
          break;
        }
        const bool last = k + 1 == n_steps;
        accept(h, last, stop);
        if (!last) t_ = t0 + static_cast<double>(k + 1) * h;
      }
      if (!event) t_ = stop;
    }
  }

  void advance_adaptive(double stop, double forcing) {
    while (t_ < stop) {
      count_step();
      const double remaining = stop - t_;
      const bool lands = h_ >= remaining * (1.0 - 1e-12);
      const double h = lands ? remaining : h_;
      if (h < 1e-14 * std::max(1.0, std::abs(t_))) {
        throw NumericalError("step size underflow (h=" + format_double(h) + ") at t=" + format_double(t_));
      }
      step_guards_ = 0;
      dopri_step(y_, h, forcing, ynew_, true);
      double err = error_norm();
      if (!std::isfinite(err)) err = 1e10;
      if (err <= 1.0) {
        double fac = 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(std::max(err_prev_, 1e-4), 0.4 / 5.0);
        if (err == 0.0) fac = 5.0;
        fac = std::clamp(fac, 0.2, 5.0);
        err_prev_ = err;
        if (any_crossed(ynew_)) {
          resolve_vanish(h, forcing);
        } else {
          accept(h, lands, stop);
        }
        // A clipped step says nothing about how large the next one may be.
        if (!lands || h == h_) h_ = h * fac;
      } else {
        ++traj_.rejected_steps;
        h_ = h * std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
      }
    }
  }

  void record(double t) {
    SystemState s;
    s.t = t;
    s.v_inf = y_[0];
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      BallState b;
      b.index = i;
      if (i < params_.centers.size()) b.center = params_.centers[i];
      b.z = active_[i] ? std::max(0.0, y_[i + 1]) : 0.0;
      if (!active_[i]) b.vanished_at = vanished_at_[i];
      s.balls.push_back(std::move(b));
    }
    if (!traj_.times.empty() && traj_.times.back() >= t) {
      traj_.states.back() = std::move(s);
      return;
    }
    traj_.times.push_back(t);
    traj_.states.push_back(std::move(s));
  }
};

}  // namespace

std::string to_string(IntegrationMethod method) {
  switch (method) {
    case IntegrationMethod::Rk45Adaptive:
      return "rk45_adaptive";
    case IntegrationMethod::Rk4Fixed:
      return "rk4_fixed";
    case IntegrationMethod::EulerMaruyama:
      return "euler_maruyama";
  }
  return "rk45_adaptive";
}

IntegrationMethod integration_method_from_string(const std::string& name) {
  if (name == "rk45_adaptive") return IntegrationMethod::Rk45Adaptive;
  if (name == "rk4_fixed") return IntegrationMethod::Rk4Fixed;
  if (name == "euler_maruyama") return IntegrationMethod::EulerMaruyama;
  throw ConfigError("unknown integrator.method '" + name + "' (rk45_adaptive|rk4_fixed|euler_maruyama)");
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("integrator tolerances must be > 0");
  if (!(eps_vanish > 0.0)) throw ConfigError("integrator.eps_vanish must be > 0");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be > 0");
  if (!(output_stride > 0.0)) throw ConfigError("output stride must be > 0");
  if (method != IntegrationMethod::Rk45Adaptive && !(dt_fixed > 0.0)) {
    throw ConfigError("integrator.dt_fixed must be > 0");
  }
}

Trajectory integrate(const MarketParams& params, const ModelSpec& model, const IntegratorConfig& cfg,
                     const BrownianPath* path) {
  params.validate();
  model.validate();
  cfg.validate();
  bool noisy = model.order != DynamicsOrder::Deterministic && !model.sigma.is_zero();
  if (noisy && path == nullptr) throw InputError("stochastic run with non-zero sigma needs a noise path");
  if (model.order == DynamicsOrder::Deterministic && path != nullptr) {
    throw InputError("deterministic run does not take a noise path");
  }
  if (noisy) {
    const double covered = path->dt * static_cast<double>(path->bins());
    if (covered < cfg.t_end * (1.0 - 1e-12)) {
      throw InputError("noise path covers t <= " + format_double(covered) + " but t_end=" + format_double(cfg.t_end));
    }
  }
  Engine engine(params, model, cfg);
  return engine.run(noisy ? path : nullptr);
}

Trajectory reference_integrate(const MarketParams& params, const ModelSpec& model, IntegratorConfig cfg,
                               double dt_fixed, const BrownianPath* path) {
  if (!(dt_fixed > 0.0)) throw InputError("reference dt must be > 0");
  cfg.method = IntegrationMethod::Rk4Fixed;
  cfg.dt_fixed = dt_fixed;
  return integrate(params, model, cfg, path);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const std::size_t balls = trajectory.states.empty() ? 0 : trajectory.states.front().balls.size();
  out << "t,v_inf";
  for (std::size_t i = 1; i <= balls; ++i) out << ",R_" << i;
  out << '\n';
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    const auto& s = trajectory.states[k];
    out << format_double(trajectory.times[k]) << ',' << format_double(s.v_inf);
    for (const auto& b : s.balls) out << ',' << format_double(b.radius());
    out << '\n';
  }
  for (const auto& e : trajectory.vanish_events) out << "# vanish," << e.ball + 1 << ',' << format_double(e.t) << '\n';
  for (const auto& g : trajectory.guard_events) out << "# guard," << format_double(g.t) << ',' << format_double(g.value) << '\n';
}

TrajectoryTable read_trajectory_csv(std::istream& in) {
  TrajectoryTable table;
  std::string line;
  bool header = false;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      const auto fields = split(body.substr(1), ',');
      if (fields.size() == 3 && trim(fields[0]) == "vanish") {
        table.vanish_events.push_back({static_cast<std::size_t>(parse_integer(fields[1], "ball")) - 1,
                                       parse_double(fields[2], "vanish time")});
      }
      continue;
    }
    const auto fields = split(body, ',');
    if (!header) {
      if (fields.size() < 2 || trim(fields[0]) != "t" || trim(fields[1]) != "v_inf") {
        throw InputError("line " + std::to_string(line_no) + ": expected trajectory header");
      }
      columns = fields.size();
      header = true;
      continue;
    }
    if (fields.size() != columns) throw InputError("line " + std::to_string(line_no) + ": wrong column count");
    table.times.push_back(parse_double(fields[0], "t"));
    table.v_inf.push_back(parse_double(fields[1], "v_inf"));
    std::vector<double> radii;
    for (std::size_t c = 2; c < columns; ++c) radii.push_back(parse_double(fields[c], "radius"));
    table.radii.push_back(std::move(radii));
  }
  return table;
}

}  // namespace stefan
