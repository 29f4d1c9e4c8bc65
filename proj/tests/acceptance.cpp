// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stefan/brownian.hpp"
#include "stefan/integrator.hpp"
#include "stefan/ito_geometry.hpp"
#include "stefan/lob_ingest.hpp"
#include "stefan/montecarlo.hpp"
#include "stefan/portfolio.hpp"

using namespace stefan;

namespace {

const std::string kData = STEFAN_TEST_DATA;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

MarketParams balls(std::vector<double> radii, double alpha) {
  MarketParams p;
  p.n = 3;
  p.ball_count = radii.size();
  p.alpha = alpha;
  p.alpha_in = alpha;
  for (std::size_t i = 0; i < radii.size(); ++i) p.centers.push_back({100.0 * static_cast<double>(i), 0.0, 0.0});
  p.radii0 = radii;
  p.v_inf0 = default_v_inf0(radii);
  p.c0 = 1.0;
  p.cs = std::pow(alpha, 4.0 / 9.0);
  return p;
}

ModelSpec model(double alpha, DynamicsOrder order = DynamicsOrder::Deterministic) {
  ModelSpec m;
  m.order = order;
  m.alpha = alpha;
  m.cs = std::pow(alpha, 4.0 / 9.0);
  if (order != DynamicsOrder::Deterministic) m.sigma = SigmaProfile::exponential(1.0, 1.0);
  return m;
}

IntegratorConfig horizon(double t_end, double stride) {
  IntegratorConfig c;
  c.t_end = t_end;
  c.output_stride = stride;
  return c;
}

std::vector<MarketAggregates> calibrated_markets() {
  std::ifstream q(kData + "/quotes_single_market.csv");
  std::ifstream v(kData + "/volumes_single_market.csv");
  return aggregate_markets(read_quotes_csv(q), read_volumes_csv(v));
}

// 1. Calibration of the single-market order book.
Outcome calibration() {
  const auto markets = calibrated_markets();
  const auto params = build_params(markets, CsRule{}, 1.0);
  const double lspra[] = {0.080437107, 0.033115609, 0.151138629};
  const double centers[] = {3.416906675, 2.714694744, 3.022860941};
  double worst = 0.0;
  std::string worst_name;
  const auto track = [&](const std::string& name, double got, double want) {
    const double e = rel(got, want);
    if (e > worst) {
      worst = e;
      worst_name = name;
    }
  };
  for (std::size_t k = 0; k < 3; ++k) {
    track("lspra" + std::to_string(k + 1), markets[0].assets[k].log_spread, lspra[k]);
    track("center" + std::to_string(k + 1), params.centers[0][k], centers[k]);
  }
  track("alpha_in", params.alpha_in, 798.4385286);
  track("alpha", params.alpha, 13338.83103);
  track("R0", params.radii0[0], 0.016557805);
  return {worst <= 1e-8, "worst relative error " + fmt("%.3g", worst) + " (" + worst_name + "), tolerance 1e-8"};
}

// 2. Single ball at its fixed point.
Outcome fixed_point() {
  const auto traj = integrate(balls({1.0}, 100.0), model(100.0), horizon(15.0, 0.01));
  double worst = 0.0;
  for (const auto& s : traj.states) worst = std::max(worst, std::abs(s.balls[0].radius() - 1.0));
  return {worst <= 1e-6, "max |R-1| = " + fmt("%.3g", worst)};
}

// 3. Coarsening order.
Outcome coarsening() {
  const auto traj = integrate(balls({1, 2, 3, 8}, 1e4), model(1e4), horizon(30.0, 0.01));
  bool ok = traj.vanish_events.size() == 3;
  for (std::size_t k = 0; ok && k < 3; ++k) {
    ok = traj.vanish_events[k].ball == k && (k == 0 || traj.vanish_events[k].t > traj.vanish_events[k - 1].t);
  }
  if (!ok) return {false, "vanish events out of order or missing"};
  const double t_last = traj.vanish_events.back().t;
  double prev = 0.0;
  for (std::size_t k = 0; k < traj.times.size() && traj.times[k] <= t_last; ++k) {
    const double r = traj.states[k].balls[3].radius();
    if (r < prev) return {false, "largest radius decreased at t=" + fmt("%.6g", traj.times[k])};
    prev = r;
  }
  return {true, "vanish times " + fmt("%.5g", traj.vanish_events[0].t) + ", " + fmt("%.5g", traj.vanish_events[1].t) +
                    ", " + fmt("%.5g", traj.vanish_events[2].t)};
}

// 4. Volume conservation in the quasi-static regime.
Outcome conservation() {
  const auto traj = integrate(balls({1, 2, 3, 8}, 1e7), model(1e7), horizon(100.0, 0.01));
  if (traj.vanish_events.size() != 3) return {false, "expected three vanish events"};
  const double z0 = total_cubed_volume(traj.states.front());
  double drift = 0.0;
  for (std::size_t k = 0; k < traj.times.size() && traj.times[k] <= traj.vanish_events[0].t; ++k) {
    drift = std::max(drift, std::abs(total_cubed_volume(traj.states[k]) - z0) / z0);
  }
  const double target = std::cbrt(z0);
  const double err = rel(traj.terminal().balls[3].radius(), target);
  return {drift < 0.01 && err <= 0.02,
          "volume drift " + fmt("%.3g", drift) + ", final radius error " + fmt("%.3g", err)};
}

// 5. Adaptive solver against the fixed-step reference.
Outcome oracle_equivalence() {
  struct Setup {
    MarketParams p;
    double alpha;
    double t_end;
  };
  const std::vector<Setup> setups = {
      {balls({1.0}, 100.0), 100.0, 15.0},
      {balls({1, 2, 3, 8}, 1e4), 1e4, 30.0},
      {balls({1, 2, 3, 8}, 1e7), 1e7, 100.0},
  };
  double worst = 0.0;
  for (const auto& s : setups) {
    const auto cfg = horizon(s.t_end, s.t_end);
    const auto a = integrate(s.p, model(s.alpha), cfg).terminal();
    const auto r = reference_integrate(s.p, model(s.alpha), cfg, 1e-5).terminal();
    for (std::size_t i = 0; i < a.balls.size(); ++i) {
      const double ra = a.balls[i].radius(), rr = r.balls[i].radius();
      if (ra == 0.0 && rr == 0.0) continue;
      worst = std::max(worst, rel(ra, rr));
    }
  }

  auto zero = model(1e4, DynamicsOrder::Stochastic1);
  zero.sigma = SigmaProfile::zero();
  const auto p = balls({1, 2, 3, 8}, 1e4);
  const auto det = integrate(p, model(1e4), horizon(30.0, 0.1));
  const auto st = integrate(p, zero, horizon(30.0, 0.1));
  double gap = st.times.size() == det.times.size() ? 0.0 : 1.0;
  for (std::size_t k = 0; gap == 0.0 && k < st.times.size(); ++k) {
    for (std::size_t i = 0; i < 4; ++i) {
      gap = std::max(gap, std::abs(st.states[k].balls[i].radius() - det.states[k].balls[i].radius()));
    }
  }
  return {worst <= 1e-6 && gap <= 1e-10,
          "terminal radius mismatch " + fmt("%.3g", worst) + ", zero-noise gap " + fmt("%.3g", gap)};
}

// 6. Desk-scale stochastic ensembles.
Outcome desk_ensembles() {
  const auto p = balls({1.0}, 100.0);
  EnsembleConfig e;
  e.n_paths = 100;
  e.master_seed = 2019;
  e.noise_dt = 1e-4;
  e.keep_trajectories = false;
  const auto cfg = horizon(15.0, 0.5);
  const auto first = run_ensemble(p, model(100.0, DynamicsOrder::Stochastic1), cfg, e).summary;
  const auto second = run_ensemble(p, model(100.0, DynamicsOrder::Stochastic2), cfg, e).summary;
  const auto& b1 = first.balls[0];
  const auto& b2 = second.balls[0];
  const bool band1 = b1.mean >= 0.45 && b1.mean <= 0.90 && b1.vanish_fraction > 0.0;
  const bool band2 = b2.mean >= 0.55 && b2.mean <= 0.90;
  // Sample std has standard error ~ std / sqrt(2 (n - 1)).
  const double se1 = b1.std / std::sqrt(2.0 * (first.valid_paths() - 1.0));
  const double se2 = b2.std / std::sqrt(2.0 * (second.valid_paths() - 1.0));
  const bool ordering = b2.std - b1.std <= 2.0 * std::hypot(se1, se2);
  return {band1 && band2 && ordering && first.valid() && second.valid(),
          "first order mean " + fmt("%.5g", b1.mean) + " std " + fmt("%.3g", b1.std) + " vanished " +
              fmt("%.2f", b1.vanish_fraction) + "; second order mean " + fmt("%.5g", b2.mean) + " std " +
              fmt("%.3g", b2.std)};
}

// 7. Calibrated order-book scenario over eight minutes.
Outcome scenario() {
  const auto markets = calibrated_markets();
  const auto params = build_params(markets, CsRule{}, 1.0);
  FinancialScenarioConfig cfg;
  cfg.n_paths = 100;
  const auto res = financial_scenario(params, cfg);
  const double r0 = params.radii0[0];
  std::size_t inside = 0;
  for (const auto& traj : res.ensemble.trajectories) {
    if (traj.times.empty()) continue;
    bool ok = true;
    for (const auto& s : traj.states) {
      const double r = s.balls[0].radius();
      ok = ok && r >= 0.5 * r0 && r <= 3.0 * r0;
    }
    inside += ok;
  }
  const double share = static_cast<double>(inside) / static_cast<double>(cfg.n_paths);
  const double at2 = ensemble_mean_radii(res.ensemble, 2.0 / cfg.minutes_per_unit)[0];
  const double change2 = std::abs(at2 - r0) / r0;

  auto two = params;
  two.ball_count = 2;
  two.centers.push_back({params.centers[0][0] + 1.0, params.centers[0][1], params.centers[0][2]});
  two.radii0 = {r0, 0.5 * r0};
  two.v_inf0 = default_v_inf0(two.radii0);
  auto cfg2 = cfg;
  const auto res2 = financial_scenario(two, cfg2);
  const double small0 = res2.mean_radii.front()[1];
  const double small8 = res2.mean_radii.back()[1];

  return {share >= 0.95 && change2 <= 0.05 && small8 < small0,
          "paths within band " + fmt("%.2f", share) + ", mean change at 2 min " + fmt("%.3g", change2) +
              ", smaller ball mean " + fmt("%.4g", small0) + " -> " + fmt("%.4g", small8)};
}

// 8. Moving-ball integral identities and the Ito correction.
Outcome ito_suite() {
  const auto report = run_ito_suite(ItoSuiteConfig{});
  std::size_t failed = 0;
  double worst_z = 0.0;
  for (const auto& c : report.identities) failed += !c.pass;
  for (const auto& c : report.reductions) failed += !c.pass;
  for (const auto& c : report.ito) {
    failed += !c.pass;
    worst_z = std::max(worst_z, std::abs(c.z));
  }
  return {failed == 0 && report.pass(), std::to_string(report.identities.size()) + " identities, " +
                                            std::to_string(report.reductions.size()) + " reductions, " +
                                            std::to_string(report.ito.size()) + " Ito checks, max |z| " +
                                            fmt("%.3g", worst_z) + ", failures " + std::to_string(failed)};
}

// 9. Same seed, any thread count, identical summaries.
Outcome determinism() {
  const auto p = balls({2.5, 1.5}, 1e3);
  std::vector<std::string> texts;
  for (auto order : {DynamicsOrder::Stochastic1, DynamicsOrder::Stochastic2}) {
    for (std::size_t threads : {1u, 2u, 4u}) {
      EnsembleConfig e;
      e.n_paths = 16;
      e.master_seed = 7;
      e.noise_dt = 1e-3;
      e.threads = threads;
      const auto res = run_ensemble(p, model(1e3, order), horizon(2.0, 0.5), e);
      std::ostringstream out;
      write_summary(out, res.summary);
      write_scatter_csv(out, res.summary);
      texts.push_back(out.str());
    }
  }
  const bool same = texts[0] == texts[1] && texts[0] == texts[2] && texts[3] == texts[4] && texts[3] == texts[5];
  return {same, same ? "summaries identical for 1, 2 and 4 threads" : "summaries differ across thread counts"};
}

// 10. Portfolio bookkeeping.
Outcome portfolio() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10'000; ++trial) {
    const std::size_t n = 1 + trial % 8;
    Holdings h;
    std::vector<double> f, p;
    for (std::size_t i = 0; i < n; ++i) {
      h.s0.push_back(1.0 + 1e3 * u(rng));
      h.p0.push_back(1.0 + 1e2 * u(rng));
      f.push_back(u(rng));
      p.push_back(1.0 + 1e2 * u(rng));
    }
    const auto s = allocation(h, f);
    worst = std::max(worst, rel(consumption(h, f, p) + value(s, p), value(h.s0, p)));
    double wsum = 0.0;
    for (double w : weights(s)) wsum += w;
    worst = std::max(worst, std::abs(wsum - 1.0));
  }
  return {worst <= 1e-12, "worst identity residual " + fmt("%.3g", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"order-book calibration", calibration},
      {"single-ball fixed point", fixed_point},
      {"coarsening order", coarsening},
      {"quasi-static volume conservation", conservation},
      {"adaptive vs reference integrator", oracle_equivalence},
      {"desk-scale stochastic ensembles", desk_ensembles},
      {"order-book scenario", scenario},
      {"moving-ball integral suite", ito_suite},
      {"seeded determinism", determinism},
      {"portfolio identities", portfolio},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("[%s] criterion %zu: %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
