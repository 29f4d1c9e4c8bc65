#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace stefan {

/// One sampled Wiener path on a uniform grid of width dt.
/// increments[j] ~ N(0, dt) covers [j dt, (j + 1) dt); W(0) = 0.
struct BrownianPath {
  std::uint64_t seed = 0;
  double dt = 0.0;
  double t_end = 0.0;
  std::vector<double> increments;

  std::size_t bins() const { return increments.size(); }
  bool empty() const { return increments.empty(); }

  /// W(j dt) = sum_{k < j} increments[k].
  double value_at_bin(std::size_t j) const;
  /// W at the end of the last increment.
  double terminal_value() const { return value_at_bin(bins()); }
  /// Piecewise-constant forcing of bin j: increments[j] / dt.
  double bin_forcing(std::size_t j) const { return increments[j] / dt; }
};

/// Number of bins covering [0, t_end] at width dt: ceil(t_end / dt) with a
/// relative tolerance so that e.g. 15 / 1e-4 yields exactly 150000.
std::size_t bin_count(double t_end, double dt);

/// Gaussian increments from a 64-bit Mersenne Twister seeded by `seed`, mapped
/// through Box-Muller with an explicit 53-bit uniform conversion so the stream
/// does not depend on the standard library's distribution implementation.
BrownianPath sample_path(std::uint64_t seed, double dt, double t_end);

/// Finite-difference forcing dW ~ (W(t_j) - W(t_{j-1})) / (t_j - t_{j-1}) for
/// the bin containing t. The right end point t_end belongs to the last bin.
double forcing(const BrownianPath& path, double t);

/// SplitMix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);

/// Per-path seed: splitmix64(splitmix64(master) ^ splitmix64(index + golden)).
/// Depends only on (master, index), so ensembles can be scheduled in any order.
std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t path_index);

/// Deterministic N(0, 1) stream used for Brownian increments.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed);
  double next();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stefan
