#include "stefan/brownian.hpp"

#include <cmath>
#include <numbers>

#include "stefan/errors.hpp"
#include "stefan/text_format.hpp"

namespace stefan {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t path_index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(path_index + 0x632BE59BD9B4E019ULL));
}

NormalStream::NormalStream(std::uint64_t seed) : engine_(seed) {}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  // u1 in (0, 1], u2 in [0, 1)
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * kScale;
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::size_t bin_count(double t_end, double dt) {
  if (!(dt > 0.0)) throw InputError("noise dt must be > 0, got " + format_double(dt));
  if (!(t_end >= 0.0)) throw InputError("t_end must be >= 0, got " + format_double(t_end));
  const double ratio = t_end / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(ratio));
}

BrownianPath sample_path(std::uint64_t seed, double dt, double t_end) {
  BrownianPath path;
  path.seed = seed;
  path.dt = dt;
  path.t_end = t_end;
  const std::size_t n = bin_count(t_end, dt);
  path.increments.resize(n);
  NormalStream normals(seed);
  const double scale = std::sqrt(dt);
  for (auto& dw : path.increments) dw = scale * normals.next();
  return path;
}

double BrownianPath::value_at_bin(std::size_t j) const {
  double w = 0.0;
  for (std::size_t k = 0; k < j && k < increments.size(); ++k) w += increments[k];
  return w;
}

double forcing(const BrownianPath& path, double t) {
  const double horizon = std::max(path.t_end, path.dt * static_cast<double>(path.bins()));
  if (!(t >= 0.0) || t > horizon * (1.0 + 1e-12)) {
    throw InputError("forcing requested at t=" + format_double(t) + " outside [0, " + format_double(horizon) + "]");
  }
  if (path.empty()) return 0.0;
  auto j = static_cast<std::size_t>(std::floor(t / path.dt));
  if (j >= path.bins()) j = path.bins() - 1;
  return path.bin_forcing(j);
}

}  // namespace stefan
