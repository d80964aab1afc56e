#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace auxcop {

/// Random stream owned by one chain or one replication. Not thread-safe;
/// give each thread its own stream via Rng::substream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Deterministic child stream keyed by (seed, a, b), e.g. (seed, replication, 0).
  static Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
  /// Gamma with shape/rate parameterisation (mean shape / rate).
  double gamma(double shape, double rate);
  double exponential(double rate) { return -std::log(uniform()) / rate; }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace auxcop
