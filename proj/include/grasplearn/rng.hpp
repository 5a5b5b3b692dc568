#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace grasplearn {

/// Deterministic random stream. All sampling in this project goes through
/// this wrapper so that a run is reproducible from its seed alone, without
/// depending on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Derives an independent stream, e.g. per episode or per worker.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    // SplitMix64 finalizer over the pair; decorrelates nearby seeds.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Integer uniform in [0, n). Rejection-free modulo bias is negligible for
  /// the ranges used here (n is vastly below 2^64), but keep it exact anyway.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller, one value per call so the stream state
  /// is exactly the engine state.
  double normal() {
    double u1 = uniform();
    const double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Bulk zero-mean normals using full Box-Muller pairs.
  void fill_normal(double* out, std::size_t n, double stddev) {
    std::size_t i = 0;
    while (i + 1 < n) {
      double u1 = uniform();
      const double u2 = uniform();
      while (u1 <= 0.0) u1 = uniform();
      const double r = stddev * std::sqrt(-2.0 * std::log(u1));
      const double theta = 2.0 * M_PI * u2;
      out[i++] = r * std::cos(theta);
      out[i++] = r * std::sin(theta);
    }
    if (i < n) out[i] = stddev * normal();
  }

  std::string save_state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void load_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
    if (!is) throw std::invalid_argument("bad rng state string");
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace grasplearn
