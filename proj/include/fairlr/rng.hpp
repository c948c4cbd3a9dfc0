#pragma once
// Seeded RNG helpers. Draws are hand-rolled on top of mt19937_64 so that
// sequences do not depend on the standard library's distribution
// implementations; identical seeds give identical streams on any build.

#include <cmath>
#include <cstdint>
#include <random>

namespace fairlr {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, bound); bound > 0. Modulo bias is below 2^-53 for
  // the bounds used here (dataset sizes).
  std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }

  // standard normal, Box-Muller with a cached second value
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fairlr
