#ifndef CALIB7_RNG_HPP
#define CALIB7_RNG_HPP

#include <cmath>
#include <cstdint>

namespace calib7 {

// Counter-based random stream: the state for sample index i is derived from
// (seed, i) alone, so parallel and sequential sweeps produce identical draws.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index)
      : state_(mix(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // uniform in (0,1)
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = next_uniform();
    double v = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(6.283185307179586476925287 * v);
    have_spare_ = true;
    return r * std::cos(6.283185307179586476925287 * v);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace calib7

#endif
