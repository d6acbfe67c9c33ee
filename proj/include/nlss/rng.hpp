#pragma once

// Deterministic Gaussian draws. mt19937_64 has a pinned sequence across
// platforms; std::normal_distribution does not, so Box-Muller is done by
// hand to keep noisy experiments bit-reproducible.

#include <cmath>
#include <cstdint>
#include <random>

#include "nlss/specfun.hpp"

namespace nlss {

class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

  Real normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    Real u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    Real u2 = uniform01();
    Real r = std::sqrt(-2.0 * std::log(u1));
    Real th = 2.0 * kPi * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  Complex cnormal() {
    Real re = normal();
    Real im = normal();
    return Complex(re, im);
  }

 private:
  Real uniform01() {
    // 53 uniform bits in [0, 1).
    return static_cast<Real>(eng_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 eng_;
  Real spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace nlss
