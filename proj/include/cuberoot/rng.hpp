#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace cuberoot {

// Splittable counter-based random stream (splitmix64 core).  Every stochastic
// routine in the library takes one of these explicitly; child streams are
// derived from the stream *key* (not the consumption state), so replicate s
// draws the same numbers whether it runs alone or inside a batch.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ kKeyTag)), state_(key_) {}

  // Derive an independent stream from (key, tag, index).
  RngStream child(std::string_view tag, std::uint64_t index = 0) const {
    std::uint64_t h = key_;
    for (unsigned char c : tag) h = mix(h ^ (kTagSalt + c));
    h = mix(h ^ mix(index + kIndexSalt));
    return RngStream(FromKey{}, h);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Unbiased-enough integer in [0, n) via multiply-shift.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform on (0, 1): 53-bit mantissa, zero excluded.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller, cosine branch only (two uniforms per draw, stateless).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double exponential() { return -std::log(uniform01()); }

  double logistic() {
    double u = uniform01();
    return std::log(u / (1.0 - u));
  }

  // Student's t with 3 df: normal over sqrt(chi-square(3)/3).
  double student_t3() {
    double z = normal();
    double a = normal(), b = normal(), c = normal();
    return z / std::sqrt((a * a + b * b + c * c) / 3.0);
  }

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }
  result_type operator()() { return next_u64(); }

 private:
  struct FromKey {};
  RngStream(FromKey, std::uint64_t key) : key_(key), state_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kKeyTag = 0x5bf0'3636'd5a7'9c11ULL;
  static constexpr std::uint64_t kTagSalt = 0xa24b'aed4'963e'e407ULL;
  static constexpr std::uint64_t kIndexSalt = 0x9fb2'1c65'1e98'df25ULL;
  static constexpr double kPi = 3.14159265358979323846;

  std::uint64_t key_;
  std::uint64_t state_;
};

}  // namespace cuberoot
