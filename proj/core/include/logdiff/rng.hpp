#ifndef LOGDIFF_RNG_HPP
#define LOGDIFF_RNG_HPP

#include <cmath>
#include <cstdint>

namespace logdiff {

// Counter-based random numbers: every draw is a pure function of
// (seed, path, step, mode, salt), so parallel paths and restarted runs
// reproduce bit-identical noise regardless of execution order.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t key_hash(std::uint64_t seed, std::uint64_t path,
                              std::uint64_t step, std::uint64_t mode) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ path);
  h = mix64(h ^ step);
  h = mix64(h ^ mode);
  return h;
}

// Uniform in (0, 1]: the +1 keeps log() away from zero.
inline double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// Uniform in [0, 1).
inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Standard normal draw for one counter tuple (Box-Muller, cosine branch).
inline double normal_draw(std::uint64_t seed, std::uint64_t path,
                          std::uint64_t step, std::uint64_t mode) {
  const std::uint64_t h = key_hash(seed, path, step, mode);
  const double u1 = to_unit_open(mix64(h ^ 0xA5A5A5A5A5A5A5A5ull));
  const double u2 = to_unit(mix64(h ^ 0x5A5A5A5A5A5A5A5Aull));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

} // namespace logdiff

#endif
