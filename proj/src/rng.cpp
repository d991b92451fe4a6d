#include "effdyn/rng.hpp"

#include <cmath>
#include <numbers>

namespace effdyn {

namespace philox {
namespace {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(Key& key, Counter& x) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * x[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * x[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  x = {hi1 ^ x[1] ^ key[0], lo1, hi0 ^ x[3] ^ key[1], lo0};
  key[0] += kWeyl0;
  key[1] += kWeyl1;
}

}  // namespace

Counter block(Key key, Counter ctr) {
  for (int r = 0; r < 10; ++r) round_once(key, ctr);
  return ctr;
}

}  // namespace philox

namespace {

// Counter layout: (step lo, step hi, replica, tag<<28 | block index).
inline philox::Counter make_counter(std::uint64_t step, std::uint32_t replica,
                                    std::uint32_t tag, std::uint32_t blk) {
  return {static_cast<std::uint32_t>(step),
          static_cast<std::uint32_t>(step >> 32), replica,
          (tag << 28) | (blk & 0x0FFFFFFFu)};
}

inline std::uint64_t join64(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

// (0,1]: never zero, safe under log().
inline double to_open01(std::uint64_t u) {
  return (static_cast<double>(u >> 11) + 1.0) * 0x1.0p-53;
}

inline double to_half_open01(std::uint64_t u) {
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}

}  // namespace

void NoiseStream::fill_normals(std::uint64_t step,
                               std::span<double> out) const {
  // Each block yields one Box-Muller pair.
  std::size_t i = 0;
  std::uint32_t blk = 0;
  while (i < out.size()) {
    const auto c = philox::block(key_, make_counter(step, replica_, tag_, blk++));
    const double u1 = to_open01(join64(c[0], c[1]));
    const double u2 = to_half_open01(join64(c[2], c[3]));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    out[i++] = r * std::cos(a);
    if (i < out.size()) out[i++] = r * std::sin(a);
  }
}

double NoiseStream::uniform(std::uint64_t step, std::uint32_t index) const {
  const auto c =
      philox::block(key_, make_counter(step, replica_, tag_, 0x08000000u | index));
  return to_half_open01(join64(c[0], c[1]));
}

}  // namespace effdyn
