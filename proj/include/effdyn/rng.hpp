#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace effdyn {

// Philox4x32-10 counter-based generator. A block is a pure function of
// (key, counter), so any (seed, replica, step) triple addresses its random
// numbers directly: no generator state, reproducible under any scheduling.
namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter block(Key key, Counter ctr);

}  // namespace philox

// Distinguishes independent noise uses that share (seed, replica, step).
enum class StreamTag : std::uint32_t {
  Main = 0,       // driving noise of the dynamics
  BurnIn = 1,     // equilibration phase
  Alt = 2,        // independent noise (uncoupled co-simulation)
  Scatter = 3,    // point sampling, initial-condition jitter
};

// One replica's noise stream. fill_normals(step, out) writes i.i.d. standard
// normals for that step; the same (seed, replica, tag, step) always yields
// the same values regardless of call order.
class NoiseStream {
public:
  NoiseStream(std::uint64_t seed, std::uint32_t replica,
              StreamTag tag = StreamTag::Main)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        replica_(replica),
        tag_(static_cast<std::uint32_t>(tag)) {}

  void fill_normals(std::uint64_t step, std::span<double> out) const;

  // Uniform in [0,1); index addresses independent draws within the step.
  double uniform(std::uint64_t step, std::uint32_t index) const;

private:
  philox::Key key_;
  std::uint32_t replica_;
  std::uint32_t tag_;
};

}  // namespace effdyn
