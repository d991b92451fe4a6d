#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "effdyn/rng.hpp"
#include "effdyn/stats.hpp"

using namespace effdyn;

// Published known-answer vectors for the 10-round generator.
TEST_CASE("philox known answers") {
  {
    const auto out = philox::block({0u, 0u}, {0u, 0u, 0u, 0u});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
  }
  {
    const auto out = philox::block({0xffffffffu, 0xffffffffu},
                                   {0xffffffffu, 0xffffffffu, 0xffffffffu,
                                    0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);
  }
  {
    const auto out = philox::block({0xa4093822u, 0x299f31d0u},
                                   {0x243f6a88u, 0x85a308d3u, 0x13198a2eu,
                                    0x03707344u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
  }
}

TEST_CASE("streams are deterministic and order-independent") {
  NoiseStream a(42, 7);
  NoiseStream b(42, 7);
  std::vector<double> va(5), vb(5);
  a.fill_normals(1000, va);
  b.fill_normals(2000, vb);  // touch another step first
  b.fill_normals(1000, vb);
  for (int i = 0; i < 5; ++i) CHECK(va[i] == vb[i]);
}

TEST_CASE("distinct replicas and tags give distinct streams") {
  NoiseStream a(42, 0), b(42, 1);
  NoiseStream c(42, 0, StreamTag::Alt);
  std::vector<double> va(4), vb(4), vc(4);
  a.fill_normals(0, va);
  b.fill_normals(0, vb);
  c.fill_normals(0, vc);
  CHECK(va[0] != vb[0]);
  CHECK(va[0] != vc[0]);
}

TEST_CASE("normal moments") {
  NoiseStream s(7, 0);
  RunningStats stats;
  std::vector<double> buf(8);
  for (std::uint64_t step = 0; step < 40000; ++step) {
    s.fill_normals(step, buf);
    for (double v : buf) stats.add(v);
  }
  // 320k draws: mean within 5 se of 0, variance within 2% of 1.
  CHECK(std::abs(stats.mean()) < 5.0 / std::sqrt(320000.0));
  CHECK(stats.variance() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("cross-replica increments are uncorrelated") {
  NoiseStream a(3, 0), b(3, 1);
  const int n = 20000;
  std::vector<double> va(2), vb(2);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    a.fill_normals(static_cast<std::uint64_t>(k), va);
    b.fill_normals(static_cast<std::uint64_t>(k), vb);
    acc += va[0] * vb[0];
  }
  CHECK(std::abs(acc / n) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("uniform draws cover [0,1)") {
  NoiseStream s(11, 0, StreamTag::Scatter);
  RunningStats stats;
  for (int k = 0; k < 20000; ++k) {
    const double u = s.uniform(static_cast<std::uint64_t>(k), 0);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    stats.add(u);
  }
  CHECK(stats.mean() == doctest::Approx(0.5).epsilon(0.01));
  CHECK(stats.variance() == doctest::Approx(1.0 / 12.0).epsilon(0.03));
}
