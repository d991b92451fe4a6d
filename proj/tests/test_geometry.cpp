#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "effdyn/errors.hpp"
#include "effdyn/geometry.hpp"
#include "effdyn/rng.hpp"
#include "effdyn/systems.hpp"

using namespace effdyn;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec jittered_point(const BuiltinSystem& sys, NoiseStream& jitter, int k) {
  Vec x = sys.x_init;
  for (int i = 0; i < sys.spec.n; ++i)
    x[i] += 0.6 * (jitter.uniform(static_cast<std::uint64_t>(k),
                                  static_cast<std::uint32_t>(i)) -
                   0.5);
  return x;
}

}  // namespace

TEST_CASE("phi for linear xi with identity mobility is the identity") {
  const BuiltinSystem sys = make_builtin("ou2d");
  const Mat phi = phi_matrix(sys.spec, vec2(0.7, -0.3));
  CHECK(phi.rows() == 1);
  CHECK(phi(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("phi for the radius coordinate is scalar one") {
  const BuiltinSystem sys = make_builtin("radial2d");
  CHECK(phi_matrix(sys.spec, vec2(0.6, 0.8))(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("phi picks out the mobility entry for an axis coordinate") {
  // xi = x1, a = diag(2, 5) -> Phi = (2).
  BuiltinSystem sys = make_builtin("ou2d");
  sys.spec.sigma = nullptr;
  sys.spec.mobility = [](const Vec&) {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 5.0;
    return a;
  };
  CHECK(phi_matrix(sys.spec, vec2(0.1, 0.2))(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("spd square root basics") {
  CHECK((spd_sqrt(Mat::Identity(3, 3)) - Mat::Identity(3, 3)).norm() < 1e-14);

  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const Mat root = spd_sqrt(d);
  CHECK(root(0, 0) == doctest::Approx(2.0));
  CHECK(root(1, 1) == doctest::Approx(3.0));
  CHECK(root(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("spd square root re-multiplication on random spd inputs") {
  NoiseStream noise(23, 0);
  std::vector<double> buf(16);
  for (int trial = 0; trial < 40; ++trial) {
    noise.fill_normals(static_cast<std::uint64_t>(trial), buf);
    Mat g(4, 4);
    for (int i = 0; i < 16; ++i) g(i / 4, i % 4) = buf[i];
    const Mat m = g * g.transpose() + 0.1 * Mat::Identity(4, 4);
    const Mat x = spd_sqrt(m);
    CHECK((x - x.transpose()).norm() <= 1e-12 * m.norm());
    CHECK((x * x - m).norm() <= 1e-10 * m.norm());
    // scaling: sqrt(c^2 M) = c sqrt(M)
    const double c = 2.5;
    CHECK((spd_sqrt(c * c * m) - c * x).norm() <= 1e-12 * (c * x).norm());
  }
}

TEST_CASE("spd square root rejects bad inputs") {
  Mat asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(spd_sqrt(asym), EvaluationError);

  Mat singular = Mat::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(spd_sqrt(singular), NumericError);
  CHECK_NOTHROW(spd_sqrt_clamped(singular));
}

TEST_CASE("projector block form for linear xi") {
  const BuiltinSystem sys = make_builtin("ou2d");
  const Mat pi = projection_pi(sys.spec, vec2(0.4, 1.3));
  Mat expected = Mat::Zero(2, 2);
  expected(1, 1) = 1.0;
  CHECK((pi - expected).norm() < 1e-12);
}

TEST_CASE("projector for the radius coordinate at (1,0)") {
  const BuiltinSystem sys = make_builtin("radial2d");
  const Mat pi = projection_pi(sys.spec, vec2(1.0, 0.0));
  Mat expected = Mat::Zero(2, 2);
  expected(1, 1) = 1.0;  // tangent of the unit circle at (1, 0)
  CHECK((pi - expected).norm() < 1e-10);
}

TEST_CASE("projector identities on all systems") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const BuiltinSystem sys = make_builtin(name);
    NoiseStream jitter(31, 0, StreamTag::Scatter);
    for (int k = 0; k < 100; ++k) {
      const Vec x = jittered_point(sys, jitter, k);
      const LevelSetFrame frame = level_set_frame(sys.spec, x);
      const Mat a = mobility_at(sys.spec, x);
      const double scale = std::max(1.0, a.norm());

      CHECK((frame.Pi * frame.Pi - frame.Pi).norm() <= 1e-10);
      for (int i = 0; i < sys.spec.m; ++i)
        CHECK((frame.Pi * frame.grad_xi.row(i).transpose()).norm() <= 1e-10);
      CHECK((frame.Pi.transpose() * a - a * frame.Pi).norm() <= 1e-10 * scale);
      CHECK((frame.A * frame.A - frame.phi).norm() <=
            1e-10 * std::max(1.0, frame.phi.norm()));
      CHECK(frame.Pi.trace() ==
            doctest::Approx(sys.spec.n - sys.spec.m).epsilon(1e-10));
    }
  }
}

TEST_CASE("skew projection does not shrink tangent vectors") {
  // |Pi eta| >= |eta| for eta in the fiber tangent space (eta = P v).
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const BuiltinSystem sys = make_builtin(name);
    NoiseStream jitter(37, 0, StreamTag::Scatter);
    NoiseStream dirs(41, 0);
    std::vector<double> buf(sys.spec.n);
    for (int k = 0; k < 100; ++k) {
      const Vec x = jittered_point(sys, jitter, k);
      const Mat pi = projection_pi(sys.spec, x);
      const Mat p = orthogonal_tangent_projector(sys.spec, x);
      for (int rep = 0; rep < 20; ++rep) {
        dirs.fill_normals(static_cast<std::uint64_t>(k * 64 + rep), buf);
        Vec v(sys.spec.n);
        for (int i = 0; i < sys.spec.n; ++i) v[i] = buf[i];
        const Vec eta = p * v;
        if (eta.norm() < 1e-12) continue;
        CHECK((pi * eta).norm() >= eta.norm() * (1.0 - 1e-12));
      }
    }
  }
}

TEST_CASE("integrability residual vanishes for every scalar coordinate") {
  for (const auto& name : {"ou2d", "case2-linear", "radial2d"}) {
    const BuiltinSystem sys = make_builtin(name);
    NoiseStream jitter(43, 0, StreamTag::Scatter);
    for (int k = 0; k < 20; ++k) {
      const Vec x = jittered_point(sys, jitter, k);
      CHECK(frobenius_obstruction(sys.spec, x).residual <= 1e-8);
    }
  }
}

TEST_CASE("integrability obstruction of the twisted m=2 coordinate") {
  // Hand computation at (1, 0, 0.5): B_12 = (0, 0, 1) and
  // Pi^T B_12 = (0, -1/2, 1/2), so the residual is 1/sqrt(2).
  const BuiltinSystem sys = make_builtin("twist3d");
  const Vec x = vec3(1.0, 0.0, 0.5);
  const FrobeniusResult res = frobenius_obstruction(sys.spec, x);
  CHECK((res.commutators[0][1] - vec3(0.0, 0.0, 1.0)).norm() < 1e-6);
  CHECK(res.residual == doctest::Approx(std::sqrt(0.5)).epsilon(1e-5));
  CHECK(res.residual > 0.1);
}

TEST_CASE("integrability residual is invariant under coordinate swap and sign") {
  const BuiltinSystem base = make_builtin("twist3d");
  NoiseStream jitter(47, 0, StreamTag::Scatter);

  BuiltinSystem swapped = make_builtin("twist3d");
  swapped.spec.xi = [&base](const Vec& x) {
    const Vec z = base.spec.xi(x);
    return vec2(z[1], -z[0]);
  };
  swapped.spec.xi_jac = [&base](const Vec& x) {
    const Mat j = base.spec.xi_jac(x);
    Mat out(2, 3);
    out.row(0) = j.row(1);
    out.row(1) = -j.row(0);
    return out;
  };
  swapped.spec.xi_hess = [&base](const Vec& x, int i) {
    return i == 0 ? base.spec.xi_hess(x, 1) : (-base.spec.xi_hess(x, 0)).eval();
  };

  for (int k = 0; k < 10; ++k) {
    const Vec x = jittered_point(base, jitter, k);
    const double r0 = frobenius_obstruction(base.spec, x).residual;
    const double r1 = frobenius_obstruction(swapped.spec, x).residual;
    CHECK(std::abs(r0 - r1) <= 1e-8 * std::max(1.0, r0));
  }
}

TEST_CASE("degenerate coordinates are reported") {
  BuiltinSystem sys = make_builtin("ou2d");
  sys.spec.xi_jac = [](const Vec& x) { return Mat::Zero(1, x.size()); };
  CHECK_THROWS_AS(phi_matrix(sys.spec, vec2(0.0, 0.0)),
                  DegenerateCoordinateError);
}
