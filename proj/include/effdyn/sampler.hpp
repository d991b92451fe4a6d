#pragma once

#include <cstdint>
#include <functional>

#include "effdyn/rng.hpp"
#include "effdyn/system.hpp"

namespace effdyn {

struct IntegratorConfig {
  double dt = 1e-3;
  long n_steps = 0;
  int n_replicas = 1;
  std::uint64_t seed = 0;
  long burn_in_steps = -1;  // -1: default to n_steps / 10
  long thinning = 1;        // record every thinning-th step after burn-in

  long resolved_burn_in() const {
    return burn_in_steps >= 0 ? burn_in_steps : n_steps / 10;
  }
};

void validate(const IntegratorConfig& cfg);

// Starting state: a fixed point (recording starts immediately, z(0) = xi(x0)
// holds exactly in co-simulation), or an equilibrium sample reached by
// burn-in from the given point.
struct X0Source {
  enum class Mode { Fixed, Equilibrium };
  Mode mode = Mode::Equilibrium;
  Vec point;
};

// One Euler-Maruyama step of the full dynamics. dW must carry variance dt
// per component. Throws DivergenceError (with the given step index) when the
// new state is not finite.
Vec em_step(const SystemSpec& spec, const Vec& x, double dt, const Vec& dW,
            long step_index = -1);

// Visitor receives (replica, record_index, time, x, xi(x)). Recording starts
// after burn-in, at t = 0, every `thinning` steps. Deterministic given
// (seed, replica).
using TrajectoryVisitor =
    std::function<void(int, long, double, const Vec&, const Vec&)>;

void simulate_full(const SystemSpec& spec, const IntegratorConfig& cfg,
                   const X0Source& x0, const TrajectoryVisitor& visit);

// Convenience: thinned equilibrium states of all replicas, concatenated in
// replica order.
std::vector<Vec> collect_equilibrium_samples(const SystemSpec& spec,
                                             const IntegratorConfig& cfg,
                                             const X0Source& x0);

struct FiberConfig {
  Vec z;                      // target level
  Vec start;                  // state near the fiber; projected before use
  double newton_tol = 1e-10;
  int newton_max_iter = 10;
  IntegratorConfig base;
};

// Newton-projects x onto the fiber {xi = z} along the columns of
// a grad(xi)^T evaluated at the starting point. Throws ProjectionError with
// the final residual if max_iter is exhausted.
Vec project_to_fiber(const SystemSpec& spec, const Vec& x, const Vec& z,
                     double tol, int max_iter);

// Constrained dynamics on the fiber: Euler-Maruyama step of
//   dx = -(Pi^T a) grad(V) dt + (1/beta) div(Pi^T a) dt + sqrt(2/beta) Pi^T sigma dW
// followed by Newton projection back onto {xi = z}. Every visited sample
// satisfies |xi(x) - z| <= newton_tol. Visitor as in simulate_full.
void simulate_fiber(const SystemSpec& spec, const FiberConfig& fc,
                    const TrajectoryVisitor& visit);

std::vector<Vec> collect_fiber_samples(const SystemSpec& spec,
                                       const FiberConfig& fc);

}  // namespace effdyn
