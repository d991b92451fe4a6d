#include "effdyn/effective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "effdyn/errors.hpp"
#include "effdyn/geometry.hpp"
#include "effdyn/stats.hpp"

namespace effdyn {

ZGrid::ZGrid(const Vec& lo, const Vec& hi, const std::vector<int>& nodes) {
  const int dim = static_cast<int>(nodes.size());
  if (lo.size() != dim || hi.size() != dim)
    throw ConfigError("grid lo/hi/nodes dimensions disagree");
  axes_.resize(dim);
  steps_.resize(dim);
  strides_.resize(dim);
  total_ = 1;
  for (int d = 0; d < dim; ++d) {
    if (nodes[d] < 2) throw ConfigError("grid needs at least 2 nodes per axis");
    if (!(lo[d] < hi[d])) throw ConfigError("grid lo must be below hi");
    axes_[d].resize(nodes[d]);
    steps_[d] = (hi[d] - lo[d]) / (nodes[d] - 1);
    for (int k = 0; k < nodes[d]; ++k) axes_[d][k] = lo[d] + k * steps_[d];
  }
  // Row-major: last axis fastest.
  long stride = 1;
  for (int d = dim - 1; d >= 0; --d) {
    strides_[d] = stride;
    stride *= nodes[d];
  }
  total_ = stride;
}

Vec ZGrid::node(long flat) const {
  const auto idx = unflatten(flat);
  Vec z(dim());
  for (int d = 0; d < dim(); ++d) z[d] = axes_[d][idx[d]];
  return z;
}

std::vector<int> ZGrid::unflatten(long flat) const {
  std::vector<int> idx(dim());
  for (int d = 0; d < dim(); ++d) {
    idx[d] = static_cast<int>(flat / strides_[d]);
    flat %= strides_[d];
  }
  return idx;
}

long ZGrid::flatten(const std::vector<int>& idx) const {
  long flat = 0;
  for (int d = 0; d < dim(); ++d) flat += idx[d] * strides_[d];
  return flat;
}

bool ZGrid::is_interior(long flat) const {
  const auto idx = unflatten(flat);
  for (int d = 0; d < dim(); ++d)
    if (idx[d] == 0 || idx[d] == static_cast<int>(axes_[d].size()) - 1)
      return false;
  return true;
}

long ZGrid::bin(const Vec& z) const {
  if (z.size() != dim()) throw ConfigError("bin query has wrong dimension");
  std::vector<int> idx(dim());
  for (int d = 0; d < dim(); ++d) {
    const double pos = (z[d] - axes_[d].front()) / steps_[d];
    const long k = std::lround(pos);
    if (k < 0 || k >= static_cast<long>(axes_[d].size())) return -1;
    idx[d] = static_cast<int>(k);
  }
  return flatten(idx);
}

ZGrid::Stencil ZGrid::stencil(const Vec& z) const {
  if (z.size() != dim()) throw ConfigError("stencil query has wrong dimension");
  Stencil st;
  std::vector<int> base(dim());
  std::vector<double> frac(dim());
  for (int d = 0; d < dim(); ++d) {
    double pos = (z[d] - axes_[d].front()) / steps_[d];
    const double max_pos = static_cast<double>(axes_[d].size() - 1);
    if (pos < 0.0) {
      pos = 0.0;
      st.clamped = true;
    } else if (pos > max_pos) {
      pos = max_pos;
      st.clamped = true;
    }
    int k = static_cast<int>(pos);
    if (k >= static_cast<int>(axes_[d].size()) - 1)
      k = static_cast<int>(axes_[d].size()) - 2;
    base[d] = k;
    frac[d] = pos - k;
  }
  const int corners = 1 << dim();
  st.corners.resize(corners);
  st.weights.resize(corners);
  std::vector<int> idx(dim());
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    for (int d = 0; d < dim(); ++d) {
      const int hi = (c >> d) & 1;
      idx[d] = base[d] + hi;
      w *= hi ? frac[d] : 1.0 - frac[d];
    }
    st.corners[c] = flatten(idx);
    st.weights[c] = w;
  }
  return st;
}

double ZGrid::cell_volume() const {
  double v = 1.0;
  for (int d = 0; d < dim(); ++d) v *= steps_[d];
  return v;
}

Vec EffectiveModel::drift(const Vec& z, bool* clamped) const {
  const auto st = grid.stencil(z);
  if (clamped) *clamped = st.clamped;
  Vec out = Vec::Zero(m);
  for (std::size_t c = 0; c < st.corners.size(); ++c)
    out += st.weights[c] * b[st.corners[c]];
  return out;
}

Mat EffectiveModel::phi(const Vec& z, bool* clamped) const {
  const auto st = grid.stencil(z);
  if (clamped) *clamped = st.clamped;
  Mat out = Mat::Zero(m, m);
  for (std::size_t c = 0; c < st.corners.size(); ++c)
    out += st.weights[c] * phi_mean[st.corners[c]];
  return 0.5 * (out + out.transpose()).eval();
}

Mat EffectiveModel::sigma(const Vec& z, bool* clamped) const {
  return spd_sqrt_clamped(phi(z, clamped));
}

double EffectiveModel::q_mass() const {
  double mass = 0.0;
  for (long k = 0; k < grid.size(); ++k) mass += Q[k];
  return mass * grid.cell_volume();
}

void EffectiveModel::check_invariants() const {
  for (long k = 0; k < grid.size(); ++k) {
    const Mat& s = sigma_node[k];
    if ((s - s.transpose()).norm() > 1e-10 * std::max(1.0, s.norm()))
      throw EstimationError("stored sigma node is not symmetric");
    const Mat resid = s * s - phi_mean[k];
    if (resid.norm() > 1e-10 * std::max(1.0, phi_mean[k].norm()))
      throw EstimationError("sigma node squared differs from the Phi mean");
  }
  const double mass = q_mass();
  if (mass < 0.98 || mass > 1.02) {
    std::ostringstream msg;
    msg << "Q integrates to " << mass
        << " over the grid; it must lie in [0.98, 1.02] "
           "(grid does not cover the support)";
    throw EstimationError(msg.str());
  }
}

namespace {

struct NodeAccumulator {
  long count = 0;
  Vec b_sum;
  Mat phi_sum;
};

void finalize_model(const SystemSpec& spec, const ZGrid& grid,
                    std::vector<NodeAccumulator>& acc, EffectiveModel& model,
                    double max_missing_interior) {
  const long total = grid.size();
  model.grid = grid;
  model.m = spec.m;
  model.b.assign(total, Vec::Zero(spec.m));
  model.phi_mean.assign(total, Mat::Zero(spec.m, spec.m));
  model.sigma_node.assign(total, Mat::Zero(spec.m, spec.m));
  model.Q.assign(total, 0.0);
  model.count.assign(total, 0);
  model.missing.assign(total, 0);

  long interior = 0, interior_missing = 0;
  for (long k = 0; k < total; ++k) {
    model.count[k] = acc[k].count;
    if (acc[k].count == 0) {
      model.missing[k] = 1;
      if (grid.is_interior(k)) ++interior_missing;
    } else {
      model.b[k] = acc[k].b_sum / static_cast<double>(acc[k].count);
      Mat phi = acc[k].phi_sum / static_cast<double>(acc[k].count);
      model.phi_mean[k] = 0.5 * (phi + phi.transpose());
      model.sigma_node[k] = spd_sqrt_clamped(model.phi_mean[k]);
    }
    if (grid.is_interior(k)) ++interior;
  }

  if (interior > 0 &&
      static_cast<double>(interior_missing) / interior > max_missing_interior) {
    std::ostringstream msg;
    msg << interior_missing << " of " << interior
        << " interior nodes are empty; the grid or sample size is inadequate";
    throw EstimationError(msg.str());
  }

  // Fill flagged nodes from their nearest populated axis neighbors so that
  // interpolation stays defined.
  for (long k = 0; k < total; ++k) {
    if (!model.missing[k]) continue;
    const auto idx = grid.unflatten(k);
    long found = 0;
    Vec b_fill = Vec::Zero(spec.m);
    Mat phi_fill = Mat::Zero(spec.m, spec.m);
    for (int d = 0; d < grid.dim() && found == 0; ++d) {
      for (int reach = 1; reach < static_cast<int>(grid.axis(d).size());
           ++reach) {
        for (int dir = -1; dir <= 1; dir += 2) {
          auto nb = idx;
          nb[d] += dir * reach;
          if (nb[d] < 0 || nb[d] >= static_cast<int>(grid.axis(d).size()))
            continue;
          const long flat = grid.flatten(nb);
          if (!model.missing[flat]) {
            b_fill += model.b[flat];
            phi_fill += model.phi_mean[flat];
            ++found;
          }
        }
        if (found > 0) break;
      }
    }
    if (found == 0) throw EstimationError("all grid nodes are empty");
    model.b[k] = b_fill / static_cast<double>(found);
    model.phi_mean[k] = phi_fill / static_cast<double>(found);
    model.sigma_node[k] = spd_sqrt_clamped(model.phi_mean[k]);
  }
}

}  // namespace

EffectiveModel estimate_effective(const SystemSpec& spec,
                                  const EstimationOptions& opts,
                                  const ZGrid& grid) {
  if (grid.dim() != spec.m)
    throw ConfigError("grid dimension must equal the reaction-coordinate dimension");
  const long total = grid.size();
  std::vector<NodeAccumulator> acc(total);
  EffectiveModel model;

  // Q always comes from binned occupancy of an equilibrium trajectory; in
  // binned mode the same pass also accumulates the conditional moments.
  std::vector<long> q_count(total, 0);
  long q_total = 0;
  const bool binned = opts.method == EstimationMethod::Binned;
  simulate_full(spec, opts.trajectory, opts.x0,
                [&](int, long rec, double, const Vec& x, const Vec& z) {
                  if (rec == 0) return;
                  ++q_total;
                  const long k = grid.bin(z);
                  if (k < 0) return;
                  ++q_count[k];
                  if (!binned) return;
                  auto& node = acc[k];
                  if (node.count == 0) {
                    node.b_sum = Vec::Zero(spec.m);
                    node.phi_sum = Mat::Zero(spec.m, spec.m);
                  }
                  ++node.count;
                  node.b_sum += generator_on_xi_all(spec, x);
                  node.phi_sum += phi_matrix(spec, x);
                });
  if (q_total == 0) throw EstimationError("no equilibrium samples recorded");

  if (!binned) {
    for (long k = 0; k < total; ++k) {
      FiberConfig fc;
      fc.z = grid.node(k);
      fc.start = opts.x0.point;
      fc.newton_tol = opts.newton_tol;
      fc.newton_max_iter = opts.newton_max_iter;
      fc.base = opts.fiber;
      auto& node = acc[k];
      node.b_sum = Vec::Zero(spec.m);
      node.phi_sum = Mat::Zero(spec.m, spec.m);
      simulate_fiber(spec, fc,
                     [&](int, long, double, const Vec& x, const Vec&) {
                       ++node.count;
                       node.b_sum += generator_on_xi_all(spec, x);
                       node.phi_sum += phi_matrix(spec, x);
                     });
    }
  }

  finalize_model(spec, grid, acc, model, opts.max_missing_interior);

  const double vol = grid.cell_volume();
  for (long k = 0; k < total; ++k)
    model.Q[k] = static_cast<double>(q_count[k]) /
                 (static_cast<double>(q_total) * vol);

  model.check_invariants();
  return model;
}

namespace {

// Gradient of a composite scalar x -> g(x) by central differences with the
// default step policy.
Vec composite_gradient(const ScalarFn& g, const Vec& x) {
  return fd_gradient(g, x);
}

}  // namespace

KappaEstimate estimate_kappas(const SystemSpec& spec,
                              const std::vector<Vec>& mu_samples) {
  KappaEstimate est;
  RunningStats s1, s2;
  for (const Vec& x : mu_samples) {
    ++est.total;
    double v1 = 0.0, v2 = 0.0;
    bool ok = true;
    try {
      const Mat a = mobility_at(spec, x);
      const Mat pi = projection_pi(spec, x);
      for (int i = 0; i < spec.m && ok; ++i) {
        const Vec grad = composite_gradient(
            [&spec, i](const Vec& y) { return generator_on_xi(spec, i, y); }, x);
        const Vec pg = pi * grad;
        v1 += pg.dot(a * pg);
      }
      for (int i = 0; i < spec.m && ok; ++i) {
        for (int j = i; j < spec.m; ++j) {
          const Vec grad = composite_gradient(
              [&spec, i, j](const Vec& y) {
                return spd_sqrt(phi_matrix(spec, y))(i, j);
              },
              x);
          const Vec pg = pi * grad;
          // Off-diagonal entries appear twice in the Frobenius sum.
          v2 += (i == j ? 1.0 : 2.0) * pg.dot(a * pg);
        }
      }
      if (!std::isfinite(v1) || !std::isfinite(v2)) ok = false;
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) {
      ++est.rejected;
      continue;
    }
    s1.add(v1);
    s2.add(v2);
  }
  if (est.total == 0) throw EstimationError("estimate_kappas got no samples");
  if (static_cast<double>(est.rejected) > 0.01 * static_cast<double>(est.total)) {
    std::ostringstream msg;
    msg << est.rejected << " of " << est.total
        << " samples rejected in estimate_kappas";
    throw EstimationError(msg.str());
  }
  est.kappa1_sq = s1.mean();
  est.kappa1_sq_se = s1.stderror();
  est.kappa2_sq = s2.mean();
  est.kappa2_sq_se = s2.stderror();
  est.kappa1 = std::sqrt(std::max(0.0, est.kappa1_sq));
  est.kappa2 = std::sqrt(std::max(0.0, est.kappa2_sq));
  return est;
}

LipschitzEstimate estimate_lipschitz(const EffectiveModel& model) {
  const ZGrid& grid = model.grid;
  LipschitzEstimate est;
  est.L_d = std::numeric_limits<double>::infinity();
  long pairs = 0;
  for (long k = 0; k < grid.size(); ++k) {
    if (model.missing[k]) continue;
    const auto idx = grid.unflatten(k);
    for (int d = 0; d < grid.dim(); ++d) {
      auto nb = idx;
      nb[d] += 1;
      if (nb[d] >= static_cast<int>(grid.axis(d).size())) continue;
      const long kn = grid.flatten(nb);
      if (model.missing[kn]) continue;
      ++pairs;
      const double dz = grid.step(d);
      const Vec db = model.b[kn] - model.b[k];
      est.L_b = std::max(est.L_b, db.norm() / dz);
      est.L_sigma = std::max(
          est.L_sigma, (model.sigma_node[kn] - model.sigma_node[k]).norm() / dz);
      // (b(z') - b(z)) . (z' - z) <= -L_d |z' - z|^2 along the axis step.
      est.L_d = std::min(est.L_d, -db[d] / dz);
    }
  }
  if (pairs == 0)
    throw EstimationError("no adjacent populated node pairs for Lipschitz bounds");
  return est;
}

void BoundParams::validate() const {
  const double vals[] = {kappa1, kappa2, rho,  L_b,        L_sigma,
                         L_d,    alpha,  beta, C1_sup_phi, C2_sup_A};
  for (double v : vals)
    if (!std::isfinite(v)) throw ConfigError("BoundParams entries must be finite");
  if (rho <= 0.0) throw ConfigError("BoundParams.rho must be positive");
  if (beta <= 0.0) throw ConfigError("BoundParams.beta must be positive");
}

}  // namespace effdyn
