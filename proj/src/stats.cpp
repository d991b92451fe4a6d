#include "effdyn/stats.hpp"

#include <string>

#include "effdyn/errors.hpp"

namespace effdyn {

double batch_means_stderror(const std::vector<double>& series, int n_batches) {
  const std::size_t n = series.size();
  if (n_batches < 2 || n < static_cast<std::size_t>(2 * n_batches)) return 0.0;
  const std::size_t batch = n / n_batches;
  RunningStats batches;
  for (int b = 0; b < n_batches; ++b) {
    double acc = 0.0;
    for (std::size_t i = b * batch; i < (b + 1) * batch; ++i) acc += series[i];
    batches.add(acc / static_cast<double>(batch));
  }
  return batches.stderror();
}

double autocovariance(const std::vector<double>& series, int lag) {
  const std::size_t n = series.size();
  if (lag < 0 || static_cast<std::size_t>(lag) >= n) return 0.0;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i)
    acc += (series[i] - mean) * (series[i + lag] - mean);
  return acc / static_cast<double>(n - lag);
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw EstimationError("least_squares needs at least 3 matched points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw EstimationError("degenerate abscissae in least_squares");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ss_res += r * r;
  }
  if (x.size() > 2) {
    const double s2 = ss_res / (n - 2.0);
    fit.slope_se = std::sqrt(s2 * n / denom);
  }
  return fit;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace effdyn
