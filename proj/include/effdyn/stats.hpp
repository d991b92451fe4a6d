#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace effdyn {

// Mean / variance accumulator with associative merge, so per-replica
// accumulators can be folded in replica order.
class RunningStats {
public:
  void add(double v) {
    ++count_;
    sum_ += v;
    sum_sq_ += v * v;
  }
  void merge(const RunningStats& other) {
    count_ += other.count_;
    sum_ += other.sum_;
    sum_sq_ += other.sum_sq_;
  }
  std::int64_t count() const { return count_; }
  double mean() const { return count_ > 0 ? sum_ / static_cast<double>(count_) : 0.0; }
  double variance() const {
    if (count_ < 2) return 0.0;
    const double n = static_cast<double>(count_);
    const double v = (sum_sq_ - sum_ * sum_ / n) / (n - 1.0);
    return v > 0.0 ? v : 0.0;
  }
  double stddev() const { return std::sqrt(variance()); }
  // Standard error of the mean, assuming independent samples.
  double stderror() const {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

private:
  std::int64_t count_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

// Standard error via batch means; appropriate for autocorrelated series.
double batch_means_stderror(const std::vector<double>& series, int n_batches = 32);

// Lag-k autocovariance of a scalar series.
double autocovariance(const std::vector<double>& series, int lag);

// Ordinary least squares y = a + b x; returns slope b, its standard error,
// and intercept a.
struct LinearFit {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// FNV-1a 64-bit hash, used for config hashes and output checksums.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace effdyn
