#include "runtumble/stats.hpp"

#include <algorithm>
#include <cmath>

#include "runtumble/errors.hpp"

namespace rtp {

void LogSumExp::add(double log_value) {
  if (log_value > max_log) {
    const double shift = max_log - log_value;
    scaled_sum = scaled_sum * std::exp(shift) + 1.0;
    scaled_sq = scaled_sq * std::exp(2.0 * shift) + 1.0;
    max_log = log_value;
  } else {
    const double d = log_value - max_log;
    scaled_sum += std::exp(d);
    scaled_sq += std::exp(2.0 * d);
  }
  ++count;
}

void LogSumExp::merge(const LogSumExp& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  if (other.max_log > max_log) {
    const double shift = max_log - other.max_log;
    scaled_sum = scaled_sum * std::exp(shift) + other.scaled_sum;
    scaled_sq = scaled_sq * std::exp(2.0 * shift) + other.scaled_sq;
    max_log = other.max_log;
  } else {
    const double shift = other.max_log - max_log;
    scaled_sum += other.scaled_sum * std::exp(shift);
    scaled_sq += other.scaled_sq * std::exp(2.0 * shift);
  }
  count += other.count;
}

double LogSumExp::log_sum() const { return max_log + std::log(scaled_sum); }

double LogSumExp::log_sum_sq() const {
  return 2.0 * max_log + std::log(scaled_sq);
}

double LogSumExp::effective_sample_size() const {
  if (count == 0) return 0.0;
  return std::exp(2.0 * log_sum() - log_sum_sq());
}

void BatchStats::init(int dimension, int n_tilts) {
  count = 0;
  sum.assign(dimension, 0.0);
  sumsq.assign(dimension, 0.0);
  exps.assign(n_tilts, LogSumExp{});
}

void BatchStats::merge(const BatchStats& other) {
  count += other.count;
  for (std::size_t k = 0; k < sum.size(); ++k) {
    sum[k] += other.sum[k];
    sumsq[k] += other.sumsq[k];
  }
  for (std::size_t k = 0; k < exps.size(); ++k) exps[k].merge(other.exps[k]);
}

ReplicaStats ReplicaStats::create(int dimension, int n_tilts, int n_batches) {
  ReplicaStats s;
  s.dimension = dimension;
  s.batches.resize(static_cast<std::size_t>(n_batches));
  for (auto& b : s.batches) b.init(dimension, n_tilts);
  return s;
}

int ReplicaStats::default_batches(long n) {
  long b = static_cast<long>(std::sqrt(static_cast<double>(n)));
  return static_cast<int>(std::clamp<long>(b, 8, 1024));
}

int ReplicaStats::batch_of(long replica, long n) const {
  return static_cast<int>((replica * static_cast<long>(batches.size())) / n);
}

void ReplicaStats::merge(const ReplicaStats& other) {
  if (other.batches.size() != batches.size() || other.dimension != dimension)
    throw ParameterError("merging incompatible ReplicaStats");
  total += other.total;
  for (std::size_t b = 0; b < batches.size(); ++b)
    batches[b].merge(other.batches[b]);
}

MeanVar ReplicaStats::moments(int coordinate) const {
  double s = 0.0, sq = 0.0;
  long n = 0;
  for (const auto& b : batches) {
    s += b.sum[coordinate];
    sq += b.sumsq[coordinate];
    n += b.count;
  }
  MeanVar out;
  out.mean = s / static_cast<double>(n);
  out.var = (sq - s * s / static_cast<double>(n)) / static_cast<double>(n - 1);

  // Spread of per-batch statistics around the pooled values.
  double dm = 0.0, dv = 0.0;
  int used = 0;
  for (const auto& b : batches) {
    if (b.count < 2) continue;
    const double nb = static_cast<double>(b.count);
    const double bm = b.sum[coordinate] / nb;
    const double bv =
        (b.sumsq[coordinate] - b.sum[coordinate] * b.sum[coordinate] / nb) /
        (nb - 1.0);
    dm += (bm - out.mean) * (bm - out.mean);
    dv += (bv - out.var) * (bv - out.var);
    ++used;
  }
  if (used > 1) {
    out.mean_se = std::sqrt(dm / (used * (used - 1.0)));
    out.var_se = std::sqrt(dv / (used * (used - 1.0)));
  }
  return out;
}

ReplicaStats::LogMeanExp ReplicaStats::log_mean_exp(int tilt) const {
  LogSumExp all;
  long n = 0;
  for (const auto& b : batches) {
    all.merge(b.exps[tilt]);
    n += b.count;
  }
  LogMeanExp out;
  out.log_mean = all.log_sum() - std::log(static_cast<double>(n));
  out.ess = all.effective_sample_size();

  // Delete-one-batch jackknife on the log of the mean.
  const double lse = all.log_sum();
  std::vector<double> leave_out;
  leave_out.reserve(batches.size());
  for (const auto& b : batches) {
    if (b.count == 0) continue;
    const double frac = std::exp(b.exps[tilt].log_sum() - lse);
    if (frac >= 1.0) {
      // One batch carries all the weight; the jackknife is undefined.
      out.jackknife_se = std::numeric_limits<double>::infinity();
      return out;
    }
    leave_out.push_back(lse + std::log1p(-frac) -
                        std::log(static_cast<double>(n - b.count)));
  }
  const std::size_t m = leave_out.size();
  double mean = 0.0;
  for (double v : leave_out) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : leave_out) ss += (v - mean) * (v - mean);
  out.jackknife_se =
      std::sqrt(static_cast<double>(m - 1) / static_cast<double>(m) * ss);
  return out;
}

double ks_statistic_normal(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-sample[i] / std::sqrt(2.0));
    const double hi = (static_cast<double>(i) + 1.0) / n - cdf;
    const double lo = cdf - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return d;
}

double ks_critical(long n, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double sn = std::sqrt(static_cast<double>(n));
  return c / (sn + 0.12 + 0.11 / sn);
}

double fitted_order(const std::vector<double>& x,
                    const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(y[i] > 0.0) || !(x[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace rtp
