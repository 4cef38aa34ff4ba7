#ifndef RUNTUMBLE_STATS_HPP
#define RUNTUMBLE_STATS_HPP

#include <cstdint>
#include <limits>
#include <vector>

namespace rtp {

/// Streaming log(sum exp(L_i)) accumulator.
struct LogSumExp {
  double max_log = -std::numeric_limits<double>::infinity();
  double scaled_sum = 0.0;  // sum of exp(L_i - max_log)
  double scaled_sq = 0.0;   // sum of exp(2(L_i - max_log)), for ESS
  long count = 0;

  void add(double log_value);
  void merge(const LogSumExp& other);
  double log_sum() const;       // log sum exp(L_i)
  double log_sum_sq() const;    // log sum exp(2 L_i)
  double effective_sample_size() const;  // (sum w)^2 / sum w^2
};

/// One batch of replica statistics: per-coordinate first and second moments
/// of the endpoint plus one exponential-moment accumulator per requested
/// tilt. Batches are the merge unit: every replica belongs to a fixed batch
/// determined by its index, so pooled results do not depend on how replicas
/// were distributed over workers.
struct BatchStats {
  long count = 0;
  std::vector<double> sum;    // per coordinate
  std::vector<double> sumsq;  // per coordinate
  std::vector<LogSumExp> exps;

  void init(int dimension, int n_tilts);
  void merge(const BatchStats& other);
};

struct MeanVar {
  double mean = 0;
  double mean_se = 0;
  double var = 0;
  double var_se = 0;
};

/// Aggregated Monte Carlo statistics, mergeable across parallel replicas.
/// Replica i of n always lands in batch i*batches/n.
struct ReplicaStats {
  long total = 0;
  int dimension = 0;
  std::vector<BatchStats> batches;

  static ReplicaStats create(int dimension, int n_tilts, int n_batches);
  static int default_batches(long n);  // ~sqrt(n), clipped to [8, 1024]
  int batch_of(long replica, long n) const;

  void merge(const ReplicaStats& other);

  /// Batch-means mean and variance with standard errors, per coordinate.
  MeanVar moments(int coordinate) const;

  /// (log mean exp, delete-one-batch jackknife standard error of that log,
  ///  effective sample size) for tilt index k.
  struct LogMeanExp {
    double log_mean;
    double jackknife_se;
    double ess;
  };
  LogMeanExp log_mean_exp(int tilt) const;
};

/// Two-sided Kolmogorov-Smirnov distance between the sample (sorted
/// internally) and the standard normal CDF.
double ks_statistic_normal(std::vector<double> sample);

/// Critical value of the one-sample KS statistic at significance level
/// `alpha` (Stephens' finite-n approximation).
double ks_critical(long n, double alpha);

/// Least-squares slope of log(y) against log(x); the fitted convergence
/// order of a deviation sequence. Pairs with y <= 0 are skipped.
double fitted_order(const std::vector<double>& x,
                    const std::vector<double>& y);

}  // namespace rtp

#endif
