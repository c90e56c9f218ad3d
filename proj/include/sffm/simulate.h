#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "sffm/model.h"

namespace sffm {

struct SimConfig {
  std::uint64_t seed = 1;
  std::int64_t replications = 100000;
  std::int64_t max_event_count = 1000000;
  /// Paths whose |Y~| passes this level in the direction of the Y drift are
  /// declared non-returning. Infinity disables the early-out.
  double escape_level = std::numeric_limits<double>::infinity();
  /// 0 picks the hardware concurrency.
  int threads = 0;
};

enum class StopReason { kReached, kCapped, kEscaped };

const char* ToString(StopReason r);

struct SampleRecord {
  std::int64_t replication = 0;
  StopReason stop_reason = StopReason::kReached;
  int phase = 0;
  double x = 0;
  double t = 0;
  /// Integral of |r| up to the stop.
  double in_out = 0;
  /// Integral of max(r, 0) up to the stop.
  double up_shift = 0;
};

struct SampleBatch {
  std::vector<SampleRecord> records;
  std::int64_t replications = 0;
  std::int64_t capped = 0;
  std::int64_t escaped = 0;
  /// Count of reached stops per phase.
  std::vector<std::int64_t> phase_counts;
};

struct EmpiricalMeasure {
  RowVec<double> estimate;
  RowVec<double> standard_error;
};

/// Seed of replication stream `index`, a splitmix64 finalizer over the
/// counter so streams do not depend on scheduling.
std::uint64_t StreamSeed(std::uint64_t seed, std::uint64_t index);

/// Draws (phase, X(0)) from the initial distribution.
std::pair<int, double> sample_initial(const InitialDistribution<double>& init,
                                      std::mt19937_64& rng);

/// Stops each path when the in-out fluid reaches y.
SampleBatch run_to_omega(const SffmModel<double>& model,
                         const InitialDistribution<double>& init, double y,
                         const SimConfig& config);

/// Stops each path at the first return of the unbounded Y-fluid to 0.
SampleBatch run_to_theta(const SffmModel<double>& model,
                         const InitialDistribution<double>& init,
                         const SimConfig& config);

/// Per-phase frequency of {phase = j, x <= v} over all replications with
/// binomial standard errors.
EmpiricalMeasure empirical_measure(const SampleBatch& batch, int n_phases,
                                   double v);

/// One line per record: replication_index, stop_reason, phase, x, t.
void WriteRawSamples(const SampleBatch& batch, std::ostream& os);

}  // namespace sffm
