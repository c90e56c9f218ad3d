#include "sffm/simulate.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace sffm {
namespace {

// Neumaier summation for the in-out fluid, so stopping levels are hit exactly.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

struct Chain {
  std::vector<double> rate;
  std::vector<std::discrete_distribution<int>> jump;
};

Chain MakeChain(const SffmModel<double>& model) {
  Chain ch;
  const int n = model.n();
  for (int i = 0; i < n; ++i) {
    ch.rate.push_back(-model.T()(i, i));
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = j == i ? 0.0 : model.T()(i, j);
    ch.jump.emplace_back(w.begin(), w.end());
  }
  return ch;
}

double Advance(double x, double c, double dt) { return std::max(0.0, x + c * dt); }

template <typename PathFn>
SampleBatch RunBatch(const SffmModel<double>& model, const SimConfig& config,
                     PathFn path) {
  if (config.replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (config.max_event_count < 1) throw std::invalid_argument("event cap must be >= 1");
  SampleBatch batch;
  batch.replications = config.replications;
  batch.records.resize(config.replications);
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = static_cast<int>(
      std::clamp<std::int64_t>(threads, 1, config.replications));
  auto work = [&](std::int64_t begin, std::int64_t end) {
    Chain chain = MakeChain(model);
    for (std::int64_t i = begin; i < end; ++i) {
      std::mt19937_64 rng(StreamSeed(config.seed, static_cast<std::uint64_t>(i)));
      SampleRecord rec = path(chain, rng);
      rec.replication = i;
      batch.records[i] = rec;
    }
  };
  if (threads == 1) {
    work(0, config.replications);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (config.replications + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::int64_t b = t * chunk;
      const std::int64_t e = std::min(config.replications, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  batch.phase_counts.assign(model.n(), 0);
  for (const SampleRecord& r : batch.records) {
    if (r.stop_reason == StopReason::kCapped) ++batch.capped;
    if (r.stop_reason == StopReason::kEscaped) ++batch.escaped;
    if (r.stop_reason == StopReason::kReached) ++batch.phase_counts[r.phase];
  }
  return batch;
}

}  // namespace

const char* ToString(StopReason r) {
  switch (r) {
    case StopReason::kReached: return "reached";
    case StopReason::kCapped: return "capped";
    case StopReason::kEscaped: return "escaped";
  }
  return "?";
}

std::uint64_t StreamSeed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::pair<int, double> sample_initial(const InitialDistribution<double>& init,
                                      std::mt19937_64& rng) {
  const int n = static_cast<int>(init.nu0.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  int last = 0;
  for (int j = 0; j < n; ++j) {
    if (init.point_mass(j) > 0) {
      last = j;
      if (u < init.point_mass(j)) return {j, 0.0};
      u -= init.point_mass(j);
    }
    const double dens = init.nu0(j) / init.lambda;
    if (dens > 0) {
      last = j;
      if (u < dens) {
        std::exponential_distribution<double> exp(init.lambda);
        return {j, exp(rng)};
      }
      u -= dens;
    }
  }
  // Rounding leftovers go to the last phase carrying mass.
  if (init.nu0(last) > 0) {
    std::exponential_distribution<double> exp(init.lambda);
    return {last, exp(rng)};
  }
  return {last, 0.0};
}

SampleBatch run_to_omega(const SffmModel<double>& model,
                         const InitialDistribution<double>& init, double y,
                         const SimConfig& config) {
  if (!(y > 0)) throw std::invalid_argument("run_to_omega: y must be positive");
  const auto& c = model.c();
  const auto& r = model.r();
  return RunBatch(model, config, [&](Chain& chain, std::mt19937_64& rng) {
    auto [phase, x] = sample_initial(init, rng);
    SampleRecord rec;
    CompensatedSum in_out, up, t;
    for (std::int64_t events = 0;; ++events) {
      if (events >= config.max_event_count) {
        rec.stop_reason = StopReason::kCapped;
        break;
      }
      std::exponential_distribution<double> hold(chain.rate[phase]);
      const double h = hold(rng);
      const double speed = std::abs(r(phase));
      const double need = (y - in_out.value()) / speed;
      if (h >= need) {
        x = Advance(x, c(phase), need);
        t.Add(need);
        if (r(phase) > 0) up.Add(need * r(phase));
        in_out.Add(need * speed);
        rec.stop_reason = StopReason::kReached;
        break;
      }
      x = Advance(x, c(phase), h);
      t.Add(h);
      if (r(phase) > 0) up.Add(h * r(phase));
      in_out.Add(h * speed);
      phase = chain.jump[phase](rng);
    }
    rec.phase = phase;
    rec.x = x;
    rec.t = t.value();
    rec.in_out = in_out.value();
    rec.up_shift = up.value();
    return rec;
  });
}

SampleBatch run_to_theta(const SffmModel<double>& model,
                         const InitialDistribution<double>& init,
                         const SimConfig& config) {
  const auto& c = model.c();
  const auto& r = model.r();
  const double drift_y = stability(model).drift_y;
  const double escape = config.escape_level;
  return RunBatch(model, config, [&](Chain& chain, std::mt19937_64& rng) {
    auto [phase, x] = sample_initial(init, rng);
    SampleRecord rec;
    CompensatedSum in_out, up, t;
    double level = 0;  // Y~, unbounded
    for (std::int64_t events = 0;; ++events) {
      if (events >= config.max_event_count) {
        rec.stop_reason = StopReason::kCapped;
        break;
      }
      std::exponential_distribution<double> hold(chain.rate[phase]);
      const double h = hold(rng);
      const double rate = r(phase);
      // The first holding interval leaves 0; later ones return when the
      // motion points back toward 0 and covers the distance.
      const bool toward = events > 0 && level * rate < 0;
      const double need = toward ? std::abs(level / rate) : h;
      if (toward && h >= need) {
        x = Advance(x, c(phase), need);
        t.Add(need);
        if (rate > 0) up.Add(need * rate);
        in_out.Add(need * std::abs(rate));
        level = 0;
        rec.stop_reason = StopReason::kReached;
        break;
      }
      x = Advance(x, c(phase), h);
      t.Add(h);
      if (rate > 0) up.Add(h * rate);
      in_out.Add(h * std::abs(rate));
      level += rate * h;
      if ((drift_y > 0 && level > escape) || (drift_y < 0 && level < -escape)) {
        rec.stop_reason = StopReason::kEscaped;
        break;
      }
      phase = chain.jump[phase](rng);
    }
    rec.phase = phase;
    rec.x = x;
    rec.t = t.value();
    rec.in_out = in_out.value();
    rec.up_shift = up.value();
    return rec;
  });
}

EmpiricalMeasure empirical_measure(const SampleBatch& batch, int n_phases,
                                   double v) {
  if (batch.replications < 1 || batch.records.empty()) {
    throw std::invalid_argument("empirical_measure: empty batch");
  }
  std::vector<std::int64_t> hits(n_phases, 0);
  for (const SampleRecord& r : batch.records) {
    if (r.stop_reason == StopReason::kReached && r.x <= v) ++hits[r.phase];
  }
  const double total = static_cast<double>(batch.replications);
  EmpiricalMeasure out;
  out.estimate.resize(n_phases);
  out.standard_error.resize(n_phases);
  for (int j = 0; j < n_phases; ++j) {
    const double p = hits[j] / total;
    out.estimate(j) = p;
    out.standard_error(j) = std::sqrt(p * (1 - p) / total);
  }
  return out;
}

void WriteRawSamples(const SampleBatch& batch, std::ostream& os) {
  const auto old = os.precision(17);
  os << "replication_index,stop_reason,phase,x,t\n";
  for (const SampleRecord& r : batch.records) {
    os << r.replication << ',' << ToString(r.stop_reason) << ',' << r.phase + 1
       << ',' << r.x << ',' << r.t << '\n';
  }
  os.precision(old);
}

}  // namespace sffm
