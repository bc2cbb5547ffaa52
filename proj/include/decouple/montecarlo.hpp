#pragma once

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "decouple/errors.hpp"
#include "decouple/kernels.hpp"
#include "decouple/moments.hpp"
#include "decouple/rng.hpp"

namespace decouple {

// Estimator settings. Results depend only on (n_samples, seed, n_streams):
// batch is an I/O granularity hint and never changes accumulation order, and
// streams are combined in index order regardless of scheduling, so identical
// configs give bit-identical estimates no matter how work is scheduled.
struct EstimatorConfig {
  std::uint64_t n_samples = 100'000;
  std::uint64_t seed = 0;
  int n_streams = 1;
  std::uint64_t batch = 8'192;

  void validate() const {
    if (n_samples < 100)
      throw ValidationError("estimator: n_samples must be >= 100");
    if (n_streams < 1) throw ValidationError("estimator: n_streams must be >= 1");
  }
};

enum class TailSide { above, two_sided_centered };

struct TailEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
};

namespace detail {

inline constexpr std::size_t kReduceBlock = 4096;

// Force stream-sequential execution (DECOUPLE_SEQUENTIAL=1); the estimate is
// identical either way, this only exists so tests can prove it.
bool force_sequential();

struct MomentAccum {
  std::uint64_t n = 0;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  void add_block(std::span<const double> x) {
    s1 += kernels::sum(x);
    s2 += kernels::sum_sq(x);
    s4 += kernels::sum_quart(x);
    n += x.size();
  }
  void merge(const MomentAccum& o) {
    n += o.n;
    s1 += o.s1;
    s2 += o.s2;
    s4 += o.s4;
  }
};

struct TailAccum {
  std::uint64_t n = 0;
  std::uint64_t hits = 0;
  void merge(const TailAccum& o) {
    n += o.n;
    hits += o.hits;
  }
};

// Per-stream sample counts: the first n % streams streams get one extra.
inline std::uint64_t stream_count(std::uint64_t n, int streams, int k) {
  const auto s = static_cast<std::uint64_t>(streams);
  return n / s + (static_cast<std::uint64_t>(k) < n % s ? 1 : 0);
}

template <class Sampler, class Accum, class BlockFn>
Accum run_stream(const Sampler& sampler, std::uint64_t seed, int stream,
                 std::uint64_t count, BlockFn&& block_fn) {
  RngStream rng(seed, static_cast<std::uint64_t>(stream));
  std::vector<double> buf(std::min<std::uint64_t>(count, kReduceBlock));
  Accum acc;
  std::uint64_t left = count;
  while (left > 0) {
    const std::size_t k =
        static_cast<std::size_t>(std::min<std::uint64_t>(left, kReduceBlock));
    for (std::size_t i = 0; i < k; ++i) buf[i] = sampler(rng);
    block_fn(acc, std::span<const double>(buf.data(), k));
    left -= k;
  }
  return acc;
}

template <class Sampler, class Accum, class BlockFn>
Accum run_streams(const Sampler& sampler, const EstimatorConfig& cfg,
                  BlockFn&& block_fn) {
  std::vector<Accum> partials(static_cast<std::size_t>(cfg.n_streams));
  if (cfg.n_streams == 1 || force_sequential()) {
    for (int k = 0; k < cfg.n_streams; ++k)
      partials[static_cast<std::size_t>(k)] = run_stream<Sampler, Accum>(
          sampler, cfg.seed, k, stream_count(cfg.n_samples, cfg.n_streams, k),
          block_fn);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(cfg.n_streams));
    for (int k = 0; k < cfg.n_streams; ++k)
      workers.emplace_back([&, k] {
        partials[static_cast<std::size_t>(k)] = run_stream<Sampler, Accum>(
            sampler, cfg.seed, k, stream_count(cfg.n_samples, cfg.n_streams, k),
            block_fn);
      });
    for (auto& w : workers) w.join();
  }
  Accum total;  // combined in fixed stream order
  for (const Accum& p : partials) total.merge(p);
  return total;
}

}  // namespace detail

// Sample mean / second moment with plug-in CLT standard errors. The sampler
// is any const-invocable double(RngStream&); it must be a deterministic
// function of the stream state and safe to call from several threads at once.
template <class Sampler>
MomentSummary estimate_moments(const Sampler& sampler, const EstimatorConfig& cfg) {
  cfg.validate();
  const auto acc = detail::run_streams<Sampler, detail::MomentAccum>(
      sampler, cfg,
      [](detail::MomentAccum& a, std::span<const double> x) { a.add_block(x); });

  const double n = static_cast<double>(acc.n);
  MomentSummary m;
  m.kind = MomentSummary::Kind::estimated;
  m.n_samples = acc.n;
  m.seed = cfg.seed;
  m.mean = acc.s1 / n;
  m.second_moment = acc.s2 / n;
  m.variance = m.second_moment - m.mean * m.mean;
  const double var_x = std::max(0.0, (acc.s2 - n * m.mean * m.mean) / (n - 1.0));
  m.std_error = std::sqrt(var_x / n);
  const double var_x2 =
      std::max(0.0, (acc.s4 - n * m.second_moment * m.second_moment) / (n - 1.0));
  m.second_moment_std_error = std::sqrt(var_x2 / n);
  return m;
}

// Binomial proportion estimate of P(X > threshold) (side = above) or
// P(|X - center| > threshold) (side = two_sided_centered).
template <class Sampler>
TailEstimate estimate_tail(const Sampler& sampler, double threshold, TailSide side,
                           const EstimatorConfig& cfg, double center = 0.0) {
  cfg.validate();
  const auto acc = detail::run_streams<Sampler, detail::TailAccum>(
      sampler, cfg, [&](detail::TailAccum& a, std::span<const double> x) {
        a.hits += side == TailSide::above
                      ? kernels::count_above(x, threshold)
                      : kernels::count_abs_deviation_above(x, center, threshold);
        a.n += x.size();
      });
  TailEstimate t;
  t.n_samples = acc.n;
  t.p_hat = static_cast<double>(acc.hits) / static_cast<double>(acc.n);
  t.std_error = std::sqrt(t.p_hat * (1.0 - t.p_hat) / static_cast<double>(acc.n));
  return t;
}

struct ZScores {
  double mean = 0.0;
  double second_moment = 0.0;
};

// (estimate - exact) / SE per field; a zero SE with a discrepancy beyond the
// default tolerance is flagged as inconsistent.
ZScores zscores(const MomentSummary& estimate, const MomentSummary& exact);

// Max |z| across the comparable fields; the acceptance gate is |z| <= 4.
double zscore(const MomentSummary& estimate, const MomentSummary& exact);

}  // namespace decouple
