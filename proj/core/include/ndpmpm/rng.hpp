#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace ndpmpm {

/// xoshiro256** generator with counter-derived substreams.
///
/// Every random draw in the library comes from a stream keyed by
/// (seed, tag...). Parallel loops derive one stream per work item, so the
/// output never depends on how items are scheduled across threads. All
/// distributions are implemented here rather than taken from <random> so
/// that streams are reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  /// Stream for the key (seed, tags...). Distinct keys give independent streams.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Gamma(shape, rate=1).
  double gamma(double shape);
  /// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
  double log_gamma(double shape);
  double beta(double a, double b);
  /// Beta draw together with log(1 - draw), exact even when the draw rounds to 1.
  struct BetaDraw {
    double value;
    double log_complement;
  };
  BetaDraw beta_split(double a, double b);
  /// Gamma with shape/rate parametrization.
  double gamma_rate(double shape, double rate) { return gamma(shape) / rate; }

  /// Dirichlet draw written into `out` (same size as `weights`).
  void dirichlet(std::span<const double> weights, std::span<double> out);

  /// Index drawn proportional to `weights` (need not be normalized).
  std::size_t categorical(std::span<const double> weights);
  /// Index drawn proportional to exp(log_weights).
  std::size_t categorical_log(std::span<const double> log_weights);
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::uint64_t s_[4];
};

/// splitmix64 finalizer; exposed for key hashing.
std::uint64_t mix64(std::uint64_t x);

/// Stage tags used when deriving substreams inside the samplers.
enum class Stream : std::uint64_t {
  kInit = 1,
  kLatentG,
  kLatentM,
  kHouseholdSticks,
  kIndividualSticks,
  kLambda,
  kPhi,
  kAlpha,
  kBeta,
  kAugment,
  kSynthesis,
  kSimulate,
  kSample,
  kPrior,
};

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace ndpmpm
