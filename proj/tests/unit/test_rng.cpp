#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "ndpmpm/rng.hpp"

using ndpmpm::Rng;

TEST_CASE("rng: same seed gives the same stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("rng: derived streams depend on every tag") {
  auto first = [](std::initializer_list<std::uint64_t> tags) { return Rng::derive(7, tags).next_u64(); };
  CHECK(first({1, 2, 3}) == first({1, 2, 3}));
  CHECK(first({1, 2, 3}) != first({1, 2, 4}));
  CHECK(first({1, 2, 3}) != first({2, 1, 3}));
  CHECK(Rng::derive(7, {1}).next_u64() != Rng::derive(8, {1}).next_u64());
}

TEST_CASE("rng: uniform stays in the open unit interval with mean 1/2") {
  Rng rng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("rng: gamma moments") {
  for (double shape : {0.05, 0.5, 1.0, 3.7}) {
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.gamma(shape);
      REQUIRE(x >= 0.0);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    // mean shape, variance shape; tolerance of 5 standard errors
    CHECK(std::abs(mean - shape) < 5.0 * std::sqrt(shape / n));
    CHECK(var == doctest::Approx(shape).epsilon(0.08));
  }
}

TEST_CASE("rng: log_gamma stays finite for tiny shapes") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(std::isfinite(rng.log_gamma(1e-4)));
}

TEST_CASE("rng: beta mean") {
  Rng rng(5);
  const double a = 2.0, b = 5.0;
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += rng.beta(a, b);
  CHECK(sum / n == doctest::Approx(a / (a + b)).epsilon(0.01));
}

TEST_CASE("rng: dirichlet draws lie on the simplex, also for tiny weights") {
  Rng rng(9);
  std::vector<double> w{0.01, 0.02, 5.0, 1e-3};
  std::vector<double> out(4);
  for (int i = 0; i < 1000; ++i) {
    rng.dirichlet(w, out);
    for (double x : out) REQUIRE(x >= 0.0);
    CHECK(std::accumulate(out.begin(), out.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rng: categorical frequencies") {
  Rng rng(13);
  std::vector<double> w{1.0, 2.0, 7.0};
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[rng.categorical(w)];
  CHECK(counts[0] / double(n) == doctest::Approx(0.1).epsilon(0.05));
  CHECK(counts[2] / double(n) == doctest::Approx(0.7).epsilon(0.02));

  std::vector<double> logw{std::log(1.0) - 800, std::log(2.0) - 800, std::log(7.0) - 800};
  std::fill(counts.begin(), counts.end(), 0);
  for (int i = 0; i < n; ++i) ++counts[rng.categorical_log(logw)];
  CHECK(counts[1] / double(n) == doctest::Approx(0.2).epsilon(0.03));
}

TEST_CASE("rng: below is uniform over the range") {
  Rng rng(17);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) {
    const auto x = rng.below(5);
    REQUIRE(x < 5);
    ++counts[x];
  }
  for (int c : counts) CHECK(c == doctest::Approx(10000).epsilon(0.05));
}

TEST_CASE("rng: beta_split keeps the complement when the draw rounds to 1") {
  Rng rng(19);
  bool rounded = false;
  for (int i = 0; i < 2000; ++i) {
    const auto d = rng.beta_split(3.0, 0.02);
    REQUIRE(std::isfinite(d.log_complement));
    if (d.value == 1.0) {
      rounded = true;
      CHECK(d.log_complement < -36.0);
    } else if (1.0 - d.value > 1e-6) {
      CHECK(d.log_complement == doctest::Approx(std::log1p(-d.value)).epsilon(1e-9));
    }
  }
  CHECK(rounded);
  // complement mean: Beta(0.02, 3) has mean 0.02 / 3.02
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += std::exp(rng.beta_split(3.0, 0.02).log_complement);
  CHECK(sum / n == doctest::Approx(0.02 / 3.02).epsilon(0.05));
}
