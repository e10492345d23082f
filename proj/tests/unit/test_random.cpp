#include <doctest.h>

#include <cmath>
#include <set>

#include "d2d/random.hpp"

using namespace d2d;

TEST_CASE("rng is reproducible and streams differ") {
  Rng a(42), b(42), c(derive_seed(42, stream::layout, 0));
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  CHECK(derive_seed(42, stream::layout, 0) != derive_seed(42, stream::weights, 0));
  CHECK(derive_seed(42, stream::layout, 0) != derive_seed(42, stream::layout, 1));
  CHECK(derive_seed(42, stream::layout, 0) != derive_seed(43, stream::layout, 0));
  (void)c;
}

TEST_CASE("rng uniform, exponential and below moments") {
  Rng rng(5);
  const int n = 200000;
  double su = 0, se = 0;
  std::set<std::uint64_t> seen;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    su += u;
    se += rng.exponential();
    seen.insert(rng.below(7));
  }
  // 5 sigma bands: sd(u) = 0.2887, sd(exp) = 1
  CHECK(std::abs(su / n - 0.5) < 5 * 0.2887 / std::sqrt(n));
  CHECK(std::abs(se / n - 1.0) < 5 * 1.0 / std::sqrt(n));
  CHECK(seen.size() == 7);
  CHECK(*seen.rbegin() == 6);
}

TEST_CASE("fading field is a pure function of its coordinates") {
  const FadingField f(9), g(9), h(10);
  CHECK(f.power(3, 1, 2) == g.power(3, 1, 2));
  CHECK(f.power(3, 1, 2) != h.power(3, 1, 2));
  CHECK(f.power(3, 1, 2) != f.power(3, 2, 1));
  CHECK(f.power(3, 1, 2) != f.power(4, 1, 2));
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    const double x = f.power(static_cast<std::uint64_t>(t), 0, 1);
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n - 1.0) < 5.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 2.0) < 5.0 * std::sqrt(20.0) / std::sqrt(n));  // E[X^2] = 2, Var = 20
}
