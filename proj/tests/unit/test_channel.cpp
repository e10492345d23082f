#include <doctest.h>

#include <cmath>
#include <sstream>

#include "d2d/channel.hpp"
#include "d2d/errors.hpp"
#include "support.hpp"

using namespace d2d;

TEST_CASE("path loss breakpoint constants") {
  const RadioConfig cfg;
  // lambda = 0.125 m, h1 = h2 = 1.5 m
  CHECK(cfg.breakpoint_distance_m() == doctest::Approx(72.0).epsilon(1e-12));
  CHECK(cfg.breakpoint_loss_db() == doctest::Approx(71.17204703562655).epsilon(1e-12));
  CHECK(path_loss_db(72.0, cfg) == doctest::Approx(cfg.breakpoint_loss_db() + 6.0).epsilon(1e-14));
  CHECK(path_loss_db(720.0, cfg) == doctest::Approx(117.17204703562655).epsilon(1e-12));
  // d <= R_bp branch: 20 dB per decade
  CHECK(path_loss_db(7.2, cfg) == doctest::Approx(77.17204703562655 - 20.0).epsilon(1e-12));
}

TEST_CASE("path loss is continuous and increasing") {
  const RadioConfig cfg;
  const double r = cfg.breakpoint_distance_m();
  CHECK(std::abs(path_loss_db(r * (1 - 1e-12), cfg) - path_loss_db(r * (1 + 1e-12), cfg)) < 1e-9);
  double prev = path_loss_db(0.5, cfg);
  for (double d = 1.0; d < 2000.0; d *= 1.3) {
    const double now = path_loss_db(d, cfg);
    CHECK(now > prev);
    prev = now;
  }
  CHECK_THROWS_AS(path_loss_db(0.0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(-3.0, cfg), std::invalid_argument);
}

TEST_CASE("noise power from PSD and bandwidth") {
  const RadioConfig cfg;
  CHECK(cfg.noise_power_dbm() == doctest::Approx(-102.01029995663981).epsilon(1e-12));
  CHECK(cfg.noise_power_w() == doctest::Approx(6.294627058970829e-14).epsilon(1e-10));
  CHECK(cfg.tx_power_w() == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("gain at the breakpoint distance") {
  const RadioConfig cfg;
  Layout l{500.0, {{100.0, 100.0}, {300.0, 300.0}}, {{100.0, 130.0}, {172.0, 100.0}}};
  const GainMatrix g = gain_matrix(l, cfg);
  // tx 0 -> rx 1 is 72 m
  CHECK(g(0, 1) == doctest::Approx(6.064504134023616e-08).epsilon(1e-10));
  CHECK(g(0, 0) > g(0, 1));
}

TEST_CASE("gain matrix symmetry and monotonicity") {
  const RadioConfig cfg;
  // Two pairs mirrored: tx_i -> rx_j distances coincide.
  Layout l{500.0, {{100.0, 100.0}, {200.0, 100.0}}, {{100.0, 110.0}, {200.0, 110.0}}};
  const GainMatrix g = gain_matrix(l, cfg);
  CHECK(g(0, 1) == g(1, 0));
  Layout near{500.0, {{10.0, 10.0}}, {{10.0, 12.0}}};
  Layout far{500.0, {{10.0, 10.0}}, {{10.0, 50.0}}};
  CHECK(gain_matrix(near, cfg)(0, 0) > gain_matrix(far, cfg)(0, 0));
  Layout clash{500.0, {{10.0, 10.0}, {30.0, 30.0}}, {{10.0, 12.0}, {10.0, 10.0}}};
  CHECK_THROWS_AS(gain_matrix(clash, cfg), std::invalid_argument);
}

TEST_CASE("sample_layout respects the geometry invariants") {
  Rng rng(3);
  double sum = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const Layout l = sample_layout(1, 500.0, rng);
    CHECK_NOTHROW(validate_layout(l));
    sum += distance(l.tx[0], l.rx[0]);
  }
  // Uniform(2, 40) has mean 21; 2% band.
  CHECK(std::abs(sum / n - 21.0) < 0.02 * 21.0);

  Rng tiny(4);
  const Layout small = sample_layout(30, 45.0, tiny);
  CHECK_NOTHROW(validate_layout(small));

  Rng a(77), b(77);
  CHECK(sample_layout(20, 500.0, a) == sample_layout(20, 500.0, b));
}

TEST_CASE("sinr matches its definition") {
  const RadioConfig cfg;
  Rng rng(8);
  const Layout l = test::dense_layout(4, rng);
  const GainMatrix g = gain_matrix(l, cfg);
  const FadingSample f = sample_fading(4, rng);
  Action a{1, 0, 1, 1};
  CHECK(sinr(1, g, f, a, cfg) == 0.0);
  Action only{0, 0, 1, 0};
  CHECK(sinr(2, g, f, only, cfg) ==
        doctest::Approx(cfg.tx_power_w() * g(2, 2) * f.s(2, 2) / cfg.noise_power_w()));
  const double base = sinr(0, g, f, a, cfg);
  FadingSample louder = f;
  louder.s(2, 0) *= 2.0;
  CHECK(sinr(0, g, louder, a, cfg) < base);
  FadingSample stronger = f;
  stronger.s(0, 0) *= 2.0;
  CHECK(sinr(0, g, stronger, a, cfg) > base);
}

TEST_CASE("fading draws are exponential and reproducible") {
  Rng a(12), b(12);
  const FadingSample f1 = sample_fading(5, a);
  const FadingSample f2 = sample_fading(5, b);
  CHECK(f1.s == f2.s);
  for (double v : f1.s.values()) CHECK(v >= 0.0);
}

TEST_CASE("layout text round trip and parse errors") {
  Rng rng(21);
  const Layout l = sample_layout(7, 500.0, rng);
  std::stringstream s;
  write_layout(s, l);
  CHECK(read_layout(s) == l);

  std::istringstream bad("# header comment\n2 500\n1 2 3 4\n1 2 x 4\n");
  try {
    read_layout(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  std::istringstream short_file("3 500\n1 2 3 4\n");
  CHECK_THROWS_AS(read_layout(short_file), ParseError);
}

TEST_CASE("radio config validation") {
  RadioConfig cfg;
  cfg.sinr_threshold = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RadioConfig{};
  cfg.interference_cutoff_m = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RadioConfig{};
  cfg.tx_power_dbm = std::nan("");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(RadioConfig{}.validate());
}
