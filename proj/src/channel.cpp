#include "d2d/channel.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "d2d/errors.hpp"

namespace d2d {

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) noexcept { return 10.0 * std::log10(linear); }
double dbm_to_watts(double dbm) noexcept { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double RadioConfig::breakpoint_distance_m() const noexcept {
  return 4.0 * tx_antenna_height_m * rx_antenna_height_m / wavelength_m();
}

double RadioConfig::breakpoint_loss_db() const noexcept {
  const double lambda = wavelength_m();
  return std::abs(20.0 * std::log10(lambda * lambda / (8.0 * std::numbers::pi *
                                                        tx_antenna_height_m *
                                                        rx_antenna_height_m)));
}

double RadioConfig::noise_power_dbm() const noexcept {
  return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz);
}

void RadioConfig::validate() const {
  const double values[] = {carrier_hz,       bandwidth_hz,     tx_antenna_height_m,
                           rx_antenna_height_m, antenna_gain_dbi, tx_power_dbm,
                           noise_psd_dbm_hz, sinr_threshold,   interference_cutoff_m};
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("radio config has a non-finite value");
  }
  if (carrier_hz <= 0 || bandwidth_hz <= 0) {
    throw std::invalid_argument("carrier and bandwidth must be positive");
  }
  if (tx_antenna_height_m <= 0 || rx_antenna_height_m <= 0) {
    throw std::invalid_argument("antenna heights must be positive");
  }
  if (sinr_threshold <= 0) throw std::invalid_argument("SINR threshold must be positive");
  if (interference_cutoff_m <= 0) throw std::invalid_argument("interference cutoff must be positive");
}

double path_loss_db(double distance_m, const RadioConfig& cfg) {
  if (!(distance_m > 0.0)) {
    throw std::invalid_argument("path loss needs a positive distance, got " +
                                std::to_string(distance_m));
  }
  const double r_bp = cfg.breakpoint_distance_m();
  const double slope = distance_m <= r_bp ? 20.0 : 40.0;
  return cfg.breakpoint_loss_db() + 6.0 + slope * std::log10(distance_m / r_bp);
}

Layout sample_layout(std::size_t pairs, double area_length_m, Rng& rng) {
  if (pairs == 0) throw std::invalid_argument("layout needs at least one pair");
  if (!(area_length_m > 0.0)) throw std::invalid_argument("area length must be positive");
  if (area_length_m * std::numbers::sqrt2 < kMinPairDistance) {
    throw std::invalid_argument("area too small to hold a pair at the minimum distance");
  }
  Layout layout;
  layout.area_length_m = area_length_m;
  layout.tx.reserve(pairs);
  layout.rx.reserve(pairs);
  auto inside = [area_length_m](Point p) {
    return p.x >= 0.0 && p.x <= area_length_m && p.y >= 0.0 && p.y <= area_length_m;
  };
  for (std::size_t i = 0; i < pairs; ++i) {
    const Point tx{rng.uniform(0.0, area_length_m), rng.uniform(0.0, area_length_m)};
    Point rx;
    for (;;) {
      const double d = rng.uniform(kMinPairDistance, kMaxPairDistance);
      bool placed = false;
      // A distance with no admissible angle only happens in tiny areas; redraw it then.
      for (int attempt = 0; attempt < 256 && !placed; ++attempt) {
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        rx = {tx.x + d * std::cos(theta), tx.y + d * std::sin(theta)};
        placed = inside(rx);
      }
      if (placed) break;
    }
    layout.tx.push_back(tx);
    layout.rx.push_back(rx);
  }
  return layout;
}

void validate_layout(const Layout& layout) {
  if (layout.tx.size() != layout.rx.size() || layout.tx.empty()) {
    throw std::invalid_argument("layout must hold the same nonzero number of tx and rx");
  }
  const double len = layout.area_length_m;
  auto inside = [len](Point p) { return p.x >= 0.0 && p.x <= len && p.y >= 0.0 && p.y <= len; };
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (!inside(layout.tx[i]) || !inside(layout.rx[i])) {
      throw std::invalid_argument("pair " + std::to_string(i) + " lies outside the area");
    }
    const double d = distance(layout.tx[i], layout.rx[i]);
    // Tolerate rounding from text round trips.
    if (d < kMinPairDistance - 1e-9 || d > kMaxPairDistance + 1e-9) {
      throw std::invalid_argument("pair " + std::to_string(i) + " distance out of [2, 40] m");
    }
  }
}

GainMatrix gain_matrix(const Layout& layout, const RadioConfig& cfg) {
  const std::size_t m = layout.size();
  GainMatrix gains{Matrix(m, m)};
  const double g_total = cfg.total_antenna_gain_db();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = distance(layout.tx[i], layout.rx[j]);
      if (d <= 0.0) {
        throw std::invalid_argument("transmitter " + std::to_string(i) +
                                    " coincides with receiver " + std::to_string(j));
      }
      gains.h(i, j) = db_to_linear(g_total - path_loss_db(d, cfg));
    }
  }
  return gains;
}

FadingSample sample_fading(std::size_t pairs, Rng& rng) {
  FadingSample f{Matrix(pairs, pairs)};
  for (double& v : f.s.values()) v = rng.exponential();
  return f;
}

double sinr(std::size_t link, const GainMatrix& gains, const FadingSample& fading,
            std::span<const std::uint8_t> action, const RadioConfig& cfg) {
  if (!action[link]) return 0.0;
  const double p_tx = cfg.tx_power_w();
  double interference = 0.0;
  for (std::size_t j = 0; j < action.size(); ++j) {
    if (j == link || !action[j]) continue;
    interference += p_tx * gains(j, link) * fading.s(j, link);
  }
  return p_tx * gains(link, link) * fading.s(link, link) / (interference + cfg.noise_power_w());
}

void write_layout(std::ostream& out, const Layout& layout) {
  out << layout.size() << ' ' << std::setprecision(17) << layout.area_length_m << '\n';
  for (std::size_t i = 0; i < layout.size(); ++i) {
    out << layout.tx[i].x << ' ' << layout.tx[i].y << ' ' << layout.rx[i].x << ' '
        << layout.rx[i].y << '\n';
  }
}

Layout read_layout(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos && line[0] != '#') return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError("missing layout header", line_no + 1);
  Layout layout;
  long long m = 0;
  {
    std::istringstream header(line);
    if (!(header >> m >> layout.area_length_m) || m <= 0) {
      throw ParseError("layout header must be 'M area_length'", line_no);
    }
  }
  for (long long i = 0; i < m; ++i) {
    if (!next_line()) throw ParseError("expected " + std::to_string(m) + " pair lines", line_no + 1);
    std::istringstream row(line);
    Point tx, rx;
    if (!(row >> tx.x >> tx.y >> rx.x >> rx.y)) {
      throw ParseError("pair line must be 'tx_x tx_y rx_x rx_y'", line_no);
    }
    layout.tx.push_back(tx);
    layout.rx.push_back(rx);
  }
  return layout;
}

}  // namespace d2d
