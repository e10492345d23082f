#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "d2d/matrix.hpp"
#include "d2d/random.hpp"

namespace d2d {

inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kMinPairDistance = 2.0;
inline constexpr double kMaxPairDistance = 40.0;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b) noexcept;

double db_to_linear(double db) noexcept;
double linear_to_db(double linear) noexcept;
double dbm_to_watts(double dbm) noexcept;

// Radio and link-budget constants. Defaults are the 2.4 GHz ITU-1411 UHF scenario.
struct RadioConfig {
  double carrier_hz = 2.4e9;
  double bandwidth_hz = 5.0e6;
  double tx_antenna_height_m = 1.5;
  double rx_antenna_height_m = 1.5;
  double antenna_gain_dbi = 2.5;
  double tx_power_dbm = 40.0;
  double noise_psd_dbm_hz = -169.0;
  double sinr_threshold = 1023.0;  // linear
  double interference_cutoff_m = 500.0;

  double wavelength_m() const noexcept { return kSpeedOfLight / carrier_hz; }
  double breakpoint_distance_m() const noexcept;
  double breakpoint_loss_db() const noexcept;
  double tx_power_w() const noexcept { return dbm_to_watts(tx_power_dbm); }
  double noise_power_dbm() const noexcept;
  double noise_power_w() const noexcept { return dbm_to_watts(noise_power_dbm()); }
  // Tx-side plus rx-side antenna gain.
  double total_antenna_gain_db() const noexcept { return 2.0 * antenna_gain_dbi; }

  // Throws std::invalid_argument on non-finite values, beta <= 0, or cutoff <= 0.
  void validate() const;
};

struct Layout {
  double area_length_m = 0.0;
  std::vector<Point> tx;
  std::vector<Point> rx;

  std::size_t size() const noexcept { return tx.size(); }
  friend bool operator==(const Layout&, const Layout&) = default;
};

// Large-scale linear power gains; entry (i, j) is transmitter i -> receiver j.
struct GainMatrix {
  Matrix h;

  std::size_t size() const noexcept { return h.rows(); }
  double operator()(std::size_t tx, std::size_t rx) const { return h(tx, rx); }
};

// Small-scale power gains |h^s|^2, exponential with mean 1; entry (i, j) is tx i -> rx j.
struct FadingSample {
  Matrix s;
};

using Action = std::vector<std::uint8_t>;

// ITU-R P.1411 UHF two-slope path loss in dB. Throws std::invalid_argument when d <= 0.
double path_loss_db(double distance_m, const RadioConfig& cfg);

// Transmitters uniform on the square; each receiver at Uniform(2, 40) m and a uniform
// angle from its transmitter, re-drawing the angle until it lands inside the square.
Layout sample_layout(std::size_t pairs, double area_length_m, Rng& rng);

// Throws std::invalid_argument if positions leave the square or a pair distance is out of range.
void validate_layout(const Layout& layout);

GainMatrix gain_matrix(const Layout& layout, const RadioConfig& cfg);

FadingSample sample_fading(std::size_t pairs, Rng& rng);

double sinr(std::size_t link, const GainMatrix& gains, const FadingSample& fading,
            std::span<const std::uint8_t> action, const RadioConfig& cfg);

// Plain-text layout record: "M area_length" then M lines "tx_x tx_y rx_x rx_y".
void write_layout(std::ostream& out, const Layout& layout);
Layout read_layout(std::istream& in);

}  // namespace d2d
