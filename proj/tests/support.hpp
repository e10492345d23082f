#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/drift.hpp"
#include "d2d/random.hpp"

namespace d2d::test {

// Small square so cross-link interference is strong.
inline Layout dense_layout(std::size_t m, Rng& rng, double area = 100.0) {
  return sample_layout(m, area, rng);
}

inline std::vector<std::size_t> random_permutation(std::size_t m, Rng& rng) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = m; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  return perm;
}

// new index k holds old index perm[k]
template <class T>
std::vector<T> permute(const std::vector<T>& v, const std::vector<std::size_t>& perm) {
  std::vector<T> out(v.size());
  for (std::size_t k = 0; k < perm.size(); ++k) out[k] = v[perm[k]];
  return out;
}

inline Matrix permute(const Matrix& a, const std::vector<std::size_t>& perm) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t r = 0; r < perm.size(); ++r) {
    for (std::size_t c = 0; c < perm.size(); ++c) out(r, c) = a(perm[r], perm[c]);
  }
  return out;
}

inline Layout permute(const Layout& l, const std::vector<std::size_t>& perm) {
  return Layout{l.area_length_m, permute(l.tx, perm), permute(l.rx, perm)};
}

inline std::vector<double> uniform_vector(std::size_t m, Rng& rng, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(m);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Direct evaluation of f from its defining product, independent of the library kernels.
inline double reference_f(const std::vector<double>& p, const std::vector<double>& w,
                          const std::vector<double>& rho, const Matrix& d) {
  double f = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double prod = 1.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j != i) prod *= 1.0 - p[j] / (1.0 + d(j, i));
    }
    f -= w[i] * rho[i] * p[i] * prod;
  }
  return f;
}

}  // namespace d2d::test
