#include <immintrin.h>

#include "d2d/kernels.hpp"

namespace d2d::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void axpy(double* y, const double* x, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void scale_one_minus(double* y, const double* row, double s, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d factor = _mm256_fnmadd_pd(vs, _mm256_loadu_pd(row + i), one);
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), factor));
  }
  for (; i < n; ++i) y[i] *= 1.0 - s * row[i];
}

void dense(const double* w, const double* b, const double* x, std::size_t in, std::size_t out,
           double* y) {
  if (b) {
    for (std::size_t o = 0; o < out; ++o) y[o] = b[o];
  } else {
    for (std::size_t o = 0; o < out; ++o) y[o] = 0.0;
  }
  for (std::size_t k = 0; k < in; ++k) {
    const double xk = x[k];
    if (xk == 0.0) continue;
    axpy(y, w + k * out, xk, out);
  }
}

void dense_backward_input(const double* w, const double* dy, std::size_t in, std::size_t out,
                          double* dx) {
  for (std::size_t k = 0; k < in; ++k) dx[k] += dot(w + k * out, dy, out);
}

void outer_accumulate(double* dw, const double* x, const double* dy, std::size_t in,
                      std::size_t out) {
  for (std::size_t k = 0; k < in; ++k) {
    const double xk = x[k];
    if (xk == 0.0) continue;
    axpy(dw + k * out, dy, xk, out);
  }
}

void relu(double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // max_pd returns the second operand when the first is NaN; keep NaN -> 0 like scalar.
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(y + i), zero));
  }
  for (; i < n; ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
}

void max_accumulate(double* acc, std::int64_t* arg, const double* v, std::int64_t source,
                    std::size_t n) {
  const __m256i vsrc = _mm256_set1_epi64x(source);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(acc + i);
    const __m256d x = _mm256_loadu_pd(v + i);
    const __m256d gt = _mm256_cmp_pd(x, a, _CMP_GT_OQ);
    _mm256_storeu_pd(acc + i, _mm256_blendv_pd(a, x, gt));
    const __m256i old = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(arg + i));
    const __m256i merged = _mm256_castpd_si256(
        _mm256_blendv_pd(_mm256_castsi256_pd(old), _mm256_castsi256_pd(vsrc), gt));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(arg + i), merged);
  }
  for (; i < n; ++i) {
    if (v[i] > acc[i]) {
      acc[i] = v[i];
      arg[i] = source;
    }
  }
}

}  // namespace

const KernelTable* avx2_table() noexcept {
  static const KernelTable table{Isa::avx2,        "avx2", axpy, dot, scale_one_minus,
                                 dense,            dense_backward_input,
                                 outer_accumulate, relu,   max_accumulate};
  return &table;
}

}  // namespace d2d::kernels
