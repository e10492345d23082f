#include "d2d/kernels.hpp"

namespace d2d::kernels {
namespace {

void axpy(double* y, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void scale_one_minus(double* y, const double* row, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= 1.0 - s * row[i];
}

void dense(const double* w, const double* b, const double* x, std::size_t in, std::size_t out,
           double* y) {
  for (std::size_t o = 0; o < out; ++o) y[o] = b ? b[o] : 0.0;
  for (std::size_t k = 0; k < in; ++k) {
    const double xk = x[k];
    if (xk == 0.0) continue;
    const double* wk = w + k * out;
    for (std::size_t o = 0; o < out; ++o) y[o] += xk * wk[o];
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
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
}

void max_accumulate(double* acc, std::int64_t* arg, const double* v, std::int64_t source,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] > acc[i]) {
      acc[i] = v[i];
      arg[i] = source;
    }
  }
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{Isa::scalar,          "scalar", axpy, dot, scale_one_minus,
                                 dense,                dense_backward_input,
                                 outer_accumulate,     relu,     max_accumulate};
  return table;
}

}  // namespace d2d::kernels
