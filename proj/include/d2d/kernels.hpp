#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Inner-loop arithmetic shared by the drift objective, the vertex solver, the
// simulator, and the MPNN. Each kernel has a scalar reference and an AVX2 variant;
// the variant is picked once at startup from CPUID (override with D2D_SIMD=scalar|avx2).
namespace d2d::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;

  // y[i] += a * x[i]
  void (*axpy)(double* y, const double* x, double a, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] *= 1 - s * row[i]
  void (*scale_one_minus)(double* y, const double* row, double s, std::size_t n);
  // y = b + sum_k x[k] * w[k, :], w is in x out row-major. b may be null.
  void (*dense)(const double* w, const double* b, const double* x, std::size_t in,
                std::size_t out, double* y);
  // dx[k] += dot(w[k, :], dy)
  void (*dense_backward_input)(const double* w, const double* dy, std::size_t in,
                               std::size_t out, double* dx);
  // dw[k, :] += x[k] * dy
  void (*outer_accumulate)(double* dw, const double* x, const double* dy, std::size_t in,
                           std::size_t out);
  void (*relu)(double* y, std::size_t n);
  // Where v[i] > acc[i] strictly: acc[i] = v[i], arg[i] = source.
  void (*max_accumulate)(double* acc, std::int64_t* arg, const double* v, std::int64_t source,
                         std::size_t n);
};

const KernelTable& scalar_table() noexcept;
// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_table() noexcept;

bool cpu_supports(Isa isa) noexcept;

const KernelTable& active() noexcept;
// Throws CapabilityError if the CPU or build lacks the requested ISA.
void select(Isa isa);

}  // namespace d2d::kernels
