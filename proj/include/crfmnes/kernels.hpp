#pragma once

// Vector kernels used on the per-generation hot path.
//
// Every kernel exists as a portable scalar reference and, on x86-64, as an
// AVX2 variant. The variant is chosen once at startup from CPUID and can be
// forced with the CRFMNES_SIMD environment variable ("scalar" or "avx2").
//
// Elementwise kernels evaluate the same operations in the same order on
// every backend and are therefore bit-identical. Reductions (dot,
// sum_squares) reassociate the sum across lanes and agree only to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace crfmnes::kernels {

using cspan = std::span<const double>;
using mspan = std::span<double>;

enum class Backend { scalar, avx2 };

struct KernelTable {
  Backend backend;
  const char* name;

  double (*dot)(cspan a, cspan b);
  double (*sum_squares)(cspan a);

  // y += alpha * x
  void (*axpy)(double alpha, cspan x, mspan y);

  // out = base + (scale * diag) * y
  void (*affine_diag)(cspan base, double scale, cspan diag, cspan y, mspan out);

  // s = y*y - cs * y*vbar - 1
  // t = ct * y - cv * vbar
  void (*st_seed)(cspan y, cspan vbar, double cs, double ct, double cv,
                  mspan s, mspan t);

  // s -= a * (vbar*t) - c * vbarbar
  void (*s_correct)(cspan vbar, cspan t, cspan vbarbar, double a, double c,
                    mspan s);

  // s = inv_h*s - k * u
  void (*diag_solve)(cspan inv_h, cspan u, double k, mspan s);

  // t -= a * (vbar*s) - c * vbar
  void (*t_correct)(cspan vbar, cspan s, double a, double c, mspan t);
};

const KernelTable& scalar_table();

// nullptr when the AVX2 variant was not compiled in or the CPU lacks
// AVX2/FMA.
const KernelTable* avx2_table();

// The table used by the library. Resolved once; see select().
const KernelTable& active();

// Overrides the runtime choice. Returns false (and changes nothing) if the
// requested backend is unavailable.
bool select(Backend backend);

std::string_view backend_name(Backend backend);

inline double dot(cspan a, cspan b) { return active().dot(a, b); }
inline double sum_squares(cspan a) { return active().sum_squares(a); }
inline void axpy(double alpha, cspan x, mspan y) { active().axpy(alpha, x, y); }
inline void affine_diag(cspan base, double scale, cspan diag, cspan y, mspan out) {
  active().affine_diag(base, scale, diag, y, out);
}

}  // namespace crfmnes::kernels
