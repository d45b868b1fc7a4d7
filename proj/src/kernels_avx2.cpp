// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include "crfmnes/kernels.hpp"

namespace crfmnes::kernels {
namespace simd {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(cspan a, cspan b) {
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += pa[i] * pb[i];
  return acc;
}

double sum_squares(cspan a) { return dot(a, a); }

void axpy(double alpha, cspan x, mspan y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y.data() + i);
    __m256d vx = _mm256_loadu_pd(x.data() + i);
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void affine_diag(cspan base, double scale, cspan diag, cspan y, mspan out) {
  const std::size_t n = y.size();
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d sd = _mm256_mul_pd(vs, _mm256_loadu_pd(diag.data() + i));
    __m256d r = _mm256_add_pd(_mm256_loadu_pd(base.data() + i),
                              _mm256_mul_pd(sd, _mm256_loadu_pd(y.data() + i)));
    _mm256_storeu_pd(out.data() + i, r);
  }
  for (; i < n; ++i) out[i] = base[i] + (scale * diag[i]) * y[i];
}

void st_seed(cspan y, cspan vbar, double cs, double ct, double cv, mspan s, mspan t) {
  const std::size_t n = y.size();
  const __m256d vcs = _mm256_set1_pd(cs);
  const __m256d vct = _mm256_set1_pd(ct);
  const __m256d vcv = _mm256_set1_pd(cv);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yi = _mm256_loadu_pd(y.data() + i);
    __m256d vi = _mm256_loadu_pd(vbar.data() + i);
    __m256d si = _mm256_sub_pd(
        _mm256_sub_pd(_mm256_mul_pd(yi, yi), _mm256_mul_pd(vcs, _mm256_mul_pd(yi, vi))), one);
    __m256d ti = _mm256_sub_pd(_mm256_mul_pd(vct, yi), _mm256_mul_pd(vcv, vi));
    _mm256_storeu_pd(s.data() + i, si);
    _mm256_storeu_pd(t.data() + i, ti);
  }
  for (; i < n; ++i) {
    const double yi = y[i];
    const double vi = vbar[i];
    s[i] = yi * yi - cs * (yi * vi) - 1.0;
    t[i] = ct * yi - cv * vi;
  }
}

void s_correct(cspan vbar, cspan t, cspan vbarbar, double a, double c, mspan s) {
  const std::size_t n = s.size();
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vt = _mm256_mul_pd(_mm256_loadu_pd(vbar.data() + i), _mm256_loadu_pd(t.data() + i));
    __m256d corr = _mm256_sub_pd(_mm256_mul_pd(va, vt),
                                 _mm256_mul_pd(vc, _mm256_loadu_pd(vbarbar.data() + i)));
    _mm256_storeu_pd(s.data() + i, _mm256_sub_pd(_mm256_loadu_pd(s.data() + i), corr));
  }
  for (; i < n; ++i) s[i] = s[i] - (a * (vbar[i] * t[i]) - c * vbarbar[i]);
}

void diag_solve(cspan inv_h, cspan u, double k, mspan s) {
  const std::size_t n = s.size();
  const __m256d vk = _mm256_set1_pd(k);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d hs = _mm256_mul_pd(_mm256_loadu_pd(inv_h.data() + i), _mm256_loadu_pd(s.data() + i));
    __m256d ku = _mm256_mul_pd(vk, _mm256_loadu_pd(u.data() + i));
    _mm256_storeu_pd(s.data() + i, _mm256_sub_pd(hs, ku));
  }
  for (; i < n; ++i) s[i] = inv_h[i] * s[i] - k * u[i];
}

void t_correct(cspan vbar, cspan s, double a, double c, mspan t) {
  const std::size_t n = t.size();
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vb = _mm256_loadu_pd(vbar.data() + i);
    __m256d corr = _mm256_sub_pd(_mm256_mul_pd(va, _mm256_mul_pd(vb, _mm256_loadu_pd(s.data() + i))),
                                 _mm256_mul_pd(vc, vb));
    _mm256_storeu_pd(t.data() + i, _mm256_sub_pd(_mm256_loadu_pd(t.data() + i), corr));
  }
  for (; i < n; ++i) t[i] = t[i] - (a * (vbar[i] * s[i]) - c * vbar[i]);
}

}  // namespace simd

const KernelTable& avx2_table_impl() {
  static const KernelTable table{
      Backend::avx2, "avx2",   &simd::dot,      &simd::sum_squares, &simd::axpy,
      &simd::affine_diag,  &simd::st_seed, &simd::s_correct, &simd::diag_solve, &simd::t_correct,
  };
  return table;
}

}  // namespace crfmnes::kernels
