#include "crfmnes/kernels.hpp"

namespace crfmnes::kernels {
namespace ref {

double dot(cspan a, cspan b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum_squares(cspan a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

void axpy(double alpha, cspan x, mspan y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = y[i] + alpha * x[i];
}

void affine_diag(cspan base, double scale, cspan diag, cspan y, mspan out) {
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = base[i] + (scale * diag[i]) * y[i];
}

void st_seed(cspan y, cspan vbar, double cs, double ct, double cv, mspan s, mspan t) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    const double vi = vbar[i];
    s[i] = yi * yi - cs * (yi * vi) - 1.0;
    t[i] = ct * yi - cv * vi;
  }
}

void s_correct(cspan vbar, cspan t, cspan vbarbar, double a, double c, mspan s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = s[i] - (a * (vbar[i] * t[i]) - c * vbarbar[i]);
}

void diag_solve(cspan inv_h, cspan u, double k, mspan s) {
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = inv_h[i] * s[i] - k * u[i];
}

void t_correct(cspan vbar, cspan s, double a, double c, mspan t) {
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = t[i] - (a * (vbar[i] * s[i]) - c * vbar[i]);
}

}  // namespace ref

const KernelTable& scalar_table() {
  static const KernelTable table{
      Backend::scalar, "scalar", &ref::dot,      &ref::sum_squares, &ref::axpy,
      &ref::affine_diag,    &ref::st_seed, &ref::s_correct, &ref::diag_solve, &ref::t_correct,
  };
  return table;
}

}  // namespace crfmnes::kernels
