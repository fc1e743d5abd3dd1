// SPDX-License-Identifier: Apache-2.0

#include "alpc/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "kernel_table.hpp"

namespace alpc::kern {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double sum_gather(const double* v, const std::uint32_t* idx, std::size_t m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += v[idx[i]];
  return s;
}

void sq_dist3(double qx, double qy, double qz, const double* xs,
              const double* ys, const double* zs, const std::uint32_t* idx,
              std::size_t m, double* out) {
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint32_t j = idx[i];
    const double dx = xs[j] - qx;
    const double dy = ys[j] - qy;
    const double dz = zs[j] - qz;
    // mul, mul, mul, add, add in this order; the AVX2 variant mirrors it so
    // both backends produce bit-identical distances.
    const double xx = dx * dx;
    const double yy = dy * dy;
    const double zz = dz * dz;
    out[i] = (xx + yy) + zz;
  }
}

void sum3(const double* xs, const double* ys, const double* zs,
          const std::uint32_t* idx, std::size_t m, double out[3]) {
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint32_t j = idx[i];
    sx += xs[j];
    sy += ys[j];
    sz += zs[j];
  }
  out[0] = sx;
  out[1] = sy;
  out[2] = sz;
}

void cov3_upper(const double* xs, const double* ys, const double* zs,
                const std::uint32_t* idx, std::size_t m, double cx, double cy,
                double cz, double out[6]) {
  double xx = 0.0, xy = 0.0, xz = 0.0, yy = 0.0, yz = 0.0, zz = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint32_t j = idx[i];
    const double dx = xs[j] - cx;
    const double dy = ys[j] - cy;
    const double dz = zs[j] - cz;
    xx += dx * dx;
    xy += dx * dy;
    xz += dx * dz;
    yy += dy * dy;
    yz += dy * dz;
    zz += dz * dz;
  }
  out[0] = xx;
  out[1] = xy;
  out[2] = xz;
  out[3] = yy;
  out[4] = yz;
  out[5] = zz;
}

void minmax3(const double* xs, const double* ys, const double* zs,
             const std::uint32_t* idx, std::size_t m, double out_min[3],
             double out_max[3]) {
  const std::uint32_t j0 = idx[0];
  double mnx = xs[j0], mny = ys[j0], mnz = zs[j0];
  double mxx = mnx, mxy = mny, mxz = mnz;
  for (std::size_t i = 1; i < m; ++i) {
    const std::uint32_t j = idx[i];
    const double x = xs[j], y = ys[j], z = zs[j];
    mnx = (x < mnx) ? x : mnx;
    mny = (y < mny) ? y : mny;
    mnz = (z < mnz) ? z : mnz;
    mxx = (x > mxx) ? x : mxx;
    mxy = (y > mxy) ? y : mxy;
    mxz = (z > mxz) ? z : mxz;
  }
  out_min[0] = mnx;
  out_min[1] = mny;
  out_min[2] = mnz;
  out_max[0] = mxx;
  out_max[1] = mxy;
  out_max[2] = mxz;
}

void gemv_rm(const double* w, std::size_t rows, std::size_t cols,
             const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot(w + r * cols, x, cols);
}

void rank1_acc(double* g, const double* coef, const double* x,
               std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(coef[r], x, g + r * cols, cols);
}

}  // namespace scalar

namespace detail {

const KernelTable* scalar_table() {
  static const KernelTable table = {
      "scalar",          scalar::dot,  scalar::axpy,       scalar::scale,
      scalar::sum,       scalar::sum_gather, scalar::sq_dist3,
      scalar::sum3,      scalar::cov3_upper, scalar::minmax3,
      scalar::gemv_rm,   scalar::rank1_acc,
  };
  return &table;
}

}  // namespace detail

namespace {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const detail::KernelTable* resolve_auto() {
  // ALPC_KERNEL_BACKEND=scalar|avx2 pins the choice (testing hook)
  if (const char* env = std::getenv("ALPC_KERNEL_BACKEND")) {
    if (std::strcmp(env, "scalar") == 0) return detail::scalar_table();
    if (std::strcmp(env, "avx2") == 0) {
      if (const detail::KernelTable* t = detail::avx2_table(); t && cpu_has_avx2())
        return t;
      throw std::runtime_error("ALPC_KERNEL_BACKEND=avx2 but AVX2 is unavailable");
    }
  }
  if (const detail::KernelTable* t = detail::avx2_table(); t && cpu_has_avx2())
    return t;
  return detail::scalar_table();
}

std::atomic<const detail::KernelTable*> g_active{nullptr};

const detail::KernelTable* active() {
  const detail::KernelTable* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = resolve_auto();
    g_active.store(t, std::memory_order_release);
  }
  return t;
}

}  // namespace

bool avx2_available() {
  return detail::avx2_table() != nullptr && cpu_has_avx2();
}

void set_backend(Backend b) {
  switch (b) {
    case Backend::Auto:
      g_active.store(resolve_auto(), std::memory_order_release);
      break;
    case Backend::Scalar:
      g_active.store(detail::scalar_table(), std::memory_order_release);
      break;
    case Backend::Avx2:
      if (!avx2_available())
        throw std::runtime_error("AVX2 kernels not available on this machine");
      g_active.store(detail::avx2_table(), std::memory_order_release);
      break;
  }
}

Backend active_backend() {
  return active() == detail::scalar_table() ? Backend::Scalar : Backend::Avx2;
}

const char* backend_name() { return active()->name; }

double dot(const double* a, const double* b, std::size_t n) {
  return active()->dot(a, b, n);
}
void axpy(double a, const double* x, double* y, std::size_t n) {
  active()->axpy(a, x, y, n);
}
void scale(double a, double* x, std::size_t n) { active()->scale(a, x, n); }
double sum(const double* x, std::size_t n) { return active()->sum(x, n); }
double sum_gather(const double* v, const std::uint32_t* idx, std::size_t m) {
  return active()->sum_gather(v, idx, m);
}
void sq_dist3(double qx, double qy, double qz, const double* xs,
              const double* ys, const double* zs, const std::uint32_t* idx,
              std::size_t m, double* out) {
  active()->sq_dist3(qx, qy, qz, xs, ys, zs, idx, m, out);
}
void sum3(const double* xs, const double* ys, const double* zs,
          const std::uint32_t* idx, std::size_t m, double out[3]) {
  active()->sum3(xs, ys, zs, idx, m, out);
}
void cov3_upper(const double* xs, const double* ys, const double* zs,
                const std::uint32_t* idx, std::size_t m, double cx, double cy,
                double cz, double out[6]) {
  active()->cov3_upper(xs, ys, zs, idx, m, cx, cy, cz, out);
}
void minmax3(const double* xs, const double* ys, const double* zs,
             const std::uint32_t* idx, std::size_t m, double out_min[3],
             double out_max[3]) {
  active()->minmax3(xs, ys, zs, idx, m, out_min, out_max);
}
void gemv_rm(const double* w, std::size_t rows, std::size_t cols,
             const double* x, double* out) {
  active()->gemv_rm(w, rows, cols, x, out);
}
void rank1_acc(double* g, const double* coef, const double* x,
               std::size_t rows, std::size_t cols) {
  active()->rank1_acc(g, coef, x, rows, cols);
}

}  // namespace alpc::kern
