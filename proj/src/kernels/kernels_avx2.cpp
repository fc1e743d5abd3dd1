// SPDX-License-Identifier: Apache-2.0

#include "kernel_table.hpp"

#if defined(ALPC_HAVE_AVX2)

#include <immintrin.h>

namespace alpc::kern::avx2 {
namespace {

inline __m128i load_idx4(const std::uint32_t* idx) {
  return _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx));
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_min_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double sum_gather(const double* v, const std::uint32_t* idx, std::size_t m) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4)
    acc = _mm256_add_pd(acc, _mm256_i32gather_pd(v, load_idx4(idx + i), 8));
  double s = hsum(acc);
  for (; i < m; ++i) s += v[idx[i]];
  return s;
}

void sq_dist3(double qx, double qy, double qz, const double* xs,
              const double* ys, const double* zs, const std::uint32_t* idx,
              std::size_t m, double* out) {
  const __m256d vqx = _mm256_set1_pd(qx);
  const __m256d vqy = _mm256_set1_pd(qy);
  const __m256d vqz = _mm256_set1_pd(qz);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m128i vi = load_idx4(idx + i);
    const __m256d dx = _mm256_sub_pd(_mm256_i32gather_pd(xs, vi, 8), vqx);
    const __m256d dy = _mm256_sub_pd(_mm256_i32gather_pd(ys, vi, 8), vqy);
    const __m256d dz = _mm256_sub_pd(_mm256_i32gather_pd(zs, vi, 8), vqz);
    // mul/add only, same order as the scalar reference: bit-identical output.
    const __m256d xx = _mm256_mul_pd(dx, dx);
    const __m256d yy = _mm256_mul_pd(dy, dy);
    const __m256d zz = _mm256_mul_pd(dz, dz);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_add_pd(xx, yy), zz));
  }
  for (; i < m; ++i) {
    const std::uint32_t j = idx[i];
    const double dx = xs[j] - qx;
    const double dy = ys[j] - qy;
    const double dz = zs[j] - qz;
    const double xx = dx * dx;
    const double yy = dy * dy;
    const double zz = dz * dz;
    out[i] = (xx + yy) + zz;
  }
}

void sum3(const double* xs, const double* ys, const double* zs,
          const std::uint32_t* idx, std::size_t m, double out[3]) {
  __m256d ax = _mm256_setzero_pd();
  __m256d ay = _mm256_setzero_pd();
  __m256d az = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m128i vi = load_idx4(idx + i);
    ax = _mm256_add_pd(ax, _mm256_i32gather_pd(xs, vi, 8));
    ay = _mm256_add_pd(ay, _mm256_i32gather_pd(ys, vi, 8));
    az = _mm256_add_pd(az, _mm256_i32gather_pd(zs, vi, 8));
  }
  double sx = hsum(ax), sy = hsum(ay), sz = hsum(az);
  for (; i < m; ++i) {
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
  const __m256d vcx = _mm256_set1_pd(cx);
  const __m256d vcy = _mm256_set1_pd(cy);
  const __m256d vcz = _mm256_set1_pd(cz);
  __m256d xx = _mm256_setzero_pd(), xy = xx, xz = xx, yy = xx, yz = xx, zz = xx;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m128i vi = load_idx4(idx + i);
    const __m256d dx = _mm256_sub_pd(_mm256_i32gather_pd(xs, vi, 8), vcx);
    const __m256d dy = _mm256_sub_pd(_mm256_i32gather_pd(ys, vi, 8), vcy);
    const __m256d dz = _mm256_sub_pd(_mm256_i32gather_pd(zs, vi, 8), vcz);
    xx = _mm256_fmadd_pd(dx, dx, xx);
    xy = _mm256_fmadd_pd(dx, dy, xy);
    xz = _mm256_fmadd_pd(dx, dz, xz);
    yy = _mm256_fmadd_pd(dy, dy, yy);
    yz = _mm256_fmadd_pd(dy, dz, yz);
    zz = _mm256_fmadd_pd(dz, dz, zz);
  }
  double sxx = hsum(xx), sxy = hsum(xy), sxz = hsum(xz);
  double syy = hsum(yy), syz = hsum(yz), szz = hsum(zz);
  for (; i < m; ++i) {
    const std::uint32_t j = idx[i];
    const double dx = xs[j] - cx;
    const double dy = ys[j] - cy;
    const double dz = zs[j] - cz;
    sxx += dx * dx;
    sxy += dx * dy;
    sxz += dx * dz;
    syy += dy * dy;
    syz += dy * dz;
    szz += dz * dz;
  }
  out[0] = sxx;
  out[1] = sxy;
  out[2] = sxz;
  out[3] = syy;
  out[4] = syz;
  out[5] = szz;
}

void minmax3(const double* xs, const double* ys, const double* zs,
             const std::uint32_t* idx, std::size_t m, double out_min[3],
             double out_max[3]) {
  const std::uint32_t j0 = idx[0];
  double mnx = xs[j0], mny = ys[j0], mnz = zs[j0];
  double mxx = mnx, mxy = mny, mxz = mnz;
  std::size_t i = 1;
  if (m >= 5) {
    __m256d vnx = _mm256_set1_pd(mnx), vny = _mm256_set1_pd(mny), vnz = _mm256_set1_pd(mnz);
    __m256d vxx = vnx, vxy = vny, vxz = vnz;
    for (; i + 4 <= m; i += 4) {
      const __m128i vi = load_idx4(idx + i);
      const __m256d x = _mm256_i32gather_pd(xs, vi, 8);
      const __m256d y = _mm256_i32gather_pd(ys, vi, 8);
      const __m256d z = _mm256_i32gather_pd(zs, vi, 8);
      vnx = _mm256_min_pd(x, vnx);
      vny = _mm256_min_pd(y, vny);
      vnz = _mm256_min_pd(z, vnz);
      vxx = _mm256_max_pd(x, vxx);
      vxy = _mm256_max_pd(y, vxy);
      vxz = _mm256_max_pd(z, vxz);
    }
    mnx = hmin(vnx);
    mny = hmin(vny);
    mnz = hmin(vnz);
    mxx = hmax(vxx);
    mxy = hmax(vxy);
    mxz = hmax(vxz);
  }
  for (; i < m; ++i) {
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

}  // namespace alpc::kern::avx2

namespace alpc::kern::detail {

const KernelTable* avx2_table() {
  static const KernelTable table = {
      "avx2",          avx2::dot,  avx2::axpy,       avx2::scale,
      avx2::sum,       avx2::sum_gather, avx2::sq_dist3,
      avx2::sum3,      avx2::cov3_upper, avx2::minmax3,
      avx2::gemv_rm,   avx2::rank1_acc,
  };
  return &table;
}

}  // namespace alpc::kern::detail

#else  // !ALPC_HAVE_AVX2

namespace alpc::kern::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace alpc::kern::detail

#endif
