// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_KERNELS_HPP
#define ALPC_KERNELS_HPP

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops used across the library. Every kernel has a
// scalar reference implementation and, on x86 with AVX2, a vectorized
// variant selected at runtime. sq_dist3 and minmax3 produce bit-identical
// results on every backend (the spatial index and bounding boxes rely on
// that); the accumulating kernels (dot, sum, cov3, ...) may differ in the
// last ulps between backends and are equivalence-tested with tolerances.
namespace alpc::kern {

enum class Backend { Auto, Scalar, Avx2 };

// Selects the backend for all subsequent kernel calls. Auto re-detects the
// best available one. Throws std::runtime_error if the requested backend is
// not available on this machine/build.
void set_backend(Backend b);
Backend active_backend();
const char* backend_name();
bool avx2_available();

// out = sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// x[i] *= a
void scale(double a, double* x, std::size_t n);

double sum(const double* x, std::size_t n);

// sum of v[idx[i]]
double sum_gather(const double* v, const std::uint32_t* idx, std::size_t m);

// out[i] = squared Euclidean distance from (qx,qy,qz) to point idx[i] of the
// SoA arrays. Bit-identical across backends.
void sq_dist3(double qx, double qy, double qz,
              const double* xs, const double* ys, const double* zs,
              const std::uint32_t* idx, std::size_t m, double* out);

// out[0..2] = component sums over the gathered points.
void sum3(const double* xs, const double* ys, const double* zs,
          const std::uint32_t* idx, std::size_t m, double out[3]);

// Upper-triangular covariance sums about (cx,cy,cz) over the gathered
// points: out = {Sxx, Sxy, Sxz, Syy, Syz, Szz} (unnormalized).
void cov3_upper(const double* xs, const double* ys, const double* zs,
                const std::uint32_t* idx, std::size_t m,
                double cx, double cy, double cz, double out[6]);

// Component-wise extrema over the gathered points. m >= 1.
// Bit-identical across backends (up to the sign of zero).
void minmax3(const double* xs, const double* ys, const double* zs,
             const std::uint32_t* idx, std::size_t m,
             double out_min[3], double out_max[3]);

// out[r] = dot(W row r, x) for a row-major rows x cols matrix.
void gemv_rm(const double* w, std::size_t rows, std::size_t cols,
             const double* x, double* out);

// G[r][j] += coef[r] * x[j] for a row-major rows x cols matrix.
void rank1_acc(double* g, const double* coef, const double* x,
               std::size_t rows, std::size_t cols);

}  // namespace alpc::kern

#endif  // ALPC_KERNELS_HPP
