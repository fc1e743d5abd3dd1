// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "alpc/kernels.hpp"

using namespace alpc;

namespace {

struct BackendGuard {
  ~BackendGuard() { kern::set_backend(kern::Backend::Auto); }
};

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -10.0,
                               double hi = 10.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::vector<std::uint32_t> random_idx(std::mt19937_64& rng, std::size_t m,
                                      std::size_t limit) {
  std::uniform_int_distribution<std::uint32_t> u(0, static_cast<std::uint32_t>(limit - 1));
  std::vector<std::uint32_t> v(m);
  for (auto& x : v) x = u(rng);
  return v;
}

const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 100, 1000};

}  // namespace

TEST_CASE("backend selection") {
  BackendGuard guard;
  kern::set_backend(kern::Backend::Scalar);
  CHECK(std::string(kern::backend_name()) == "scalar");
  if (kern::avx2_available()) {
    kern::set_backend(kern::Backend::Avx2);
    CHECK(std::string(kern::backend_name()) == "avx2");
  } else {
    CHECK_THROWS(kern::set_backend(kern::Backend::Avx2));
  }
  kern::set_backend(kern::Backend::Auto);
  CHECK(kern::backend_name() != nullptr);
}

TEST_CASE("scalar dot matches long-double reference") {
  BackendGuard guard;
  kern::set_backend(kern::Backend::Scalar);
  std::mt19937_64 rng(7);
  for (const std::size_t n : kSizes) {
    const auto a = random_vec(rng, n), b = random_vec(rng, n);
    long double ref = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      ref += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::fabs(a[i] * b[i]);
    CHECK(std::fabs(kern::dot(a.data(), b.data(), n) - static_cast<double>(ref)) <=
          1e-13 * (mag + 1.0));
  }
}

TEST_CASE("avx2 variants match the scalar reference") {
  if (!kern::avx2_available()) return;
  BackendGuard guard;
  std::mt19937_64 rng(42);

  for (const std::size_t n : kSizes) {
    const auto xs = random_vec(rng, n), ys = random_vec(rng, n), zs = random_vec(rng, n);
    const auto a = random_vec(rng, n), b = random_vec(rng, n);
    const std::size_t m = n;
    const auto idx = random_idx(rng, m, n);
    const double qx = 1.25, qy = -3.5, qz = 0.75;

    double mag_dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag_dot += std::fabs(a[i] * b[i]);

    kern::set_backend(kern::Backend::Scalar);
    const double s_dot = kern::dot(a.data(), b.data(), n);
    const double s_sum = kern::sum(a.data(), n);
    const double s_sg = kern::sum_gather(a.data(), idx.data(), m);
    std::vector<double> s_axpy = b;
    kern::axpy(0.37, a.data(), s_axpy.data(), n);
    std::vector<double> s_scale = a;
    kern::scale(-1.7, s_scale.data(), n);
    std::vector<double> s_d2(m);
    kern::sq_dist3(qx, qy, qz, xs.data(), ys.data(), zs.data(), idx.data(), m, s_d2.data());
    double s_s3[3], s_cov[6], s_mn[3], s_mx[3];
    kern::sum3(xs.data(), ys.data(), zs.data(), idx.data(), m, s_s3);
    kern::cov3_upper(xs.data(), ys.data(), zs.data(), idx.data(), m, 0.1, 0.2, 0.3, s_cov);
    kern::minmax3(xs.data(), ys.data(), zs.data(), idx.data(), m, s_mn, s_mx);

    kern::set_backend(kern::Backend::Avx2);
    CHECK(std::fabs(kern::dot(a.data(), b.data(), n) - s_dot) <= 1e-13 * (mag_dot + 1.0));
    CHECK(std::fabs(kern::sum(a.data(), n) - s_sum) <= 1e-12 * (std::fabs(s_sum) + n));
    CHECK(std::fabs(kern::sum_gather(a.data(), idx.data(), m) - s_sg) <=
          1e-12 * (std::fabs(s_sg) + m));

    std::vector<double> v_axpy = b;
    kern::axpy(0.37, a.data(), v_axpy.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::fabs(v_axpy[i] - s_axpy[i]) <= 1e-14 * (std::fabs(s_axpy[i]) + 1.0));

    std::vector<double> v_scale = a;
    kern::scale(-1.7, v_scale.data(), n);
    CHECK(v_scale == s_scale);  // one multiply per lane: bitwise

    std::vector<double> v_d2(m);
    kern::sq_dist3(qx, qy, qz, xs.data(), ys.data(), zs.data(), idx.data(), m, v_d2.data());
    CHECK(v_d2 == s_d2);  // contract: bit-identical

    double v_s3[3], v_cov[6], v_mn[3], v_mx[3];
    kern::sum3(xs.data(), ys.data(), zs.data(), idx.data(), m, v_s3);
    for (int c = 0; c < 3; ++c)
      CHECK(std::fabs(v_s3[c] - s_s3[c]) <= 1e-12 * (std::fabs(s_s3[c]) + m));
    kern::cov3_upper(xs.data(), ys.data(), zs.data(), idx.data(), m, 0.1, 0.2, 0.3, v_cov);
    for (int c = 0; c < 6; ++c)
      CHECK(std::fabs(v_cov[c] - s_cov[c]) <= 1e-10 * (std::fabs(s_cov[c]) + m));
    kern::minmax3(xs.data(), ys.data(), zs.data(), idx.data(), m, v_mn, v_mx);
    for (int c = 0; c < 3; ++c) {
      CHECK(v_mn[c] == s_mn[c]);
      CHECK(v_mx[c] == s_mx[c]);
    }
  }
}

TEST_CASE("gemv and rank1 match scalar") {
  if (!kern::avx2_available()) return;
  BackendGuard guard;
  std::mt19937_64 rng(3);
  for (const std::size_t cols : {3u, 8u, 13u}) {
    for (const std::size_t rows : {1u, 4u, 6u}) {
      const auto w = random_vec(rng, rows * cols);
      const auto x = random_vec(rng, cols);
      const auto coef = random_vec(rng, rows);

      kern::set_backend(kern::Backend::Scalar);
      std::vector<double> s_out(rows);
      kern::gemv_rm(w.data(), rows, cols, x.data(), s_out.data());
      std::vector<double> s_g(rows * cols, 0.5);
      kern::rank1_acc(s_g.data(), coef.data(), x.data(), rows, cols);

      kern::set_backend(kern::Backend::Avx2);
      std::vector<double> v_out(rows);
      kern::gemv_rm(w.data(), rows, cols, x.data(), v_out.data());
      for (std::size_t r = 0; r < rows; ++r)
        CHECK(std::fabs(v_out[r] - s_out[r]) <= 1e-12 * (std::fabs(s_out[r]) + 1.0));
      std::vector<double> v_g(rows * cols, 0.5);
      kern::rank1_acc(v_g.data(), coef.data(), x.data(), rows, cols);
      for (std::size_t i = 0; i < v_g.size(); ++i)
        CHECK(std::fabs(v_g[i] - s_g[i]) <= 1e-13 * (std::fabs(s_g[i]) + 1.0));
    }
  }
}

TEST_CASE("empty inputs are no-ops") {
  BackendGuard guard;
  for (const auto backend : {kern::Backend::Scalar, kern::Backend::Auto}) {
    kern::set_backend(backend);
    CHECK(kern::dot(nullptr, nullptr, 0) == 0.0);
    CHECK(kern::sum(nullptr, 0) == 0.0);
    kern::axpy(1.0, nullptr, nullptr, 0);
    kern::scale(2.0, nullptr, 0);
  }
}
