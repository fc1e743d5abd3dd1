// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_KERNEL_TABLE_HPP
#define ALPC_KERNEL_TABLE_HPP

#include <cstddef>
#include <cstdint>

namespace alpc::kern::detail {

struct KernelTable {
  const char* name;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sum_gather)(const double*, const std::uint32_t*, std::size_t);
  void (*sq_dist3)(double, double, double, const double*, const double*,
                   const double*, const std::uint32_t*, std::size_t, double*);
  void (*sum3)(const double*, const double*, const double*,
               const std::uint32_t*, std::size_t, double*);
  void (*cov3_upper)(const double*, const double*, const double*,
                     const std::uint32_t*, std::size_t, double, double, double,
                     double*);
  void (*minmax3)(const double*, const double*, const double*,
                  const std::uint32_t*, std::size_t, double*, double*);
  void (*gemv_rm)(const double*, std::size_t, std::size_t, const double*,
                  double*);
  void (*rank1_acc)(double*, const double*, const double*, std::size_t,
                    std::size_t);
};

const KernelTable* scalar_table();
const KernelTable* avx2_table();  // nullptr when compiled without AVX2 support

}  // namespace alpc::kern::detail

#endif  // ALPC_KERNEL_TABLE_HPP
