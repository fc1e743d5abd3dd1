// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_EIG3_HPP
#define ALPC_EIG3_HPP

namespace alpc {

// Eigendecomposition of a symmetric 3x3 matrix via cyclic Jacobi sweeps.
// a = {axx, axy, axz, ayy, ayz, azz}. Eigenvalues come out sorted
// descending; eigenvectors[3*i..3*i+2] is the unit eigenvector belonging to
// eigenvalues[i].
void eigen_sym3(const double a[6], double eigenvalues[3],
                double eigenvectors[9]);

}  // namespace alpc

#endif  // ALPC_EIG3_HPP
