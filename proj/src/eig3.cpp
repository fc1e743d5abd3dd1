// SPDX-License-Identifier: Apache-2.0

#include "alpc/eig3.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace alpc {

void eigen_sym3(const double a[6], double eigenvalues[3],
                double eigenvectors[9]) {
  // m is the working copy, v accumulates the rotations (columns = vectors).
  double m[3][3] = {{a[0], a[1], a[2]}, {a[1], a[3], a[4]}, {a[2], a[4], a[5]}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  constexpr int kMaxSweeps = 32;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double off = std::fabs(m[0][1]) + std::fabs(m[0][2]) + std::fabs(m[1][2]);
    const double diag = std::fabs(m[0][0]) + std::fabs(m[1][1]) + std::fabs(m[2][2]);
    if (off <= 1e-15 * std::max(diag, 1e-300)) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double apq = m[p][q];
        if (apq == 0.0) continue;
        const double theta = (m[q][q] - m[p][p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double mkp = m[k][p], mkq = m[k][q];
          m[k][p] = c * mkp - s * mkq;
          m[k][q] = s * mkp + c * mkq;
        }
        for (int k = 0; k < 3; ++k) {
          const double mpk = m[p][k], mqk = m[q][k];
          m[p][k] = c * mpk - s * mqk;
          m[q][k] = s * mpk + c * mqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return m[i][i] > m[j][j]; });
  for (int i = 0; i < 3; ++i) {
    const int src = order[i];
    eigenvalues[i] = m[src][src];
    double norm = std::sqrt(v[0][src] * v[0][src] + v[1][src] * v[1][src] +
                            v[2][src] * v[2][src]);
    if (norm <= 0.0) norm = 1.0;
    for (int k = 0; k < 3; ++k) eigenvectors[3 * i + k] = v[k][src] / norm;
  }
}

}  // namespace alpc
