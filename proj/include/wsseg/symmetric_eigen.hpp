#ifndef WSSEG_SYMMETRIC_EIGEN_HPP
#define WSSEG_SYMMETRIC_EIGEN_HPP

#include <cmath>

#include <Eigen/Core>

namespace wsseg {

template <typename Scalar>
struct SymmetricEigen3 {
  Eigen::Matrix<Scalar, 3, 1> values;   // ascending
  Eigen::Matrix<Scalar, 3, 3> vectors;  // column i pairs with values[i]
  int sweeps = 0;
};

// Cyclic Jacobi rotations on a symmetric 3x3 matrix. Stops once the
// off-diagonal Frobenius norm drops below `tolerance` or after `max_sweeps`.
template <typename Scalar>
SymmetricEigen3<Scalar> jacobi_eigen3(const Eigen::Matrix<Scalar, 3, 3>& input,
                                      Scalar tolerance = Scalar(1e-12),
                                      int max_sweeps = 50) {
  using std::abs;
  using std::sqrt;
  Eigen::Matrix<Scalar, 3, 3> a = Scalar(0.5) * (input + input.transpose());
  Eigen::Matrix<Scalar, 3, 3> v = Eigen::Matrix<Scalar, 3, 3>::Identity();
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    const Scalar off = sqrt(Scalar(2) * (a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) +
                                         a(1, 2) * a(1, 2)));
    if (off < tolerance) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                         (abs(theta) + sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (int k = 0; k < 3; ++k) {
          const Scalar akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const Scalar apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const Scalar vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  SymmetricEigen3<Scalar> out;
  out.sweeps = sweep;
  int order[3] = {0, 1, 2};
  // Stable sort by eigenvalue keeps Jacobi's column order on exact ties.
  for (int i = 1; i < 3; ++i)
    for (int j = i; j > 0 && a(order[j], order[j]) < a(order[j - 1], order[j - 1]); --j)
      std::swap(order[j], order[j - 1]);
  for (int i = 0; i < 3; ++i) {
    out.values[i] = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

}  // namespace wsseg

#endif  // WSSEG_SYMMETRIC_EIGEN_HPP
