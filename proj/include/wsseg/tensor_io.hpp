#ifndef WSSEG_TENSOR_IO_HPP
#define WSSEG_TENSOR_IO_HPP

#include <string>

#include <Eigen/Core>

namespace wsseg {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using RowMatrixXf = RowMatrix<float>;

// LF01 tensor file: "LF01", uint32 LE rows, uint32 LE columns, then
// rows*columns float32 LE values in row-major order.
RowMatrixXf read_lf01(const std::string& path);
void write_lf01(const RowMatrixXf& tensor, const std::string& path);

}  // namespace wsseg

#endif  // WSSEG_TENSOR_IO_HPP
