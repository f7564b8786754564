#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace lrcc {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MatView = Eigen::Map<const RowMat>;
using MatMutView = Eigen::Map<RowMat>;

/// Raised when array lengths or matrix shapes do not conform.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace lrcc
