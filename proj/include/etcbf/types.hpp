#pragma once

#include <Eigen/Dense>

namespace etcbf {

using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

}  // namespace etcbf
