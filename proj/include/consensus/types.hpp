#pragma once

#include <Eigen/Dense>

namespace consensus {

template <class F>
using Mx = Eigen::Matrix<F, Eigen::Dynamic, Eigen::Dynamic>;
template <class F>
using Vx = Eigen::Matrix<F, Eigen::Dynamic, 1>;

using Mxd = Mx<double>;
using Vxd = Vx<double>;

using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace consensus
