#pragma once

#include <Eigen/Core>

#include <cmath>

namespace qrdyn {

using Point3 = Eigen::Vector3d;
using PointN = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline bool finite(const PointN& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) return false;
    }
    return true;
}

inline bool finite(const Mat& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (!std::isfinite(a(i, j))) return false;
    return true;
}

}  // namespace qrdyn
