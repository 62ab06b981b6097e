// Small dense least-squares helper shared by the model reductions.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>

namespace rebound::detail {

using DesignMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

struct LsqSolution {
    std::array<double, 4> coef{};
    double sse = 0.0;
    int rank = 0;
};

// Column-pivoted Householder QR; at most four columns.
inline LsqSolution least_squares(const DesignMatrix& x, std::span<const double> y) {
    const Eigen::Map<const Eigen::VectorXd> rhs(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::ColPivHouseholderQR<DesignMatrix> qr(x);
    qr.setThreshold(1e-12);
    const Eigen::VectorXd beta = qr.solve(rhs);
    LsqSolution out;
    out.rank = static_cast<int>(qr.rank());
    for (Eigen::Index j = 0; j < beta.size(); ++j) out.coef[static_cast<std::size_t>(j)] = beta[j];
    out.sse = (x * beta - rhs).squaredNorm();
    return out;
}

} // namespace rebound::detail
