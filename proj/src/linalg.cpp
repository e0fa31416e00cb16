#include "kshs/linalg.hpp"

#include "kshs/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace kshs::linalg {

Eigen::Index SymmetricEigen::rank() const {
    if (values.size() == 0 || values(0) <= 0.0) return 0;
    const double cutoff = kRankTolerance * values(0);
    Eigen::Index r = 0;
    while (r < values.size() && values(r) > cutoff) ++r;
    return r;
}

SymmetricEigen eigen_descending(const Eigen::MatrixXd& symmetric) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    if (solver.info() != Eigen::Success) throw Error("symmetric eigendecomposition failed");
    const Eigen::Index n = symmetric.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    // Solver output is ascending; reversing first makes the stable sort keep
    // the solver's relative order for exact ties in descending output.
    std::reverse(order.begin(), order.end());
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return solver.eigenvalues()(a) > solver.eigenvalues()(b);
    });
    SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = std::max(0.0, solver.eigenvalues()(order[static_cast<std::size_t>(k)]));
        out.vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

Eigen::MatrixXd whitening_basis(const Eigen::MatrixXd& gram, Eigen::Index min_rank) {
    const SymmetricEigen eig = eigen_descending(gram);
    const Eigen::Index r = eig.rank();
    if (r < min_rank) {
        throw RankDeficiency("Gram matrix has numerical rank " + std::to_string(r) + ", need at least " +
                             std::to_string(min_rank));
    }
    return eig.vectors.leftCols(r) * eig.values.head(r).cwiseSqrt().cwiseInverse().asDiagonal();
}

Eigen::MatrixXd orthogonal_polar(const Eigen::MatrixXd& M) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixV() * svd.matrixU().transpose();
}

Eigen::MatrixXd procrustes_maximizer(const Eigen::MatrixXd& M) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixV() * svd.matrixU().transpose();
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& M) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues();
}

} // namespace kshs::linalg
