#pragma once

// Symmetric matrix services: LDL^T without pivoting, bordered solves for
// singular systems, and extreme eigenvalues for the scaled condition number.

#include "sgiga/common.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace sgiga::la {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Symmetric matrix stored by its upper triangle.
class SymMatrix {
public:
    SymMatrix() = default;
    /// Keeps the upper triangle of `full`; the lower triangle is ignored.
    explicit SymMatrix(const SpMat& full);
    explicit SymMatrix(const Eigen::MatrixXd& dense);

    [[nodiscard]] int size() const { return static_cast<int>(upper_.rows()); }
    [[nodiscard]] const SpMat& upper() const { return upper_; }
    [[nodiscard]] SpMat full() const;
    [[nodiscard]] Eigen::MatrixXd dense() const;
    [[nodiscard]] Eigen::VectorXd diagonal() const { return upper_.diagonal(); }
    [[nodiscard]] Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;

private:
    SpMat upper_;
};

/// Largest |A - A^T| entry relative to the largest |A| entry.
[[nodiscard]] double symmetry_defect(const SpMat& a);

struct LdltOptions {
    enum class OnBreakdown { Throw, Drop };
    OnBreakdown on_breakdown = OnBreakdown::Throw;
    /// A pivot d_k <= tolerance * A_kk counts as breakdown.
    double tolerance = 1e-12;
};

struct LdltResult {
    Eigen::MatrixXd L;  ///< unit lower triangular over the kept indices
    Eigen::VectorXd D;  ///< pivots over the kept indices
    std::vector<int> kept;
    std::vector<int> dropped;
};

/// A = L D L^T with no pivoting. Dropped indices are removed from the
/// matrix as if their row and column never existed.
[[nodiscard]] LdltResult ldlt(const Eigen::MatrixXd& a, const LdltOptions& options = {});
[[nodiscard]] LdltResult ldlt(const SymMatrix& a, const LdltOptions& options = {});

struct ConstrainedSolution {
    Eigen::VectorXd x;
    double multiplier = 0.0;
    double residual = 0.0;  ///< ||K x + c lambda - F|| / ||F||
};

/// Solve [K c; c^T 0][x; lambda] = [F; target] by sparse LU.
[[nodiscard]] ConstrainedSolution solve_constrained(const SpMat& k, const Eigen::VectorXd& f,
                                                    const Eigen::VectorXd& constraint, double target);

struct SpectrumSummary {
    enum class Method { Dense, Iterative };
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    double lambda_min_retained = 0.0;  ///< smallest after dropping the requested count
    double scn = 0.0;
    int dropped = 0;
    Method method = Method::Dense;
    double residual = 0.0;  ///< relative eigen-residual bound (iterative path)
};

struct ScnOptions {
    int dense_limit = 12000;
    int max_iterations = 3000;
    double tolerance = 1e-8;
};

/// lambda_max / lambda_{drop+1} of a symmetric positive semidefinite matrix.
[[nodiscard]] SpectrumSummary scn(const SymMatrix& k, int drop_smallest, const ScnOptions& options = {});

/// Force the iterative (Lanczos) path regardless of size.
[[nodiscard]] SpectrumSummary scn_iterative(const SymMatrix& k, int drop_smallest,
                                            const ScnOptions& options = {});

/// All eigenvalues of a dense symmetric matrix in ascending order (LAPACK).
[[nodiscard]] Eigen::VectorXd symmetric_eigenvalues(Eigen::MatrixXd a);

}  // namespace sgiga::la
