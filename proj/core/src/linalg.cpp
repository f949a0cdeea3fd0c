#include "sgiga/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgiga::la {

SymMatrix::SymMatrix(const SpMat& full) {
    if (full.rows() != full.cols() || full.rows() < 1) {
        throw InvalidArgument("SymMatrix: square matrix of dimension >= 1 required");
    }
    upper_ = full.triangularView<Eigen::Upper>();
    upper_.makeCompressed();
}

SymMatrix::SymMatrix(const Eigen::MatrixXd& dense) : SymMatrix(SpMat(dense.sparseView())) {}

SpMat SymMatrix::full() const { return upper_.selfadjointView<Eigen::Upper>(); }

Eigen::MatrixXd SymMatrix::dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(size(), size());
    for (int c = 0; c < upper_.outerSize(); ++c) {
        for (SpMat::InnerIterator it(upper_, c); it; ++it) {
            d(it.row(), it.col()) = it.value();
            d(it.col(), it.row()) = it.value();
        }
    }
    return d;
}

Eigen::VectorXd SymMatrix::multiply(const Eigen::VectorXd& x) const {
    return upper_.selfadjointView<Eigen::Upper>() * x;
}

double symmetry_defect(const SpMat& a) {
    const SpMat t = a.transpose();
    const SpMat d = a - t;
    double dmax = 0.0;
    double amax = 0.0;
    for (int c = 0; c < d.outerSize(); ++c)
        for (SpMat::InnerIterator it(d, c); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
    for (int c = 0; c < a.outerSize(); ++c)
        for (SpMat::InnerIterator it(a, c); it; ++it) amax = std::max(amax, std::abs(it.value()));
    return amax > 0.0 ? dmax / amax : 0.0;
}

// ---------------------------------------------------------------------------

LdltResult ldlt(const Eigen::MatrixXd& a, const LdltOptions& options) {
    const auto n = a.rows();
    if (a.cols() != n) throw InvalidArgument("ldlt: square matrix required");
    // Right-looking elimination on a working copy (lower triangle is used).
    Eigen::MatrixXd w = a;
    std::vector<char> alive(static_cast<std::size_t>(n), 1);
    LdltResult r;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double d = w(k, k);
        const double ref = a(k, k);
        if (!(d > options.tolerance * std::abs(ref)) || !(d > 0.0)) {
            if (options.on_breakdown == LdltOptions::OnBreakdown::Throw) {
                std::ostringstream os;
                os << "ldlt: nonpositive pivot " << d << " at index " << k;
                throw SingularMatrixError(os.str(), k, d);
            }
            alive[static_cast<std::size_t>(k)] = 0;
            r.dropped.push_back(static_cast<int>(k));
            continue;
        }
        r.kept.push_back(static_cast<int>(k));
        for (Eigen::Index i = k + 1; i < n; ++i) {
            if (!alive[static_cast<std::size_t>(i)]) continue;
            w(i, k) /= d;
        }
        for (Eigen::Index j = k + 1; j < n; ++j) {
            if (!alive[static_cast<std::size_t>(j)]) continue;
            const double ljk = w(j, k) * d;
            if (ljk == 0.0) continue;
            for (Eigen::Index i = j; i < n; ++i) w(i, j) -= w(i, k) * ljk;
        }
    }
    const auto m = static_cast<Eigen::Index>(r.kept.size());
    r.L = Eigen::MatrixXd::Identity(m, m);
    r.D.resize(m);
    for (Eigen::Index c = 0; c < m; ++c) {
        const auto kc = r.kept[static_cast<std::size_t>(c)];
        r.D(c) = w(kc, kc);
        for (Eigen::Index rr = c + 1; rr < m; ++rr) r.L(rr, c) = w(r.kept[static_cast<std::size_t>(rr)], kc);
    }
    return r;
}

LdltResult ldlt(const SymMatrix& a, const LdltOptions& options) { return ldlt(a.dense(), options); }

// ---------------------------------------------------------------------------

ConstrainedSolution solve_constrained(const SpMat& k, const Eigen::VectorXd& f,
                                      const Eigen::VectorXd& constraint, double target) {
    const auto n = k.rows();
    if (k.cols() != n || f.size() != n || constraint.size() != n) {
        throw InvalidArgument("solve_constrained: dimension mismatch");
    }
    if (constraint.lpNorm<Eigen::Infinity>() == 0.0) {
        throw InvalidArgument("solve_constrained: zero constraint vector");
    }
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(k.nonZeros() + 2 * n));
    for (int c = 0; c < k.outerSize(); ++c)
        for (SpMat::InnerIterator it(k, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (constraint(i) == 0.0) continue;
        trip.emplace_back(static_cast<int>(i), static_cast<int>(n), constraint(i));
        trip.emplace_back(static_cast<int>(n), static_cast<int>(i), constraint(i));
    }
    SpMat b(n + 1, n + 1);
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = f;
    rhs(n) = target;

    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(b);
    lu.factorize(b);
    if (lu.info() != Eigen::Success) {
        throw SingularMatrixError("solve_constrained: bordered system is singular (" +
                                      lu.lastErrorMessage() + ")",
                                  -1, 0.0);
    }
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite()) {
        throw SingularMatrixError("solve_constrained: back substitution failed", -1, 0.0);
    }
    ConstrainedSolution out;
    out.x = sol.head(n);
    out.multiplier = sol(n);
    const double fn = std::max(f.norm(), 1e-300);
    out.residual = (k * out.x + constraint * out.multiplier - f).norm() / fn;
    return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd symmetric_eigenvalues(Eigen::MatrixXd a) {
    const auto n = static_cast<lapack_int>(a.rows());
    if (a.cols() != a.rows()) throw InvalidArgument("symmetric_eigenvalues: square matrix required");
    Eigen::VectorXd w(n);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n, w.data());
    if (info != 0) {
        throw ConvergenceError("symmetric_eigenvalues: LAPACK dsyevd failed with info " +
                               std::to_string(info));
    }
    return w;
}

namespace {

SpectrumSummary summarize(const Eigen::VectorXd& ev, int drop, SpectrumSummary::Method method) {
    SpectrumSummary s;
    s.method = method;
    s.dropped = drop;
    s.lambda_min = ev(0);
    s.lambda_max = ev(ev.size() - 1);
    s.lambda_min_retained = ev(std::min<Eigen::Index>(drop, ev.size() - 1));
    s.scn = s.lambda_max / s.lambda_min_retained;
    return s;
}

// Lanczos with full reorthogonalisation. Returns the Ritz values of `apply`
// once the `want_top` largest have relative residual below the tolerance.
template <class Apply>
std::pair<Eigen::VectorXd, double> lanczos(Apply apply, Eigen::Index n, int want_top,
                                           const ScnOptions& opt) {
    const int max_steps = static_cast<int>(std::min<Eigen::Index>(n, opt.max_iterations));
    Eigen::MatrixXd v(n, max_steps + 1);
    // Deterministic start vector.
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q(i) = 1.0 + 0.5 * std::sin(1.0 + 0.37 * static_cast<double>(i));
    v.col(0) = q.normalized();
    std::vector<double> alpha;
    std::vector<double> beta;
    Eigen::VectorXd ritz;
    double resid = 1.0;
    for (int j = 0; j < max_steps; ++j) {
        Eigen::VectorXd w = apply(v.col(j));
        const double a = v.col(j).dot(w);
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass) w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
        const double b = w.norm();
        const int m = j + 1;
        if (m % 10 == 0 || b < 1e-14 || m == max_steps) {
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                t(i, i) = alpha[static_cast<std::size_t>(i)];
                if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
            ritz = es.eigenvalues();
            const double scale = std::max(std::abs(ritz(0)), std::abs(ritz(m - 1)));
            resid = 0.0;
            for (int i = 0; i < std::min(want_top, m); ++i) {
                resid = std::max(resid, std::abs(b * es.eigenvectors()(m - 1, m - 1 - i)) / scale);
            }
            if ((resid <= opt.tolerance && m > want_top) || b < 1e-14) return {ritz, resid};
        }
        beta.push_back(b);
        v.col(j + 1) = w / b;
    }
    std::ostringstream os;
    os << "Lanczos: residual " << resid << " after " << max_steps << " steps";
    throw ConvergenceError(os.str());
}

}  // namespace

SpectrumSummary scn_iterative(const SymMatrix& k, int drop_smallest, const ScnOptions& options) {
    const SpMat a = k.full();
    const Eigen::Index n = a.rows();
    if (drop_smallest < 0 || drop_smallest >= n) throw InvalidArgument("scn: invalid drop count");
    const auto [high, res_hi] =
        lanczos([&](const Eigen::VectorXd& x) { return Eigen::VectorXd(a * x); }, n, 1, options);
    // The smallest eigenvalues of A are the largest of (A + sigma I)^{-1}.
    const double sigma = 1e-8 * high(high.size() - 1);
    SpMat shifted = a;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma;
    Eigen::SimplicialLDLT<SpMat> chol(shifted);
    if (chol.info() != Eigen::Success) {
        throw SingularMatrixError("scn: shift-invert factorisation failed", -1, 0.0);
    }
    const auto [inv, res_lo] = lanczos(
        [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(chol.solve(x)); }, n, drop_smallest + 1,
        options);
    SpectrumSummary s;
    s.method = SpectrumSummary::Method::Iterative;
    s.dropped = drop_smallest;
    s.lambda_max = high(high.size() - 1);
    s.lambda_min = 1.0 / inv(inv.size() - 1) - sigma;
    s.lambda_min_retained = 1.0 / inv(inv.size() - 1 - drop_smallest) - sigma;
    s.scn = s.lambda_max / s.lambda_min_retained;
    s.residual = std::max(res_hi, res_lo);
    return s;
}

SpectrumSummary scn(const SymMatrix& k, int drop_smallest, const ScnOptions& options) {
    if (drop_smallest < 0 || drop_smallest >= k.size()) throw InvalidArgument("scn: invalid drop count");
    if (k.size() <= options.dense_limit) {
        return summarize(symmetric_eigenvalues(k.dense()), drop_smallest, SpectrumSummary::Method::Dense);
    }
    return scn_iterative(k, drop_smallest, options);
}

}  // namespace sgiga::la
