#pragma once

// Galerkin assembly of the pure-Neumann interface problem
//   -div(a grad u) = f in each subdomain,  a du/dn = g on the boundary,
//   [u] = 0 and [a du/dn] = q on Gamma,
// in the enriched space, followed by diagonal scaling, a mean-constrained
// solve and error norms.

#include "sgiga/common.hpp"
#include "sgiga/enrichment.hpp"
#include "sgiga/interface.hpp"
#include "sgiga/linalg.hpp"
#include "sgiga/splines.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sgiga::fem {

/// An evaluation point: parameter coordinates and their physical image.
struct Location {
    Vec2 p;
    Vec2 x;
};

/// Problem data. Side-dependent callables take the side of the evaluation
/// point; normals and gradients are physical.
struct ProblemData {
    double a_pos = 1.0;
    double a_neg = 1.0;
    std::function<double(Side, const Location&)> f;
    /// a grad(u) . n for the outward unit normal n of the physical boundary.
    std::function<double(Side, const Location&, const Vec2&)> g;
    /// a+ grad(u+) . n - a- grad(u-) . n with n the unit normal pointing from
    /// the positive into the negative side. Empty means q = 0.
    std::function<double(const Location&, const Vec2&)> q;
    std::function<double(Side, const Location&)> u;
    std::function<Vec2(Side, const Location&)> grad_u;
    spline::GeometryMap geometry = spline::GeometryMap::identity();

    [[nodiscard]] double coefficient(Side s) const { return s == Side::Positive ? a_pos : a_neg; }
};

struct QuadratureOptions {
    int gauss = 3;            ///< tensor Gauss points per direction on uncut cells
    int depth = 5;            ///< cut-cell quadtree depth
    int interface_gauss = 4;  ///< points per interface chord
    int error_gauss = 5;      ///< tensor Gauss points per direction for error norms on uncut elements
};

/// Cut-cell partitions of every cut element, shared by assembly and error
/// evaluation.
class QuadratureCache {
public:
    QuadratureCache(const spline::SplineSpace2D& space, const geom::MeshClassification& cls,
                    const geom::ImplicitInterface& iface, const QuadratureOptions& options);

    [[nodiscard]] const geom::CutCellPartition* partition(int e) const;
    [[nodiscard]] const QuadratureOptions& options() const { return options_; }
    [[nodiscard]] int fallback_leaves() const { return fallback_; }

    /// Points and sides for element e; uncut elements use an n x n Gauss rule.
    void element_points(const spline::SplineSpace2D& space, const geom::MeshClassification& cls, int e,
                        int n, std::vector<quad::WeightedPoint>& pts, std::vector<Side>& sides) const;

private:
    QuadratureOptions options_;
    std::vector<int> index_;
    std::vector<geom::CutCellPartition> parts_;
    int fallback_ = 0;
};

/// Blocks against the B-splines N and the raw enrichment functions psi.
struct RawSystem {
    la::SpMat K_nn;
    la::SpMat M_nn;
    la::SpMat K_npsi;
    la::SpMat M_npsi;
    Eigen::MatrixXd K_psipsi;
    Eigen::VectorXd F_n;
    Eigen::VectorXd F_psi;
    Eigen::VectorXd basis_integrals;  ///< integral of each N_i over the physical domain
    double area = 0.0;
    std::optional<double> exact_integral;  ///< integral of the exact solution, when known
};

/// Final block system in the current enrichment basis.
struct AssembledSystem {
    int n_orig = 0;
    int n_enr = 0;
    la::SpMat K_oo;
    la::SpMat K_oe;
    Eigen::MatrixXd K_ee;
    Eigen::VectorXd F_o;
    Eigen::VectorXd F_e;
    Eigen::VectorXd constraint;  ///< weights on original coefficients fixing the constant mode
    double target = 0.0;

    [[nodiscard]] int size() const { return n_orig + n_enr; }
    [[nodiscard]] la::SpMat matrix() const;
    [[nodiscard]] Eigen::VectorXd rhs() const;
};

[[nodiscard]] RawSystem assemble_raw(const enrich::EnrichedSpace& enr, const geom::MeshClassification& cls,
                                     const QuadratureCache& cache, const ProblemData& data);

/// Express the raw blocks in the current enrichment basis of `enr`.
[[nodiscard]] AssembledSystem rebase(const RawSystem& raw, const enrich::EnrichedSpace& enr);

/// assemble_raw followed by rebase.
[[nodiscard]] AssembledSystem assemble(const enrich::EnrichedSpace& enr, const geom::MeshClassification& cls,
                                       const QuadratureCache& cache, const ProblemData& data);

struct ScaledSystem {
    la::SpMat K;  ///< D K D, unit diagonal
    Eigen::VectorXd F;
    Eigen::VectorXd D;
    Eigen::VectorXd constraint;
    double target = 0.0;
    int n_orig = 0;
    int n_enr = 0;
};

[[nodiscard]] ScaledSystem scale_system(const AssembledSystem& sys);

struct Solution {
    Eigen::VectorXd orig;  ///< B-spline coefficients
    Eigen::VectorXd enr;   ///< coefficients of the current enrichment functions
    double residual = 0.0;
    double multiplier = 0.0;
};

/// Solve the scaled system with the constant mode fixed by the constraint.
[[nodiscard]] Solution solve(const ScaledSystem& sys);

/// Coefficients of u_h against the B-splines and the raw enrichment functions.
struct RawCoefficients {
    Eigen::VectorXd bspline;
    Eigen::VectorXd raw;
};
[[nodiscard]] RawCoefficients to_raw(const enrich::EnrichedSpace& enr, const Solution& sol);

/// u_h and its physical gradient at a parameter point inside element e.
struct FieldValue {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
};
[[nodiscard]] FieldValue eval_solution(const enrich::EnrichedSpace& enr, const RawCoefficients& c,
                                       const spline::GeometryMap& geometry, int e, const Vec2& p, Side side);

struct ErrorNorms {
    double l2 = 0.0;  ///< after matching the means of u and u_h
    double h1 = 0.0;  ///< gradient L2 norm (H1 seminorm)
    double mean_shift = 0.0;
};

[[nodiscard]] ErrorNorms error_norms(const enrich::EnrichedSpace& enr, const geom::MeshClassification& cls,
                                     const QuadratureCache& cache, const ProblemData& data,
                                     const Solution& sol);

}  // namespace sgiga::fem
