#pragma once

// Three-point quadratic B-spline quasi-interpolation I_b and its
// interface-aware variant I_b*.

#include "sgiga/common.hpp"
#include "sgiga/interface.hpp"
#include "sgiga/splines.hpp"

#include <array>
#include <functional>
#include <vector>

namespace sgiga::qi {

using ScalarFn1D = std::function<double(double)>;
using ScalarField = std::function<double(const Vec2&)>;

/// How a coefficient was obtained.
enum class Rule : unsigned char {
    ThreePoint,  ///< weighted three-point rule
    OnePoint,    ///< collapsed end span: the coefficient interpolates the knot value
};

/// Which extension a 2D coefficient sampled.
enum class Branch : unsigned char { Plain, Positive, Negative };

struct Weights {
    std::array<double, 3> alpha{};
    std::array<double, 3> tau{};
    Rule rule = Rule::ThreePoint;
};

/// Weights alpha_{j,k} with sum_k alpha_{j,k} p(tau_j^k) equal to the j-th
/// B-spline coefficient of every quadratic p.
[[nodiscard]] Weights alpha_weights(const spline::KnotVector& kv, int j);

/// A sample came back NaN or infinite.
class NonFiniteSampleError : public DomainError {
public:
    NonFiniteSampleError(const std::string& what, const Vec2& point) : DomainError(what), point_(point) {}
    [[nodiscard]] const Vec2& point() const { return point_; }

private:
    Vec2 point_;
};

struct QiCoefficients1D {
    std::vector<double> mu;
    std::vector<Rule> rule;
};

struct QiCoefficients {
    std::vector<double> mu;  ///< indexed like SplineSpace2D::basis_index
    std::vector<Rule> rule_s;
    std::vector<Rule> rule_t;
    std::vector<Branch> branch;

    [[nodiscard]] int size() const { return static_cast<int>(mu.size()); }
};

/// f-bar_0 extends the positive-side branch, f-bar_1 the negative-side one;
/// both must be finite on the whole parameter domain.
struct ExtensionPair {
    ScalarField positive;
    ScalarField negative;
};

[[nodiscard]] QiCoefficients1D qi_1d(const ScalarFn1D& f, const spline::KnotVector& kv);
[[nodiscard]] QiCoefficients qi_2d(const ScalarField& f, const spline::SplineSpace2D& space);

/// Which coefficients sample f-bar_0.
enum class Ownership {
    /// Anchor element lies entirely on the positive side. The result then
    /// reproduces f-bar_0 on every positive element outside J^f_{1,+}.
    AnchorSide,
    /// Anchor element is positive and outside J^f_{1,+}; exact only outside
    /// J^f_{1,+} dilated once.
    AnchorOutsideRing,
};

/// Coefficients owned by a positive anchor element (see Ownership) sample
/// f-bar_0; all others sample f-bar_1.
[[nodiscard]] QiCoefficients qi_modified_2d(const ExtensionPair& ext,
                                            const geom::MeshClassification& cls,
                                            const spline::SplineSpace2D& space,
                                            Ownership ownership = Ownership::AnchorSide);

/// Whether qi_modified_2d assigns basis k to the positive extension.
[[nodiscard]] bool uses_positive_branch(const geom::MeshClassification& cls,
                                        const spline::SplineSpace2D& space, int k,
                                        Ownership ownership = Ownership::AnchorSide);

}  // namespace sgiga::qi
