#pragma once

// Enrichment spaces for the GIGA family: window functions (B-splines or the
// partition functions theta_j), distance-based generators with optional
// quasi-interpolation subtraction, and the re-basing transforms (local L2
// projection T and LDL^T orthogonalisation).

#include "sgiga/common.hpp"
#include "sgiga/interface.hpp"
#include "sgiga/linalg.hpp"
#include "sgiga/quasi_interp.hpp"
#include "sgiga/splines.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgiga::enrich {

enum class Method { IGA, GIGA, SGIGA, CorrectedGIGA, SGIGAMulti, GIGAStar, SGIGA2 };

/// Command-line spelling: iga, giga, sgiga, cor-giga, sgiga-multi, giga-star, sgiga2.
[[nodiscard]] std::string_view method_name(Method m);
[[nodiscard]] std::optional<Method> parse_method(std::string_view name);
[[nodiscard]] const std::array<Method, 7>& all_methods();

struct MethodVariant {
    Method method = Method::IGA;
    bool projection = false;
    bool orthogonalize = false;

    /// Default stabilisation flags (both on for SGIGA2 only).
    [[nodiscard]] static MethodVariant defaults(Method m);
};

enum class WindowKind : unsigned char { BSpline, Theta };

/// Factor multiplying the distance in a generator.
enum class Monomial : unsigned char { One, S, T, Ramp };
enum class DistanceKind : unsigned char { Unsigned, OneSided };
enum class Subtraction : unsigned char { None, Plain, Modified };

struct Generator {
    Monomial monomial = Monomial::One;
    DistanceKind distance = DistanceKind::Unsigned;
    Subtraction subtraction = Subtraction::None;
    std::vector<double> coefficients;  ///< I_b or I_b* coefficients (empty for None)
};

/// One raw enrichment function psi = window * (generator - subtraction).
struct Function {
    WindowKind window = WindowKind::BSpline;
    int index = -1;  ///< B-spline index or enriched element index
    int generator = 0;
};

/// Raw enrichment values on one element at one point.
struct RawValues {
    std::vector<double> value;
    std::vector<Vec2> grad;  ///< parameter-space gradient
};

/// Current basis psi_k = sum_l C(l, k) psi_raw_l + sum_r E(r, k) N_{rows[r]}.
struct Transform {
    Eigen::MatrixXd C;
    std::vector<int> rows;
    Eigen::MatrixXd E;
};

class EnrichedSpace {
public:
    EnrichedSpace(MethodVariant variant, spline::SplineSpace2D space,
                  std::shared_ptr<const geom::ImplicitInterface> iface);

    [[nodiscard]] const MethodVariant& variant() const { return variant_; }
    [[nodiscard]] const spline::SplineSpace2D& space() const { return space_; }
    [[nodiscard]] const geom::ImplicitInterface& interface() const { return *iface_; }

    [[nodiscard]] int num_raw() const { return static_cast<int>(functions_.size()); }
    [[nodiscard]] int num_functions() const { return static_cast<int>(transform_.C.cols()); }
    [[nodiscard]] const std::vector<Function>& functions() const { return functions_; }
    [[nodiscard]] const std::vector<Generator>& generators() const { return generators_; }

    /// Elements whose windows define the enrichment (J^f_1 or J^f_{1,+}).
    [[nodiscard]] const std::vector<int>& enriched_elements() const { return enriched_; }
    /// mu_k for every B-spline (zero unless theta windows are used).
    [[nodiscard]] const std::vector<int>& mu() const { return mu_; }
    /// B-splines in the ramp of corrected GIGA.
    [[nodiscard]] const std::vector<char>& ramp_set() const { return ramp_; }

    /// Raw functions that may be nonzero on element e.
    [[nodiscard]] const std::vector<int>& active(int e) const {
        return active_[static_cast<std::size_t>(e)];
    }

    /// Raw values/gradients of active(e) at p, using the branch of `side`
    /// for the distance.
    void eval_raw(int e, const Vec2& p, Side side, const spline::TensorBasis& tb, RawValues& out) const;

    /// Value of the window function of raw function l (for tests).
    [[nodiscard]] double window_value(int l, const Vec2& p) const;

    /// Value of theta_j for an enriched element j.
    [[nodiscard]] double theta(int j, const Vec2& p) const;

    /// All current functions at p: values and parameter gradients.
    void eval_current(int e, const Vec2& p, Side side, Eigen::VectorXd& value,
                      Eigen::MatrixX2d& grad) const;

    [[nodiscard]] const Transform& transform() const { return transform_; }
    void set_transform(Transform t);
    /// Remove current functions (indices into the current basis).
    void drop(const std::vector<int>& current_indices, const std::string& reason);

    /// Bases whose support meets an enriched element (the projection subspace).
    [[nodiscard]] std::vector<int> projection_subspace() const;

    [[nodiscard]] const std::vector<std::string>& notes() const { return notes_; }
    void add_note(std::string note) { notes_.push_back(std::move(note)); }
    [[nodiscard]] int num_dropped() const { return dropped_; }

private:
    friend EnrichedSpace build_enrichment(const MethodVariant&, const spline::SplineSpace2D&,
                                          std::shared_ptr<const geom::ImplicitInterface>,
                                          const geom::MeshClassification&);
    friend struct OrthogonalizeReport orthogonalize_ldl(EnrichedSpace&, const Eigen::MatrixXd&,
                                                        const la::LdltOptions&);

    struct ActiveEntry {
        int function;
        std::array<double, 9> weights;  ///< window coefficients on the element's nine bases
    };

    void finalize_active();

    MethodVariant variant_;
    spline::SplineSpace2D space_;
    std::shared_ptr<const geom::ImplicitInterface> iface_;
    std::vector<Generator> generators_;
    std::vector<Function> functions_;
    std::vector<int> enriched_;
    std::vector<int> mu_;
    std::vector<char> ramp_;
    std::vector<std::vector<int>> active_;
    std::vector<std::vector<ActiveEntry>> entries_;
    Transform transform_;
    std::vector<std::string> notes_;
    int dropped_ = 0;
};

/// mu_k = number of J^f_{1,+} elements inside the support of N_k.
[[nodiscard]] std::vector<int> mu_counts(const geom::MeshClassification& cls,
                                         const spline::SplineSpace2D& space);

/// Coefficients (over all B-splines) of theta_j = sum_{k covers j} N_k / mu_k.
[[nodiscard]] std::vector<std::pair<int, double>> theta_coefficients(const geom::MeshClassification& cls,
                                                                     const spline::SplineSpace2D& space,
                                                                     const std::vector<int>& mu, int j);

[[nodiscard]] EnrichedSpace build_enrichment(const MethodVariant& variant,
                                             const spline::SplineSpace2D& space,
                                             std::shared_ptr<const geom::ImplicitInterface> iface,
                                             const geom::MeshClassification& cls);

/// psi <- psi - T(psi), T = M^{-1} G the L2 projection onto the projection
/// subspace. `mass_nn` is the B-spline mass matrix, `mass_npsi` the mixed
/// mass matrix against raw functions.
void apply_projection_T(EnrichedSpace& enr, const la::SpMat& mass_nn, const la::SpMat& mass_npsi);

struct OrthogonalizeReport {
    Eigen::VectorXd pivots;
    std::vector<int> dropped;
};

/// Re-base the current functions with L^{-T} from K_EE = L D L^T so that the
/// new energy Gram matrix is D. Weak pivots are dropped or raise, per options.
OrthogonalizeReport orthogonalize_ldl(EnrichedSpace& enr, const Eigen::MatrixXd& k_ee,
                                      const la::LdltOptions& options = {la::LdltOptions::OnBreakdown::Drop,
                                                                        1e-12});

}  // namespace sgiga::enrich
