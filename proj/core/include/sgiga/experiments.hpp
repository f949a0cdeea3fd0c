#pragma once

// Manufactured-solution interface problems: a straight line through a
// singular corner field, a circle, a spiral arc on an annulus, and a line
// creeping towards an element boundary.

#include "sgiga/assembly.hpp"
#include "sgiga/common.hpp"
#include "sgiga/interface.hpp"

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace sgiga::bench {

enum class ExperimentTag { Line, Circle, Arc, Robustness };

[[nodiscard]] std::string_view experiment_name(ExperimentTag tag);
[[nodiscard]] std::optional<ExperimentTag> parse_experiment(std::string_view name);

/// Value, physical gradient and physical Laplacian of one branch.
struct Jet {
    double u = 0.0;
    Vec2 grad = Vec2::Zero();
    double laplacian = 0.0;
};

struct Experiment {
    ExperimentTag tag = ExperimentTag::Circle;
    double a0 = 1.0;  ///< coefficient on Omega_0
    double a1 = 1.0;  ///< coefficient on Omega_1
    double delta = 0.0;
    Box domain;  ///< parameter domain
    std::shared_ptr<const geom::ImplicitInterface> iface;
    /// Which level-set side Omega_0 occupies.
    Side omega0 = Side::Positive;
    /// Exact branch `region` (0 or 1) at a location, regardless of which side it lies on.
    std::function<Jet(int region, const fem::Location&)> exact;
    /// f, g, q and the exact solution derived from `exact`.
    fem::ProblemData data;

    [[nodiscard]] int region(Side s) const { return s == omega0 ? 0 : 1; }
    [[nodiscard]] double coefficient(int region) const { return region == 0 ? a0 : a1; }
};

/// Build an experiment. `delta` is used by the robustness case only.
[[nodiscard]] Experiment define_experiment(ExperimentTag tag, double a0, double a1, double delta = 0.025);

/// Default (a0, a1) per experiment.
[[nodiscard]] std::pair<double, double> default_coefficients(ExperimentTag tag);

}  // namespace sgiga::bench
