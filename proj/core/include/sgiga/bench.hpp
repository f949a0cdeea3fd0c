#pragma once

// Sweep drivers: one (method, N) cell runs classify -> enrich -> assemble ->
// stabilise -> scale -> solve -> errors/SCN. Records are written as CSV and
// optionally plotted.

#include "sgiga/assembly.hpp"
#include "sgiga/enrichment.hpp"
#include "sgiga/experiments.hpp"
#include "sgiga/linalg.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sgiga::bench {

struct RunOptions {
    fem::QuadratureOptions quad;
    bool errors = true;
    bool scn = true;
    la::ScnOptions scn_options;
    /// Stop after classification and enrichment; report the DOF count only.
    bool dofs_only = false;
    std::optional<bool> projection;     ///< override the method default
    std::optional<bool> orthogonalize;  ///< override the method default
};

struct Record {
    std::string experiment;
    enrich::Method method = enrich::Method::IGA;
    int N = 0;
    double h = 0.0;
    double delta = 0.0;
    int dofs = 0;
    int n_orig = 0;
    int n_enr = 0;
    int dropped = 0;
    double l2_error = 0.0;
    double h1_error = 0.0;
    double scn = 0.0;
    double wall_ms = 0.0;
    double residual = 0.0;
    std::string notes;
    bool ok = true;
    std::string error;
};

/// Run one cell. Stage failures are caught and recorded in the result.
[[nodiscard]] Record run_cell(const Experiment& ex, enrich::Method method, int N, const RunOptions& options);

using RecordSink = std::function<void(const Record&)>;

/// Cells in (method, N) order. With workers > 1 cells run concurrently but
/// `sink` still sees them in that order.
std::vector<Record> run_convergence(const Experiment& ex, const std::vector<enrich::Method>& methods,
                                    const std::vector<int>& Ns, const RunOptions& options, int workers = 1,
                                    const RecordSink& sink = {});

/// delta_j = 0.05 * 2^-j, j = 1..count.
[[nodiscard]] std::vector<double> robustness_deltas(int count = 20);

/// Fixed h = 1/N, one cell per (method, delta).
std::vector<Record> run_robustness(double a0, double a1, const std::vector<enrich::Method>& methods,
                                   const std::vector<double>& deltas, const RunOptions& options, int N = 20,
                                   int workers = 1, const RecordSink& sink = {});

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares of log(q) against log(h).
[[nodiscard]] SlopeFit fit_slope(const std::vector<double>& h, const std::vector<double>& q);

enum class Quantity { L2, H1, Scn };

/// Slope over the successful records of one method, ordered by h.
[[nodiscard]] SlopeFit fit_slope(const std::vector<Record>& records, enrich::Method method, Quantity quantity,
                                 bool exclude_coarsest = false);

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const Record& r);
void write_csv(std::ostream& os, const std::vector<Record>& records);

/// Log-log plot of `quantity` against h, one polyline per method.
void write_svg(std::ostream& os, const std::vector<Record>& records, Quantity quantity, const std::string& title);

}  // namespace sgiga::bench
