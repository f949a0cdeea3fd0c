#include "sgiga/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace sgiga::bench {

namespace {

struct Pipeline {
    const Experiment& ex;
    const RunOptions& opt;
    Record& rec;

    void run(enrich::Method method, int N) {
        const auto space = spline::SplineSpace2D::uniform(ex.domain, N, N);
        const auto cls = geom::classify_elements(space, *ex.iface);
        auto variant = enrich::MethodVariant::defaults(method);
        if (opt.projection) variant.projection = *opt.projection;
        if (opt.orthogonalize) variant.orthogonalize = *opt.orthogonalize;
        auto enr = enrich::build_enrichment(variant, space, ex.iface, cls);
        rec.n_orig = space.num_basis();
        if (cls.num_touch() > 0) note("touching elements " + std::to_string(cls.num_touch()));
        if (opt.dofs_only) {
            rec.n_enr = enr.num_functions();
            rec.dofs = rec.n_orig + rec.n_enr;
            return;
        }

        const fem::QuadratureCache cache(space, cls, *ex.iface, opt.quad);
        if (cache.fallback_leaves() > 0) note("fallback leaves " + std::to_string(cache.fallback_leaves()));
        const auto raw = fem::assemble_raw(enr, cls, cache, ex.data);
        if (variant.projection) enrich::apply_projection_T(enr, raw.M_nn, raw.M_npsi);
        auto sys = fem::rebase(raw, enr);
        prune(enr, raw, sys);
        if (variant.orthogonalize) {
            enrich::orthogonalize_ldl(enr, sys.K_ee);
            sys = fem::rebase(raw, enr);
        }

        const auto scaled = fem::scale_system(sys);
        const auto sol = fem::solve(scaled);
        rec.n_enr = sys.n_enr;
        rec.dofs = sys.size();
        rec.dropped = enr.num_dropped();
        rec.residual = sol.residual;
        if (opt.errors) {
            const auto err = fem::error_norms(enr, cls, cache, ex.data, sol);
            rec.l2_error = err.l2;
            rec.h1_error = err.h1;
        }
        if (opt.scn) {
            const auto s = la::scn(la::SymMatrix(scaled.K), 1, opt.scn_options);
            rec.scn = s.scn;
            note("scn excludes 1 smallest eigenvalue (constant mode)");
            if (s.method == la::SpectrumSummary::Method::Iterative) note("scn iterative");
        }
        for (const auto& n : enr.notes()) note(n);
    }

    // Drop enrichment functions whose energy is negligible against the mean diagonal.
    static void prune(enrich::EnrichedSpace& enr, const fem::RawSystem& raw, fem::AssembledSystem& sys) {
        if (sys.n_enr == 0) return;
        const double mean = (sys.K_oo.diagonal().sum() + sys.K_ee.diagonal().sum()) / sys.size();
        std::vector<int> weak;
        for (int i = 0; i < sys.n_enr; ++i)
            if (!(sys.K_ee(i, i) >= 1e-14 * mean)) weak.push_back(i);
        if (weak.empty()) return;
        enr.drop(weak, "energy diagonal below 1e-14 of the mean");
        sys = fem::rebase(raw, enr);
    }

    void note(const std::string& s) {
        if (!rec.notes.empty()) rec.notes += "; ";
        rec.notes += s;
    }
};

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '"') c = c == ',' ? ';' : ' ';
    return s;
}

std::vector<Record> run_cells(std::vector<std::function<Record()>> jobs, int workers, const RecordSink& sink) {
    const std::size_t n = jobs.size();
    std::vector<Record> out(n);
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = jobs[i]();
            if (sink) sink(out[i]);
        }
        return out;
    }
    std::vector<char> done(n, 0);
    std::mutex m;
    std::condition_variable cv;
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(m);
                if (next >= n) return;
                i = next++;
            }
            Record r = jobs[i]();
            {
                std::lock_guard lock(m);
                out[i] = std::move(r);
                done[i] = 1;
            }
            cv.notify_all();
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(workers, static_cast<int>(n)); ++w) pool.emplace_back(worker);
    for (std::size_t i = 0; i < n; ++i) {
        std::unique_lock lock(m);
        cv.wait(lock, [&] { return done[i] != 0; });
        lock.unlock();
        if (sink) sink(out[i]);
    }
    for (auto& t : pool) t.join();
    return out;
}

}  // namespace

Record run_cell(const Experiment& ex, enrich::Method method, int N, const RunOptions& options) {
    Record rec;
    rec.experiment = std::string(experiment_name(ex.tag));
    rec.method = method;
    rec.N = N;
    rec.h = 1.0 / N;
    rec.delta = ex.delta;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (N < 1) throw InvalidArgument("run_cell: N must be positive");
        Pipeline{ex, options, rec}.run(method, N);
        for (double v : {rec.l2_error, rec.h1_error, rec.scn})
            if (!std::isfinite(v)) throw ConvergenceError("run_cell: non-finite result");
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

std::vector<Record> run_convergence(const Experiment& ex, const std::vector<enrich::Method>& methods,
                                    const std::vector<int>& Ns, const RunOptions& options, int workers,
                                    const RecordSink& sink) {
    if (!std::is_sorted(Ns.begin(), Ns.end())) throw InvalidArgument("run_convergence: Ns must be ascending");
    std::vector<std::function<Record()>> jobs;
    for (auto m : methods)
        for (int N : Ns) jobs.emplace_back([&ex, &options, m, N] { return run_cell(ex, m, N, options); });
    return run_cells(std::move(jobs), workers, sink);
}

std::vector<double> robustness_deltas(int count) {
    std::vector<double> d;
    for (int j = 1; j <= count; ++j) d.push_back(0.05 * std::ldexp(1.0, -j));
    return d;
}

std::vector<Record> run_robustness(double a0, double a1, const std::vector<enrich::Method>& methods,
                                   const std::vector<double>& deltas, const RunOptions& options, int N,
                                   int workers, const RecordSink& sink) {
    std::vector<Experiment> exps;
    exps.reserve(deltas.size());
    for (double d : deltas) exps.push_back(define_experiment(ExperimentTag::Robustness, a0, a1, d));
    std::vector<std::function<Record()>> jobs;
    for (auto m : methods)
        for (const auto& ex : exps) jobs.emplace_back([&ex, &options, m, N] { return run_cell(ex, m, N, options); });
    return run_cells(std::move(jobs), workers, sink);
}

SlopeFit fit_slope(const std::vector<double>& h, const std::vector<double>& q) {
    if (h.size() != q.size() || h.size() < 2) throw InvalidArgument("fit_slope: at least two matching points required");
    const auto n = static_cast<double>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> x(h.size()), y(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !(q[i] > 0.0)) throw InvalidArgument("fit_slope: nonpositive value");
        x[i] = std::log(h[i]);
        y[i] = std::log(q[i]);
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    SlopeFit f;
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw InvalidArgument("fit_slope: all h equal");
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    const double ybar = sy / n;
    double ss_tot = 0, ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

namespace {

double quantity_of(const Record& r, Quantity q) {
    switch (q) {
        case Quantity::L2: return r.l2_error;
        case Quantity::H1: return r.h1_error;
        case Quantity::Scn: return r.scn;
    }
    return 0.0;
}

std::string_view quantity_name(Quantity q) {
    switch (q) {
        case Quantity::L2: return "L2 error";
        case Quantity::H1: return "H1 seminorm error";
        case Quantity::Scn: return "SCN";
    }
    return "";
}

}  // namespace

SlopeFit fit_slope(const std::vector<Record>& records, enrich::Method method, Quantity quantity,
                   bool exclude_coarsest) {
    std::vector<const Record*> sel;
    for (const auto& r : records)
        if (r.ok && r.method == method) sel.push_back(&r);
    std::sort(sel.begin(), sel.end(), [](const Record* a, const Record* b) { return a->h > b->h; });
    if (exclude_coarsest && !sel.empty()) sel.erase(sel.begin());
    if (sel.size() < 3) throw InvalidArgument("fit_slope: fewer than three records");
    std::vector<double> h, q;
    for (const auto* r : sel) {
        h.push_back(r->h);
        q.push_back(quantity_of(*r, quantity));
    }
    return fit_slope(h, q);
}

void write_csv_header(std::ostream& os) { os << "method,N,h,dofs,l2_error,h1_error,scn,wall_ms,notes\n"; }

void write_csv_row(std::ostream& os, const Record& r) {
    std::ostringstream line;
    line << std::setprecision(10);
    line << enrich::method_name(r.method) << ',' << r.N << ',' << r.h << ',' << r.dofs << ',';
    if (r.ok) {
        line << r.l2_error << ',' << r.h1_error << ',' << r.scn << ',';
    } else {
        line << "nan,nan,nan,";
    }
    line << std::fixed << std::setprecision(1) << r.wall_ms << ',';
    std::string notes = r.notes;
    if (r.delta > 0.0) {
        std::ostringstream d;
        d << std::setprecision(10) << "delta=" << r.delta;
        notes = notes.empty() ? d.str() : d.str() + "; " + notes;
    }
    if (!r.ok) notes = "FAILED: " + r.error + (notes.empty() ? "" : "; " + notes);
    line << sanitize(notes) << '\n';
    os << line.str();
}

void write_csv(std::ostream& os, const std::vector<Record>& records) {
    write_csv_header(os);
    for (const auto& r : records) write_csv_row(os, r);
}

void write_svg(std::ostream& os, const std::vector<Record>& records, Quantity quantity, const std::string& title) {
    constexpr double W = 640, H = 480, L = 80, R = 160, T = 40, B = 60;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& r : records) {
        const double v = quantity_of(r, quantity);
        if (!r.ok || !(v > 0.0)) continue;
        const double x = std::log10(r.h), y = std::log10(v);
        series[std::string(enrich::method_name(r.method))].emplace_back(x, y);
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    if (series.empty()) {
        os << "</svg>\n";
        return;
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    const auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    const auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">log10 h</text>\n";
    os << "<text x=\"20\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 20 " << (T + H - B) / 2
       << ")\" text-anchor=\"middle\">log10 " << quantity_name(quantity) << "</text>\n";
    for (int k = static_cast<int>(std::ceil(xmin)); k <= static_cast<int>(std::floor(xmax)); ++k)
        os << "<text x=\"" << px(k) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << k << "</text>\n";
    for (int k = static_cast<int>(std::ceil(ymin)); k <= static_cast<int>(std::floor(ymax)); ++k)
        os << "<text x=\"" << L - 8 << "\" y=\"" << py(k) + 4 << "\" text-anchor=\"end\">" << k << "</text>\n";
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};
    int idx = 0;
    for (auto& [name, pts] : series) {
        std::sort(pts.begin(), pts.end());
        const char* col = colors[idx % 7];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
        os << "\"/>\n";
        for (const auto& [x, y] : pts)
            os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
        const double ly = T + 20 + 20 * idx;
        os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
           << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\">" << name << "</text>\n";
        ++idx;
    }
    os << "</svg>\n";
}

}  // namespace sgiga::bench
