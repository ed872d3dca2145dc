#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>
#include <vector>

#include "bl/gaussian.hpp"

namespace bl {

// ---------------------------------------------------------------------------
// Carriers
// ---------------------------------------------------------------------------

/// Nonnegative samples on an axis-aligned symmetric grid, at most 3 axes of
/// at most 512 points each. Values are stored row-major with axis 0 slowest.
struct GridField {
    std::vector<int> dims;
    std::vector<double> half_widths;
    std::vector<double> values;

    int axes() const { return static_cast<int>(dims.size()); }

    double spacing(int axis) const {
        return 2.0 * half_widths[axis] / (dims[axis] - 1);
    }

    std::size_t size() const {
        std::size_t s = 1;
        for (int d : dims) s *= static_cast<std::size_t>(d);
        return s;
    }

    void check() const {
        if (dims.empty() || dims.size() > 3)
            throw StructuralError("GridField: 1 to 3 axes required");
        for (std::size_t a = 0; a < dims.size(); ++a) {
            if (dims[a] < 2 || dims[a] > 512)
                throw StructuralError("GridField: axis size must be in [2, 512]");
            if (!(half_widths[a] > 0.0))
                throw StructuralError("GridField: half-width must be positive");
        }
        if (values.size() != size())
            throw StructuralError("GridField: value count does not match the grid");
        double mass = 0.0;
        for (double v : values) {
            if (!std::isfinite(v) || v < 0.0)
                throw StructuralError("GridField: values must be finite and nonnegative");
            mass += v;
        }
        if (!(mass > 0.0)) throw StructuralError("GridField: total mass must be positive");
    }

    double cell_volume() const {
        double vol = 1.0;
        for (int a = 0; a < axes(); ++a) vol *= spacing(a);
        return vol;
    }

    /// integral of the field, nodes carrying full cell weight
    double total_mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * cell_volume();
    }
};

struct PointMass {
    Vector location;
    double weight = 0.0;
};

using PointMassList = std::vector<PointMass>;

inline void check_point_masses(const PointMassList& masses, int expected_dim) {
    if (masses.empty()) throw StructuralError("point mass list must be nonempty");
    for (const auto& m : masses) {
        if (m.location.size() != expected_dim)
            throw StructuralError("point mass has the wrong dimension");
        if (!(m.weight > 0.0) || !std::isfinite(m.weight))
            throw StructuralError("point mass weights must be positive finite");
    }
}

/// The field interpreted as an atomic measure, one mass per node.
inline PointMassList to_point_masses(const GridField& f) {
    f.check();
    const double vol = f.cell_volume();
    PointMassList out;
    const int a = f.axes();
    std::vector<int> idx(a, 0);
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        std::size_t rest = flat;
        for (int axis = a - 1; axis >= 0; --axis) {
            idx[axis] = static_cast<int>(rest % f.dims[axis]);
            rest /= f.dims[axis];
        }
        const double v = f.values[flat];
        if (v <= 0.0) continue;
        Vector loc(a);
        for (int axis = 0; axis < a; ++axis)
            loc(axis) = -f.half_widths[axis] + f.spacing(axis) * idx[axis];
        out.push_back({loc, v * vol});
    }
    return out;
}

/// Log-concave kernel on R^a: a centred gaussian, the exponential kernel
/// exp(-rate |x|), or a tabulated 1d profile validated log-concave.
struct KernelSpec {
    enum class Kind { Gaussian, Exponential, Tabulated };
    Kind kind = Kind::Gaussian;
    Matrix A;           // Gaussian: exp(-pi <Ax, x>)
    double rate = 1.0;  // Exponential: exp(-rate |x|)
    std::vector<double> grid;   // Tabulated (1d): strictly increasing abscissae
    std::vector<double> table;  // strictly positive samples

    static KernelSpec gaussian(Matrix a) {
        KernelSpec k;
        k.kind = Kind::Gaussian;
        k.A = std::move(a);
        return k;
    }
    static KernelSpec exponential(double rate) {
        KernelSpec k;
        k.kind = Kind::Exponential;
        k.rate = rate;
        return k;
    }
    static KernelSpec tabulated(std::vector<double> xs, std::vector<double> vals) {
        KernelSpec k;
        k.kind = Kind::Tabulated;
        k.grid = std::move(xs);
        k.table = std::move(vals);
        k.validate_log_concavity();
        return k;
    }

    int dimension() const {
        if (kind == Kind::Gaussian) return static_cast<int>(A.rows());
        if (kind == Kind::Exponential) return 0; // radial, any dimension
        return 1;
    }

    /// Discrete second differences of log psi must be <= 1e-8.
    void validate_log_concavity() const {
        if (kind != Kind::Tabulated) return;
        if (grid.size() != table.size() || grid.size() < 3)
            throw StructuralError("tabulated kernel needs at least 3 samples");
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (!(table[i] > 0.0)) throw StructuralError("tabulated kernel must be positive");
            if (i > 0 && !(grid[i] > grid[i - 1]))
                throw StructuralError("tabulated kernel grid must be increasing");
        }
        for (std::size_t i = 1; i + 1 < table.size(); ++i) {
            const double hl = grid[i] - grid[i - 1], hr = grid[i + 1] - grid[i];
            const double dl = (std::log(table[i]) - std::log(table[i - 1])) / hl;
            const double dr = (std::log(table[i + 1]) - std::log(table[i])) / hr;
            if (dr - dl > 1e-8)
                throw PreconditionError("tabulated kernel is not log-concave");
        }
    }

    double eval1d(double x) const {
        switch (kind) {
            case Kind::Gaussian:
                return std::exp(-M_PI * A(0, 0) * x * x);
            case Kind::Exponential:
                return std::exp(-rate * std::abs(x));
            case Kind::Tabulated: {
                // piecewise linear in log psi, linearly extended at the ends
                const auto it = std::upper_bound(grid.begin(), grid.end(), x);
                std::size_t i1;
                if (it == grid.begin())
                    i1 = 1;
                else if (it == grid.end())
                    i1 = grid.size() - 1;
                else
                    i1 = static_cast<std::size_t>(it - grid.begin());
                const std::size_t i0 = i1 - 1;
                const double t = (x - grid[i0]) / (grid[i1] - grid[i0]);
                return std::exp((1.0 - t) * std::log(table[i0]) + t * std::log(table[i1]));
            }
        }
        return 0.0;
    }

    double eval(const Vector& x) const {
        switch (kind) {
            case Kind::Gaussian:
                return std::exp(-M_PI * x.dot(A * x));
            case Kind::Exponential:
                return std::exp(-rate * x.norm());
            case Kind::Tabulated:
                return eval1d(x(0));
        }
        return 0.0;
    }

    /// half-width beyond which the kernel is below e^-36 of its centre value
    double decay_width() const {
        switch (kind) {
            case Kind::Gaussian: {
                const double lam = linalg::sym_eigenvalues(A)(0);
                return std::sqrt(36.0 / (M_PI * lam));
            }
            case Kind::Exponential:
                return 36.0 / rate;
            case Kind::Tabulated: {
                const std::size_t k = grid.size() - 1;
                const double slope =
                    (std::log(table[k]) - std::log(table[k - 1])) / (grid[k] - grid[k - 1]);
                const double ext = std::max(std::abs(grid.front()), std::abs(grid.back()));
                return ext + (slope < -1e-12 ? 36.0 / -slope : 10.0 * ext);
            }
        }
        return 0.0;
    }

    /// abscissae where the profile is not smooth (panel boundaries for
    /// quadrature); only the exponential kernel has one, at the origin
    bool has_kink() const { return kind == Kind::Exponential; }
};

/// Sampled values of a monotone quantity with per-sample discretisation
/// error estimates.
struct MonotonicityTrace {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> error_bounds;
    /// large-time limit when the flow has one (product of input masses)
    std::optional<double> limit;

    void check() const {
        if (times.empty() || times.size() != values.size() ||
            times.size() != error_bounds.size())
            throw StructuralError("MonotonicityTrace: inconsistent lengths");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw StructuralError("MonotonicityTrace: times must be strictly increasing");
    }
};

inline std::vector<double> geometric_times(double t0 = 0.05, double ratio = 1.3,
                                           int count = 25) {
    std::vector<double> ts;
    double t = t0;
    for (int i = 0; i < count; ++i) {
        ts.push_back(t);
        t *= ratio;
    }
    return ts;
}

enum class Direction { NonDecreasing, NonIncreasing };

struct CheckResult {
    bool pass = false;
    double worst_violation = 0.0;
    int worst_index = -1;
};

/// Passes when every consecutive difference respects the direction within
/// the sum of the two samples' error bounds.
inline CheckResult assert_monotone(const MonotonicityTrace& trace, Direction dir) {
    trace.check();
    CheckResult res;
    res.pass = true;
    for (std::size_t i = 1; i < trace.values.size(); ++i) {
        const double diff = trace.values[i] - trace.values[i - 1];
        const double slack = trace.error_bounds[i] + trace.error_bounds[i - 1];
        const double violation =
            dir == Direction::NonDecreasing ? -(diff + slack) : diff - slack;
        if (violation > res.worst_violation) {
            res.worst_violation = violation;
            res.worst_index = static_cast<int>(i);
            res.pass = false;
        }
    }
    return res;
}

/// Every step exceeds 3x the combined error bound.
inline bool is_strictly_monotone(const MonotonicityTrace& trace, Direction dir) {
    trace.check();
    for (std::size_t i = 1; i < trace.values.size(); ++i) {
        const double diff = trace.values[i] - trace.values[i - 1];
        const double need = 3.0 * (trace.error_bounds[i] + trace.error_bounds[i - 1]);
        if (dir == Direction::NonDecreasing ? diff <= need : -diff <= need) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Quadrature machinery
// ---------------------------------------------------------------------------

namespace detail {

inline void parallel_for(int n, const std::function<void(int)>& body) {
    const unsigned workers =
        std::min<unsigned>(8, std::max<unsigned>(1, std::thread::hardware_concurrency()));
    if (workers <= 1 || n < 4) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (static_cast<std::size_t>(n) + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const int lo = static_cast<int>(w * chunk);
        const int hi = std::min<int>(n, static_cast<int>((w + 1) * chunk));
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Tensor-product trapezoid integral of f over [-R, R]^dim, parallel over
/// the slowest axis with a deterministic reduction order.
inline double box_integral(int dim, double half_width, int points_per_axis,
                           const std::function<double(const Vector&)>& f) {
    const int npts = points_per_axis;
    const double h = 2.0 * half_width / (npts - 1);
    const auto axis_weight = [npts](int i) { return (i == 0 || i == npts - 1) ? 0.5 : 1.0; };

    if (dim == 1) {
        std::vector<double> partial(npts, 0.0);
        parallel_for(npts, [&](int i) {
            Vector x(1);
            x(0) = -half_width + h * i;
            partial[i] = axis_weight(i) * f(x);
        });
        return std::accumulate(partial.begin(), partial.end(), 0.0) * h;
    }
    if (dim == 2) {
        std::vector<double> rows(npts, 0.0);
        parallel_for(npts, [&](int i) {
            Vector x(2);
            x(0) = -half_width + h * i;
            double acc = 0.0;
            for (int j = 0; j < npts; ++j) {
                x(1) = -half_width + h * j;
                acc += axis_weight(j) * f(x);
            }
            rows[i] = axis_weight(i) * acc;
        });
        return std::accumulate(rows.begin(), rows.end(), 0.0) * h * h;
    }
    if (dim == 3) {
        std::vector<double> slabs(npts, 0.0);
        parallel_for(npts, [&](int i) {
            Vector x(3);
            x(0) = -half_width + h * i;
            double acc_i = 0.0;
            for (int j = 0; j < npts; ++j) {
                x(1) = -half_width + h * j;
                double acc_j = 0.0;
                for (int k = 0; k < npts; ++k) {
                    x(2) = -half_width + h * k;
                    acc_j += axis_weight(k) * f(x);
                }
                acc_i += axis_weight(j) * acc_j;
            }
            slabs[i] = axis_weight(i) * acc_i;
        });
        return std::accumulate(slabs.begin(), slabs.end(), 0.0) * h * h * h;
    }
    throw PreconditionError("box_integral: dimension must be 1, 2 or 3");
}

/// Composite Simpson on [lo, hi] with panel boundaries at the interior
/// kinks, so kernels with corners keep fourth-order accuracy.
inline double simpson_with_kinks(double lo, double hi, std::vector<double> kinks,
                                 int points_total, const std::function<double(double)>& f) {
    kinks.erase(std::remove_if(kinks.begin(), kinks.end(),
                               [&](double k) { return k <= lo || k >= hi; }),
                kinks.end());
    std::sort(kinks.begin(), kinks.end());
    kinks.insert(kinks.begin(), lo);
    kinks.push_back(hi);
    double acc = 0.0;
    for (std::size_t seg = 0; seg + 1 < kinks.size(); ++seg) {
        const double a = kinks[seg], b = kinks[seg + 1];
        if (b - a < 1e-300) continue;
        int ns = std::max(8, static_cast<int>(points_total * (b - a) / (hi - lo)));
        if (ns % 2 == 1) ++ns; // even interval count
        const double h = (b - a) / ns;
        double s = f(a) + f(b);
        for (int i = 1; i < ns; ++i) s += f(a + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
        acc += s * h / 3.0;
    }
    return acc;
}

/// Richardson error model: |Q_h - Q_2h| / 3 measured at three calibration
/// times and interpolated linearly in log t, floored at roundoff scale.
inline std::vector<double> richardson_bounds(
    const std::vector<double>& times, const std::vector<double>& values,
    const std::function<double(double)>& coarse_sampler) {
    const std::size_t n = times.size();
    std::vector<std::size_t> calib;
    calib.push_back(0);
    if (n > 2) calib.push_back(n / 2);
    if (n > 1) calib.push_back(n - 1);
    std::vector<double> log_t, log_e;
    for (std::size_t c : calib) {
        const double coarse = coarse_sampler(times[c]);
        const double est = std::abs(values[c] - coarse) / 3.0;
        log_t.push_back(std::log(times[c]));
        log_e.push_back(est);
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lt = std::log(times[i]);
        double est;
        if (lt <= log_t.front())
            est = log_e.front();
        else if (lt >= log_t.back())
            est = log_e.back();
        else {
            std::size_t seg = 0;
            while (seg + 2 < log_t.size() && lt > log_t[seg + 1]) ++seg;
            const double u = (lt - log_t[seg]) / (log_t[seg + 1] - log_t[seg]);
            est = (1.0 - u) * log_e[seg] + u * log_e[seg + 1];
        }
        out[i] = std::max(est, 1e-13 * std::abs(values[i]) + 1e-300);
    }
    return out;
}

} // namespace detail

struct HeatflowOptions {
    int domain_points = 257;   // per axis over the domain
    int line_points = 8193;    // 1d quadratures
    double tail_log = 36.0;    // boxes truncated where mass is below e^-36
};

// ---------------------------------------------------------------------------
// Flows
// ---------------------------------------------------------------------------

/// Q(t) = int_H prod u_j(t, B_j x)^{p_j} dx for a geometric datum, where
/// each u_j is the heat evolution of the input measure on the target. The
/// inputs are taken as atomic measures carried by their grids, for which the
/// evolution kernel is exact; the only discretisation is the outer integral.
/// The trace also records the large-time limit prod (int f_j)^{p_j}.
inline MonotonicityTrace evolve_geometric_heat(const BLDatum& d,
                                               const std::vector<GridField>& inputs,
                                               const std::vector<double>& times,
                                               const HeatflowOptions& opt = {}) {
    d.check_shapes();
    if (!is_geometric(d))
        throw PreconditionError("evolve_geometric_heat: datum must be geometric; "
                                "normalize_to_geometric first");
    if (d.dim < 1 || d.dim > 3)
        throw PreconditionError("evolve_geometric_heat: domain dimension must be 1 to 3");
    if (static_cast<int>(inputs.size()) != d.map_count())
        throw StructuralError("evolve_geometric_heat: one input per map required");
    if (times.empty()) throw PreconditionError("evolve_geometric_heat: no sample times");

    std::vector<PointMassList> masses;
    std::vector<double> input_masses;
    double extent = 0.0;
    for (int j = 0; j < d.map_count(); ++j) {
        if (inputs[j].axes() != d.target_dim(j))
            throw StructuralError("evolve_geometric_heat: input " + std::to_string(j) +
                                  " does not live on the target space");
        masses.push_back(to_point_masses(inputs[j]));
        input_masses.push_back(inputs[j].total_mass());
        for (const auto& pm : masses.back()) extent = std::max(extent, pm.location.norm());
    }

    const double t_max = *std::max_element(times.begin(), times.end());
    const double half_width = extent + std::sqrt(4.0 * t_max * opt.tail_log) + 1.0;

    const auto q_of = [&](double t, int npts) {
        const double log_norm = -0.5 * std::log(4.0 * M_PI * t);
        return detail::box_integral(d.dim, half_width, npts, [&](const Vector& x) {
            double acc = 1.0;
            for (int j = 0; j < d.map_count(); ++j) {
                const Vector y = d.map(j) * x;
                double u = 0.0;
                for (const auto& pm : masses[j])
                    u += pm.weight *
                         std::exp(log_norm * d.target_dim(j) -
                                  (y - pm.location).squaredNorm() / (4.0 * t));
                acc *= std::pow(u, d.exponent(j));
            }
            return acc;
        });
    };

    MonotonicityTrace trace;
    trace.times = times;
    for (double t : times) trace.values.push_back(q_of(t, opt.domain_points));
    trace.error_bounds = detail::richardson_bounds(
        trace.times, trace.values,
        [&](double t) { return q_of(t, opt.domain_points / 2 + 1); });
    double lim = 1.0;
    for (int j = 0; j < d.map_count(); ++j)
        lim *= std::pow(input_masses[j], d.exponent(j));
    trace.limit = lim;
    return trace;
}

/// int_H prod_j ( sum_v w_v exp(-pi <A_j (B_j y - v s), B_j y - v s>) )^{p_j} dy
/// sampled over the sliding parameter s; monotone non-increasing under the
/// hypothesis B_j^T A_j B_j <= M for every j.
inline MonotonicityTrace sliding_gaussian_trace(const BLDatum& d, const GaussianInput& g,
                                                const std::vector<PointMassList>& masses,
                                                const std::vector<double>& s_values,
                                                const HeatflowOptions& opt = {}) {
    d.check_shapes();
    g.check_against(d);
    if (d.dim < 1 || d.dim > 2)
        throw PreconditionError("sliding_gaussian_trace: domain dimension must be 1 or 2");
    if (static_cast<int>(masses.size()) != d.map_count())
        throw StructuralError("sliding_gaussian_trace: one mass list per map required");
    {
        const ValidationReport rep = validate_datum(d);
        if (!rep.all_surjective())
            throw PreconditionError("sliding_gaussian_trace: maps must be surjective");
    }
    const Matrix m = gram_matrix(d, g);
    for (int j = 0; j < d.map_count(); ++j) {
        const Matrix gap = m - d.map(j).transpose() * g.A[j] * d.map(j);
        if (linalg::sym_eigenvalues(gap)(0) < -1e-10)
            throw PreconditionError("sliding_gaussian_trace: hypothesis "
                                    "B_j^T A_j B_j <= M fails for map " + std::to_string(j));
        check_point_masses(masses[j], d.target_dim(j));
    }
    if (s_values.empty()) throw PreconditionError("sliding_gaussian_trace: no samples");

    double speed = 0.0;
    for (const auto& list : masses)
        for (const auto& pm : list) speed = std::max(speed, pm.location.norm());
    const double s_max = *std::max_element(s_values.begin(), s_values.end());
    const double lam_min = linalg::sym_eigenvalues(m)(0);
    if (lam_min <= 0.0)
        throw PreconditionError("sliding_gaussian_trace: gram matrix is singular");
    double pull = 0.0; // how far a target shift can move the domain peak
    for (int j = 0; j < d.map_count(); ++j) {
        Eigen::JacobiSVD<Matrix> svd(d.map(j));
        pull = std::max(pull, 1.0 / svd.singularValues().minCoeff());
    }
    const double half_width =
        speed * s_max * pull + std::sqrt(opt.tail_log / (M_PI * lam_min)) + 1.0;

    const auto q_of = [&](double s, int npts) {
        return detail::box_integral(d.dim, half_width, npts, [&](const Vector& y) {
            double acc = 1.0;
            for (int j = 0; j < d.map_count(); ++j) {
                const Vector by = d.map(j) * y;
                double u = 0.0;
                for (const auto& pm : masses[j]) {
                    const Vector z = by - s * pm.location;
                    u += pm.weight * std::exp(-M_PI * z.dot(g.A[j] * z));
                }
                acc *= std::pow(u, d.exponent(j));
            }
            return acc;
        });
    };

    MonotonicityTrace trace;
    trace.times = s_values;
    for (double s : s_values) trace.values.push_back(q_of(s, opt.domain_points));
    trace.error_bounds = detail::richardson_bounds(
        trace.times, trace.values,
        [&](double s) { return q_of(s, opt.domain_points / 2 + 1); });
    return trace;
}

/// Q(t) = int ( sum_v w_v psi(x - v t) )^p dx for a log-concave kernel;
/// non-increasing for p >= 1 and constant at p = 1.
inline MonotonicityTrace log_concave_trace(const KernelSpec& kernel, const PointMassList& mass,
                                           double p, const std::vector<double>& times,
                                           const HeatflowOptions& opt = {}) {
    kernel.validate_log_concavity();
    if (p < 1.0)
        throw PreconditionError("log_concave_trace: p >= 1 required; the p < 1 regime "
                                "is out of scope");
    if (mass.empty()) throw StructuralError("log_concave_trace: empty mass list");
    const int dim = static_cast<int>(mass.front().location.size());
    if (dim < 1 || dim > 2)
        throw PreconditionError("log_concave_trace: ambient dimension must be 1 or 2");
    check_point_masses(mass, dim);
    if (kernel.kind == KernelSpec::Kind::Gaussian &&
        (kernel.A.rows() != dim || kernel.A.cols() != dim))
        throw StructuralError("log_concave_trace: kernel dimension mismatch");
    if (kernel.kind == KernelSpec::Kind::Tabulated && dim != 1)
        throw PreconditionError("log_concave_trace: tabulated kernels are 1d");
    if (times.empty()) throw PreconditionError("log_concave_trace: no samples");

    double speed = 0.0;
    for (const auto& pm : mass) speed = std::max(speed, pm.location.norm());
    const double t_max = *std::max_element(times.begin(), times.end());
    const double half_width = speed * t_max + kernel.decay_width() + 1.0;

    const auto q_of = [&](double t, int level) {
        if (dim == 1) {
            const int pts = opt.line_points / (level + 1);
            std::vector<double> kinks;
            if (kernel.has_kink())
                for (const auto& pm : mass) kinks.push_back(pm.location(0) * t);
            return detail::simpson_with_kinks(
                -half_width, half_width, kinks, pts, [&](double x) {
                    double u = 0.0;
                    for (const auto& pm : mass)
                        u += pm.weight * kernel.eval1d(x - pm.location(0) * t);
                    return std::pow(u, p);
                });
        }
        const int pts = level == 0 ? opt.domain_points : opt.domain_points / 2 + 1;
        return detail::box_integral(2, half_width, pts, [&](const Vector& x) {
            double u = 0.0;
            for (const auto& pm : mass) u += pm.weight * kernel.eval(x - t * pm.location);
            return std::pow(u, p);
        });
    };

    MonotonicityTrace trace;
    trace.times = times;
    for (double t : times) trace.values.push_back(q_of(t, 0));
    trace.error_bounds = detail::richardson_bounds(
        trace.times, trace.values, [&](double t) { return q_of(t, 1); });
    return trace;
}

/// Samples t^{1/(2 p')} || u(t, .) ||_p for the heat extension of an atomic
/// measure on the line; non-decreasing in t, constant for a single mass.
inline MonotonicityTrace heat_extension_norm_trace(const PointMassList& mass, double p,
                                                   const std::vector<double>& times,
                                                   const HeatflowOptions& opt = {}) {
    if (p < 1.0) throw PreconditionError("heat_extension_norm_trace: p >= 1 required");
    check_point_masses(mass, 1);
    if (times.empty()) throw PreconditionError("heat_extension_norm_trace: no samples");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!(times[i] > 0.0))
            throw PreconditionError("heat_extension_norm_trace: times must be positive");

    double lo = mass.front().location(0), hi = lo;
    for (const auto& pm : mass) {
        lo = std::min(lo, pm.location(0));
        hi = std::max(hi, pm.location(0));
    }
    const double t_max = *std::max_element(times.begin(), times.end());
    const double spread = std::sqrt(4.0 * t_max * opt.tail_log) + 1.0;

    const double dual_exponent = p > 1.0 ? 1.0 / (2.0 * (p / (p - 1.0))) : 0.0;

    const auto norm_of = [&](double t, int level) {
        const int pts = opt.line_points / (level + 1);
        const double a = lo - spread, b = hi + spread;
        const double integral = detail::simpson_with_kinks(a, b, {}, pts, [&](double x) {
            double u = 0.0;
            for (const auto& pm : mass)
                u += pm.weight * std::exp(-(x - pm.location(0)) * (x - pm.location(0)) /
                                          (4.0 * t));
            u /= std::sqrt(4.0 * M_PI * t);
            return std::pow(u, p);
        });
        return std::pow(t, dual_exponent) * std::pow(integral, 1.0 / p);
    };

    MonotonicityTrace trace;
    trace.times = times;
    for (double t : times) trace.values.push_back(norm_of(t, 0));
    trace.error_bounds = detail::richardson_bounds(
        trace.times, trace.values, [&](double t) { return norm_of(t, 1); });
    return trace;
}

} // namespace bl
