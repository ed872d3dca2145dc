#include <catch2/catch_amalgamated.hpp>

#include "bl/heatflow.hpp"
#include "test_helpers.hpp"

using namespace bl;

namespace {

/// cos^4 bump sampled on a symmetric 1d grid
GridField bump_field(double center, double width, double weight, int points = 129,
                     double half_width = 3.0) {
    GridField f;
    f.dims = {points};
    f.half_widths = {half_width};
    f.values.resize(points);
    for (int i = 0; i < points; ++i) {
        const double x = -half_width + f.spacing(0) * i;
        const double r = std::abs(x - center) / width;
        f.values[i] = r < 1.0 ? weight * std::pow(std::cos(0.5 * M_PI * r), 4) : 0.0;
    }
    return f;
}

GridField gaussian_field(double center, int points = 129, double half_width = 3.0) {
    GridField f;
    f.dims = {points};
    f.half_widths = {half_width};
    f.values.resize(points);
    for (int i = 0; i < points; ++i) {
        const double x = -half_width + f.spacing(0) * i;
        f.values[i] = std::exp(-M_PI * (x - center) * (x - center));
    }
    return f;
}

PointMass at(std::initializer_list<double> coords, double w) {
    Vector v(static_cast<int>(coords.size()));
    int i = 0;
    for (double c : coords) v(i++) = c;
    return {v, w};
}

} // namespace

TEST_CASE("grid field checks and atomic masses") {
    GridField f = bump_field(0.0, 1.0, 1.0);
    f.check();
    CHECK(f.total_mass() > 0.0);
    const auto pm = to_point_masses(f);
    double mass = 0.0;
    for (const auto& m : pm) mass += m.weight;
    CHECK(mass == Catch::Approx(f.total_mass()));

    GridField bad = f;
    bad.values[0] = -1.0;
    CHECK_THROWS_AS(bad.check(), StructuralError);
}

TEST_CASE("assert_monotone on constructed traces") {
    MonotonicityTrace t;
    t.times = {1.0, 2.0, 3.0};
    t.values = {1.0, 1.1, 1.2};
    t.error_bounds = {1e-9, 1e-9, 1e-9};
    CHECK(assert_monotone(t, Direction::NonDecreasing).pass);
    const auto bad = assert_monotone(t, Direction::NonIncreasing);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst_violation > 0.0);
    CHECK(bad.worst_index >= 1);

    MonotonicityTrace flat;
    flat.times = {1.0, 2.0};
    flat.values = {1.0, 1.0};
    flat.error_bounds = {1e-12, 1e-12};
    CHECK(assert_monotone(flat, Direction::NonDecreasing).pass);
    CHECK(assert_monotone(flat, Direction::NonIncreasing).pass);
}

TEST_CASE("geometric heat flow on the 120 degree frame is nondecreasing") {
    const BLDatum frame = blt::frame120();
    std::vector<GridField> inputs{bump_field(0.5, 1.0, 1.0), bump_field(-0.3, 0.8, 1.3),
                                  bump_field(0.1, 1.2, 0.7)};
    HeatflowOptions opt;
    opt.domain_points = 101; // desk scale for the unit suite
    const auto times = geometric_times(0.05, 1.5, 12);
    const auto trace = evolve_geometric_heat(frame, inputs, times, opt);
    CHECK(assert_monotone(trace, Direction::NonDecreasing).pass);
    REQUIRE(trace.limit.has_value());
    CHECK(trace.values.back() <= *trace.limit + trace.error_bounds.back());
    CHECK(trace.values.back() > 0.9 * *trace.limit);
}

TEST_CASE("heat flow is constant when the inputs are the extremising gaussians") {
    const BLDatum frame = blt::frame120();
    std::vector<GridField> inputs{gaussian_field(0, 201, 6.0), gaussian_field(0, 201, 6.0),
                                  gaussian_field(0, 201, 6.0)};
    HeatflowOptions opt;
    opt.domain_points = 101;
    const auto trace = evolve_geometric_heat(frame, inputs, geometric_times(0.1, 1.6, 8), opt);
    for (std::size_t i = 1; i < trace.values.size(); ++i)
        CHECK(std::abs(trace.values[i] - trace.values[0]) <=
              5e-4 * std::abs(trace.values[0]));
}

TEST_CASE("single-flow mass conservation for Holder exponent sums") {
    // Holder n=1 with p summing to one and identical inputs: Q(t) is the mass
    const BLDatum h = blt::holder(1, {0.5, 0.5});
    GridField f = bump_field(0.2, 0.7, 1.0);
    const auto trace =
        evolve_geometric_heat(h, {f, f}, geometric_times(0.05, 1.6, 8), HeatflowOptions{513});
    REQUIRE(trace.limit.has_value());
    for (double v : trace.values) CHECK(v == Catch::Approx(*trace.limit).epsilon(1e-6));
}

TEST_CASE("evolved fields conserve mass") {
    // the atomic evolution keeps sum of weights; integrating u_j over a wide
    // box reproduces the initial mass at every sampled time
    const GridField f = bump_field(0.4, 0.9, 1.1);
    const auto pm = to_point_masses(f);
    double mass0 = 0.0;
    for (const auto& m : pm) mass0 += m.weight;
    for (double t : {0.05, 0.5, 5.0}) {
        const double width = 3.0 + std::sqrt(4.0 * t * 40.0);
        const double integral = detail::box_integral(1, width, 4097, [&](const Vector& x) {
            double u = 0.0;
            for (const auto& m : pm)
                u += m.weight * std::exp(-(x(0) - m.location(0)) * (x(0) - m.location(0)) /
                                         (4.0 * t)) /
                     std::sqrt(4.0 * M_PI * t);
            return u;
        });
        CHECK(integral == Catch::Approx(mass0).epsilon(1e-6));
    }
}

TEST_CASE("geometric heat flow preconditions") {
    const auto times = geometric_times(0.05, 1.5, 3);
    std::vector<GridField> one{bump_field(0.0, 1.0, 1.0)};
    CHECK_THROWS_AS(
        evolve_geometric_heat(blt::young1(), {one[0], one[0], one[0]}, times),
        PreconditionError);
}

TEST_CASE("refinement convergence of the heat trace") {
    // halving the grid step moves every sample by less than 4x error_bound
    const BLDatum frame = blt::frame120();
    std::vector<GridField> inputs{bump_field(0.5, 1.0, 1.0), bump_field(-0.3, 0.8, 1.3),
                                  bump_field(0.1, 1.2, 0.7)};
    const auto times = geometric_times(0.1, 1.8, 5);
    HeatflowOptions coarse, fine;
    coarse.domain_points = 101;
    fine.domain_points = 201;
    const auto tc = evolve_geometric_heat(frame, inputs, times, coarse);
    const auto tf = evolve_geometric_heat(frame, inputs, times, fine);
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(std::abs(tc.values[i] - tf.values[i]) <= 4.0 * tc.error_bounds[i]);
}

TEST_CASE("sliding gaussians are nonincreasing") {
    // geometric datum with identity input satisfies the hypothesis
    const BLDatum frame = blt::frame120();
    std::vector<PointMassList> masses{{at({0.7}, 1.0), at({-0.4}, 0.5)},
                                      {at({0.2}, 1.0), at({-0.8}, 0.7)},
                                      {at({0.5}, 0.6), at({-0.1}, 1.0)}};
    HeatflowOptions opt;
    opt.domain_points = 101;
    std::vector<double> s{0.0, 0.3, 0.6, 1.0, 1.5, 2.2};
    const auto trace = sliding_gaussian_trace(frame, identity_input(frame), masses, s, opt);
    CHECK(assert_monotone(trace, Direction::NonIncreasing).pass);
}

TEST_CASE("sliding trace is constant for single masses at the origin") {
    const BLDatum frame = blt::frame120();
    std::vector<PointMassList> masses{{at({0.0}, 1.0)}, {at({0.0}, 1.0)}, {at({0.0}, 1.0)}};
    HeatflowOptions opt;
    opt.domain_points = 101;
    std::vector<double> s{0.0, 0.5, 1.0, 2.0};
    const auto trace = sliding_gaussian_trace(frame, identity_input(frame), masses, s, opt);
    for (double v : trace.values)
        CHECK(v == Catch::Approx(trace.values[0]).epsilon(1e-9));
}

TEST_CASE("sliding Young with the stationary input is nonincreasing") {
    const BLDatum young = blt::young1();
    GaussianInput a;
    for (int j = 0; j < 3; ++j) a.A.push_back(Matrix::Constant(1, 1, 4.5));
    std::vector<PointMassList> masses{{at({0.4}, 1.0), at({-0.2}, 0.8)},
                                      {at({0.1}, 0.9), at({-0.5}, 0.6)},
                                      {at({0.3}, 1.1), at({-0.3}, 0.5)}};
    HeatflowOptions opt;
    opt.domain_points = 151;
    std::vector<double> s{0.0, 0.25, 0.5, 1.0, 1.6};
    const auto trace = sliding_gaussian_trace(young, a, masses, s, opt);
    const auto check = assert_monotone(trace, Direction::NonIncreasing);
    CHECK(check.pass);
    CHECK(check.worst_violation <= 1e-6);
}

TEST_CASE("sliding hypothesis violations are named") {
    // Young with a wildly unbalanced input violates B_j^T A_j B_j <= M
    const BLDatum young = blt::young1();
    GaussianInput a;
    a.A.push_back(Matrix::Constant(1, 1, 50.0));
    a.A.push_back(Matrix::Constant(1, 1, 0.01));
    a.A.push_back(Matrix::Constant(1, 1, 0.01));
    std::vector<PointMassList> masses{{at({0.0}, 1.0)}, {at({0.0}, 1.0)}, {at({0.0}, 1.0)}};
    try {
        sliding_gaussian_trace(young, a, masses, {0.0, 1.0});
        FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("map 0") != std::string::npos);
    }
}

TEST_CASE("log-concave kernel traces") {
    // p = 1: constant for any kernel and mass
    const KernelSpec expk = KernelSpec::exponential(1.0);
    const PointMassList two{at({1.0}, 1.0), at({-1.0}, 1.0)};
    const auto p1 = log_concave_trace(expk, two, 1.0, geometric_times(0.05, 1.4, 10));
    for (double v : p1.values) CHECK(v == Catch::Approx(p1.values[0]).margin(1e-9));

    // single travelling wave: constant by translation invariance
    const auto lone = log_concave_trace(expk, {at({0.7}, 2.0)}, 2.0,
                                        geometric_times(0.05, 1.4, 10));
    for (double v : lone.values) CHECK(v == Catch::Approx(lone.values[0]).epsilon(1e-9));

    // exp(-|x|), two unit masses, p = 2: strictly decreasing
    const auto dec = log_concave_trace(expk, two, 2.0, geometric_times(0.05, 1.4, 12));
    CHECK(assert_monotone(dec, Direction::NonIncreasing).pass);
    CHECK(is_strictly_monotone(dec, Direction::NonIncreasing));

    // closed form at p = 2 for psi = exp(-|x|): Q(t) = sum_{v,w} J(|v - w| t)
    // with the pair integral J(d) = int exp(-|x| - |x - d|) dx = (1 + d) exp(-d)
    const double t = 1.0;
    const auto one = log_concave_trace(expk, two, 2.0, {t});
    const auto pair_integral = [](double d) { return (1.0 + d) * std::exp(-d); };
    const double expected = 2.0 * pair_integral(0.0) + 2.0 * pair_integral(2.0 * t);
    CHECK(one.values[0] == Catch::Approx(expected).epsilon(1e-8));

    // p below one is out of scope
    CHECK_THROWS_AS(log_concave_trace(expk, two, 0.5, {0.1}), PreconditionError);
}

TEST_CASE("tabulated kernels validate log-concavity") {
    std::vector<double> xs, good, bad;
    for (int i = -40; i <= 40; ++i) {
        xs.push_back(0.25 * i);
        good.push_back(std::exp(-0.1 * std::abs(0.25 * i) - 0.05 * (0.25 * i) * (0.25 * i)));
        bad.push_back(std::exp(0.05 * (0.25 * i) * (0.25 * i) - std::abs(0.25 * i)));
    }
    CHECK_NOTHROW(KernelSpec::tabulated(xs, good));
    CHECK_THROWS_AS(KernelSpec::tabulated(xs, bad), PreconditionError);

    const auto kern = KernelSpec::tabulated(xs, good);
    const auto trace = log_concave_trace(kern, {at({0.8}, 1.0), at({-0.6}, 1.2)}, 2.0,
                                         geometric_times(0.05, 1.5, 8));
    CHECK(assert_monotone(trace, Direction::NonIncreasing).pass);
}

TEST_CASE("centre-of-mass field of a log-concave kernel has nonnegative divergence") {
    bl::Rng rng(55);
    std::vector<double> xs, vals;
    for (int i = -60; i <= 60; ++i) {
        const double x = 0.2 * i;
        xs.push_back(x);
        vals.push_back(std::exp(-0.3 * std::abs(x) - 0.08 * x * x));
    }
    const auto kern = KernelSpec::tabulated(xs, vals);
    for (int trial = 0; trial < 4; ++trial) {
        const double y1 = rng.uniform(-2.0, 2.0), y2 = rng.uniform(-2.0, 2.0);
        const double w1 = rng.uniform(0.2, 2.0), w2 = rng.uniform(0.2, 2.0);
        const auto ybar = [&](double x) {
            const double k1 = kern.eval1d(x - y1) * w1, k2 = kern.eval1d(x - y2) * w2;
            return (k1 * y1 + k2 * y2) / (k1 + k2);
        };
        const double h = 1e-4;
        for (double x = -6.0; x <= 6.0; x += 0.05) {
            const double div = (ybar(x + h) - ybar(x - h)) / (2.0 * h);
            CHECK(div >= -1e-8);
        }
    }
}

TEST_CASE("heat extension norm growth") {
    // single point mass: constant (4 pi)^{-1/(2p')} p^{-1/(2p)}
    for (double p : {1.5, 2.0, 3.0}) {
        const auto trace =
            heat_extension_norm_trace({at({0.3}, 1.0)}, p, geometric_times(0.05, 1.4, 10));
        const double pp = p / (p - 1.0);
        const double expected =
            std::pow(4.0 * M_PI, -1.0 / (2.0 * pp)) * std::pow(p, -1.0 / (2.0 * p));
        for (double v : trace.values) CHECK(v == Catch::Approx(expected).epsilon(1e-9));
    }

    // two unit masses at +-1, p = 3: strictly increasing
    const auto grow = heat_extension_norm_trace({at({1.0}, 1.0), at({-1.0}, 1.0)}, 3.0,
                                                geometric_times(0.05, 1.4, 12));
    CHECK(assert_monotone(grow, Direction::NonDecreasing).pass);
    CHECK(is_strictly_monotone(grow, Direction::NonDecreasing));

    // p = 1: the trace is the total mass
    const auto flat = heat_extension_norm_trace({at({1.0}, 1.0), at({-1.0}, 2.0)}, 1.0,
                                                geometric_times(0.05, 1.4, 8));
    for (double v : flat.values) CHECK(v == Catch::Approx(3.0).epsilon(1e-10));
}
