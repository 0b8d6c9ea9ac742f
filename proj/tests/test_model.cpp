#include <doctest.h>

#include "thickspray/error.hpp"
#include "thickspray/model.hpp"

#include <cmath>
#include <numbers>

using namespace thickspray;

namespace {

ScalarField field_of(const PhaseGrid& g, double (*fn)(double)) {
    auto f = ScalarField::like(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = fn(g.x(static_cast<int>(i)));
    return f;
}

Distribution gaussian(const PhaseGrid& g, double A, double center, double width) {
    Distribution f(g);
    for (std::size_t i = 0; i < g.nx_total(); ++i)
        for (int j = 0; j < g.Nv; ++j) f.at(i, j) = A * std::exp(-std::pow((g.v(j) - center) / width, 2));
    return f;
}

}  // namespace

TEST_CASE("pressure admissibility") {
    CHECK(check_pressure_admissible(PressureLaw::power(2.0)).ok);
    CHECK(check_pressure_admissible(PressureLaw::power(1.4)).ok);
    auto bad = PressureLaw::custom(
        "rho exp(-rho)", [](double r) { return r * std::exp(-r); }, [](double r) { return (1 - r) * std::exp(-r); });
    auto v = check_pressure_admissible(bad);
    CHECK_FALSE(v.ok);
    // d/drho [rho p'] = e^{-rho}(1 - 3 rho + rho^2) first vanishes at (3 - sqrt 5)/2
    double root = (3 - std::sqrt(5.0)) / 2;
    double step = std::exp(std::log(1e9) / 511);
    CHECK(v.witness_rho >= root);
    CHECK(v.witness_rho <= root * step * step);
    auto shifted = PressureLaw::custom("1 + rho^2", [](double r) { return 1 + r * r; }, [](double r) { return 2 * r; });
    CHECK_FALSE(check_pressure_admissible(shifted).ok);
    auto nan_law = PressureLaw::custom("nan", [](double) { return 0.0; }, [](double) { return NAN; });
    CHECK_THROWS_AS(check_pressure_admissible(nan_law), Error);
}

TEST_CASE("regularized force") {
    PhaseGrid g(1, 32, 16, 4.0);
    auto law = PressureLaw::power(2.0);
    FluidState s{ScalarField::like(g, 1.3), ScalarField::like(g, 1.3), VectorField::like(g)};
    CHECK(compute_force(s, law, 0.5).max_abs() < 1e-14);
    s.u = VectorField::like(g, 0.7);
    auto E = compute_force(s, law, 0.5);
    CHECK(E.comp[0].min() == doctest::Approx(0.7));
    CHECK(E.comp[0].max() == doctest::Approx(0.7));

    s.u = VectorField::like(g);
    s.rho = field_of(g, [](double x) { return 1 + 0.1 * std::cos(x); });
    E = compute_force(s, law, 1.0);
    double err = 0, fd_err = 0, h = g.dx();
    for (int i = 0; i < g.Nx; ++i) {
        double x = g.x(i);
        err = std::max(err, std::abs(E.comp[0][i] - 0.1 * (1 + 0.1 * std::cos(x)) * std::sin(x)));
        // J_1 rho = 1 + 0.05 cos x, differentiated by central differences
        double jr = (0.05 * std::cos(x + h) - 0.05 * std::cos(x - h)) / (2 * h);
        fd_err = std::max(fd_err, std::abs(E.comp[0][i] + 2 * s.rho[i] * jr));
    }
    CHECK(err < 1e-13);
    CHECK(fd_err < 1e-3);

    s.rho[4] = 0.0;
    CHECK_THROWS_AS(compute_force(s, law, 1.0), Error);
}

TEST_CASE("force is linear in u and converges as epsilon -> 0") {
    PhaseGrid g(1, 32, 16, 4.0);
    auto law = PressureLaw::power(1.4);
    FluidState s{field_of(g, [](double x) { return 1 + 0.2 * std::sin(x) + 0.05 * std::cos(3 * x); }),
                 ScalarField::like(g), VectorField::like(g)};
    VectorField u1 = VectorField::like(g), u2 = VectorField::like(g);
    for (int i = 0; i < g.Nx; ++i) {
        u1.comp[0][i] = std::sin(2 * g.x(i));
        u2.comp[0][i] = std::cos(g.x(i));
    }
    auto E0 = compute_force(s, law, 0.3);
    s.u = u1;
    auto E1 = compute_force(s, law, 0.3);
    s.u = u2;
    auto E2 = compute_force(s, law, 0.3);
    for (std::size_t q = 0; q < u1.comp[0].size(); ++q) s.u.comp[0][q] = 2 * u1.comp[0][q] - 3 * u2.comp[0][q];
    auto E12 = compute_force(s, law, 0.3);
    for (int i = 0; i < g.Nx; ++i)
        CHECK(std::abs((E12.comp[0][i] - E0.comp[0][i]) -
                       (2 * (E1.comp[0][i] - E0.comp[0][i]) - 3 * (E2.comp[0][i] - E0.comp[0][i]))) < 1e-13);

    s.u = VectorField::like(g);
    auto ref = compute_force(s, law, 0.0);
    auto diff = [&](double eps) {
        auto E = compute_force(s, law, eps);
        double m = 0;
        for (int i = 0; i < g.Nx; ++i) m = std::max(m, std::abs(E.comp[0][i] - ref.comp[0][i]));
        return m;
    };
    double r = diff(2e-3) / diff(1e-3);
    CHECK(r == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("Brinkman source") {
    PhaseGrid g(1, 8, 128, 8.0);
    CHECK(brinkman_source(Distribution(g), VectorField::like(g, 1.0)).max_abs() == 0.0);
    CHECK(brinkman_source(gaussian(g, 1, 0, 1), VectorField::like(g)).max_abs() < 1e-12);
    CHECK(brinkman_source(gaussian(g, 1, 1, 1), VectorField::like(g, 1.0)).max_abs() < 1e-8);
}

TEST_CASE("Brinkman source vanishes for concentrated profiles at rate width^2") {
    PhaseGrid g(1, 8, 1024, 3.0);
    double u0 = 0.4;
    auto residual = [&](double w) {
        Distribution f(g);
        for (std::size_t i = 0; i < g.nx_total(); ++i)
            for (int j = 0; j < g.Nv; ++j) {
                double y = g.v(j) - u0;
                f.at(i, j) = std::exp(-y * y / (w * w) + y) / (w * std::sqrt(std::numbers::pi));
            }
        return brinkman_source(f, VectorField::like(g, u0)).max_abs();
    };
    double r1 = residual(0.2), r2 = residual(0.1), r3 = residual(0.05);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(r2 / r3 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("bound condition") {
    PhaseGrid g(1, 8, 64, 8.0);
    BoundWitness w{0.5, 1.0, 0.5, 2.0};
    // rho_f = 0.1 everywhere
    auto f = gaussian(g, 0.1 / std::sqrt(std::numbers::pi), 0, 1);
    auto rho = ScalarField::like(g, 1.0);
    auto st = FluidState::from_rho(rho, VectorField::like(g), density_moment(f));
    CHECK(check_bounds(st, f, w).ok);

    auto zero = Distribution(g);
    auto st0 = FluidState::from_rho(rho, VectorField::like(g), density_moment(zero));
    CHECK(check_bounds(st0, zero, w).ok);

    auto heavy = gaussian(g, 0.9 / std::sqrt(std::numbers::pi), 0, 1);
    auto v = check_bounds(st, heavy, w);
    CHECK_FALSE(v.ok);
    CHECK(v.failed == "rho_f upper bound");
    CHECK(v.max_rho_f == doctest::Approx(0.9));

    auto low = FluidState::from_rho(ScalarField::like(g, 0.2), VectorField::like(g), density_moment(zero));
    CHECK(check_bounds(low, zero, w).failed == "rho lower bound");
    auto high = FluidState::from_rho(ScalarField::like(g, 5.0), VectorField::like(g), density_moment(zero));
    CHECK(check_bounds(high, zero, w).failed == "fluid mass upper bound");

    // strict hypotheses are tighter than the pointwise bounds
    auto mid = FluidState::from_rho(ScalarField::like(g, 0.8), VectorField::like(g), density_moment(zero));
    CHECK(check_bounds(mid, zero, w).ok);
    CHECK(check_initial_hypotheses(mid, zero, w).failed == "rho lower bound");
}

TEST_CASE("mass variable consistency") {
    PhaseGrid g(1, 16, 64, 8.0);
    auto f = gaussian(g, 0.2, 0.3, 0.9);
    for (std::size_t i = 0; i < g.nx_total(); ++i)
        for (int j = 0; j < g.Nv; ++j) f.at(i, j) *= 1 + 0.3 * std::cos(g.x(static_cast<int>(i)));
    auto rho = field_of(g, [](double x) { return 1.2 + 0.1 * std::sin(2 * x); });
    auto rf = density_moment(f);
    auto st = FluidState::from_rho(rho, VectorField::like(g), rf);
    auto back = rho_from_mass(st.m, rf, 0.5);
    for (std::size_t i = 0; i < rho.size(); ++i) CHECK(std::abs(back[i] - rho[i]) < 1e-12);
    auto crowded = ScalarField::like(g, 0.8);
    CHECK_THROWS_AS(rho_from_mass(st.m, crowded, 0.5), Error);
}

TEST_CASE("initial data builders") {
    PhaseGrid g(1, 16, 64, 8.0);
    KineticInit k;
    k.bumps = {{0.5, 1.0, {1.0, 0.0}}, {0.25, 2.0, {-1.0, 0.0}}};
    k.mod_amp = 0.2;
    k.mod_mode = 2;
    auto f = make_distribution(g, k);
    double x = g.x(3), v = g.v(20);
    double expect = (1 + 0.2 * std::cos(2 * x)) * (0.5 * std::exp(-(v - 1) * (v - 1)) + 0.25 * std::exp(-(v + 1) * (v + 1) / 4));
    CHECK(f.at(3, 20) == doctest::Approx(expect));
    FluidInit fl{1.5, 1, 0.1, {0.3, 0.0}};
    auto st = make_fluid(g, fl, f);
    CHECK(st.rho[0] == doctest::Approx(1.65));
    CHECK(st.u.comp[0][5] == doctest::Approx(0.3));
    k.bumps.resize(5);
    CHECK_THROWS_AS(make_distribution(g, k), Error);
}
