#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "parrondo/model.hpp"

using namespace parrondo;

namespace {

Params make(const char* rho, const char* phi, long bits = 256) {
    return Params::from_strings(rho, phi, PrecisionConfig::make(bits));
}

Real tol(long e) { return Real::pow2(e, 256); }

} // namespace

TEST_CASE("params validation") {
    CHECK_NOTHROW(make("1/3", "1"));
    CHECK_THROWS_AS(make("1", "0.5"), DegenerateSpectrumError);   // rho = 1 is game A
    CHECK_THROWS_AS(make("0", "0.5"), DegenerateSpectrumError);
    CHECK_THROWS_AS(make("1.2", "0.5"), DegenerateSpectrumError);
    CHECK_THROWS_AS(make("1/3", "0"), NumericError);
    CHECK_THROWS_AS(make("1/3", "1.5"), NumericError);
}

TEST_CASE("win probabilities at rho = 1/3 are the classic coins") {
    Params p = make("1/3", "0.5");
    auto [p0, p1] = win_probabilities(p);
    CHECK(abs(p0 - Real::from_ratio(1, 10, 256)) < tol(-250));
    CHECK(abs(p1 - Real::from_ratio(3, 4, 256)) < tol(-250));
}

TEST_CASE("phi = 1 gives the unmixed matrices") {
    Params p = make("1/3", "1");
    auto [pa, pb] = build_matrices(p);
    // no identity component: zero diagonal
    for (int i = 0; i < 3; ++i) {
        CHECK(pa.at(i, i).is_zero());
        CHECK(pb.at(i, i).is_zero());
    }
    auto [p0, p1] = win_probabilities(p);
    CHECK(pb.at(0, 1) == p0);
    CHECK(abs(pb.at(0, 2) - (1 - p0)) < tol(-250));
    CHECK(abs(pb.at(1, 0) - (1 - p1)) < tol(-250));
    CHECK(abs(pb.at(1, 2) - p1) < tol(-250));
    CHECK(pb.at(2, 0) == p1);
    CHECK(pa.at(0, 1) == Real::from_ratio(1, 2, 256));
}

TEST_CASE("rows sum to exactly 1 after mixing") {
    for (const char* rho : {"1/2", "1/3", "0.77"}) {
        for (const char* phi : {"1/2", "0.123", "1", "0.9999"}) {
            Params p = make(rho, phi);
            auto [pa, pb] = build_matrices(p);
            for (int i = 0; i < 3; ++i) {
                CHECK(pa.row(i).sum() == Real::from_long(1, 256));
                CHECK(pb.row(i).sum() == Real::from_long(1, 256));
                for (int j = 0; j < 3; ++j) {
                    CHECK(pb.at(i, j).sign_raw() >= 0);
                    CHECK(pb.at(i, j) <= Real::from_long(1, 256));
                }
            }
        }
    }
}

TEST_CASE("stationary distribution closed form") {
    Params p = make("1/3", "0.77");
    SimplexPoint pi = stationary(p);
    CHECK(abs(pi.x0 - Real::from_ratio(5, 13, 256)) < tol(-250));
    CHECK(abs(pi.x1 - Real::from_ratio(2, 13, 256)) < tol(-250));
    CHECK(abs(pi.x2 - Real::from_ratio(6, 13, 256)) < tol(-250));

    // pi P_B = pi by direct multiplication, and components sum to 1
    auto [pa, pb] = build_matrices(p);
    CHECK(linf_dist(pi.to_vec() * pb, pi.to_vec()) < tol(-240));
    CHECK(abs(pi.sum() - 1) < tol(-250));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dr(0.01, 0.99);
    for (int i = 0; i < 25; ++i) {
        Params q(Real::from_double(dr(rng), 256), Real::from_double(dr(rng), 256),
                 PrecisionConfig::make());
        SimplexPoint piq = stationary(q);
        CHECK(abs(piq.sum() - 1) < tol(-250));
        auto [qa, qb] = build_matrices(q);
        CHECK(linf_dist(piq.to_vec() * qb, piq.to_vec()) < tol(-240));
        // pi0 > 1/3 always (the greedy rule depends on it)
        CHECK(piq.x0 > Real::from_ratio(1, 3, 256));
        (void)qa;
    }
}

TEST_CASE("spectral closed forms at rho = 1/3") {
    Params p = make("1/3", "0.5");
    const SpectralData& sd = spectral(p);

    Real s_expected = sqrt(Real::from_long(220, 256)) / 9;
    CHECK(abs(sd.s - s_expected) < tol(-250));

    // phi1 = 1/(1 - e2circ), phi2 = 1/(1 - e1circ)
    CHECK(abs(sd.phi1 - 1 / (1 - sd.e2_circ)) < tol(-248));
    CHECK(abs(sd.phi2 - 1 / (1 - sd.e1_circ)) < tol(-248));

    CHECK(truncate_decimal(sd.phi1, 4) == "0.5345");
    CHECK(truncate_decimal(sd.phi2, 4) == "0.8855");
    CHECK(truncate_decimal(sd.phi3, 4) == "0.8228");

    // e1 = 1 - phi + phi e1circ tie to the mixture
    CHECK(abs(sd.e1 - (1 - p.phi() + p.phi() * sd.e1_circ)) < tol(-250));
    CHECK(abs(sd.e2 - (1 - p.phi() + p.phi() * sd.e2_circ)) < tol(-250));

    // R L = I
    CHECK(max_abs_diff(sd.right_eigenvectors * sd.left_eigenvectors, Mat3::identity(256)) <
          tol(-240));
}

TEST_CASE("eigenvalue bounds across rho") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dr(0.005, 0.995);
    Real mhalf = -Real::from_ratio(1, 2, 256);
    for (int i = 0; i < 40; ++i) {
        Params p(Real::from_double(dr(rng), 256), Real::from_double(0.5, 256),
                 PrecisionConfig::make());
        const SpectralData& sd = spectral(p);
        // 0 > e1circ > -1/2 > e2circ > -1
        CHECK(sd.e1_circ < 0);
        CHECK(sd.e1_circ > mhalf);
        CHECK(sd.e2_circ < mhalf);
        CHECK(sd.e2_circ > Real::from_long(-1, 256));
        // 1/2 < phi1 < 2/3 < phi2 < 1
        CHECK(sd.phi1 > Real::from_ratio(1, 2, 256));
        CHECK(sd.phi1 < Real::from_ratio(2, 3, 256));
        CHECK(sd.phi2 > Real::from_ratio(2, 3, 256));
        CHECK(sd.phi2 < Real::from_long(1, 256));
    }
}

TEST_CASE("nonunit eigenvalue signs across the seven phi bands") {
    // sign pattern of (e1, e2, |e1| vs |e2|) over a fine grid in each band
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dr(0.02, 0.98);
    for (int i = 0; i < 20; ++i) {
        Real rho = Real::from_double(dr(rng), 256);
        Params probe(rho, Real::from_ratio(1, 2, 256), PrecisionConfig::make());
        const SpectralData& base = spectral(probe);
        Real lo = Real::from_double(1e-6, 256);
        Real phi1 = base.phi1;
        Real phi2 = base.phi2;
        Real two_thirds = Real::from_ratio(2, 3, 256);
        Real one = Real::from_long(1, 256);

        auto grid_check = [&](const Real& a, const Real& b, int e1s, int e2s, int cmp) {
            for (int k = 1; k <= 100; ++k) {
                Real phi = a + (b - a) * k / 101;
                Params p(rho, phi, PrecisionConfig::make());
                const SpectralData& sd = spectral(p);
                if (e1s > 0) CHECK(sd.e1 > 0);
                if (e1s < 0) CHECK(sd.e1 < 0);
                if (e2s > 0) CHECK(sd.e2 > 0);
                if (e2s < 0) CHECK(sd.e2 < 0);
                if (cmp > 0) CHECK(abs(sd.e1) > abs(sd.e2));
                if (cmp < 0) CHECK(abs(sd.e1) < abs(sd.e2));
            }
        };
        grid_check(lo, phi1, 1, 1, 1);         // 0 < phi < phi1
        grid_check(phi1, two_thirds, 1, -1, 1); // phi1 < phi < 2/3
        grid_check(two_thirds, phi2, 1, -1, -1); // 2/3 < phi < phi2
        grid_check(phi2, one, -1, -1, -1);     // phi2 < phi <= 1

        // the three boundary points
        Params at1(rho, phi1, PrecisionConfig::make());
        CHECK(abs(spectral(at1).e2) < tol(-200));
        CHECK(spectral(at1).e1 > 0);
        Params at23(rho, two_thirds, PrecisionConfig::make());
        CHECK(abs(spectral(at23).e1 + spectral(at23).e2) < tol(-200));
        Params at2(rho, phi2, PrecisionConfig::make());
        CHECK(abs(spectral(at2).e1) < tol(-200));
        CHECK(spectral(at2).e2 < 0);
    }
}

TEST_CASE("matrix powers against repeated multiplication") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> dr(0.05, 0.95);
    std::uniform_real_distribution<double> dp(0.05, 1.0);
    for (int i = 0; i < 10; ++i) {
        Params p(Real::from_double(dr(rng), 256), Real::from_double(dp(rng), 256),
                 PrecisionConfig::make());
        auto [pa, pb] = build_matrices(p);
        CHECK(max_abs_diff(power_b(p, 0), Mat3::identity(256)) < tol(-240));
        CHECK(max_abs_diff(power_b(p, 1), pb) < tol(-240));
        CHECK(max_abs_diff(power_a(p, 0), Mat3::identity(256)).is_zero());
        for (long n : {2L, 7L, 33L}) {
            CHECK(max_abs_diff(power_b(p, n), matrix_power_naive(pb, n)) < tol(-128));
            CHECK(max_abs_diff(power_a(p, n), matrix_power_naive(pa, n)) < tol(-128));
        }
    }
    // the example pair: rho = 1/3, phi = 3/4, n = 7
    Params p = make("1/3", "3/4");
    auto [pa, pb] = build_matrices(p);
    CHECK(max_abs_diff(power_b(p, 7), matrix_power_naive(pb, 7)) < tol(-200));
    (void)pa;
    // phi = 1, n = 3 for the closed-form A power
    Params q = make("1/3", "1");
    auto [qa, qb] = build_matrices(q);
    CHECK(max_abs_diff(power_a(q, 3), matrix_power_naive(qa, 3)) < tol(-240));
    (void)qb;
}

TEST_CASE("phi = 2/3 collapses one A turn to the barycenter") {
    Params p = make("0.41", "2/3");
    Mat3 pa1 = power_a(p, 1);
    Real third = Real::from_ratio(1, 3, 256);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(abs(pa1.at(i, j) - third) < tol(-250));
}

TEST_CASE("stationary_of solves small cycle maps") {
    Params p = make("1/3", "0.9");
    auto [pa, pb] = build_matrices(p);
    SimplexPoint pi = stationary_of(pb);
    CHECK(linf_dist(pi, spectral(p).pi) < tol(-240));
    // stationarity of a composite map
    Mat3 cyc = pa * pb * pb;
    SimplexPoint pic = stationary_of(cyc);
    CHECK(linf_dist(pic.to_vec() * cyc, pic.to_vec()) < tol(-240));
    CHECK(abs(pic.sum() - 1) < tol(-250));
}

TEST_CASE("simplex point checks") {
    Real a = Real::from_ratio(1, 3, 256);
    CHECK_NOTHROW(make_simplex_point(a, a, 1 - a - a));
    CHECK_THROWS_AS(make_simplex_point(a, a, a + a), NumericError);
    CHECK_THROWS_AS(make_simplex_point(-a, a, a), NumericError);
}
