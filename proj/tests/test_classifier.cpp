#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "parrondo/classifier.hpp"
#include "parrondo/oracle.hpp"

using namespace parrondo;

namespace {

Params make(const char* rho, const char* phi, long bits = 256) {
    return Params::from_strings(rho, phi, PrecisionConfig::make(bits));
}

Real tol(long e) { return Real::pow2(e, 256); }

} // namespace

TEST_CASE("cycle function index validation") {
    Params p = make("1/3", "0.8");
    CHECK_THROWS_AS(eval_cycle_fn(CycleFn::E, 3, 3, p), BadIndexError);
    CHECK_THROWS_AS(eval_cycle_fn(CycleFn::E, 0, 0, p), BadIndexError);
    CHECK_THROWS_AS(eval_cycle_fn(CycleFn::G, 2, 0, p), BadIndexError);
    CHECK_THROWS_AS(eval_cycle_fn(CycleFn::H, 5, 2, p), BadIndexError);
    CHECK_THROWS_AS(eval_cycle_fn(CycleFn::Em, 4, 5, p), BadIndexError);
    CHECK_THROWS_AS(eval_cycle_fn(CycleFn::Em, 4, -1, p), BadIndexError);
    CHECK_THROWS_AS(eval_cycle_fn(CycleFn::I, 0, 0, p), BadIndexError);
    CHECK_NOTHROW(eval_cycle_fn(CycleFn::D, 0, 0, p));
    CHECK_NOTHROW(eval_cycle_fn(CycleFn::Em, 4, 3, p));
}

TEST_CASE("cycle function identities and signs") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dr(0.05, 0.95);
    std::uniform_real_distribution<double> dp(0.667, 1.0);
    for (int i = 0; i < 15; ++i) {
        Params p(Real::from_double(dr(rng), 256), Real::from_double(dp(rng), 256),
                 PrecisionConfig::make());
        // E_{n,n} = E_n
        for (long n : {2L, 4L, 6L}) {
            Real a = eval_cycle_fn(CycleFn::E, n, n, p);
            Real b = eval_cycle_fn(CycleFn::Em, n, n, p);
            CHECK(abs(a - b).is_zero());
        }
        // E_{2,0} < 0 always
        CHECK(eval_cycle_fn(CycleFn::Em, 2, 0, p) < 0);
        // D_n > 0 and I_n > 0
        for (long n : {1L, 2L, 5L, 12L}) {
            CHECK(eval_cycle_fn(CycleFn::D, n, 0, p) > 0);
            CHECK(eval_cycle_fn(CycleFn::I, n, 0, p) > 0);
        }
    }
    // E_2 > 0 at and above phi2
    Params hi = make("1/3", "0.95");
    CHECK(eval_cycle_fn(CycleFn::E, 2, 2, hi) > 0);
}

TEST_CASE("stationary cycle maps reproduce the E, G, H ratios") {
    // (pi_[1,n] P_A P_B^m - pi) e0 = E_{n,m}/D_n, and the G/H analogues
    for (const char* phi : {"0.7", "0.68", "0.68804", "0.95"}) {
        Params p = make("1/3", phi);
        auto [pa, pb] = build_matrices(p);
        const SpectralData& sd = spectral(p);
        for (int n : {2, 4, 6}) {
            Mat3 cyc = pa * power_b(p, n);
            SimplexPoint pin = stationary_of(cyc);
            // stationarity
            CHECK(linf_dist(pin.to_vec() * cyc, pin.to_vec()) < tol(-230));
            Real dn = eval_cycle_fn(CycleFn::D, n, 0, p);
            // E_n/D_n at m = n (the stationary point itself)
            Real lhs = pin.x0 - sd.pi.x0;
            Real rhs = eval_cycle_fn(CycleFn::E, n, n, p) / dn;
            CHECK(abs(lhs - rhs) < tol(-128));
            // E_{n,m}/D_n along the cycle
            Vec3 v = pin.to_vec() * pa;
            for (int m = 0; m < n; ++m) {
                Real diff = v[0] - sd.pi.x0;
                CHECK(abs(diff - eval_cycle_fn(CycleFn::Em, n, m, p) / dn) < tol(-128));
                v = v * pb;
            }
        }
        for (int n : {4, 6}) {
            Mat3 bn = power_b(p, n);
            Mat3 bnm2 = power_b(p, n - 2);
            Mat3 cyc = pa * bn * pa * bnm2;
            SimplexPoint pin = stationary_of(cyc);
            Real in = eval_cycle_fn(CycleFn::I, n, 0, p);
            Vec3 v = pin.to_vec() * pa;
            for (int m = 0; m < n; ++m) {
                Real diff = v[0] - sd.pi.x0;
                CHECK(abs(diff - eval_cycle_fn(CycleFn::G, n, m, p) / in) < tol(-120));
                v = v * pb;
            }
            Vec3 w = (pin.to_vec() * pa) * bn * pa;
            for (int m = 0; m <= n - 2; ++m) {
                Real diff = w[0] - sd.pi.x0;
                CHECK(abs(diff - eval_cycle_fn(CycleFn::H, n, m, p) / in) < tol(-120));
                w = w * pb;
            }
        }
    }
}

TEST_CASE("find_s at rho = 1/3") {
    CHECK(find_s(make("1/3", "0.7")) == 2);
    CHECK(find_s(make("1/3", "0.68")) == 4);
    // confirmed: E_4 < 0 <= E_6 at phi = 0.675
    Params p675 = make("1/3", "0.675");
    CHECK(eval_cycle_fn(CycleFn::E, 4, 4, p675) < 0);
    CHECK(eval_cycle_fn(CycleFn::E, 6, 6, p675) >= 0);
    CHECK(find_s(p675) == 6);
    // tight n_max trips the search error
    CHECK_THROWS_AS(find_s(make("1/3", "0.675"), 4), SNotFoundError);
}

TEST_CASE("even-n F ladder is positive decreasing, odd-n negative") {
    Params p = make("1/3", "0.7");
    Real prev = cycle_fn_f(2, p);
    CHECK(prev > 0);
    for (long n = 4; n <= 20; n += 2) {
        Real cur = cycle_fn_f(n, p);
        CHECK(cur > 0);
        CHECK(cur < prev);
        prev = cur;
    }
    for (long n = 1; n <= 19; n += 2) CHECK(cycle_fn_f(n, p) < 0);
}

TEST_CASE("classification across the rho = 1/3 bands") {
    // GAS at and below 2/3
    Classification gas = classify(make("1/3", "0.5"));
    CHECK(gas.regime == Classification::Regime::GASEquilibrium);
    CHECK(gas.cycles.empty());
    CHECK_FALSE(gas.unstable_equilibrium);
    CHECK(classify(make("1/3", "2/3")).regime == Classification::Regime::GASEquilibrium);

    // phi above phi2: unique [1,2], no unstable equilibrium
    Classification top = classify(make("1/3", "0.95"));
    CHECK(top.regime == Classification::Regime::CycleSet);
    REQUIRE(top.cycles.size() == 1);
    CHECK(top.cycles[0] == GamePattern::one_n(2));
    CHECK_FALSE(top.unstable_equilibrium);

    // between G_{4,2}=0 and phi2: still [1,2], but the equilibrium is unstable
    Classification mid = classify(make("1/3", "0.7"));
    REQUIRE(mid.cycles.size() == 1);
    CHECK(mid.cycles[0] == GamePattern::one_n(2));
    CHECK(mid.unstable_equilibrium);
    CHECK(mid.s == 2);

    // 0.688 sits below the H_{4,2} root: the band is [1,4] alone
    Classification low = classify(make("1/3", "0.688"));
    REQUIRE(low.cycles.size() == 1);
    CHECK(low.cycles[0] == GamePattern::one_n(4));

    // inside (E_{4,2} root, E_2 root): [1,4,1,2] alone
    Classification dbl = classify(make("1/3", "0.68804"));
    REQUIRE(dbl.cycles.size() == 1);
    CHECK(dbl.cycles[0] == GamePattern::one_n_one_nm2(4));

    // micro band (E_2 root, G_{4,2} root): two cycles
    Classification two = classify(make("1/3", "0.6880664"));
    REQUIRE(two.cycles.size() == 2);
    CHECK(two.has_cycle(GamePattern::one_n(2)));
    CHECK(two.has_cycle(GamePattern::one_n_one_nm2(4)));

    // micro band (H_{4,2} root, E_{4,2} root): [1,4,1,2] and [1,4]
    Classification two2 = classify(make("1/3", "0.68802689"));
    REQUIRE(two2.cycles.size() == 2);
    CHECK(two2.has_cycle(GamePattern::one_n(4)));
    CHECK(two2.has_cycle(GamePattern::one_n_one_nm2(4)));

    // [1,6] band
    Classification six = classify(make("1/3", "0.675"));
    REQUIRE(six.cycles.size() == 1);
    CHECK(six.cycles[0] == GamePattern::one_n(6));
}

TEST_CASE("boundary roots reproduce the published 18-digit values") {
    Real rho = Real::from_string("1/3", 256);
    auto g42 = boundary_root(CurveSpec{CurveSpec::Kind::G, 4, 2}, rho, 18);
    CHECK(g42.truncated == "0.688066413565052628");
    auto h64 = boundary_root(CurveSpec{CurveSpec::Kind::H, 6, 4}, rho, 18);
    CHECK(h64.truncated == "0.677217953388847194");
    auto e4 = boundary_root(CurveSpec{CurveSpec::Kind::E, 4, 0}, rho, 18);
    CHECK(e4.truncated == "0.677218563614298209");
}

TEST_CASE("curve sign convention: positive above, negative below the root") {
    Real rho = Real::from_string("1/3", 256);
    using K = CurveSpec::Kind;
    for (CurveSpec c : {CurveSpec{K::G, 4, 2}, CurveSpec{K::E, 2, 0}, CurveSpec{K::Em, 4, 2},
                        CurveSpec{K::H, 4, 2}, CurveSpec{K::G, 6, 4}}) {
        auto root = boundary_root(c, rho, 20);
        Real bump = Real::from_double(1e-9, 256);
        Params above(rho, root.hi + bump, PrecisionConfig::make());
        Params below(rho, root.lo - bump, PrecisionConfig::make());
        CHECK(detail::eval_curve(c, above) > 0);
        CHECK(detail::eval_curve(c, below) < 0);
    }
}

TEST_CASE("band ordering for one family at three rho values") {
    using K = CurveSpec::Kind;
    for (const char* rho_text : {"1/3", "0.22", "0.58"}) {
        Real rho = Real::from_string(rho_text, 256);
        auto g_top = boundary_root(CurveSpec{K::G, 4, 2}, rho, 24);
        auto e2 = boundary_root(CurveSpec{K::E, 2, 0}, rho, 24);
        auto e42 = boundary_root(CurveSpec{K::Em, 4, 2}, rho, 24);
        auto h42 = boundary_root(CurveSpec{K::H, 4, 2}, rho, 24);
        auto g_bot = boundary_root(CurveSpec{K::G, 6, 4}, rho, 24);
        CHECK(g_top.lo > e2.hi);
        CHECK(e2.lo > e42.hi);
        CHECK(e42.lo > h42.hi);
        CHECK(h42.lo > g_bot.hi);
    }
}

TEST_CASE("line family: spectral forms match the direct expansions") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> dr(0.05, 0.95);
    std::uniform_real_distribution<double> dp(0.67, 1.0);
    for (int i = 0; i < 12; ++i) {
        Params p(Real::from_double(dr(rng), 256), Real::from_double(dp(rng), 256),
                 PrecisionConfig::make());
        LineFamily s1 = line_family(1, p);
        LineFamily x1 = detail::line1_explicit(p);
        CHECK(abs(s1.alpha - x1.alpha) < tol(-200));
        CHECK(abs(s1.beta - x1.beta) < tol(-200));
        CHECK(abs(s1.gamma - x1.gamma) < tol(-200));
        LineFamily s2 = line_family(2, p);
        LineFamily x2 = detail::line2_explicit(p);
        CHECK(abs(s2.alpha - x2.alpha) < tol(-200));
        CHECK(abs(s2.beta - x2.beta) < tol(-200));
        CHECK(abs(s2.gamma - x2.gamma) < tol(-200));

        // positivity of the first-line data and the b1 > pi0 gap
        CHECK(s1.alpha > 0);
        CHECK(s1.beta > 0);
        CHECK(s1.gamma > 0);
        CHECK(s1.b - spectral(p).pi.x0 > 0);

        // every line passes through the common pivot point
        Real q = 3 * p.phi() - 2;
        const SpectralData& sd = spectral(p);
        Real px = (p.phi() - 2 * sd.pi.x0) / q;
        Real py = (p.phi() - 2 * sd.pi.x1) / q;
        for (int n = 1; n <= 6; ++n) {
            LineFamily ln = line_family(n, p);
            CHECK(abs(ln.alpha * px + ln.beta * py - ln.gamma) < tol(-200));
            // intercept identities
            CHECK(abs(ln.alpha * ln.b - ln.gamma) < tol(-200));
            CHECK(abs(ln.alpha * sd.pi.x0 + ln.beta * ln.a - ln.gamma) < tol(-200));
            CHECK(abs(ln.alpha * ln.c + ln.beta * (1 - ln.c) - ln.gamma) < tol(-196));
        }
    }
}

TEST_CASE("line coefficients are the one-A-then-B displacement") {
    // z = x PA PB^n has z0 - pi0 = (-1)^(n-1) (alpha_n x0 + beta_n x1 - gamma_n)
    Params p = make("0.41", "0.83");
    auto [pa, pb] = build_matrices(p);
    const SpectralData& sd = spectral(p);
    Real x0 = Real::from_string("0.61", 256);
    Real x1 = Real::from_string("0.17", 256);
    Vec3 x(x0, x1, 1 - x0 - x1);
    Vec3 z = x * pa;
    for (int n = 1; n <= 5; ++n) {
        z = z * pb;
        LineFamily ln = line_family(n, p);
        Real lhs = z[0] - sd.pi.x0;
        Real rhs = ln.alpha * x0 + ln.beta * x1 - ln.gamma;
        if (n % 2 == 0) rhs = -rhs;
        CHECK(abs(lhs - rhs) < tol(-200));
    }
}

TEST_CASE("twelve-region index") {
    // (1/3, 1) lies in region 11, one of the proved regions
    Params p = make("1/3", "1");
    CHECK(region12(p) == 11);

    // spot checks from a full-plane scan
    CHECK(region12(make("0.6", "0.6735")) == 1);
    CHECK(region12(make("0.02", "0.7253")) == 3);
    CHECK(region12(make("0.96", "0.678")) == 9);
    CHECK(region12(make("0.5", "0.834")) == 10);
    CHECK(region12(make("0.96", "0.999")) == 12);

    // a grid point exactly on the phi = 1 - rho/3 curve is honestly refused
    CHECK_THROWS_AS(region12(make("0.93", "0.69")), PredicateAmbiguousError);

    // region 3 means b2 >= 1, which forces the other three intercept bounds
    Params r3 = make("0.02", "0.7253");
    LineFamily l1 = line_family(1, r3);
    LineFamily l2 = line_family(2, r3);
    Real edge = 1 - spectral(r3).pi.x0;
    CHECK(l2.b >= Real::from_long(1, 256));
    CHECK(l1.b > Real::from_long(1, 256));
    CHECK(l1.a > edge);
    CHECK(l2.a >= edge);

    // outside the partition
    CHECK_THROWS_AS(region12(make("1/3", "0.5")), NotInPartitionError);
    CHECK_THROWS_AS(region12(make("1/3", "0.68")), NotInPartitionError);
}

TEST_CASE("region predicates cover and only {1,7} double-matches") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> dr(0.02, 0.97);
    std::uniform_real_distribution<double> dp(0.6668, 1.0);
    int checked = 0;
    while (checked < 400) {
        Params p(Real::from_double(dr(rng), 256), Real::from_double(dp(rng), 256),
                 PrecisionConfig::make());
        std::vector<int> m;
        try {
            m = region12_matches(p);
        } catch (const NotInPartitionError&) {
            continue;
        } catch (const PredicateAmbiguousError&) {
            continue; // grazing an internal curve
        }
        ++checked;
        REQUIRE(!m.empty());
        if (m.size() > 1) {
            REQUIRE(m.size() == 2);
            CHECK(m[0] == 1);
            CHECK(m[1] == 7);
        }
    }
}

TEST_CASE("b-forever feeder lines") {
    // below phi3 the A-side feeder is empty
    auto lines_lo = b_forever_lines(make("1/3", "0.7"));
    REQUIRE(lines_lo.size() == 3);
    CHECK(lines_lo[0].name == "f");
    CHECK_FALSE(lines_lo[0].nonempty);

    // above phi3 (and below phi2) it is not
    auto lines_hi = b_forever_lines(make("1/3", "0.85"));
    CHECK(lines_hi[0].nonempty);

    for (const auto& l : lines_lo) CHECK(l.slope < Real::from_long(-1, 256));

    // f(pi0) > 0 throughout the case-5 window
    for (const char* phi : {"0.67", "0.7", "0.78", "0.82", "0.85", "0.88"}) {
        Params p = make("1/3", phi);
        auto lines = b_forever_lines(p);
        Real at_pi0 = lines[0].slope * spectral(p).pi.x0 + lines[0].intercept;
        CHECK(at_pi0 > 0);
        // the phi3 rule agrees with the geometric segment test on the A side
        Real w_lo = (lines[0].intercept - 1) / (-1 - lines[0].slope);
        Real w_hi = lines[0].intercept / (-lines[0].slope);
        Real lo = w_lo > spectral(p).pi.x0 ? w_lo : spectral(p).pi.x0;
        Real hi = w_hi < Real::from_long(1, 256) ? w_hi : Real::from_long(1, 256);
        CHECK(lines[0].nonempty == (lo <= hi));
    }

    CHECK_THROWS_AS(b_forever_lines(make("1/3", "0.5")), NotInPartitionError);
    CHECK_THROWS_AS(b_forever_lines(make("1/3", "0.95")), NotInPartitionError);
}

TEST_CASE("feeder lines play their prefix and then B") {
    // a state on the f/g/h line plays A / BA / BBA and then game B for as
    // long as finite precision can hold the measure-zero membership
    struct Case {
        const char* rho;
        const char* phi;
        int which;             // 0 = f, 1 = g, 2 = h
        const char* prefix;
    };
    for (const Case& c : {Case{"1/3", "0.85", 0, "A"}, Case{"0.034", "0.986982", 1, "BA"},
                          Case{"0.0025", "0.99973762", 2, "BBA"}}) {
        Params p = make(c.rho, c.phi);
        const SpectralData& sd = spectral(p);
        auto lines = b_forever_lines(p);
        const BForeverLine& line = lines[static_cast<std::size_t>(c.which)];
        REQUIRE(line.nonempty);

        Real one = Real::from_long(1, 256);
        Real zero = Real(256);
        Real w_lo = (line.intercept - 1) / (-1 - line.slope);
        Real w_hi = line.intercept / (-line.slope);
        Real lo = line.domain_is_a ? (w_lo > sd.pi.x0 ? w_lo : sd.pi.x0)
                                   : (w_lo > zero ? w_lo : zero);
        Real hi = line.domain_is_a ? (w_hi < one ? w_hi : one)
                                   : (w_hi < sd.pi.x0 ? w_hi : sd.pi.x0);
        REQUIRE(lo < hi);
        Real w0 = (lo + hi) / 2;
        Real w1 = line.slope * w0 + line.intercept;
        Trajectory traj = iterate(SimplexPoint{w0, w1, 1 - w0 - w1}, p, 20);
        std::string prefix(c.prefix);
        CHECK(traj.games.substr(0, prefix.size()) == prefix);
        for (std::size_t t = prefix.size(); t < traj.games.size(); ++t)
            CHECK(traj.games[t] == 'B');
    }

    // off the h-line by a hair, the same prefix does not lead to B-forever:
    // the trajectory leaves the line family and cycles instead
    Params p = make("0.0025", "0.99973762");
    auto lines = b_forever_lines(p);
    Real w0 = Real::from_string("0.4", 256);
    Real w1 = lines[2].slope * w0 + lines[2].intercept + Real::from_string("0.01", 256);
    Trajectory traj = iterate(SimplexPoint{w0, w1, 1 - w0 - w1}, p, 60);
    CHECK(traj.games.find('A', 3) != std::string::npos);
}

TEST_CASE("vertex absorption in the proved regions") {
    // (1/3, 1): region 11, all seven checks pass
    VertexReport rep = check_vertex_absorption(make("1/3", "1"));
    CHECK(rep.region == 11);
    CHECK(rep.checks.size() == 7);
    CHECK(rep.all_pass);

    // (1/3, 0.95) lies in one of the high regions and passes
    VertexReport rep95 = check_vertex_absorption(make("1/3", "0.95"));
    CHECK((rep95.region == 9 || rep95.region == 10 || rep95.region == 11));
    CHECK(rep95.all_pass);

    // region 3 uses the three A-side corners
    VertexReport rep3 = check_vertex_absorption(make("0.02", "0.7253"));
    CHECK(rep3.region == 3);
    CHECK(rep3.checks.size() == 3);
    CHECK(rep3.all_pass);

    // region 9 and 10 representatives
    CHECK(check_vertex_absorption(make("0.96", "0.678")).all_pass);
    CHECK(check_vertex_absorption(make("0.5", "0.834")).all_pass);

    // outside the proved regions the check refuses to run
    CHECK_THROWS_AS(check_vertex_absorption(make("1/3", "0.7")), WrongRegionError);
}

TEST_CASE("whenever [1,n] is admitted, all earlier E_{n,m} are negative") {
    for (const char* phi : {"0.7", "0.688", "0.68", "0.675", "0.95", "0.99"}) {
        Params p = make("1/3", phi);
        Classification cls = classify(p);
        for (const auto& pat : cls.cycles) {
            if (pat.kind == GamePattern::Kind::OneN) {
                for (int m = 0; m < pat.n; ++m)
                    CHECK(eval_cycle_fn(CycleFn::Em, pat.n, m, p) < 0);
            } else {
                for (int m = 0; m < pat.n; ++m)
                    CHECK(eval_cycle_fn(CycleFn::G, pat.n, m, p) < 0);
                for (int m = 0; m <= pat.n - 3; ++m)
                    CHECK(eval_cycle_fn(CycleFn::H, pat.n, m, p) < 0);
            }
        }
    }
}

TEST_CASE("boundary ambiguity surfaces instead of a silent pick") {
    // a phi a few e-44 away from the E_2 = 0 curve is still decidable: the
    // adaptive escalation certifies the sign at a higher width
    Real rho = Real::from_string("1/3", 256);
    auto e2 = boundary_root(CurveSpec{CurveSpec::Kind::E, 2, 0}, rho, 40);
    Params near_curve(rho, e2.hi + Real::pow2(-140, 2048), PrecisionConfig::make());
    Classification c = classify(near_curve);
    CHECK(c.s == 2);

    // push phi within 2^-2048 of the curve by bisecting with exact binary
    // midpoints; once the sign stays ambiguous at the 4096-bit cap, classify
    // must refuse rather than guess the band
    Real lo = e2.lo.at_precision(4096);
    Real hi = e2.hi.at_precision(4096);
    Real rho_wide = rho.at_precision(4096);
    bool refused = false;
    for (int it = 0; it < 2500 && !refused; ++it) {
        Real mid = (lo + hi) / 2;
        Sign s = adaptive_sign(
            [&](long b) {
                Params p(rho_wide.at_precision(b), mid.at_precision(b),
                         PrecisionConfig::make(b));
                return eval_cycle_fn(CycleFn::E, 2, 2, p);
            },
            256);
        if (s == Sign::ZeroAmbiguous) {
            Params p(rho_wide, mid, PrecisionConfig::make(4096));
            try {
                classify(p);
            } catch (const BoundaryAmbiguousError& e) {
                refused = true;
                CHECK(std::string(e.what()).find("E_2") != std::string::npos);
            }
        } else if (s == Sign::Positive) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    CHECK(refused);
}
