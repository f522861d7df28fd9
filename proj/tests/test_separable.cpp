#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <loccgap/locc.hpp>
#include <loccgap/measures.hpp>
#include <loccgap/separable.hpp>

using namespace loccgap;
using Catch::Matchers::WithinAbs;

namespace {

SeparableElement random_element(std::mt19937_64& g) {
    SeparableElement e;
    e.w = 0.05 + 0.9 * detail::uniform01(g);
    e.x = 2.0 * detail::uniform01(g) - 1.0;
    e.y = 2.0 * detail::uniform01(g) - 1.0;
    double ph1 = 2.0 * 3.141592653589793 * detail::uniform01(g);
    double ph2 = 2.0 * 3.141592653589793 * detail::uniform01(g);
    double r1 = std::sqrt(1.0 - e.x * e.x) * detail::uniform01(g);
    double r2 = std::sqrt(1.0 - e.y * e.y) * detail::uniform01(g);
    e.xi = cplx{r1 * std::cos(ph1), r1 * std::sin(ph1)};
    e.eta = cplx{r2 * std::cos(ph2), r2 * std::sin(ph2)};
    return e;
}

/// Random complete diagonal instrument whose p = 0 outcomes carry unequal-bit
/// weight exactly Q: two perfect discriminators plus random diagonal filler
/// and a final completion pair.
SeparableInstrument random_efficient_instrument(std::mt19937_64& g, double q) {
    double split = detail::uniform01(g);
    double wa = 0.5 * q * split, wb = 0.5 * q * (1.0 - split);
    SeparableInstrument inst;
    inst.elements.push_back({wa, 1.0, -1.0, 0.0, 0.0});
    inst.elements.push_back({wb, -1.0, 1.0, 0.0, 0.0});
    std::array<double, 4> rem{1.0, 1.0 - 4.0 * wa, 1.0 - 4.0 * wb, 1.0};
    int fillers = 1 + static_cast<int>(g() % 3);
    for (int f = 0; f < fillers; ++f) {
        std::array<double, 2> a{detail::uniform01(g), detail::uniform01(g)};
        std::array<double, 2> b{detail::uniform01(g), detail::uniform01(g)};
        double scale = 1e300;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double d = a[i] * b[j];
                if (d > 1e-12) scale = std::min(scale, rem[2 * i + j] / d);
            }
        if (scale > 1e200) continue;
        scale *= 0.8 * detail::uniform01(g);
        if (scale <= 0.0) continue;
        for (int i = 0; i < 2; ++i) a[i] *= scale;
        double ta = a[0] + a[1], tb = b[0] + b[1];
        if (ta <= 1e-12 || tb <= 1e-12) continue;
        inst.elements.push_back(
            {0.25 * ta * tb, (a[0] - a[1]) / ta, (b[0] - b[1]) / tb, 0.0, 0.0});
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) rem[2 * i + j] -= a[i] * b[j];
    }
    for (int i = 0; i < 2; ++i) {
        double t = rem[2 * i] + rem[2 * i + 1];
        if (t <= 1e-12) continue;
        inst.elements.push_back({0.25 * t, i == 0 ? 1.0 : -1.0,
                                 (rem[2 * i] - rem[2 * i + 1]) / t, 0.0, 0.0});
    }
    return inst;
}

} // namespace

TEST_CASE("p and q functionals") {
    SECTION("worked values") {
        SeparableElement e{0.45, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0};
        REQUIRE_THAT(p_functional(e), WithinAbs(0.5, 1e-15));
        REQUIRE_THAT(q_functional(e), WithinAbs(0.4, 1e-15));

        SeparableElement disc{0.05, 1.0, -1.0, 0.0, 0.0};
        REQUIRE(p_functional(disc) == 0.0);
        REQUIRE_THAT(q_functional(disc), WithinAbs(0.1, 1e-15));
    }

    SECTION("closed form equals the matrix-element functionals") {
        std::mt19937_64 g(21);
        for (int i = 0; i < 10000; ++i) {
            SeparableElement e = random_element(g);
            REQUIRE_THAT(p_functional(e), WithinAbs(p_of_gram(e.gram()), 1e-12));
            REQUIRE_THAT(q_functional(e), WithinAbs(q_of_gram(e.gram()), 1e-12));
        }
    }

    SECTION("matrix-element functionals are additive") {
        std::mt19937_64 g(22);
        for (int i = 0; i < 1000; ++i) {
            Mat4 g1 = random_element(g).gram(), g2 = random_element(g).gram();
            REQUIRE_THAT(p_of_gram(g1 + g2), WithinAbs(p_of_gram(g1) + p_of_gram(g2), 1e-12));
            REQUIRE_THAT(q_of_gram(g1 + g2), WithinAbs(q_of_gram(g1) + q_of_gram(g2), 1e-12));
        }
    }

    SECTION("p + q = 2w always") {
        std::mt19937_64 g(23);
        for (int i = 0; i < 10000; ++i) {
            SeparableElement e = random_element(g);
            REQUIRE_THAT(p_functional(e) + q_functional(e), WithinAbs(2.0 * e.w, 1e-13));
        }
    }
}

TEST_CASE("concurrence ceiling at diagonal coordinates") {
    REQUIRE_THAT(c_bound(1.0 / 3.0, 1.0 / 3.0), WithinAbs(0.8, 1e-15));
    REQUIRE(c_bound(0.0, 0.0) == 1.0);
    REQUIRE(c_bound(1.0, 0.3) == 0.0);
    REQUIRE(c_bound(-0.2, 1.0) == 0.0);
    REQUIRE_THROWS_AS(c_bound(1.0, -1.0), std::domain_error);
    REQUIRE_THROWS_AS(c_bound(1.2, 0.0), std::domain_error);

    SECTION("equals 1 exactly on the antidiagonal") {
        for (double t : {0.1, 0.35, 0.6, 0.93})
            REQUIRE_THAT(c_bound(t, -t), WithinAbs(1.0, 1e-12));
    }

    SECTION("ceiling is attained only by elements with vanishing off-diagonals") {
        std::mt19937_64 g(24);
        for (int i = 0; i < 100000; ++i) {
            SeparableElement e = random_element(g);
            double cb = c_bound(e.x, e.y);
            OutcomeStats st = element_stats(e);
            if (st.c_plus) REQUIRE(*st.c_plus <= cb + 1e-9);
            if (st.c_minus) REQUIRE(*st.c_minus <= cb + 1e-9);
        }
    }

    SECTION("Bell-conditioned probabilities split as w(1 + xy +/- Re xi eta)") {
        std::mt19937_64 g(25);
        for (int i = 0; i < 10000; ++i) {
            SeparableElement e = random_element(g);
            OutcomeStats st = element_stats(e);
            double shift = (e.xi * e.eta).real();
            REQUIRE_THAT(st.p_plus, WithinAbs(e.w * (1.0 + e.x * e.y + shift), 1e-12));
            REQUIRE_THAT(st.p_minus, WithinAbs(e.w * (1.0 + e.x * e.y - shift), 1e-12));
            REQUIRE_THAT(st.p, WithinAbs(p_functional(e), 1e-12));
            REQUIRE_THAT(st.q, WithinAbs(q_functional(e), 1e-12));
        }
    }
}

TEST_CASE("optimal product instrument") {
    SECTION("worked table at Q = 0.2") {
        SeparableInstrument inst = build_optimal_instrument(0.2);
        REQUIRE(inst.elements.size() == 4);
        REQUIRE(inst.completeness_deviation() < 1e-15);

        REQUIRE_THAT(inst.elements[0].w, WithinAbs(0.05, 1e-15));
        REQUIRE(inst.elements[0].x == 1.0);
        REQUIRE(inst.elements[0].y == -1.0);
        REQUIRE_THAT(inst.elements[2].w, WithinAbs(0.45, 1e-15));
        REQUIRE_THAT(inst.elements[2].x, WithinAbs(std::sqrt(1.0 / 9.0), 1e-15));

        REQUIRE(p_functional(inst.elements[0]) == 0.0);
        REQUIRE_THAT(q_functional(inst.elements[0]), WithinAbs(0.1, 1e-15));
        OutcomeStats st3 = element_stats(inst.elements[2]);
        REQUIRE_THAT(st3.p_plus, WithinAbs(0.5, 1e-12));
        REQUIRE_THAT(st3.p_minus, WithinAbs(0.5, 1e-12));
        REQUIRE(st3.c_plus);
        REQUIRE_THAT(*st3.c_plus, WithinAbs(0.8, 1e-12));
        REQUIRE_THAT(*st3.c_minus, WithinAbs(0.8, 1e-12));
    }

    SECTION("ebar saturates the measure at the threshold, efficiency is exactly Q") {
        for (double q : {0.2, 0.5, 0.999}) {
            SeparableInstrument inst = build_optimal_instrument(q);
            EQMeasure m(q);
            EbarReport rep = evaluate_ebar(inst, m);
            REQUIRE_THAT(rep.ebar, WithinAbs(1.0, 1e-12));
            REQUIRE_THAT(rep.efficiency, WithinAbs(q, 1e-12));
            REQUIRE(check_efficiency(inst, q));
        }
    }

    SECTION("rejects out-of-range Q") {
        REQUIRE_THROWS_AS(build_optimal_instrument(0.0), std::domain_error);
        REQUIRE_THROWS_AS(build_optimal_instrument(1.0), std::domain_error);
    }
}

TEST_CASE("ebar evaluation") {
    EQMeasure m(0.2);

    SECTION("identity instrument keeps everything") {
        SeparableInstrument inst;
        inst.elements.push_back({1.0, 0.0, 0.0, 0.0, 0.0});
        EbarReport rep = evaluate_ebar(inst, m);
        REQUIRE_THAT(rep.ebar, WithinAbs(1.0, 1e-15));
        REQUIRE(rep.efficiency == 0.0);
    }

    SECTION("full projective dephasing keeps nothing and discriminates perfectly") {
        SeparableInstrument inst;
        for (double x : {1.0, -1.0})
            for (double y : {1.0, -1.0}) inst.elements.push_back({0.25, x, y, 0.0, 0.0});
        EbarReport rep = evaluate_ebar(inst, m);
        REQUIRE_THAT(rep.ebar, WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(rep.efficiency, WithinAbs(1.0, 1e-15));
        REQUIRE(check_efficiency(inst, 0.2));
    }

    SECTION("one-sided dephasing kills the concurrence but not the p weight") {
        SeparableInstrument inst;
        inst.elements.push_back({0.5, 1.0, 0.0, 0.0, 0.0});
        inst.elements.push_back({0.5, -1.0, 0.0, 0.0, 0.0});
        EbarReport rep = evaluate_ebar(inst, m);
        REQUIRE_THAT(rep.ebar, WithinAbs(0.0, 1e-15));
        REQUIRE(rep.efficiency == 0.0);
        REQUIRE_FALSE(check_efficiency(inst, 0.2));
    }

    SECTION("incomplete instruments are rejected") {
        SeparableInstrument inst;
        inst.elements.push_back({0.5, 0.0, 0.0, 0.0, 0.0});
        REQUIRE_THROWS_AS(evaluate_ebar(inst, m), std::invalid_argument);
    }

    SECTION("no efficient instrument beats the optimal ebar") {
        std::mt19937_64 g(26);
        double best = evaluate_ebar(build_optimal_instrument(0.2), m).ebar;
        for (int i = 0; i < 1000; ++i) {
            SeparableInstrument inst = random_efficient_instrument(g, 0.2);
            REQUIRE(inst.completeness_deviation() < 1e-10);
            REQUIRE(check_efficiency(inst, 0.2));
            EbarReport rep = evaluate_ebar(inst, m);
            REQUIRE(rep.efficiency >= 0.2 - 1e-12);
            REQUIRE(rep.ebar <= best + 1e-9);
        }
    }
}
