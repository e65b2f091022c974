#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dfc/core_model.hpp"
#include "test_helpers.hpp"

using namespace dfc;

TEST_CASE("binomial weights") {
    CHECK(binomial_weights(0) == std::vector<long long>{1});
    CHECK(binomial_weights(1) == std::vector<long long>{1, -1});
    CHECK(binomial_weights(2) == std::vector<long long>{1, -2, 1});
    CHECK(binomial_weights(3) == std::vector<long long>{1, -3, 3, -1});
    CHECK_THROWS_AS(binomial_weights(-1), std::invalid_argument);

    for (int p = 0; p <= 10; ++p) {
        const auto w = binomial_weights(p);
        REQUIRE(w.size() == static_cast<size_t>(p + 1));
        long long sum = 0;
        for (int i = 0; i <= p; ++i) {
            const long long expected = (i % 2 == 0 ? 1 : -1) * testing::binom_oracle(p, i);
            CHECK(w[i] == expected);
            sum += w[i];
        }
        if (p >= 1) CHECK(sum == 0);  // non-invasiveness
    }
}

TEST_CASE("augmented system blocks") {
    const Plant plant = casestudy::plant();
    const auto [A_aug, B_aug] = build_augmented(plant);
    Matrix A_expected{{3.0, -3.75, 0.0}, {1.0, -1.0, 0.0}, {-2.5, 2.0, 0.0}};
    Matrix B_expected{{1.0}, {-1.5}, {0.0}};
    CHECK(A_aug == A_expected);
    CHECK(B_aug == B_expected);

    Plant scalar;
    scalar.A = Matrix{{0.0}};
    scalar.B = Matrix{{1.0}};
    scalar.C = Matrix{{1.0}};
    const auto [As, Bs] = build_augmented(scalar);
    CHECK(As == Matrix{{0.0, 0.0}, {1.0, 0.0}});
    CHECK(Bs == Matrix{{1.0}, {0.0}});

    // appended integrator columns are zero, so 0 is an eigenvalue
    CHECK(A_aug.col(2).isZero(0.0));
    CHECK(A_aug.determinant() == 0.0);
}

TEST_CASE("closed-loop assembly for the published designs") {
    const Plant plant = casestudy::plant();

    SUBCASE("design 1 blocks") {
        const ClosedLoopDDE cl = build_closed_loop(plant, casestudy::design1());
        Matrix A0_expected{{3.0 - 1.2, -3.75 - 0.3319, 0.5523},
                           {1.0 + 1.8, -1.0 + 0.49785, -0.82845},
                           {-2.5, 2.0, 0.0}};
        CHECK((cl.A0 - A0_expected).lpNorm<Eigen::Infinity>() < 1e-14);
        CHECK(cl.A2.isZero(0.0));
        CHECK(cl.T == Matrix{{0.0}, {0.0}, {-1.0}});
        CHECK(cl.delays() == std::vector<double>{0.41});
        CHECK(cl.weights == std::vector<long long>{1, -1});
        CHECK_FALSE(cl.delay_free());
    }

    SUBCASE("zero gains, p = 0 reduce to the open augmented system") {
        const ClosedLoopDDE cl = build_closed_loop(plant, testing::zero_controller(plant, 0));
        const auto [A_aug, B_aug] = build_augmented(plant);
        CHECK(cl.A0 == A_aug);
        CHECK(cl.A1.isZero(0.0));
        CHECK(cl.A2.isZero(0.0));
        CHECK(cl.delays().empty());
        CHECK(cl.delay_free());
    }

    SUBCASE("design 2 carries both delays and the K2 block") {
        const ClosedLoopDDE cl = build_closed_loop(plant, casestudy::design2());
        CHECK(cl.delays() == std::vector<double>{0.34, 0.44});
        CHECK(cl.A2(2, 2) == doctest::Approx(-1.0 / 0.44).epsilon(1e-15));
        CHECK(cl.A0(2, 2) == doctest::Approx(1.0 / 0.44).epsilon(1e-15));
    }

    SUBCASE("tau_q = 0 stores K2 but keeps it out of the blocks") {
        DelayedFeedbackController ctrl = casestudy::design1();
        ctrl.K2 = Matrix{{4.2}};
        const ClosedLoopDDE cl = build_closed_loop(plant, ctrl);
        CHECK(cl.A0(2, 2) == 0.0);
        CHECK(cl.A2.isZero(0.0));
        CHECK(cl.ctrl.K2(0, 0) == 4.2);
    }

    SUBCASE("dimension mismatches name the offending matrix") {
        DelayedFeedbackController bad = casestudy::design1();
        bad.K = Matrix{{1.0, 2.0, 3.0}};
        CHECK_THROWS_WITH_AS(build_closed_loop(plant, bad),
                             doctest::Contains("controller K must be"), std::invalid_argument);
        bad = casestudy::design1();
        bad.K1 = Matrix{{1.0, 2.0}};
        CHECK_THROWS_WITH_AS(build_closed_loop(plant, bad),
                             doctest::Contains("controller K1 must be"), std::invalid_argument);
        bad = casestudy::design1();
        bad.tau = 0.0;
        CHECK_THROWS_AS(build_closed_loop(plant, bad), std::invalid_argument);
    }
}

TEST_CASE("block-structure round trip recovers the constituents exactly") {
    const Plant plant = casestudy::plant();
    const DelayedFeedbackController ctrl = casestudy::design2();
    const ClosedLoopDDE cl = build_closed_loop(plant, ctrl);
    CHECK(cl.plant.A == plant.A);
    CHECK(cl.plant.B == plant.B);
    CHECK(cl.plant.C == plant.C);
    CHECK(cl.ctrl.K == ctrl.K);
    CHECK(cl.ctrl.K1 == ctrl.K1);
    CHECK(cl.ctrl.K2 == ctrl.K2);
    CHECK(cl.ctrl.tau == ctrl.tau);
    CHECK(cl.ctrl.tau_q == ctrl.tau_q);
    CHECK(cl.ctrl.p == ctrl.p);
}

TEST_CASE("characteristic matrix") {
    const Plant plant = casestudy::plant();

    SUBCASE("s = 0 with p >= 1: the binomial sum vanishes, top-left is -A") {
        for (int p : {1, 2, 3}) {
            DelayedFeedbackController ctrl = casestudy::design1();
            ctrl.p = p;
            const ClosedLoopDDE cl = build_closed_loop(plant, ctrl);
            const CMatrix D = char_matrix(cl, Complex(0.0, 0.0));
            CHECK((D.topLeftCorner(2, 2) + plant.A.cast<Complex>()).cwiseAbs().maxCoeff() < 1e-14);
        }
    }

    SUBCASE("weight sum equals the (1 - e^{-s tau})^p block formula") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> real_part(-3.0, 3.0);
        std::uniform_real_distribution<double> tau_dist(0.05, 1.5);
        std::uniform_int_distribution<int> p_dist(1, 4);
        for (int trial = 0; trial < 100; ++trial) {
            DelayedFeedbackController ctrl = casestudy::design1();
            ctrl.p = p_dist(rng);
            ctrl.tau = tau_dist(rng);
            const ClosedLoopDDE cl = build_closed_loop(plant, ctrl);
            const Complex s(real_part(rng), real_part(rng));

            // independent scalar route
            Complex sum = 0.0;
            const auto w = binomial_weights(ctrl.p);
            for (int i = 0; i <= ctrl.p; ++i)
                sum += static_cast<double>(w[i]) * std::exp(-s * (i * ctrl.tau));
            const Complex direct = std::pow(1.0 - std::exp(-s * ctrl.tau), ctrl.p);
            CHECK(std::abs(sum - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));

            // block route: top-left of Delta equals sI - A + BK (1-e^{-s tau})^p
            const CMatrix D = char_matrix(cl, s);
            const CMatrix block = s * CMatrix::Identity(2, 2) - plant.A.cast<Complex>() +
                                  (plant.B * ctrl.K).cast<Complex>() * direct;
            const double scale = std::max(1.0, block.cwiseAbs().maxCoeff());
            CHECK((D.topLeftCorner(2, 2) - block).cwiseAbs().maxCoeff() <= 1e-12 * scale);
        }
    }

    SUBCASE("conjugacy: Delta(conj s) = conj Delta(s)") {
        const ClosedLoopDDE cl = build_closed_loop(plant, casestudy::design2());
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> coord(-4.0, 4.0);
        for (int trial = 0; trial < 20; ++trial) {
            const Complex s(coord(rng), coord(rng));
            const CMatrix a = char_matrix(cl, std::conj(s));
            const CMatrix b = char_matrix(cl, s).conjugate();
            CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
        }
    }

    SUBCASE("derivative matches a central difference") {
        const ClosedLoopDDE cl = build_closed_loop(plant, casestudy::design2());
        const Complex s(-0.8, 1.1), h(1e-6, 0.0);
        const CMatrix numeric = (char_matrix(cl, s + h) - char_matrix(cl, s - h)) / (2.0 * h);
        const CMatrix analytic = char_matrix_derivative(cl, s);
        CHECK((numeric - analytic).cwiseAbs().maxCoeff() < 1e-8);
    }
}
