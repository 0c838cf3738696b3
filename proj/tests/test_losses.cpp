#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "perfsim/losses.hpp"

using namespace perfsim;

namespace {

GroupDistribution point_group(int id, std::vector<double> x, double y) {
    GroupDistribution g;
    g.group = id;
    Sample s;
    s.features = std::move(x);
    s.label = y;
    s.group = id;
    g.points.push_back({std::move(s), 1.0});
    return g;
}

// Example-3 data: group a all (x=1, y=-1), group b all (x=2, y=1), p=(.5,.5).
PopulationState example3_pop() {
    return make_population({point_group(0, {1.0}, -1.0), point_group(1, {2.0}, 1.0)}, {0.5, 0.5});
}

// Scalar-mean point groups at z=1 and z=0.
PopulationState scalar_two_point(double pa) {
    return make_population({point_group(0, {1.0}, 1.0), point_group(1, {0.0}, 0.0)},
                           {pa, 1.0 - pa});
}

const LossSpec kSquared{LossFamily::SquaredError, 2.0, 10.0, 50.0};
const LossSpec kScalar{LossFamily::ScalarMeanSquared, 2.0, 2.0, 4.0};
const LossSpec kLogistic{LossFamily::LogisticNLL, {}, {}, {}};
const LossSpec kZeroOne{LossFamily::ZeroOne, {}, {}, {}};

}  // namespace

TEST_CASE("point_loss families") {
    CHECK(point_loss(kSquared, {ModelFamily::Linear, {0.0}}, {{1.0}, -1.0, 0, {}}) ==
          doctest::Approx(1.0));
    CHECK(point_loss(kScalar, {ModelFamily::ScalarMean, {0.7}}, {{0.0}, 0.7, 0, {}}) ==
          doctest::Approx(0.0));
    CHECK(point_loss(kZeroOne, {ModelFamily::Threshold1d, {0.5}}, {{0.7}, 1.0, 0, {}}) == 0.0);
    CHECK(point_loss(kZeroOne, {ModelFamily::Threshold1d, {0.5}}, {{0.3}, 0.0, 0, {}}) == 0.0);
    CHECK(point_loss(kZeroOne, {ModelFamily::Threshold1d, {0.5}}, {{0.7}, 0.0, 0, {}}) == 1.0);
    CHECK_THROWS_AS(point_loss(kSquared, {ModelFamily::ScalarMean, {0.0}}, {{1.0}, 1.0, 0, {}}),
                    Error);
}

TEST_CASE("point_loss_grad matches hand values and finite differences") {
    // d/dtheta (y - theta x)^2 = 2 (theta x - y) x = 2 at theta=0, x=1, y=-1.
    const auto g = point_loss_grad(kSquared, {ModelFamily::Linear, {0.0}}, {{1.0}, -1.0, 0, {}});
    CHECK(g[0] == doctest::Approx(2.0));

    // Zero gradient at the exact minimizer of a point mass.
    const auto g0 = point_loss_grad(kScalar, {ModelFamily::ScalarMean, {0.7}}, {{0.0}, 0.7, 0, {}});
    CHECK(g0[0] == doctest::Approx(0.0));

    CHECK_THROWS_AS(point_loss_grad(kZeroOne, {ModelFamily::Threshold1d, {0.5}}, {{0.7}, 1.0, 0, {}}),
                    Error);

    // 100 random probes per differentiable family against central differences.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_int_distribution<int> lab(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        {
            Sample s{{u(rng), u(rng)}, u(rng), 0, {}};
            std::vector<double> theta{u(rng), u(rng)};
            LossSpec spec{LossFamily::SquaredError, {}, {}, {}};
            auto f = [&](const std::vector<double>& th) {
                return point_loss(spec, {ModelFamily::Linear, th}, s);
            };
            const auto fd = oracles::finite_diff_grad(f, theta);
            const auto an = point_loss_grad(spec, {ModelFamily::Linear, theta}, s);
            for (std::size_t i = 0; i < fd.size(); ++i)
                CHECK(std::abs(an[i] - fd[i]) <= 1e-6 * std::max(1.0, std::abs(fd[i])));
        }
        {
            Sample s{{u(rng), u(rng)}, static_cast<double>(lab(rng)), 0, {}};
            std::vector<double> theta{u(rng), u(rng)};
            auto f = [&](const std::vector<double>& th) {
                return point_loss(kLogistic, {ModelFamily::Logistic, th}, s);
            };
            const auto fd = oracles::finite_diff_grad(f, theta);
            const auto an = point_loss_grad(kLogistic, {ModelFamily::Logistic, theta}, s);
            for (std::size_t i = 0; i < fd.size(); ++i)
                CHECK(std::abs(an[i] - fd[i]) <= 1e-6 * std::max(1.0, std::abs(fd[i])));
        }
        {
            Sample s{{0.0}, u(rng), 0, {}};
            std::vector<double> theta{u(rng)};
            auto f = [&](const std::vector<double>& th) {
                return point_loss(kScalar, {ModelFamily::ScalarMean, th}, s);
            };
            const auto fd = oracles::finite_diff_grad(f, theta);
            const auto an = point_loss_grad(kScalar, {ModelFamily::ScalarMean, theta}, s);
            CHECK(std::abs(an[0] - fd[0]) <= 1e-6 * std::max(1.0, std::abs(fd[0])));
        }
    }
}

TEST_CASE("group and mixture expected losses") {
    // Point group at z=1, scalar mean theta=0.7, squared loss: 0.09.
    auto pop = scalar_two_point(0.7);
    const Model m{ModelFamily::ScalarMean, {0.7}};
    CHECK(group_expected_loss(kScalar, m, pop.groups[0]) == doctest::Approx(0.09));

    // Mixture at p=(0.7,0.3): 0.7*0.09 + 0.3*0.49 = 0.21.
    CHECK(mixture_expected_loss(m, kScalar, pop) == doctest::Approx(0.21));

    // Example-3 data at theta=0: L = 2.5*0 - 0 + 1 = 1.
    CHECK(mixture_expected_loss({ModelFamily::Linear, {0.0}}, kSquared, example3_pop()) ==
          doctest::Approx(1.0));

    // Perfect interpolation gives zero loss.
    auto zero = make_population({point_group(0, {1.0}, 0.5)}, {1.0});
    CHECK(mixture_expected_loss({ModelFamily::Linear, {0.5}}, kSquared, zero) ==
          doctest::Approx(0.0));

    // Mixture decomposes exactly over group losses.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double pa = 0.2 + 0.6 * std::abs(u(rng));
        auto p2 = scalar_two_point(pa);
        const Model mm{ModelFamily::ScalarMean, {u(rng)}};
        const double split = p2.fractions[0] * group_expected_loss(kScalar, mm, p2.groups[0]) +
                             p2.fractions[1] * group_expected_loss(kScalar, mm, p2.groups[1]);
        CHECK(mixture_expected_loss(mm, kScalar, p2) == split);
    }

    // 0-1 loss on a 4-point grid with labels 1{x >= 0.5} and threshold 0.5.
    GroupDistribution grid;
    grid.group = 0;
    for (double x : {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}) {
        Sample s{{x}, x >= 0.5 ? 1.0 : 0.0, 0, {}};
        grid.points.push_back({s, 0.25});
    }
    auto gp = make_population({grid}, {1.0});
    CHECK(group_expected_loss(kZeroOne, {ModelFamily::Threshold1d, {0.5}}, gp.groups[0]) ==
          doctest::Approx(0.0));
}

TEST_CASE("glp objective and convexity contrast with glv") {
    auto pop = scalar_two_point(0.5);
    const Model m{ModelFamily::ScalarMean, {0.5}};
    // rho=0 reduces to the mixture loss bit for bit.
    CHECK(glp_objective(m, pop, kScalar, 0.0) == mixture_expected_loss(m, kScalar, pop));
    // Point groups z=(1,0), p=(.5,.5), theta=0.5, rho=1: 0.25 + 0.0625 = 0.3125.
    CHECK(glp_objective(m, pop, kScalar, 1.0) == doctest::Approx(0.3125));

    // On Example-3 data the GLP penalty keeps the curvature at or above gamma
    // while the GLV penalty dips negative.
    auto e3 = example3_pop();
    const double h = 0.01;
    double min_glp = 1e300, min_glv = 1e300;
    auto glp = [&](double t) { return glp_objective({ModelFamily::Linear, {t}}, e3, kSquared, 0.6); };
    auto glv = [&](double t) { return glv_objective({ModelFamily::Linear, {t}}, e3, kSquared, 0.6); };
    for (double th = -2.0; th <= 2.0; th += h) {
        min_glp = std::min(min_glp, (glp(th + h) - 2 * glp(th) + glp(th - h)) / (h * h));
        min_glv = std::min(min_glv, (glv(th + h) - 2 * glv(th) + glv(th - h)) / (h * h));
    }
    CHECK(min_glp >= *kSquared.gamma - 1e-6);
    CHECK(min_glv < 0.0);
}

TEST_CASE("glv objective matches the printed expansion") {
    auto e3 = example3_pop();
    // L_fair(1) with rho=0.6: 2.5 - 1 + 1 + 0.6 * (2.25 + 9 - 9) = 3.85.
    CHECK(glv_objective({ModelFamily::Linear, {1.0}}, e3, kSquared, 0.6) == doctest::Approx(3.85));
    // Second difference at theta=1 matches 16.2 t^2 - 32.4 t + 15.8 = -0.4.
    const double h = 0.01;
    auto f = [&](double t) { return glv_objective({ModelFamily::Linear, {t}}, e3, kSquared, 0.6); };
    const double dd = (f(1 + h) - 2 * f(1) + f(1 - h)) / (h * h);
    CHECK(dd == doctest::Approx(-0.4).epsilon(0.0025));
    // rho=0 reduces to the mixture loss.
    CHECK(glv_objective({ModelFamily::Linear, {0.3}}, e3, kSquared, 0.0) ==
          mixture_expected_loss({ModelFamily::Linear, {0.3}}, kSquared, e3));
}

TEST_CASE("slp objective") {
    // Single sample (x=1,y=1), theta=0, squared loss, rho=0.5: 1 + 0.5 = 1.5.
    auto single = make_population({point_group(0, {1.0}, 1.0)}, {1.0});
    CHECK(slp_objective({ModelFamily::Linear, {0.0}}, single, kSquared, 0.5) ==
          doctest::Approx(1.5));
    CHECK(slp_objective({ModelFamily::Linear, {0.0}}, single, kSquared, 0.0) ==
          mixture_expected_loss({ModelFamily::Linear, {0.0}}, kSquared, single));

    // Point-mass groups: SLP coincides with GLP for any (pop, rho).
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        auto pop = make_population({point_group(0, {u(rng)}, u(rng)),
                                    point_group(1, {u(rng)}, u(rng))},
                                   {0.4, 0.6});
        const double rho = std::abs(u(rng));
        for (double th : {-0.7, 0.1, 0.9}) {
            const Model m{ModelFamily::Linear, {th}};
            CHECK(slp_objective(m, pop, kSquared, rho) ==
                  doctest::Approx(glp_objective(m, pop, kSquared, rho)).epsilon(1e-12));
        }
    }
}

TEST_CASE("fair objectives dominate the plain loss and gradients check out") {
    auto e3 = example3_pop();
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 100; ++trial) {
        const double th = u(rng);
        const double rho = std::abs(u(rng));
        const Model m{ModelFamily::Linear, {th}};
        const double base = mixture_expected_loss(m, kSquared, e3);
        CHECK(glp_objective(m, e3, kSquared, rho) >= base - 1e-15);
        CHECK(slp_objective(m, e3, kSquared, rho) >= base - 1e-15);

        for (int which = 0; which < 3; ++which) {
            auto f = [&](const std::vector<double>& t) {
                const Model mt{ModelFamily::Linear, t};
                if (which == 0) return glp_objective(mt, e3, kSquared, rho);
                if (which == 1) return slp_objective(mt, e3, kSquared, rho);
                return glv_objective(mt, e3, kSquared, rho);
            };
            const auto fd = oracles::finite_diff_grad(f, {th});
            std::vector<double> an;
            if (which == 0) an = glp_gradient(m, e3, kSquared, rho);
            else if (which == 1) an = slp_gradient(m, e3, kSquared, rho);
            else an = glv_gradient(m, e3, kSquared, rho);
            CHECK(std::abs(an[0] - fd[0]) <= 1e-6 * std::max(1.0, std::abs(fd[0])));
        }
    }
}

TEST_CASE("rw_weights") {
    // rho=0 returns p itself.
    const std::vector<double> p{0.6, 0.4};
    CHECK(rw_weights(p, {1.0, 2.0}, 0.0) == p);

    // p=(0.6,0.4), l=(0.6,0.8), rho=1 -> (0.5, 0.5).
    const auto q = rw_weights({0.6, 0.4}, {0.6, 0.8}, 1.0);
    CHECK(q[0] == doctest::Approx(0.5));
    CHECK(q[1] == doctest::Approx(0.5));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double pa = u(rng);
        std::vector<double> pv{pa, 1.0 - pa};
        std::vector<double> l{u(rng), u(rng)};
        const double rho = 3.0 * u(rng);
        const auto qv = rw_weights(pv, l, rho);
        CHECK(qv[0] + qv[1] == doctest::Approx(1.0));
        CHECK(qv[0] >= 0.0);
        CHECK(qv[1] >= 0.0);
        // The group with the larger l_s/p_s ratio never loses weight share.
        const int heavy = l[0] / pv[0] >= l[1] / pv[1] ? 0 : 1;
        CHECK(qv[heavy] >= pv[heavy] - 1e-12);
        // q is invariant to a positive rescaling of (p + rho l).
        std::vector<double> p_scaled{3.0 * pv[0], 3.0 * pv[1]};
        std::vector<double> l_scaled{3.0 * l[0], 3.0 * l[1]};
        const auto q_scaled = rw_weights(p_scaled, l_scaled, rho);
        CHECK(q_scaled[0] == doctest::Approx(qv[0]).epsilon(1e-12));
    }
}

TEST_CASE("rw objective") {
    auto pop = scalar_two_point(0.5);
    const Model m{ModelFamily::ScalarMean, {0.5}};
    CHECK(rw_objective(m, pop, kScalar, pop.fractions) == mixture_expected_loss(m, kScalar, pop));
    CHECK(rw_objective(m, pop, kScalar, {1.0, 0.0}) ==
          doctest::Approx(group_expected_loss(kScalar, m, pop.groups[0])));
    CHECK(rw_objective(m, pop, kScalar, {0.5, 0.5}) == doctest::Approx(0.25));
    CHECK_THROWS_AS(rw_objective(m, pop, kScalar, {1.0}), Error);
}

TEST_CASE("chi2 worst-case weights") {
    // Example-4 numbers: p=(0.4,0.6), r=1/6, group a worse -> q=(0.6,0.4).
    const auto q = chi2_worst_weights({0.4, 0.6}, {1.44, 0.64}, 1.0 / 6.0);
    CHECK(q[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(0.4).epsilon(1e-12));

    // r=0 and ties keep q = p.
    CHECK(chi2_worst_weights({0.4, 0.6}, {1.0, 2.0}, 0.0) == std::vector<double>{0.4, 0.6});
    CHECK(chi2_worst_weights({0.4, 0.6}, {1.0, 1.0}, 0.2) == std::vector<double>{0.4, 0.6});

    CHECK_THROWS_AS(chi2_worst_weights({0.4, 0.6}, {1.0, 2.0}, -0.1), Error);
    CHECK_THROWS_AS(
        chi2_worst_weights(std::vector<double>(9, 1.0 / 9), std::vector<double>(9, 1.0), 0.1),
        Error);

    // Two-group result equals a dense scan of the ball.
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int trial = 0; trial < 20; ++trial) {
        const double pa = u(rng);
        const std::vector<double> p{pa, 1.0 - pa};
        const std::vector<double> ls{u(rng), u(rng)};
        const double r = 0.3 * u(rng);
        const auto qq = chi2_worst_weights(p, ls, r);
        double best = -1e300, best_qa = pa;
        const int grid = 100000;
        for (int i = 0; i <= grid; ++i) {
            const double qa = static_cast<double>(i) / grid;
            const double qb = 1.0 - qa;
            const double chi = (qa - p[0]) * (qa - p[0]) / p[0] + (qb - p[1]) * (qb - p[1]) / p[1];
            if (chi > r) continue;
            const double val = qa * ls[0] + qb * ls[1];
            if (val > best) {
                best = val;
                best_qa = qa;
            }
        }
        CHECK(std::abs(qq[0] - best_qa) <= 1e-4);
        const double chi =
            (qq[0] - p[0]) * (qq[0] - p[0]) / p[0] + (qq[1] - p[1]) * (qq[1] - p[1]) / p[1];
        CHECK(chi <= r + 1e-9);
    }

    // Multi-group: constraint satisfied, objective at least the p baseline.
    std::uniform_real_distribution<double> w(0.05, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 5);
        std::vector<double> p(n), ls(n);
        double s = 0;
        for (int i = 0; i < n; ++i) {
            p[i] = w(rng);
            s += p[i];
            ls[i] = w(rng);
        }
        for (auto& v : p) v /= s;
        const double r = 0.5 * w(rng);
        const auto qq = chi2_worst_weights(p, ls, r);
        double chi = 0, qs = 0, val_q = 0, val_p = 0;
        for (int i = 0; i < n; ++i) {
            chi += p[i] * (qq[i] / p[i] - 1.0) * (qq[i] / p[i] - 1.0);
            qs += qq[i];
            val_q += qq[i] * ls[i];
            val_p += p[i] * ls[i];
            CHECK(qq[i] >= -1e-12);
        }
        CHECK(qs == doctest::Approx(1.0));
        CHECK(chi <= r + 1e-9);
        CHECK(val_q >= val_p - 1e-12);
    }
}

TEST_CASE("tilde_beta") {
    CHECK(tilde_beta(MechanismKind::GLP, 0.5, 2.0, 1.0) == doctest::Approx(3.0));
    CHECK(tilde_beta(MechanismKind::SLP, 0.5, 2.0, 1.0) == doctest::Approx(3.0));
    CHECK(tilde_beta(MechanismKind::RW, 0.5, 2.0, 1.0) == doctest::Approx(2.0));
    CHECK(tilde_beta(MechanismKind::Plain, 0.5, 2.0, 1.0) == doctest::Approx(1.0));
    CHECK(tilde_beta(MechanismKind::GLP, 0.0, 2.0, 1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(tilde_beta(MechanismKind::GLV, 0.5, 2.0, 1.0), Error);
    CHECK_THROWS_AS(tilde_beta(MechanismKind::DROChi2, 0.5, 2.0, 1.0), Error);
}
