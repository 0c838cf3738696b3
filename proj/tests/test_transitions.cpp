#include <doctest.h>

#include <cmath>
#include <random>

#include "perfsim/transitions.hpp"

using namespace perfsim;

namespace {

GroupDistribution point_group(int id, double x, double y) {
    GroupDistribution g;
    g.group = id;
    Sample s;
    s.features = {x};
    s.label = y;
    s.group = id;
    g.points.push_back({s, 1.0});
    return g;
}

PopulationState example1_pop(double pa) {
    return make_population({point_group(0, 1.0, 1.0), point_group(1, 0.0, 0.0)}, {pa, 1.0 - pa});
}

const LossSpec kScalar{LossFamily::ScalarMeanSquared, 2.0, 2.0, 4.0};

}  // namespace

TEST_CASE("linear retention reproduces the polarization step") {
    TransitionSpec t;
    t.kind = TransitionKind::LinearRetention;
    t.rate = 0.1;
    auto pop = example1_pop(0.7);
    // theta=0.7: L_a = 0.09, L_b = 0.49 -> p_a' = 0.7 + 0.1*0.4 = 0.74.
    const auto out = apply_transition(t, {ModelFamily::ScalarMean, {0.7}}, pop, kScalar);
    CHECK(out.fractions[0] == doctest::Approx(0.74));
    CHECK(out.fractions[1] == doctest::Approx(0.26));
    // Points untouched.
    CHECK(out.groups[0].points[0].sample.features[0] == 1.0);
    CHECK(out.groups[1].points[0].sample.features[0] == 0.0);

    // Clamping at the configured bounds.
    t.clamp_hi = 0.72;
    const auto clamped = apply_transition(t, {ModelFamily::ScalarMean, {0.7}}, pop, kScalar);
    CHECK(clamped.fractions[0] == doctest::Approx(0.72));

    auto three = make_population(
        {point_group(0, 1.0, 1.0), point_group(1, 0.0, 0.0), point_group(2, 0.5, 0.5)},
        {0.3, 0.3, 0.4});
    CHECK_THROWS_AS(apply_transition(t, {ModelFamily::ScalarMean, {0.7}}, three, kScalar), Error);
}

TEST_CASE("ratio retention matches hand arithmetic and respects floors") {
    TransitionSpec t;
    t.kind = TransitionKind::RatioRetention;
    t.p_min = {0.02, 0.02};

    // p=(0.3,0.7) with L_a=0.2, L_b=0.1: R(a) = 0.96*0.5*(0.3+1/3)+0.02 = 0.324,
    // and the two-group R-sum telescopes to 1.
    // Construct losses L_a=0.2, L_b=0.1 via scalar-mean theta and labels:
    // z_a = 1, theta such that (theta-1)^2 = 0.2 ...; easier: direct labels.
    auto pop = make_population({point_group(0, 1.0, 1.0), point_group(1, 0.0, 0.0)}, {0.3, 0.7});
    // theta chosen so L_a=(t-1)^2=0.2 would need sqrt; instead test the
    // telescoping property on this instance and the printed example through a
    // synthetic loss: use theta = 1 - sqrt(0.2) so L_a = 0.2 exactly up to fp,
    // L_b = theta^2.
    const double theta = 1.0 - std::sqrt(0.2);
    const double la = 0.2;
    const double lb = theta * theta;
    const auto out = apply_transition(t, {ModelFamily::ScalarMean, {theta}}, pop, kScalar);
    const double ra = 0.96 * 0.5 * (0.3 + lb / (la + lb)) + 0.02;
    const double rb = 0.96 * 0.5 * (0.7 + la / (la + lb)) + 0.02;
    CHECK(ra + rb == doctest::Approx(1.0));
    CHECK(out.fractions[0] == doctest::Approx(ra));

    // Printed example values with L_a=0.2, L_b=0.1: p' = (0.324, 0.676).
    const double ra2 = 0.96 * 0.5 * (0.3 + 0.1 / 0.3) + 0.02;
    CHECK(ra2 == doctest::Approx(0.324).epsilon(1e-9));

    // Floors: p_s' >= p_min even when a group has zero loss.
    const auto floored = apply_transition(t, {ModelFamily::ScalarMean, {0.0}}, pop, kScalar);
    CHECK(floored.fractions[0] >= 0.02 - 1e-12);
    CHECK(floored.fractions[1] >= 0.02 - 1e-12);

    TransitionSpec bad = t;
    bad.p_min = {0.6, 0.6};
    CHECK_THROWS_AS(apply_transition(bad, {ModelFamily::ScalarMean, {0.5}}, pop, kScalar), Error);
}

TEST_CASE("multigroup ratio retention reduces to the two-group rule") {
    TransitionSpec two;
    two.kind = TransitionKind::RatioRetention;
    two.p_min = {0.05, 0.05};
    TransitionSpec multi;
    multi.kind = TransitionKind::MultiGroupRatioRetention;
    multi.p_min = {0.05, 0.05};

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
        const double pa = u(rng);
        auto pop = example1_pop(pa);
        const Model m{ModelFamily::ScalarMean, {u(rng)}};
        const auto a = apply_transition(two, m, pop, kScalar);
        const auto b = apply_transition(multi, m, pop, kScalar);
        CHECK(a.fractions[0] == doctest::Approx(b.fractions[0]).epsilon(1e-15));
    }

    // Three groups: fractions renormalize, floors hold, points unchanged.
    auto three = make_population(
        {point_group(0, 0.3, 0.3), point_group(1, 0.5, 0.5), point_group(2, 0.7, 0.7)},
        {0.15, 0.25, 0.6});
    TransitionSpec m3;
    m3.kind = TransitionKind::MultiGroupRatioRetention;
    m3.p_min = {0.1, 0.1, 0.1};
    const auto out = apply_transition(m3, {ModelFamily::ScalarMean, {0.6}}, three, kScalar);
    double s = 0;
    for (double f : out.fractions) {
        CHECK(f >= 0.1 - 1e-12);
        s += f;
    }
    CHECK(s == doctest::Approx(1.0));
    // Rank reversal: the group with the highest loss gets the smallest
    // paired share. At theta=0.6 losses are (0.09, 0.01, 0.01+...), group 0
    // worst: its share uses the smallest loss.
}

TEST_CASE("strategic shift moves anchored features against theta") {
    TransitionSpec t;
    t.kind = TransitionKind::StrategicShift;
    t.epsilon = 0.1;
    t.feature_mask = {1, 0};

    GroupDistribution g;
    g.group = 0;
    Sample s;
    s.features = {1.0, 2.0};
    s.anchor = {1.0, 2.0};
    g.points.push_back({s, 1.0});
    auto pop = make_population({g, [] {
                                    GroupDistribution h;
                                    h.group = 1;
                                    Sample r;
                                    r.features = {0.0, 0.0};
                                    r.anchor = {0.0, 0.0};
                                    h.points.push_back({r, 1.0});
                                    return h;
                                }()},
                               {0.5, 0.5});

    LossSpec sq{LossFamily::SquaredError, {}, {}, {}};
    const Model m{ModelFamily::Linear, {2.0, 3.0}};
    const auto out = apply_transition(t, m, pop, sq);
    CHECK(out.fractions == pop.fractions);  // strategic variants keep fractions
    CHECK(out.groups[0].points[0].sample.features[0] == doctest::Approx(1.0 - 0.1 * 2.0));
    CHECK(out.groups[0].points[0].sample.features[1] == doctest::Approx(2.0));  // masked off

    // The shift is anchored: applying twice with the same theta is idempotent.
    const auto out2 = apply_transition(t, m, out, sq);
    CHECK(out2.groups[0].points[0].sample.features[0] ==
          out.groups[0].points[0].sample.features[0]);

    // epsilon = 0 leaves the population unchanged.
    TransitionSpec id = t;
    id.epsilon = 0.0;
    const auto same = apply_transition(id, m, pop, sq);
    CHECK(same.groups[0].points[0].sample.features == pop.groups[0].points[0].sample.features);
}

TEST_CASE("budget improvement shifts 1-D features by group budgets") {
    TransitionSpec t;
    t.kind = TransitionKind::BudgetImprovement;
    t.budgets = {0.2, 0.01};
    auto pop = example1_pop(0.7);
    const auto out = apply_transition(t, {ModelFamily::ScalarMean, {0.5}}, pop, kScalar);
    CHECK(out.groups[0].points[0].sample.features[0] == doctest::Approx(1.0 + 0.2 * 0.5));
    CHECK(out.groups[1].points[0].sample.features[0] == doctest::Approx(0.0 + 0.01 * 0.5));
    CHECK(out.fractions == pop.fractions);
    // Anchored: same theta twice gives the same observed features.
    const auto out2 = apply_transition(t, {ModelFamily::ScalarMean, {0.5}}, out, kScalar);
    CHECK(out2.groups[0].points[0].sample.features[0] ==
          out.groups[0].points[0].sample.features[0]);
}

TEST_CASE("theta fraction rule") {
    TransitionSpec t;
    t.kind = TransitionKind::ThetaFraction;
    t.intercept = 0.5;
    t.slope = 0.5;
    auto pop = example1_pop(0.4);
    const auto out = apply_transition(t, {ModelFamily::ScalarMean, {0.2}}, pop, kScalar);
    CHECK(out.fractions[0] == doctest::Approx(0.6));
    t.clamp_lo = 0.35;
    t.clamp_hi = 0.65;
    const auto clamped = apply_transition(t, {ModelFamily::ScalarMean, {0.9}}, pop, kScalar);
    CHECK(clamped.fractions[0] == doctest::Approx(0.65));
}

TEST_CASE("composite applies children in order") {
    TransitionSpec shift;
    shift.kind = TransitionKind::BudgetImprovement;
    shift.budgets = {0.2, 0.01};
    TransitionSpec retention;
    retention.kind = TransitionKind::LinearRetention;
    retention.rate = 0.1;
    TransitionSpec comp;
    comp.kind = TransitionKind::Composite;
    comp.children = {shift, retention};

    auto pop = example1_pop(0.7);
    const Model m{ModelFamily::ScalarMean, {0.7}};
    const auto direct = apply_transition(retention, m, apply_transition(shift, m, pop, kScalar),
                                         kScalar);
    const auto composed = apply_transition(comp, m, pop, kScalar);
    CHECK(composed.fractions[0] == direct.fractions[0]);
    CHECK(composed.groups[0].points[0].sample.features[0] ==
          direct.groups[0].points[0].sample.features[0]);

    TransitionSpec empty;
    empty.kind = TransitionKind::Composite;
    CHECK_THROWS_AS(apply_transition(empty, m, pop, kScalar), Error);
}

TEST_CASE("compute_delay_r") {
    // eps=0.5, W1=1, delta=0.1: r = log2(10) ~ 3.32 -> 5 applications.
    CHECK(compute_delay_r(0.5, 1.0, 0.1) == 5);
    CHECK(compute_delay_r(0.5, 0.05, 0.1) == 1);
    CHECK_THROWS_AS(compute_delay_r(1.5, 1.0, 0.1), Error);
    CHECK_THROWS_AS(compute_delay_r(0.0, 1.0, 0.1), Error);

    // Halving delta never decreases the count; monotone over random inputs.
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int trial = 0; trial < 200; ++trial) {
        const double eps = u(rng);
        const double w1 = 2.0 * u(rng);
        const double delta = 0.2 * u(rng) + 1e-3;
        const int base = compute_delay_r(eps, w1, delta);
        const int halved = compute_delay_r(eps, w1, delta / 2.0);
        CHECK(halved >= base);
    }
}

TEST_CASE("apply_schema repetition policies") {
    TransitionSpec t;
    t.kind = TransitionKind::LinearRetention;
    t.rate = 0.1;
    auto pop = example1_pop(0.6);
    const Model m{ModelFamily::ScalarMean, {0.7}};

    DeploymentSchema conventional;
    DeploymentSchema k1{SchemaKind::KDelayed, 1, 0.0, 0.0};
    DeploymentSchema k3{SchemaKind::KDelayed, 3, 0.0, 0.0};

    const auto a = apply_schema(t, conventional, m, pop, kScalar);
    const auto b = apply_schema(t, k1, m, pop, kScalar);
    CHECK(a.fractions[0] == b.fractions[0]);  // bitwise-equal single application

    auto manual = apply_transition(t, m, pop, kScalar);
    manual = apply_transition(t, m, manual, kScalar);
    manual = apply_transition(t, m, manual, kScalar);
    const auto c = apply_schema(t, k3, m, pop, kScalar);
    CHECK(c.fractions[0] == manual.fractions[0]);

    // Delayed: afterwards one more application moves the state by at most
    // delta * eps / (1 - eps) in W1 (fixed-point proximity).
    TransitionSpec tf;
    tf.kind = TransitionKind::ThetaFraction;
    tf.intercept = 0.4;
    tf.slope = 0.3;
    // theta_fraction with fixed theta maps any p to the same value, so use a
    // contraction with state dependence instead: ratio retention.
    TransitionSpec rr;
    rr.kind = TransitionKind::RatioRetention;
    rr.p_min = {0.02, 0.02};
    const double delta = 1e-4;
    const double eps_assumed = 0.6;  // ratio retention damps p at ~0.48 per step
    DeploymentSchema delayed{SchemaKind::Delayed, 1, delta, eps_assumed};
    const auto near_fp = apply_schema(rr, delayed, m, pop, kScalar);
    const auto once_more = apply_transition(rr, m, near_fp, kScalar);
    CHECK(population_distance(once_more, near_fp) <= delta * eps_assumed / (1 - eps_assumed) + 1e-12);
}

TEST_CASE("estimate_sensitivity") {
    TransitionSpec t;
    t.kind = TransitionKind::LinearRetention;
    t.rate = 0.1;
    auto pop = example1_pop(0.7);

    // theta 0.5 vs 0.6: L_b - L_a = 2 theta - 1, so dp = 0.1*(0.2) -> W1 0.02,
    // ratio 0.2.
    SensitivityProbe probe{{ModelFamily::ScalarMean, {0.5}}, {ModelFamily::ScalarMean, {0.6}}, pop};
    const double eps = estimate_sensitivity(t, kScalar, {probe});
    CHECK(eps == doctest::Approx(0.2).epsilon(1e-9));

    // Identity transition: zero sensitivity.
    TransitionSpec id;
    id.kind = TransitionKind::StrategicShift;
    id.epsilon = 0.0;
    CHECK(estimate_sensitivity(id, kScalar, {probe}) == doctest::Approx(0.0));

    // Max over probes is order-free.
    SensitivityProbe probe2{{ModelFamily::ScalarMean, {0.1}}, {ModelFamily::ScalarMean, {0.9}}, pop};
    const double e12 = estimate_sensitivity(t, kScalar, {probe, probe2});
    const double e21 = estimate_sensitivity(t, kScalar, {probe2, probe});
    CHECK(e12 == e21);

    // Same-model probe pairs contribute the D-perturbation ratio; for linear
    // retention dp'/dp = 1, so the estimate reaches 1.
    auto pop2 = example1_pop(0.5);
    SensitivityProbe da{{ModelFamily::ScalarMean, {0.5}}, {ModelFamily::ScalarMean, {0.6}}, pop};
    SensitivityProbe db{{ModelFamily::ScalarMean, {0.5}}, {ModelFamily::ScalarMean, {0.6}}, pop2};
    const double with_d = estimate_sensitivity(t, kScalar, {da, db});
    CHECK(with_d == doctest::Approx(1.0).epsilon(1e-9));

    SensitivityProbe degenerate{{ModelFamily::ScalarMean, {0.5}},
                                {ModelFamily::ScalarMean, {0.5}},
                                pop};
    CHECK_THROWS_AS(estimate_sensitivity(t, kScalar, {degenerate}), Error);
}
