#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "irw/analytic.hpp"

using namespace irw;
using Catch::Approx;

TEST_CASE("resistors: unit for SRW, hand products for lamperti(1/3)") {
    auto rs = resistors(Drift::zero(), 20);
    for (double r : rs) CHECK(r == Approx(1.0));

    // R_1 = (2/3)/(4/3) = 1/2, R_2 = R_1 (5/6)/(7/6) = 5/14
    auto rl = resistors(Drift::lamperti(1.0 / 3.0, 1), 4);
    CHECK(rl[0] == Approx(0.5));
    CHECK(rl[1] == Approx(5.0 / 14.0));

    CHECK_THROWS_AS(build_ladder(Drift::from_table({0.0}), Side::Right, 0),
                    std::invalid_argument);
}

TEST_CASE("lamperti resistors track m^-2c over long windows") {
    // R_m ~ m^{-2c}: the product R_m m^{2c} stays in a fixed window
    for (double c : {-0.3, 0.25}) {
        auto lad = build_ladder(Drift::lamperti(c, 1), Side::Right, 1'000'000);
        double lo = kInf, hi = -kInf;
        for (std::int64_t m = 1000; m <= 1'000'000; m *= 10) {
            double v = lad.log_r[std::size_t(m)] + 2.0 * c * std::log(double(m));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi - lo < 0.05);  // ratio window within 5%
    }
}

TEST_CASE("hitting profile: SRW closed form and the product identity") {
    auto hp = hitting_profile(Drift::zero(), 64);
    for (std::int64_t m = 1; m <= 64; ++m) {
        CHECK(hp.p[std::size_t(m - 1)] == Approx(1.0 / double(m)).epsilon(1e-13));
        CHECK(hp.q[std::size_t(m - 1)] == Approx(double(m) / double(m + 1)).epsilon(1e-13));
    }

    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> b(64);
        for (auto& v : b) v = u(rng);
        auto hp2 = hitting_profile(Drift::from_table(b), 200);
        for (std::int64_t m = 1; m < 200; ++m)
            CHECK(std::abs(hp2.p[std::size_t(m)] -
                           hp2.p[std::size_t(m - 1)] * hp2.q[std::size_t(m - 1)]) < 1e-14);
    }
}

TEST_CASE("drift functionals: closed forms and certified verdicts") {
    auto df0 = drift_functionals(Drift::zero(), 1000);
    CHECK(df0.b_r_partial == Approx(1000.0).epsilon(1e-9));
    CHECK(df0.i_r.diverged());
    CHECK(df0.i_l.diverged());

    // b = -1/2: R_x = 3^x, B^r(m) = (3^{m+1} - 3)/2
    auto lad = build_ladder(Drift::constant(-0.5), Side::Right, 8);
    for (std::int64_t m = 1; m <= 8; ++m)
        CHECK(std::expm1(lad.log_prefix[std::size_t(m)]) ==
              Approx((std::pow(3.0, m + 1) - 3.0) / 2.0).epsilon(1e-12));

    auto df = drift_functionals(Drift::constant(-0.5), 200, 1e-12);
    REQUIRE(df.i_r.converged());
    // oracle: I^r = sum 2/(3^{x+1} - 1), truncated with a geometric tail bound
    double oracle = 0.0;
    for (int x = 1; x <= 80; ++x) oracle += 2.0 / (std::pow(3.0, x + 1) - 1.0);
    CHECK(df.i_r.value == Approx(oracle).epsilon(1e-12));
    // four explicit terms plus a geometric tail bound bracket the value
    double partial4 = 0.25 + 1.0 / 13 + 1.0 / 40 + 1.0 / 121;
    double tail4 = (2.0 / (std::pow(3.0, 6) - 1.0)) / (1.0 - 1.0 / 3.0);
    CHECK(df.i_r.value >= partial4);
    CHECK(df.i_r.value <= partial4 + tail4);

    auto dfl = drift_functionals(Drift::lamperti(-0.3, 1), 30'000, 1e-4);
    CHECK(dfl.i_r.converged());  // B^r(x) ~ x^1.6 makes the sum converge
    REQUIRE(dfl.i_r.tail_estimate.has_value());
    CHECK(*dfl.i_r.tail_estimate < 1e-4);

    // the log-drift case has no certificate at desk horizons; stays honest
    auto dfll = drift_functionals(Drift::log_lamperti(-1.0, 2), 10'000);
    CHECK(dfll.i_r.verdict == Verdict::Inconclusive);
}

TEST_CASE("expected excursion breadth: E M = 1 + I^r") {
    CHECK(expected_M(Drift::zero(), 1000).diverged());

    auto em = expected_M(Drift::constant(-0.5), 200, 1e-12);
    REQUIRE(em.converged());
    double oracle = 1.0;
    for (int x = 1; x <= 80; ++x) oracle += 2.0 / (std::pow(3.0, x + 1) - 1.0);
    CHECK(em.value == Approx(oracle).epsilon(1e-12));

    // tail identity: sum_x P(M > x) from the hitting profile equals I^r
    auto hp = hitting_profile(Drift::constant(-0.5), 200);
    double tail_sum = 0.0;
    for (std::int64_t x = 1; x < 200; ++x) tail_sum += std::exp(-hp.log_prefix[std::size_t(x)]);
    auto df = drift_functionals(Drift::constant(-0.5), 199, 1e-12);
    CHECK(tail_sum == Approx(df.i_r.partial_sum).epsilon(1e-12));
}

TEST_CASE("excursion time: stationary oracle at b = -1/2 with unit passage") {
    // Birth-death chain on Z+ with p(0->1) = 1, p up = 1/4, p down = 3/4:
    // stationary masses pi ~ (1, 4/3, 4/9, 4/27, ...) sum to 3, so the mean
    // return time to 0 is exactly 3; with unit passage times tau~ = tau.
    auto v = excursion_time(Drift::constant(-0.5), PassageSchedule::constant(), 200, 1 << 20);
    REQUIRE(v.converged());
    CHECK(v.value == Approx(3.0).epsilon(1e-10));
}

TEST_CASE("excursion time: SRW diverges under every built-in schedule") {
    for (const auto& s : {PassageSchedule::power(2.0), PassageSchedule::power(0.5),
                          PassageSchedule::geometric(0.5), PassageSchedule::zero_tail(),
                          PassageSchedule::constant()})
        CHECK(excursion_time(Drift::zero(), s, 512, 1 << 18).diverged());
}

TEST_CASE("excursion time agrees with the closed-form phase off the boundary") {
    struct Pt { double c, alpha; };
    for (auto [c, alpha] : {Pt{-0.4, 2.0}, Pt{-0.4, 0.5}, Pt{-0.1, 1.0}, Pt{-0.1, 0.5},
                            Pt{0.25, 1.5}, Pt{0.4, 0.5}}) {
        auto closed = lamperti_phase(c, alpha);
        auto sv = excursion_time(Drift::lamperti(c, 1), PassageSchedule::power(alpha), 2000,
                                 1 << 22, 10.0);
        if (closed == PhaseVerdict::PositiveRecurrent) CHECK(sv.converged());
        else CHECK(sv.diverged());
    }
    // boundary c = (alpha-1)/2 with alpha < 1 declines to certify
    auto b = excursion_time(Drift::lamperti(-0.25, 1), PassageSchedule::power(0.5), 512, 1 << 18);
    CHECK(b.verdict == Verdict::Inconclusive);
}

TEST_CASE("excursion time with ageing schedules") {
    CHECK(excursion_time(Drift::lamperti(-0.3, 1), PassageSchedule::factorial(), 64, 1 << 16)
              .diverged());
    // geometric a > 1: q_m -> 1 eventually exceeds the radius 1/a^2
    CHECK(excursion_time(Drift::lamperti(-0.3, 1), PassageSchedule::geometric(1.5), 64, 1 << 16)
              .diverged());
}

TEST_CASE("excursion time with positive-limit schedules tracks the walk itself") {
    // s ~ constant: positive recurrence is that of the underlying walk,
    // which needs c < -1/2
    CHECK(excursion_time(Drift::lamperti(-0.7, 1), PassageSchedule::constant(), 2000, 1 << 20,
                         10.0)
              .converged());
    CHECK(excursion_time(Drift::lamperti(-0.3, 1), PassageSchedule::constant(), 2000, 1 << 20,
                         10.0)
              .diverged());
    auto held = PassageSchedule::custom({1.0, 0.8, 0.6, 0.6});
    CHECK(excursion_time(Drift::lamperti(-0.7, 1), held, 2000, 1 << 20, 10.0).converged());

    // bounded increasing schedules admit no class certificate: no throw, no verdict
    auto inc = PassageSchedule::custom({1.0, 1.5, 1.5});
    CHECK(excursion_time(Drift::lamperti(-0.3, 1), inc, 512, 1 << 18).verdict ==
          Verdict::Inconclusive);
    CHECK(prr_criterion(Drift::constant(-0.5), inc, 64).verdict == Verdict::Inconclusive);
}

TEST_CASE("lamperti phase diagram closed form") {
    CHECK(lamperti_phase(-0.4, 2.0) == PhaseVerdict::PositiveRecurrent);
    CHECK(lamperti_phase(0.25, 5.0) == PhaseVerdict::NullRecurrent);
    CHECK(lamperti_phase(0.6, 1.0) == PhaseVerdict::TransientUnderlying);
    CHECK(lamperti_phase(-0.25, 0.4) == PhaseVerdict::NullRecurrent);  // alpha < 1 + 2c
    CHECK(lamperti_phase(-0.1, 2.0) == PhaseVerdict::PositiveRecurrent);
    // boundaries are null recurrent
    CHECK(lamperti_phase(0.0, 3.0) == PhaseVerdict::NullRecurrent);
    CHECK(lamperti_phase(0.5, 3.0) == PhaseVerdict::NullRecurrent);
    CHECK(lamperti_phase(-0.25, 0.5) == PhaseVerdict::NullRecurrent);
    CHECK_THROWS_AS(lamperti_phase(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("log-lamperti dichotomy") {
    CHECK(log_lamperti_phase(-1.0, Impatience::StronglyImpatient) ==
          PhaseVerdict::PositiveRecurrent);
    CHECK(log_lamperti_phase(-1.0, Impatience::InfinitelyImpatient) ==
          PhaseVerdict::PositiveRecurrent);
    CHECK(log_lamperti_phase(0.0, Impatience::Ageing) == PhaseVerdict::NullRecurrent);
    CHECK(log_lamperti_phase(-0.5, Impatience::StronglyImpatient) ==
          PhaseVerdict::NullRecurrent);
    CHECK(log_lamperti_phase(-1.0, Impatience::WeaklyImpatient) == PhaseVerdict::Inconclusive);
}

TEST_CASE("prr quantities: SRW ruin values at h = 1") {
    // r_m^(0) = h/(h-m) and r_{m-1}^(m) = (h-m)/(h-m+1)
    PrrQuantities pq(Drift::zero(), 64, 1);
    CHECK(pq.r0(3) == Approx(0.25));       // r_{-3}^{(0)} = 1/4
    CHECK(pq.r_step(3) == Approx(0.8));    // r_{-4}^{(-3)} = 4/5
    CHECK(pq.r0(0) == Approx(1.0));
    for (std::int64_t k = 0; k < 64; ++k)
        CHECK(pq.r0(k) == Approx(1.0 / double(1 + k)).epsilon(1e-13));
}

TEST_CASE("prr criterion verdicts") {
    // SRW: no passage sequence yields positive recurrence to the right
    for (const auto& s : {PassageSchedule::power(2.0), PassageSchedule::zero_tail(),
                          PassageSchedule::constant()})
        CHECK(prr_criterion(Drift::zero(), s, 512).diverged());

    // inward drift on the left: sum r_m^(0) is geometric, strong impatience shortcut
    auto v = prr_criterion(Drift::constant(-0.5), PassageSchedule::power(2.0), 256);
    REQUIRE(v.converged());

    // weakly impatient with sup r < 1 still certifies (Cor 5.4(b) route)
    auto w = prr_criterion(Drift::constant(-0.5), PassageSchedule::constant(), 256);
    CHECK(w.converged());

    auto l = prr_criterion(Drift::lamperti(-0.3, 1), PassageSchedule::power(2.0), 1024);
    CHECK(l.converged());
}

TEST_CASE("prr criterion does not depend on the target offset h") {
    for (std::int64_t h : {1, 2, 5}) {
        CHECK(prr_criterion(Drift::zero(), PassageSchedule::power(2.0), 512, 1e-8, h).diverged());
        CHECK(prr_criterion(Drift::constant(-0.5), PassageSchedule::power(2.0), 256, 1e-8, h)
                  .converged());
    }
}

TEST_CASE("exit window: Markov product identity over randomized drifts") {
    std::mt19937_64 rng(31415);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> b(32);
        for (auto& v : b) v = u(rng);
        ExitWindow win(Drift::from_table(b), 64);
        for (std::int64_t m = 0; m <= 62; ++m) {
            double lhs = win.rho0(m) * win.rho_up(m);
            CHECK(std::abs(lhs - win.rho0(m + 1)) < 1e-14);
        }
    }
}

TEST_CASE("two-sided exit: classical quadratic oracle and schedule regimes") {
    // unit passage times on SRW: E_0 T_n = n^2 exactly
    for (std::int64_t n : {2, 5, 10, 31}) {
        auto v = two_sided_exit(Drift::zero(), PassageSchedule::constant(), n);
        REQUIRE(v.total.converged());
        CHECK(v.total.value == Approx(double(n) * double(n)).epsilon(1e-9));
    }

    // impatient schedules keep the expectation finite for any drift
    for (const auto& s : {PassageSchedule::power(2.0), PassageSchedule::power(0.5),
                          PassageSchedule::geometric(0.5), PassageSchedule::zero_tail()}) {
        CHECK(two_sided_exit(Drift::zero(), s, 16).total.converged());
        CHECK(two_sided_exit(Drift::lamperti(0.4, 1), s, 16).total.converged());
    }

    // slow ageing (R^pass = 1): finite whatever the walk; here s_j ~ log j
    std::vector<double> slow = {1.0};
    for (int k = 1; k < 60; ++k) slow.push_back(std::log(k + 2.0) + 0.4);
    CHECK(two_sided_exit(Drift::zero(), PassageSchedule::custom(slow), 16).total.converged());

    // super-ageing (R^pass = 0): infinite for every drift
    CHECK(two_sided_exit(Drift::zero(), PassageSchedule::factorial(), 8).total.diverged());
    CHECK(two_sided_exit(Drift::constant(-0.5), PassageSchedule::factorial(), 8).total.diverged());

    CHECK_THROWS_AS(two_sided_exit(Drift::zero(), PassageSchedule::constant(), 1),
                    std::invalid_argument);
}

TEST_CASE("two-sided exit verdict matches the gamma/radius comparison") {
    auto check_consistency = [](const Drift& d, const PassageSchedule& s, std::int64_t n) {
        auto res = two_sided_exit(d, s, n);
        double rpass = passage_radius(s).value;
        bool all_inside = true;
        for (double g : res.gamma)
            if (g >= rpass) all_inside = false;
        if (all_inside && rpass >= 1.0) CHECK(res.total.converged());
        if (rpass == 0.0) CHECK(res.total.diverged());
    };
    check_consistency(Drift::zero(), PassageSchedule::power(2.0), 12);
    check_consistency(Drift::zero(), PassageSchedule::factorial(), 12);
    check_consistency(Drift::lamperti(-0.3, 1), PassageSchedule::geometric(0.5), 12);
}

TEST_CASE("space-dependent criterion on the lattices") {
    // Z: edge shells have 2 edges at every distance, so the sum is 2 zeta(alpha)
    auto z2 = space_criterion(LatticeGraph::Z1, 2.0, 100'000);
    CHECK(z2.verdict == PhaseVerdict::PositiveRecurrent);
    REQUIRE(z2.edge_sum.converged());
    CHECK(z2.edge_sum.value == Approx(M_PI * M_PI / 3.0).epsilon(1e-9));
    CHECK(z2.xi_mean == 1.0);  // transitivity pins rho = 1

    CHECK(space_criterion(LatticeGraph::Z1, 0.5, 1000).verdict == PhaseVerdict::NullRecurrent);
    CHECK(space_criterion(LatticeGraph::Z1, 1.0, 1000).verdict == PhaseVerdict::NullRecurrent);
    CHECK(space_criterion(LatticeGraph::Z2, 1.5, 1000).verdict == PhaseVerdict::NullRecurrent);
    CHECK(space_criterion(LatticeGraph::Z2, 2.0, 1000).verdict == PhaseVerdict::NullRecurrent);

    auto p = space_criterion(LatticeGraph::Z2, 3.0, 100'000);
    CHECK(p.verdict == PhaseVerdict::PositiveRecurrent);
    // oracle: sum_k (4 + 8k)(1+k)^-3 = 8 zeta(2) - 4 zeta(3)
    double oracle = 8.0 * 1.6449340668482264 - 4.0 * 1.2020569031595943;
    CHECK(p.edge_sum.value == Approx(oracle).epsilon(1e-9));
}
