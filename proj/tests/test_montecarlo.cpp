#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "irw/analytic.hpp"
#include "irw/montecarlo.hpp"

using namespace irw;
using Catch::Approx;

namespace {

// Scripted generator for forced paths; values feed canonical_open and BitCoin.
struct FakeRng {
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }
    std::vector<result_type> vals;
    std::size_t i = 0;
    result_type operator()() { return vals.at(i++); }
};

// Exact law of the heads count by enumerating every turn pattern; independent
// of the DP implementation.
std::vector<double> brute_force_coin_law(int n) {
    std::vector<double> law(std::size_t(n) + 1, 0.0);
    int patterns = 1 << (n - 1);  // turn decisions at units 2..n
    for (int first = 0; first < 2; ++first) {
        for (int mask = 0; mask < patterns; ++mask) {
            double p = 0.5;
            int side = first, heads = first;
            for (int k = 2; k <= n; ++k) {
                bool turn = mask & (1 << (k - 2));
                double tp = 1.0 / double(k + 1);
                p *= turn ? tp : 1.0 - tp;
                if (turn) side = 1 - side;
                heads += side;
            }
            law[std::size_t(heads)] += p;
        }
    }
    return law;
}

}  // namespace

TEST_CASE("run_excursion on a forced SRW path") {
    // fair-coin path: bits 1 then 0 give 0 -> 1 -> 0
    NearestNeighborKernel srw(Domain::FullLine, Drift::zero());
    auto g = PassageSchedule::geometric(0.5);
    FakeRng rng{{0b01}};
    auto rec = run_excursion(srw, g, rng, 1000);
    CHECK(rec.steps == 2);
    CHECK(rec.distinct_edges == 1);
    CHECK(rec.max_displacement == 1);
    CHECK_FALSE(rec.censored);
    CHECK(rec.actual == Approx(1.0 + 0.5));  // 1 + s_1
}

TEST_CASE("constant schedule keeps actual time equal to steps") {
    NearestNeighborKernel srw(Domain::FullLine, Drift::zero());
    auto c = PassageSchedule::constant();
    ScheduleTable st(c);
    detail::ZLedger led;
    detail::ProbTable probs{&srw, {}};
    auto rng = make_stream(17, 0);
    for (int i = 0; i < 500; ++i) {
        auto rec = run_excursion(srw, st, rng, 100'000, led, probs);
        if (!rec.censored) CHECK(rec.actual == Approx(double(rec.steps)));
    }
}

TEST_CASE("strongly impatient excursions satisfy the area sandwich") {
    // M <= tau~ <= S M on every completed excursion, S = 1 + pi^2/6
    NearestNeighborKernel srw(Domain::FullLine, Drift::zero());
    auto p2 = PassageSchedule::power(2.0);
    double S_hi = 1.0 + 1.6449340668482264 + 1e-9;
    auto st = excursion_stats(srw, p2, 20'000, 200'000, 99, 1, S_hi);
    CHECK(st.sandwich_violations == 0);
    CHECK(st.replicas == 20'000);
}

TEST_CASE("excursion statistics bookkeeping") {
    NearestNeighborKernel srw(Domain::FullLine, Drift::zero());
    auto c = PassageSchedule::constant();
    // excursions need at least two steps, so cap 1 censors everything
    auto st = excursion_stats(srw, c, 1000, 1, 5, 1);
    CHECK(st.censor_rate() == 1.0);

    // censor rate is nonincreasing in the cap
    double prev = 1.0;
    for (std::int64_t cap : {2, 16, 256, 4096}) {
        auto s = excursion_stats(srw, c, 2000, cap, 5, 1);
        CHECK(s.censor_rate() <= prev + 1e-12);
        prev = s.censor_rate();
    }
}

TEST_CASE("SRW tail law at small scale: P(M >= m) near 1/m") {
    NearestNeighborKernel srw(Domain::FullLine, Drift::zero());
    auto st = excursion_stats(srw, PassageSchedule::constant(), 200'000, 100'000, 4242, 1);
    std::int64_t N = st.m_hist.total();
    for (int m = 2; m <= 12; ++m) {
        double p = 1.0 / m;
        double sd = std::sqrt(p * (1 - p) / double(N));
        CHECK(std::abs(st.m_hist.tail_prob(m) - p) <= 3.5 * sd);
    }
}

TEST_CASE("mean actual excursion time matches the analytic value at b = -1/2") {
    NearestNeighborKernel k(Domain::HalfLine, Drift::constant(-0.5));
    auto st = excursion_stats(k, PassageSchedule::constant(), 200'000, 1'000'000, 7, 1);
    CHECK(std::abs(st.actual.mean() - 3.0) <= 3 * st.actual.stderr_mean());

    auto em = expected_M(Drift::constant(-0.5), 200, 1e-12);
    CHECK(std::abs(st.distinct.mean() - em.value) <= 3 * st.distinct.stderr_mean());
}

TEST_CASE("workers split streams deterministically") {
    NearestNeighborKernel srw(Domain::FullLine, Drift::zero());
    auto c = PassageSchedule::constant();
    auto a = excursion_stats(srw, c, 10'000, 10'000, 21, 2);
    auto b = excursion_stats(srw, c, 10'000, 10'000, 21, 2);
    CHECK(a.actual_capped.mean() == b.actual_capped.mean());
    CHECK(a.censored == b.censored);
    auto d = excursion_stats(srw, c, 10'000, 10'000, 22, 2);
    CHECK(a.actual_capped.mean() != d.actual_capped.mean());
}

TEST_CASE("range trace honours the per-path bounds") {
    auto p2 = PassageSchedule::power(2.0);
    double S_hi = 1.0 + 1.6449340668482264 + 1e-9;
    std::vector<double> cps = {5, 17.5, 50, 200, 1000};
    auto rng = make_stream(88, 0);
    NearestNeighborKernel ballistic(Domain::FullLine, Drift::constant(0.5));
    for (int i = 0; i < 200; ++i) {
        auto ss = range_trace(ballistic, p2, cps, rng);
        REQUIRE(ss.size() == cps.size());
        for (const auto& s : ss) {
            CHECK(double(s.distinct_edges) <= s.t + 1.0);
            CHECK(double(s.distinct_edges) >= std::floor(s.t / S_hi));
            CHECK(s.span >= s.distinct_edges - 1);  // Z range equals edge count
        }
    }
}

TEST_CASE("infinitely impatient walk covers floor(t) edges on the half line") {
    NearestNeighborKernel half(Domain::HalfLine, Drift::zero());
    std::vector<double> cps = {1.0, 2.5, 7.0, 33.25, 100.0};
    auto rng = make_stream(89, 0);
    for (int i = 0; i < 20; ++i) {
        auto ss = range_trace(half, PassageSchedule::zero_tail(), cps, rng);
        for (const auto& s : ss) CHECK(double(s.distinct_edges) == std::floor(s.t));
    }
}

TEST_CASE("exact range-chain law: hand values and normalization") {
    auto l1 = exact_small_n(1);
    CHECK(l1[1] == Approx(0.5));
    auto l2 = exact_small_n(2);
    // same-side continuation has probability 2/3 after the fair first unit
    CHECK(l2[0] == Approx(1.0 / 3.0));
    CHECK(l2[1] == Approx(1.0 / 3.0));
    CHECK(l2[2] == Approx(1.0 / 3.0));
    for (int n = 1; n <= 14; ++n) {
        auto l = exact_small_n(n);
        double sum = 0.0;
        for (double p : l) sum += p;
        CHECK(sum == Approx(1.0).margin(1e-15));
    }
    CHECK_THROWS_AS(exact_small_n(15), std::invalid_argument);
}

TEST_CASE("range-chain DP equals the coin-turning DP and a brute enumeration") {
    for (int n = 1; n <= 14; ++n)
        CHECK(total_variation(exact_small_n(n), exact_coin_turning(n)) < 1e-12);
    for (int n : {3, 6, 10})
        CHECK(total_variation(exact_small_n(n), brute_force_coin_law(n)) < 1e-13);
}

TEST_CASE("run-length samplers reproduce the exact law") {
    const std::int64_t reps = 200'000;
    auto law = exact_small_n(6);
    for (bool coin : {false, true}) {
        auto samp = coin ? coin_turning(6, reps, 4711) : inf_imp_occupation(6, reps, 4711);
        std::vector<double> emp(7, 0.0);
        for (double f : samp) emp[std::size_t(std::llround(f * 6))] += 1.0 / double(reps);
        for (int k = 0; k <= 6; ++k) {
            double sd = std::sqrt(law[std::size_t(k)] * (1 - law[std::size_t(k)]) / double(reps));
            CHECK(std::abs(emp[std::size_t(k)] - law[std::size_t(k)]) <= 4 * sd);
        }
    }
    // left/right symmetry: the mean fraction sits at 1/2
    auto samp = inf_imp_occupation(1000, 50'000, 314);
    double mean = 0.0;
    for (double f : samp) mean += f / 50'000;
    CHECK(std::abs(mean - 0.5) <= 3 * 0.29 / std::sqrt(50'000.0));  // sd of U[0,1]
}

TEST_CASE("space-dependent excursions reduce to unit costs at alpha = 0") {
    auto rng = make_stream(55, 0);
    auto st = space_dependent_excursion_z(0.0, 5000, 100'000, rng);
    CHECK(st.actual.mean() == Approx(st.steps.mean()));
}

TEST_CASE("space-dependent excursions match the shell-sum mean") {
    auto rng = make_stream(56, 0);
    auto st = space_dependent_excursion_z(2.0, 100'000, 1'000'000, rng);
    auto sc = space_criterion(LatticeGraph::Z1, 2.0, 100'000);
    CHECK(std::abs(st.actual.mean() - sc.edge_sum.value) <= 3.5 * st.actual.stderr_mean());
    // E xi(u) = 1 on the transitive lattice
    for (int u = -10; u <= 10; ++u) {
        const auto& w = st.xi[std::size_t(u + st.window)];
        CHECK(std::abs(w.mean() - 1.0) <= 4 * w.stderr_mean());
    }
}

TEST_CASE("plane excursions: orbit walk stays tight, lattice walk does not") {
    auto p2 = PassageSchedule::power(2.0);
    ScheduleTable st(p2);
    auto rng = make_stream(77, 0);
    auto orbit = make_orbit_kernel(16);
    Welford m;
    for (int i = 0; i < 5000; ++i) {
        auto rec = run_graph_excursion(orbit, st, rng, 1'000'000);
        REQUIRE_FALSE(rec.censored);
        m.add(double(rec.distinct_edges));
        double S_hi = 1.0 + 1.6449340668482264 + 1e-9;
        CHECK(rec.actual >= double(rec.distinct_edges) - 1e-9);
        CHECK(rec.actual <= S_hi * double(rec.distinct_edges) + 1e-9);
    }
    CHECK(m.mean() < 60.0);  // certified E M bound for the orbit construction

    SquareLatticeKernel lat;
    ScheduleTable st2(p2);
    std::int64_t censored = 0;
    for (int i = 0; i < 2000; ++i)
        if (run_graph_excursion(lat, st2, rng, 10'000).censored) ++censored;
    CHECK(censored > 0);  // heavy-tailed plane return times hit the cap
}

TEST_CASE("bit-for-bit reproducibility under a fixed contract") {
    RngContract c1{123, 0}, c2{123, 0}, c3{123, 1};
    auto a = c1.make(), b = c2.make(), c = c3.make();
    for (int i = 0; i < 64; ++i) CHECK(a() == b());
    bool differs = false;
    auto a2 = c1.make();
    for (int i = 0; i < 64; ++i) differs |= (a2() != c());
    CHECK(differs);
}
