#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "irw/harness.hpp"

using namespace irw;
using Catch::Approx;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kClassifyCfg =
    "seed = 9\n"
    "[experiment]\nkind = classify\n"
    "[kernel]\nkind = lamperti\nc = -0.4\n"
    "[schedule]\nkind = power\nalpha = 2\n";

}  // namespace

TEST_CASE("config parsing: sections, comments, overrides, errors") {
    auto cfg = ConfigMap::parse("seed = 7\n# comment\n[kernel]\nkind = zero ; trailing\n");
    CHECK(cfg.required(".seed") == "7");
    CHECK(cfg.str("kernel.kind", "?") == "zero");
    CHECK(cfg.num("kernel.c", 1.5) == 1.5);
    CHECK_THROWS_AS(cfg.required("kernel.missing"), ConfigError);
    CHECK_THROWS_AS(ConfigMap::parse("[oops\n"), ConfigError);
    CHECK_THROWS_AS(ConfigMap::parse("novalue\n"), ConfigError);

    // the seed is mandatory: no wall-clock fallback
    CHECK_THROWS_AS(make_experiment_config(ConfigMap::parse("[experiment]\nkind = classify\n")),
                    ConfigError);

    auto ec = make_experiment_config(ConfigMap::parse(kClassifyCfg));
    CHECK(ec.seed == 9);
    CHECK(ec.kernel_kind == "lamperti");
    CHECK(ec.c == -0.4);
    CHECK(ec.alpha == 2.0);
    CHECK(config_hash(ec.raw) == ec.hash);

    CHECK_THROWS_AS(make_experiment_config(
                        ConfigMap::parse("seed = 1\n[output]\nformat = yaml\n")),
                    ConfigError);
    CHECK_THROWS_AS(make_experiment_config(ConfigMap::parse("seed = 1\n[kernel]\ndomain = ring\n")),
                    ConfigError);
}

TEST_CASE("schedule and kernel factories follow the config") {
    auto ec = make_experiment_config(ConfigMap::parse(
        "seed = 1\n[kernel]\nkind = lamperti\nc = -0.25\ndomain = halfline\n"
        "[schedule]\nkind = geometric\na = 0.5\n"));
    auto k = make_line_kernel(ec);
    CHECK(k.domain() == Domain::HalfLine);
    CHECK(k.drift()(4) == Approx(-0.0625));
    auto s = make_schedule(ec);
    CHECK(s.kind() == ScheduleKind::Geometric);
    CHECK(s.s(2) == Approx(0.25));

    auto ec2 = make_experiment_config(ConfigMap::parse(
        "seed = 1\n[schedule]\nkind = custom\nvalues = 1,0.5,0.25\n"));
    CHECK(make_schedule(ec2).s(5) == Approx(0.25));
}

TEST_CASE("classify dispatches to the documented authorities") {
    auto run = [](const std::string& text) {
        return classify_experiment(make_experiment_config(ConfigMap::parse(text)));
    };

    // SRW stays null recurrent under every passage sequence
    auto v1 = run("seed=1\n[kernel]\nkind=zero\n[schedule]\nkind=power\nalpha=5\n");
    CHECK(v1.verdict == V3::NullRecurrent);
    CHECK(v1.provenance == Provenance::ClosedForm);

    auto v2 = run(kClassifyCfg);
    CHECK(v2.verdict == V3::PositiveRecurrent);
    CHECK(v2.provenance == Provenance::ClosedForm);

    // strong impatience with any inward asymptotic drift
    auto v3 = run("seed=1\n[kernel]\nkind=lamperti\nc=-0.3\n[schedule]\nkind=geometric\na=0.5\n");
    CHECK(v3.verdict == V3::PositiveRecurrent);

    auto v4 = run("seed=1\n[kernel]\nkind=loglamperti\nd=-1\n[schedule]\nkind=power\nalpha=2\n");
    CHECK(v4.verdict == V3::PositiveRecurrent);
    auto v5 = run("seed=1\n[kernel]\nkind=loglamperti\nd=0\n[schedule]\nkind=constant\n");
    CHECK(v5.verdict == V3::NullRecurrent);

    // orbit walk turns positive recurrent under strong impatience
    auto v6 = run("seed=1\n[kernel]\nkind=orbit\n[schedule]\nkind=power\nalpha=2\n");
    CHECK(v6.verdict == V3::PositiveRecurrent);
    auto v7 = run("seed=1\n[kernel]\nkind=orbit\n[schedule]\nkind=factorial\n");
    CHECK(v7.verdict == V3::NullRecurrent);

    auto v8 = run("seed=1\n[kernel]\nkind=constant\nb=-0.5\n[schedule]\nkind=constant\n");
    CHECK(v8.verdict == V3::PositiveRecurrent);
    CHECK(v8.provenance == Provenance::Series);

    auto v9 = run("seed=1\n[kernel]\nkind=lattice2d\n[schedule]\nkind=power\nalpha=3\n");
    CHECK(v9.verdict == V3::NullRecurrent);

    // Monte Carlo evidence never hardens into a verdict
    auto v10 = run(
        "seed=1\n[kernel]\nkind=lamperti\nc=-0.1\n[schedule]\nkind=power\nalpha=0.8\n"
        "[budget]\nm_horizon=256\n");
    if (v10.provenance == Provenance::MonteCarlo) CHECK(v10.verdict == V3::Inconclusive);
}

TEST_CASE("space classification via the edge-sum criterion") {
    auto ec = make_experiment_config(
        ConfigMap::parse("seed=1\n[space]\ngraph = z2\nalpha = 3\n"));
    CHECK(classify_space(ec).verdict == V3::PositiveRecurrent);
    auto ec2 = make_experiment_config(
        ConfigMap::parse("seed=1\n[space]\ngraph = z1\nalpha = 0.5\n"));
    CHECK(classify_space(ec2).verdict == V3::NullRecurrent);
}

TEST_CASE("phase sweep on a small off-boundary grid") {
    auto ec = make_experiment_config(ConfigMap::parse(
        "seed = 77\n[grid]\nc = -0.4,0.25\nalpha = 1.5,2\n"
        "[budget]\nreplicas = 2000\nstep_cap = 50000\nm_horizon = 1500\nj_horizon = 4194304\n"));
    auto pts = phase_sweep(ec);
    REQUIRE(pts.size() == 4);
    for (const auto& p : pts) {
        CHECK(p.agree);
        CHECK_FALSE(p.boundary);
    }
    // boundary labelling
    CHECK(phase_boundary(0.0, 2.0));
    CHECK(phase_boundary(0.5, 0.7));
    CHECK(phase_boundary(-0.25, 0.5));
    CHECK_FALSE(phase_boundary(-0.25, 1.0));
}

TEST_CASE("uniform limit test components at reduced scale") {
    auto ec = make_experiment_config(ConfigMap::parse(
        "seed = 11\n[budget]\nn = 1000\nreplicas = 20000\n[tolerances]\nks_tol = 0.02\n"));
    auto r = uniform_limit_test(ec);
    CHECK(r.gate_pass);
    CHECK(r.gate_tv_max < 1e-12);
    CHECK(r.ks_pass);
    CHECK(r.negative_control_fails);
    CHECK(r.ks_negative_control > 0.08);  // arcsine ks distance is about 0.105
}

TEST_CASE("emit writes byte-identical files for identical configs") {
    namespace fs = std::filesystem;
    auto ec = make_experiment_config(ConfigMap::parse(kClassifyCfg));
    auto v = classify_experiment(ec);
    for (const char* fmt : {"csv", "json"}) {
        ec.format = fmt;
        ec.out_dir = std::string("test_out_a_") + fmt;
        emit_classify(ec, v);
        ec.out_dir = std::string("test_out_b_") + fmt;
        emit_classify(ec, v);
        std::string name = std::string("classify.") + fmt;
        CHECK(slurp(std::string("test_out_a_") + fmt + "/" + name) ==
              slurp(std::string("test_out_b_") + fmt + "/" + name));
        fs::remove_all(std::string("test_out_a_") + fmt);
        fs::remove_all(std::string("test_out_b_") + fmt);
    }
}

TEST_CASE("csv headers match the documented schema") {
    namespace fs = std::filesystem;
    auto header_of = [&](const std::string& name, const std::string& stamp_kind) {
        std::istringstream in(slurp("test_out_hdr/" + name));
        std::string stamp, header;
        std::getline(in, stamp);
        std::getline(in, header);
        CHECK(stamp.rfind("# irw " + stamp_kind + " seed=3 config=", 0) == 0);
        return header;
    };

    auto ec = make_experiment_config(ConfigMap::parse(
        "seed = 3\n[grid]\nc = -0.4\nalpha = 2\n"
        "[kernel]\nkind = lamperti\nc = -0.4\n[schedule]\nkind = power\nalpha = 2\n"
        "[budget]\nreplicas = 200\nstep_cap = 20000\nm_horizon = 256\nn = 1000\n"
        "checkpoints = 10,100\n[output]\ndir = test_out_hdr\n"));
    emit_phase_sweep(ec, phase_sweep(ec));
    CHECK(header_of("phase_sweep.csv", "phase-sweep") ==
          "c,alpha,closed_form,boundary,series_verdict,series_value,agree,mc_mean_actual,"
          "mc_stderr,mc_censor_rate");

    auto ec2 = ec;
    ec2.replicas = 20'000;
    emit_uniform_test(ec2, uniform_limit_test(ec2));
    CHECK(header_of("uniform_test.csv", "uniform-test") ==
          "gate_tv_max,gate_pass,ks,ks_larger_n,ks_pass,ks_decreases,ks_negative_control,"
          "negative_control_fails,pass");

    emit_classify(ec, classify_experiment(ec));
    CHECK(header_of("classify.csv", "classify") == "verdict,provenance,note");

    auto st = excursion_stats(make_line_kernel(ec), make_schedule(ec), 100, 10'000, ec.seed, 1);
    emit_excursions(ec, st);
    CHECK(header_of("excursions.csv", "excursions") ==
          "replicas,mean_actual,stderr_actual,mean_capped,mean_distinct,censor_rate,"
          "sandwich_violations");

    auto rng = make_stream(ec.seed, 0);
    emit_range(ec, range_trace(make_line_kernel(ec), make_schedule(ec), ec.checkpoints, rng));
    CHECK(header_of("range.csv", "range") == "t,distinct_edges,span");

    auto rng2 = make_stream(ec.seed, 1);
    auto mc = space_dependent_excursion_z(2.0, 100, 10'000, rng2);
    auto sc = space_criterion(LatticeGraph::Z1, 2.0, 1024);
    emit_space(ec, classify_space(ec), sc.edge_sum, mc);
    CHECK(header_of("space.csv", "space") ==
          "graph,alpha,verdict,edge_sum_verdict,edge_sum_value,mc_mean_actual,mc_stderr,"
          "mc_censor_rate");

    ec.step_cap = 4000;
    emit_trace(ec);
    CHECK(header_of("trace.csv", "trace") == "step,vertex,actual_time");

    fs::remove_all("test_out_hdr");
}

TEST_CASE("config text reparses to the identical experiment") {
    auto a = make_experiment_config(ConfigMap::parse(kClassifyCfg));
    auto b = make_experiment_config(ConfigMap::parse(a.raw));
    CHECK(a.hash == b.hash);
    CHECK(a.seed == b.seed);
    CHECK(a.kernel_kind == b.kernel_kind);
    CHECK(a.c == b.c);
}

TEST_CASE("finite-n return times do not depend on n or the start vertex") {
    // b = -1/2 with unit passage times: mean return to 0 is 3, to 1 is 9/4,
    // for every excursion index (the process property at finite n).
    NearestNeighborKernel k(Domain::HalfLine, Drift::constant(-0.5));
    auto c = PassageSchedule::constant();
    const int replicas = 60'000;
    for (std::int64_t start : {0, 1}) {
        double analytic = start == 0 ? 3.0 : 2.25;
        std::vector<Welford> by_n(6);
        auto rng = make_stream(606, std::uint64_t(start));
        for (int r = 0; r < replicas; ++r) {
            auto recs = consecutive_excursions(k, c, start, 6, rng, 1'000'000);
            for (std::size_t i = 0; i < recs.size(); ++i)
                if (!recs[i].censored) by_n[i].add(recs[i].actual);
        }
        for (const auto& w : by_n)
            CHECK(std::abs(w.mean() - analytic) <= 3.5 * w.stderr_mean());
    }
}
