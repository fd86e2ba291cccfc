// irw: impatient/ageing random walk experiments.
// Subcommands: phase-sweep, uniform-test, classify, excursions, range, space.
// Exit codes: 0 all assertions pass, 1 assertion failure, 2 config error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "irw/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string format;
    std::string seed;
    bool trace = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "experiment config file")->required();
    cmd->add_option("--out", o.out_dir, "output directory (overrides [output] dir)");
    cmd->add_option("--format", o.format, "csv or json (overrides [output] format)");
    cmd->add_option("--seed", o.seed, "seed override");
    cmd->add_flag("--trace", o.trace, "dump one trajectory as CSV");
}

irw::ExperimentConfig load(const CommonOpts& o, irw::ExperimentKind expect) {
    irw::ConfigMap cfg = irw::ConfigMap::load(o.config_path);
    if (!o.seed.empty()) cfg.override_value(".seed", o.seed);
    if (!o.out_dir.empty()) cfg.override_value("output.dir", o.out_dir);
    if (!o.format.empty()) cfg.override_value("output.format", o.format);
    if (o.trace) cfg.override_value("output.trace", "true");
    irw::ExperimentConfig ec = irw::make_experiment_config(cfg);
    ec.kind = expect;  // the subcommand decides, the file's kind is advisory
    return ec;
}

int run_phase_sweep(const CommonOpts& o) {
    auto ec = load(o, irw::ExperimentKind::PhaseSweep);
    auto pts = irw::phase_sweep(ec);
    irw::emit_phase_sweep(ec, pts);
    int bad = 0;
    for (const auto& p : pts)
        if (!p.agree) {
            std::fprintf(stderr, "phase-sweep: disagreement at c=%g alpha=%g (%s vs %s)\n", p.c,
                         p.alpha, irw::to_string(p.closed), irw::to_string(p.series.verdict));
            ++bad;
        }
    std::printf("phase-sweep: %zu points, %d disagreements\n", pts.size(), bad);
    return bad ? 1 : 0;
}

int run_uniform(const CommonOpts& o) {
    auto ec = load(o, irw::ExperimentKind::UniformTest);
    auto r = irw::uniform_limit_test(ec);
    irw::emit_uniform_test(ec, r);
    if (!r.gate_pass) {
        std::fprintf(stderr, "uniform-test: exact-equivalence gate failed, tv=%g\n", r.gate_tv_max);
        return 1;
    }
    std::printf("uniform-test: ks=%g (tol %g), larger-n ks=%g, negative control ks=%g\n", r.ks,
                ec.ks_tol, r.ks_larger_n, r.ks_negative_control);
    return r.pass ? 0 : 1;
}

int run_classify(const CommonOpts& o) {
    auto ec = load(o, irw::ExperimentKind::Classify);
    irw::Verdict3 v = irw::classify_experiment(ec);
    irw::emit_classify(ec, v);
    std::printf("classify: %s (%s) %s\n", irw::to_string(v.verdict), irw::to_string(v.provenance),
                v.note.c_str());
    return 0;
}

int run_excursions(const CommonOpts& o) {
    auto ec = load(o, irw::ExperimentKind::Excursions);
    auto kernel = irw::make_line_kernel(ec);
    auto sched = irw::make_schedule(ec);
    double s_hi = 0.0;
    try {
        auto cls = irw::classify(sched, 1 << 20, 1e-9);
        if (cls.kind == irw::Impatience::StronglyImpatient ||
            cls.kind == irw::Impatience::InfinitelyImpatient)
            s_hi = cls.sum + (cls.evidence.tail_estimate ? *cls.evidence.tail_estimate : 0.0);
    } catch (const irw::CertificationError&) {
    }
    auto st = irw::excursion_stats(kernel, sched, ec.replicas, ec.step_cap, ec.seed, ec.workers,
                                   s_hi);
    irw::emit_excursions(ec, st);
    if (ec.trace) irw::emit_trace(ec);
    std::printf("excursions: mean tau~=%g (se %g), mean M=%g, censor %g\n", st.actual.mean(),
                st.actual.stderr_mean(), st.distinct.mean(), st.censor_rate());
    return st.sandwich_violations == 0 ? 0 : 1;
}

int run_range(const CommonOpts& o) {
    auto ec = load(o, irw::ExperimentKind::Range);
    if (ec.checkpoints.empty()) throw irw::ConfigError("range needs [budget] checkpoints");
    auto kernel = irw::make_line_kernel(ec);
    auto sched = irw::make_schedule(ec);
    auto rng = irw::make_stream(ec.seed, 0);
    auto samples = irw::range_trace(kernel, sched, ec.checkpoints, rng);
    irw::emit_range(ec, samples);
    // per-path bounds: R_t <= t + 1 always; R_t >= floor(t/S) under strong impatience
    double S = irw::kInf;
    try {
        auto cls = irw::classify(sched, 1 << 20, 1e-9);
        if (cls.kind == irw::Impatience::StronglyImpatient ||
            cls.kind == irw::Impatience::InfinitelyImpatient)
            S = cls.sum + (cls.evidence.tail_estimate ? *cls.evidence.tail_estimate : 0.0);
    } catch (const irw::CertificationError&) {
    }
    int bad = 0;
    for (const auto& s : samples) {
        if (double(s.distinct_edges) > s.t + 1.0) ++bad;
        if (S < irw::kInf && double(s.distinct_edges) < std::floor(s.t / S)) ++bad;
    }
    std::printf("range: %zu checkpoints, %d bound violations\n", samples.size(), bad);
    return bad ? 1 : 0;
}

int run_space(const CommonOpts& o) {
    auto ec = load(o, irw::ExperimentKind::Space);
    irw::Verdict3 v = irw::classify_space(ec);
    auto sc = irw::space_criterion(ec.graph == "z1" ? irw::LatticeGraph::Z1 : irw::LatticeGraph::Z2,
                                   ec.space_alpha, std::max<std::int64_t>(ec.m_horizon, 1024));
    auto rng = irw::make_stream(ec.seed, 0);
    irw::SpaceExcursionStats mc =
        ec.graph == "z1"
            ? irw::space_dependent_excursion_z(ec.space_alpha, ec.replicas, ec.step_cap, rng)
            : irw::space_dependent_excursion_z2(ec.space_alpha, ec.replicas, ec.step_cap, rng);
    irw::emit_space(ec, v, sc.edge_sum, mc);
    std::printf("space: %s on %s (alpha=%g), mc mean tau~=%g censor %g\n", irw::to_string(v.verdict),
                ec.graph.c_str(), ec.space_alpha, mc.actual.mean(), mc.censor_rate());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"impatient/ageing random walk toolkit"};
    app.require_subcommand(1);

    CommonOpts phase_o, uni_o, cls_o, exc_o, rng_o, spc_o;
    auto* phase = app.add_subcommand("phase-sweep", "drift/passage phase grid");
    add_common(phase, phase_o);
    auto* uni = app.add_subcommand("uniform-test", "occupation-fraction uniform limit");
    add_common(uni, uni_o);
    auto* cls = app.add_subcommand("classify", "recurrence classification");
    add_common(cls, cls_o);
    auto* exc = app.add_subcommand("excursions", "excursion statistics");
    add_common(exc, exc_o);
    auto* rng = app.add_subcommand("range", "range growth R_t");
    add_common(rng, rng_o);
    auto* spc = app.add_subcommand("space", "space-dependent impatience");
    add_common(spc, spc_o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (phase->parsed()) return run_phase_sweep(phase_o);
        if (uni->parsed()) return run_uniform(uni_o);
        if (cls->parsed()) return run_classify(cls_o);
        if (exc->parsed()) return run_excursions(exc_o);
        if (rng->parsed()) return run_range(rng_o);
        if (spc->parsed()) return run_space(spc_o);
    } catch (const irw::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        // bad constructor parameters reached through the config
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
