#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "irw/analytic.hpp"
#include "irw/config.hpp"
#include "irw/montecarlo.hpp"
#include "irw/stats.hpp"

#include <json.hpp>

namespace irw {

enum class V3 { PositiveRecurrent, NullRecurrent, Inconclusive };
enum class Provenance { ClosedForm, Series, MonteCarlo };

inline const char* to_string(V3 v) {
    switch (v) {
        case V3::PositiveRecurrent: return "PositiveRecurrent";
        case V3::NullRecurrent: return "NullRecurrent";
        default: return "Inconclusive";
    }
}
inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::ClosedForm: return "ClosedForm";
        case Provenance::Series: return "Series";
        default: return "MonteCarlo";
    }
}

struct Verdict3 {
    V3 verdict;
    Provenance provenance;
    std::string note;
};

// Deterministic float formatting shared by all emitters.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// classify: closed form where one exists, else certified series, else Monte
// Carlo evidence (which never yields a hard verdict).
// ---------------------------------------------------------------------------

inline V3 from_phase(PhaseVerdict p) {
    switch (p) {
        case PhaseVerdict::PositiveRecurrent: return V3::PositiveRecurrent;
        case PhaseVerdict::NullRecurrent: return V3::NullRecurrent;
        default: return V3::Inconclusive;
    }
}

inline Verdict3 classify_experiment(const ExperimentConfig& ec) {
    PassageSchedule sched = make_schedule(ec);
    auto sched_class = [&] { return classify(sched, 1 << 20, 1e-9).kind; };

    if (ec.kernel_kind == "zero")
        return {V3::NullRecurrent, Provenance::ClosedForm,
                "drift 0: positive recurrence needs c < 0"};

    if (ec.kernel_kind == "lamperti") {
        if (ec.schedule_kind == "power") {
            PhaseVerdict p = lamperti_phase(ec.c, ec.alpha);
            if (p == PhaseVerdict::TransientUnderlying)
                return {V3::Inconclusive, Provenance::ClosedForm, "underlying walk transient"};
            return {from_phase(p), Provenance::ClosedForm, "drift/passage phase formula"};
        }
        if (ec.c > 0.5)
            return {V3::Inconclusive, Provenance::ClosedForm, "underlying walk transient"};
        if (ec.c >= 0.0)
            return {V3::NullRecurrent, Provenance::ClosedForm,
                    "positive recurrence needs c < 0"};
        auto cls = sched_class();
        if (cls == Impatience::StronglyImpatient || cls == Impatience::InfinitelyImpatient)
            return {V3::PositiveRecurrent, Provenance::ClosedForm,
                    "c < 0 with strong impatience"};
        SeriesVerdict sv = excursion_time(make_drift(ec), sched, ec.m_horizon, ec.j_horizon,
                                          ec.series_width_tol);
        if (sv.converged()) return {V3::PositiveRecurrent, Provenance::Series, sv.witness};
        if (sv.diverged()) return {V3::NullRecurrent, Provenance::Series, sv.witness};
        return {V3::Inconclusive, Provenance::MonteCarlo,
                "series inconclusive; capped-mean growth is evidence only"};
    }

    if (ec.kernel_kind == "loglamperti") {
        PhaseVerdict p = log_lamperti_phase(ec.d, sched_class());
        return {from_phase(p), Provenance::ClosedForm, "log-drift dichotomy"};
    }

    if (ec.kernel_kind == "constant") {
        SeriesVerdict sv = excursion_time(make_drift(ec), sched, ec.m_horizon, ec.j_horizon,
                                          ec.series_width_tol);
        if (sv.converged()) return {V3::PositiveRecurrent, Provenance::Series, sv.witness};
        if (sv.diverged()) return {V3::NullRecurrent, Provenance::Series, sv.witness};
        return {V3::Inconclusive, Provenance::Series, sv.witness};
    }

    if (ec.kernel_kind == "orbit") {
        // E[M] is bounded by sum_k P(reach O_k) * edges(O_k), a certified
        // geometric series; the embedded norm chain has inward rate 2/3.
        auto cls = sched_class();
        if (cls == Impatience::StronglyImpatient || cls == Impatience::InfinitelyImpatient) {
            KahanSum em;
            for (int k = 1; k <= 64; ++k)
                em.add((16.0 * k + 16.0) / (std::pow(2.0, double(k)) - 1.0));
            return {V3::PositiveRecurrent, Provenance::Series,
                    "E M <= " + fmt_double(em.value()) + " finite, strong impatience"};
        }
        if (cls == Impatience::Ageing)
            return {V3::NullRecurrent, Provenance::Series,
                    "ageing keeps tau~ >= tau and E tau diverges geometrically"};
        return {V3::Inconclusive, Provenance::MonteCarlo, "weak impatience on the orbit walk"};
    }

    if (ec.kernel_kind == "lattice2d")
        return {V3::NullRecurrent, Provenance::Series,
                "M dominates the one-line case, whose 1 + I^r diverges"};

    throw ConfigError("classify: unsupported kernel kind " + ec.kernel_kind);
}

// Space-dependent criterion verdict for the space experiment.
inline Verdict3 classify_space(const ExperimentConfig& ec) {
    SpaceCriterion sc = space_criterion(ec.graph == "z1" ? LatticeGraph::Z1 : LatticeGraph::Z2,
                                        ec.space_alpha, std::max<std::int64_t>(ec.m_horizon, 1024));
    return {from_phase(sc.verdict), Provenance::ClosedForm, sc.edge_sum.witness};
}

// ---------------------------------------------------------------------------
// phase sweep over (c, alpha)
// ---------------------------------------------------------------------------

struct PhasePoint {
    double c, alpha;
    PhaseVerdict closed;
    SeriesVerdict series;
    bool boundary;
    bool agree;
    double mc_mean_actual;
    double mc_stderr;
    double mc_censor_rate;
};

inline bool phase_boundary(double c, double alpha) {
    const double eps = 1e-12;
    if (std::abs(c) <= eps) return true;
    if (std::abs(c - 0.5) <= eps) return true;
    if (alpha < 1.0 && std::abs(c - (alpha - 1.0) / 2.0) <= eps) return true;
    return false;
}

inline std::vector<PhasePoint> phase_sweep(const ExperimentConfig& ec) {
    if (ec.grid_c.empty() || ec.grid_alpha.empty())
        throw ConfigError("phase-sweep needs [grid] c and alpha lists");
    std::vector<PhasePoint> out;
    std::uint64_t stream = 0;
    for (double c : ec.grid_c) {
        for (double alpha : ec.grid_alpha) {
            PhasePoint pt;
            pt.c = c;
            pt.alpha = alpha;
            pt.closed = lamperti_phase(c, alpha);
            pt.boundary = phase_boundary(c, alpha);
            Drift drift = Drift::lamperti(c, ec.x_min);
            PassageSchedule sched = PassageSchedule::power(alpha);
            if (!pt.boundary)
                pt.series =
                    excursion_time(drift, sched, ec.m_horizon, ec.j_horizon, ec.series_width_tol);
            else
                pt.series = SeriesVerdict::inconclusive(0, 0, "boundary point: closed form only");
            V3 closed3 = from_phase(pt.closed);
            if (pt.boundary || pt.closed == PhaseVerdict::TransientUnderlying) {
                pt.agree = true;  // excluded from series assertions
            } else if (pt.series.converged()) {
                pt.agree = closed3 == V3::PositiveRecurrent;
            } else if (pt.series.diverged()) {
                pt.agree = closed3 == V3::NullRecurrent;
            } else {
                pt.agree = false;
            }
            NearestNeighborKernel kernel(Domain::HalfLine, drift);
            ExcursionStats st = excursion_stats(kernel, sched, ec.replicas, ec.step_cap,
                                                ec.seed + stream, ec.workers);
            ++stream;
            pt.mc_mean_actual = st.actual.mean();
            pt.mc_stderr = st.actual.stderr_mean();
            pt.mc_censor_rate = st.censor_rate();
            out.push_back(pt);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// uniform limit test
// ---------------------------------------------------------------------------

struct UniformTestResult {
    double gate_tv_max = 0.0;
    bool gate_pass = false;
    double ks = 0.0;
    double ks_larger_n = 0.0;
    bool ks_pass = false;
    bool ks_decreases = false;
    double ks_negative_control = 0.0;
    bool negative_control_fails = false;
    bool pass = false;
};

// Occupation fraction of the positive axis for the unit-time SRW (the
// classical arcsine regime); unit k counts as positive when X_k > 0 or it
// sits at 0 having just stepped down from 1.
template <class Rng>
double arcsine_occupation_one(std::int64_t n, Rng& rng) {
    BitCoin<Rng> coin(rng);
    std::int64_t x = 0, pos = 0;
    for (std::int64_t k = 0; k < n; ++k) {
        std::int64_t prev = x;
        x += coin.flip() ? 1 : -1;
        if (x > 0 || (x == 0 && prev > 0)) ++pos;
    }
    return double(pos) / double(n);
}

inline UniformTestResult uniform_limit_test(const ExperimentConfig& ec) {
    if (ec.n < 100) throw ConfigError("uniform-test needs n >= 100");
    if (ec.replicas < 10'000) throw ConfigError("uniform-test needs replicas >= 10^4");
    UniformTestResult r;
    r.gate_tv_max = 0.0;
    for (std::int64_t k = 1; k <= 14; ++k)
        r.gate_tv_max = std::max(r.gate_tv_max,
                                 total_variation(exact_small_n(k), exact_coin_turning(k)));
    r.gate_pass = r.gate_tv_max < 1e-12;
    if (!r.gate_pass) return r;  // aborts before any sampling

    r.ks = ks_uniform(inf_imp_occupation(ec.n, ec.replicas, ec.seed, 0));
    r.ks_larger_n = ks_uniform(inf_imp_occupation(10 * ec.n, ec.replicas, ec.seed, 1));
    r.ks_pass = r.ks <= ec.ks_tol;
    r.ks_decreases = r.ks_larger_n < r.ks;

    auto rng = make_stream(ec.seed, 2);
    std::vector<double> ctrl(std::size_t(ec.replicas));
    for (auto& v : ctrl) v = arcsine_occupation_one(ec.n, rng);
    r.ks_negative_control = ks_uniform(std::move(ctrl));
    r.negative_control_fails = r.ks_negative_control > ec.ks_tol;

    r.pass = r.gate_pass && r.ks_pass && r.ks_decreases && r.negative_control_fails;
    return r;
}

// ---------------------------------------------------------------------------
// output: CSV and JSON with seed + config hash stamped on everything
// ---------------------------------------------------------------------------

namespace emit_detail {

inline std::string header_line(const ExperimentConfig& ec, const char* kind) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "# irw %s seed=%" PRIu64 " config=%016" PRIx64, kind, ec.seed,
                  ec.hash);
    return buf;
}

inline void write_file(const std::string& dir, const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir);
    std::ofstream f(dir + "/" + name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + dir + "/" + name);
    f << body;
}

inline nlohmann::ordered_json base_json(const ExperimentConfig& ec, const char* kind) {
    nlohmann::ordered_json j;
    j["experiment"] = kind;
    j["seed"] = ec.seed;
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, ec.hash);
    j["config_hash"] = buf;
    return j;
}

inline nlohmann::ordered_json verdict_json(const SeriesVerdict& v) {
    nlohmann::ordered_json j;
    j["verdict"] = to_string(v.verdict);
    if (v.converged()) j["value"] = v.value;
    j["terms_used"] = v.terms_used;
    if (v.tail_estimate) j["tail_estimate"] = *v.tail_estimate;
    else j["tail_estimate"] = nullptr;
    return j;
}

}  // namespace emit_detail

inline void emit_phase_sweep(const ExperimentConfig& ec, const std::vector<PhasePoint>& pts) {
    using namespace emit_detail;
    if (ec.format == "csv") {
        std::string body = header_line(ec, "phase-sweep") + "\n";
        body += "c,alpha,closed_form,boundary,series_verdict,series_value,agree,mc_mean_actual,"
                "mc_stderr,mc_censor_rate\n";
        for (const auto& p : pts) {
            body += fmt_double(p.c) + "," + fmt_double(p.alpha) + "," + to_string(p.closed) + ",";
            body += std::string(p.boundary ? "1" : "0") + "," + to_string(p.series.verdict) + ",";
            body += (p.series.converged() ? fmt_double(p.series.value) : std::string("")) + ",";
            body += std::string(p.agree ? "1" : "0") + "," + fmt_double(p.mc_mean_actual) + "," +
                    fmt_double(p.mc_stderr) + "," + fmt_double(p.mc_censor_rate) + "\n";
        }
        write_file(ec.out_dir, "phase_sweep.csv", body);
    } else {
        auto j = base_json(ec, "phase-sweep");
        auto rows = nlohmann::ordered_json::array();
        for (const auto& p : pts) {
            nlohmann::ordered_json row;
            row["c"] = p.c;
            row["alpha"] = p.alpha;
            row["closed_form"] = to_string(p.closed);
            row["boundary"] = p.boundary;
            row["series"] = verdict_json(p.series);
            row["agree"] = p.agree;
            row["mc_mean_actual"] = p.mc_mean_actual;
            row["mc_stderr"] = p.mc_stderr;
            row["mc_censor_rate"] = p.mc_censor_rate;
            rows.push_back(row);
        }
        j["results"] = rows;
        write_file(ec.out_dir, "phase_sweep.json", j.dump(2) + "\n");
    }
}

inline void emit_uniform_test(const ExperimentConfig& ec, const UniformTestResult& r) {
    using namespace emit_detail;
    if (ec.format == "csv") {
        std::string body = header_line(ec, "uniform-test") + "\n";
        body += "gate_tv_max,gate_pass,ks,ks_larger_n,ks_pass,ks_decreases,ks_negative_control,"
                "negative_control_fails,pass\n";
        body += fmt_double(r.gate_tv_max) + "," + (r.gate_pass ? "1" : "0") + "," +
                fmt_double(r.ks) + "," + fmt_double(r.ks_larger_n) + "," +
                (r.ks_pass ? "1" : "0") + "," + (r.ks_decreases ? "1" : "0") + "," +
                fmt_double(r.ks_negative_control) + "," + (r.negative_control_fails ? "1" : "0") +
                "," + (r.pass ? "1" : "0") + "\n";
        write_file(ec.out_dir, "uniform_test.csv", body);
    } else {
        auto j = base_json(ec, "uniform-test");
        j["gate_tv_max"] = r.gate_tv_max;
        j["gate_pass"] = r.gate_pass;
        j["ks"] = r.ks;
        j["ks_larger_n"] = r.ks_larger_n;
        j["ks_pass"] = r.ks_pass;
        j["ks_decreases"] = r.ks_decreases;
        j["ks_negative_control"] = r.ks_negative_control;
        j["negative_control_fails"] = r.negative_control_fails;
        j["pass"] = r.pass;
        write_file(ec.out_dir, "uniform_test.json", j.dump(2) + "\n");
    }
}

inline void emit_classify(const ExperimentConfig& ec, const Verdict3& v) {
    using namespace emit_detail;
    if (ec.format == "csv") {
        std::string body = header_line(ec, "classify") + "\n";
        body += "verdict,provenance,note\n";
        body += std::string(to_string(v.verdict)) + "," + to_string(v.provenance) + ",\"" + v.note +
                "\"\n";
        write_file(ec.out_dir, "classify.csv", body);
    } else {
        auto j = base_json(ec, "classify");
        j["verdict"] = to_string(v.verdict);
        j["provenance"] = to_string(v.provenance);
        j["note"] = v.note;
        write_file(ec.out_dir, "classify.json", j.dump(2) + "\n");
    }
}

inline void emit_excursions(const ExperimentConfig& ec, const ExcursionStats& st) {
    using namespace emit_detail;
    if (ec.format == "csv") {
        std::string body = header_line(ec, "excursions") + "\n";
        body += "replicas,mean_actual,stderr_actual,mean_capped,mean_distinct,censor_rate,"
                "sandwich_violations\n";
        body += std::to_string(st.replicas) + "," + fmt_double(st.actual.mean()) + "," +
                fmt_double(st.actual.stderr_mean()) + "," + fmt_double(st.actual_capped.mean()) +
                "," + fmt_double(st.distinct.mean()) + "," + fmt_double(st.censor_rate()) + "," +
                std::to_string(st.sandwich_violations) + "\n";
        write_file(ec.out_dir, "excursions.csv", body);
    } else {
        auto j = base_json(ec, "excursions");
        j["replicas"] = st.replicas;
        j["mean_actual"] = st.actual.mean();
        j["stderr_actual"] = st.actual.stderr_mean();
        j["mean_capped"] = st.actual_capped.mean();
        j["mean_distinct"] = st.distinct.mean();
        j["censor_rate"] = st.censor_rate();
        j["sandwich_violations"] = st.sandwich_violations;
        write_file(ec.out_dir, "excursions.json", j.dump(2) + "\n");
    }
}

inline void emit_range(const ExperimentConfig& ec, const std::vector<RangeSample>& samples) {
    using namespace emit_detail;
    if (ec.format == "csv") {
        std::string body = header_line(ec, "range") + "\n";
        body += "t,distinct_edges,span\n";
        for (const auto& s : samples)
            body += fmt_double(s.t) + "," + std::to_string(s.distinct_edges) + "," +
                    std::to_string(s.span) + "\n";
        write_file(ec.out_dir, "range.csv", body);
    } else {
        auto j = base_json(ec, "range");
        auto rows = nlohmann::ordered_json::array();
        for (const auto& s : samples) {
            nlohmann::ordered_json row;
            row["t"] = s.t;
            row["distinct_edges"] = s.distinct_edges;
            row["span"] = s.span;
            rows.push_back(row);
        }
        j["results"] = rows;
        write_file(ec.out_dir, "range.json", j.dump(2) + "\n");
    }
}

inline void emit_space(const ExperimentConfig& ec, const Verdict3& v, const SeriesVerdict& edges,
                       const SpaceExcursionStats& mc) {
    using namespace emit_detail;
    if (ec.format == "csv") {
        std::string body = header_line(ec, "space") + "\n";
        body += "graph,alpha,verdict,edge_sum_verdict,edge_sum_value,mc_mean_actual,mc_stderr,"
                "mc_censor_rate\n";
        body += ec.graph + "," + fmt_double(ec.space_alpha) + "," + to_string(v.verdict) + "," +
                to_string(edges.verdict) + "," +
                (edges.converged() ? fmt_double(edges.value) : std::string("")) + "," +
                fmt_double(mc.actual.mean()) + "," + fmt_double(mc.actual.stderr_mean()) + "," +
                fmt_double(mc.censor_rate()) + "\n";
        write_file(ec.out_dir, "space.csv", body);
    } else {
        auto j = base_json(ec, "space");
        j["graph"] = ec.graph;
        j["alpha"] = ec.space_alpha;
        j["verdict"] = to_string(v.verdict);
        j["edge_sum"] = verdict_json(edges);
        j["mc_mean_actual"] = mc.actual.mean();
        j["mc_stderr"] = mc.actual.stderr_mean();
        j["mc_censor_rate"] = mc.censor_rate();
        write_file(ec.out_dir, "space.json", j.dump(2) + "\n");
    }
}

// Trajectory dump for --trace: one excursion, rows (step, vertex, T(m)).
inline void emit_trace(const ExperimentConfig& ec) {
    NearestNeighborKernel kernel = make_line_kernel(ec);
    PassageSchedule sched = make_schedule(ec);
    CrossingLedger<std::int64_t> ledger;
    ActualClock clock(sched);
    auto rng = make_stream(ec.seed, 0xffff);
    std::int64_t x = 0;
    std::string body = emit_detail::header_line(ec, "trace") + "\n";
    body += "step,vertex,actual_time\n";
    body += "0,0,0\n";
    for (std::int64_t m = 1; m <= ec.step_cap; ++m) {
        std::int64_t next = kernel.step(x, rng);
        record_step(ledger, clock, make_edge(x, next));
        x = next;
        body += std::to_string(m) + "," + std::to_string(x) + "," + fmt_double(clock.total()) + "\n";
        if (x == 0) break;
    }
    emit_detail::write_file(ec.out_dir, "trace.csv", body);
}

}  // namespace irw
