// starnc: sweeps, optimizer runs, and simulator validation for the star
// network coding analysis library.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "starnc/netsim.hpp"
#include "starnc/optimizer.hpp"
#include "starnc/version.hpp"

using json = nlohmann::json;
using namespace starnc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitModelDomain = 2;
constexpr int kExitValidation = 3;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct Table {
    std::vector<std::string> metadata; // emitted as '#'-prefixed lines
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void write_csv(std::ostream& os) const {
        for (const auto& m : metadata) os << "# " << m << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i)
            os << columns[i] << (i + 1 < columns.size() ? "," : "\n");
        for (const auto& row : rows)
            for (std::size_t i = 0; i < row.size(); ++i)
                os << row[i] << (i + 1 < row.size() ? "," : "\n");
    }

    void write_json(std::ostream& os) const {
        json j;
        j["metadata"] = metadata;
        j["columns"] = columns;
        j["rows"] = json::array();
        for (const auto& row : rows) {
            json r = json::array();
            for (const auto& cell : row) r.push_back(cell);
            j["rows"].push_back(r);
        }
        os << j.dump(2) << '\n';
    }
};

struct OutputOptions {
    std::string out;           // empty = stdout
    std::string format = "csv";
};

void emit(const Table& t, const OutputOptions& o) {
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) throw ConfigError("cannot open output path: " + o.out);
        os = &file;
    }
    if (o.format == "csv")
        t.write_csv(*os);
    else
        t.write_json(*os);
}

std::string common_metadata(const std::string& cmd, const std::string& model,
                            std::uint64_t seed, long trials, bool strict) {
    std::ostringstream ss;
    ss << "starnc " << kVersion << " cmd=" << cmd << " model=" << model
       << " seed=" << seed << " trials=" << trials << " strict_divisibility=" << (strict ? 1 : 0)
       << " tolerances=rate_bracket:1e-10,series_term:1e-12,series_tail:1e-10";
    return ss.str();
}

channel::CodingModel parse_model(const std::string& s) {
    if (s == "ee") return channel::CodingModel::ErrorExponent;
    if (s == "ppv") return channel::CodingModel::Ppv;
    throw ConfigError("unknown model: " + s);
}

throughput::OverheadProxy parse_proxy(const std::string& s) {
    if (s == "upper") return throughput::OverheadProxy::UpperBound;
    if (s == "exact") return throughput::OverheadProxy::Exact;
    if (s == "zero") return throughput::OverheadProxy::Zero;
    throw ConfigError("unknown overhead proxy: " + s);
}

/// Runs jobs 0..n-1 on a small pool; results land indexed so output order is
/// independent of completion order.
template <typename Fn>
void run_indexed(std::size_t n, Fn&& fn) {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers < 1) workers = 1;
    workers = std::min<unsigned>(workers, 8);
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> log_spaced(double from, double to, int points) {
    if (points < 1 || from <= 0 || to < from) throw ConfigError("bad sweep range");
    std::vector<double> v;
    if (points == 1) return {from};
    for (int i = 0; i < points; ++i)
        v.push_back(from * std::pow(to / from, static_cast<double>(i) / (points - 1)));
    return v;
}

// ----------------------------------------------------------------------
// overhead: closed forms, bounds, and the Monte Carlo column
// ----------------------------------------------------------------------

int cmd_overhead(const std::vector<int>& ms, const std::vector<int>& qs,
                 const std::vector<int>& Ys, long trials, std::uint64_t seed,
                 const OutputOptions& out) {
    Table t;
    t.metadata.push_back(common_metadata("overhead", "-", seed, trials, false));
    t.columns = {"m", "q", "Y", "exact", "lower", "upper", "sim_mean", "sim_ci95"};

    struct Point { int m, q, Y; };
    std::vector<Point> points;
    for (int q : qs)
        for (int Y : Ys)
            for (int m : ms) points.push_back({m, q, Y});
    t.rows.resize(points.size());

    run_indexed(points.size(), [&](std::size_t i) {
        const auto [m, q, Y] = points[i];
        const double exact = overhead::star_expected_overhead(m, q, Y);
        const double lower = overhead::overhead_lower(q, Y);
        const double upper = overhead::overhead_upper(q, Y);
        const auto st = sim::sim_overhead_star(m, q, Y, trials,
                                               rng::derive_key({seed, static_cast<std::uint64_t>(i)}));
        t.rows[i] = {std::to_string(m), std::to_string(q), std::to_string(Y),
                     fmt(exact), fmt(lower), fmt(upper),
                     fmt(st.mean), fmt(1.959963984540054 * st.se)};
    });
    emit(t, out);
    return kExitOk;
}

// ----------------------------------------------------------------------
// optimize: per-point throughput-maximizing (m, R)
// ----------------------------------------------------------------------

struct SweepAxis {
    std::string axis;           // K | q | Y | h | p
    std::vector<double> values;
};

int cmd_optimize(const std::string& phase_s, const std::string& scheme_s,
                 throughput::NetworkParams base, const SweepAxis& sweep,
                 const opt::OptimizeOptions& opts, std::uint64_t seed,
                 const OutputOptions& out) {
    const opt::Phase phase = phase_s == "mac" ? opt::Phase::Mac
                              : phase_s == "broadcast" ? opt::Phase::Broadcast
                                                       : opt::Phase::Joint;
    const opt::Scheme scheme = scheme_s == "rlnc" ? opt::Scheme::Rlnc : opt::Scheme::Tdma;

    Table t;
    t.metadata.push_back(common_metadata("optimize", base.model == channel::CodingModel::Ppv ? "ppv" : "ee",
                                         seed, 0, base.strict_divisibility));
    {
        std::ostringstream ss;
        ss << "phase=" << phase_s << " scheme=" << scheme_s << " sweep=" << sweep.axis
           << " fixed K=" << base.K << " q=" << base.q << " Y=" << base.Y << " h=" << base.h
           << " p_mac=" << base.p_mac << " p_br=" << base.p_br;
        t.metadata.push_back(ss.str());
    }
    t.columns = {sweep.axis, "m_opt", "R_opt", "rate_ratio", "expected_bits",
                 "throughput", "norm_bits_R0", "rate_evals", "grid_fallback"};
    t.rows.resize(sweep.values.size());

    std::atomic<int> model_domain_rows{0};
    run_indexed(sweep.values.size(), [&](std::size_t i) {
        throughput::NetworkParams p = base;
        const double v = sweep.values[i];
        if (sweep.axis == "K") p.K = static_cast<long>(std::llround(v));
        else if (sweep.axis == "q") p.q = static_cast<int>(std::llround(v));
        else if (sweep.axis == "Y") p.Y = static_cast<int>(std::llround(v));
        else if (sweep.axis == "h") p.h = static_cast<int>(std::llround(v));
        else if (sweep.axis == "p") p.p_mac = p.p_br = v;
        else throw ConfigError("unknown sweep axis: " + sweep.axis);
        try {
            const auto res = opt::optimize(p, scheme, phase, opts);
            const double r0 = channel::cutoff_rate(p.p_mac);
            const double norm = res.cost.bits * r0 /
                                (static_cast<double>(p.Y) * static_cast<double>(p.K));
            t.rows[i] = {fmt(v), std::to_string(res.m_opt), fmt(res.R_opt), fmt(res.rate_ratio),
                         fmt(res.cost.bits), fmt(res.cost.throughput), fmt(norm),
                         std::to_string(res.rate_evals), res.grid_fallback ? "1" : "0"};
        } catch (const ModelDomainError& e) {
            // surfaced per point, not fatally
            t.rows[i] = {fmt(v), "-", "-", "-", "-", "-", "-", "-", std::string("error:") + e.what()};
            ++model_domain_rows;
        }
    });
    emit(t, out);
    return model_domain_rows == static_cast<int>(sweep.values.size()) && !sweep.values.empty()
               ? kExitModelDomain
               : kExitOk;
}

// ----------------------------------------------------------------------
// ratio: TDMA/RLNC bit-time ratio at per-scheme optima over K
// ----------------------------------------------------------------------

int cmd_ratio(throughput::NetworkParams base, std::vector<double> Ks, bool find_crossing,
              const opt::OptimizeOptions& opts, std::uint64_t seed, const OutputOptions& out) {
    Table t;
    t.metadata.push_back(common_metadata("ratio", base.model == channel::CodingModel::Ppv ? "ppv" : "ee",
                                         seed, 0, base.strict_divisibility));
    {
        std::ostringstream ss;
        ss << "q=" << base.q << " Y=" << base.Y << " h=" << base.h
           << " p_mac=" << base.p_mac << " p_br=" << base.p_br;
        t.metadata.push_back(ss.str());
    }
    t.columns = {"K", "ratio", "asymptote", "m_rlnc", "R_rlnc", "m_tdma", "R_tdma"};
    t.rows.resize(Ks.size());

    run_indexed(Ks.size(), [&](std::size_t i) {
        throughput::NetworkParams p = base;
        p.K = static_cast<long>(std::llround(Ks[i]));
        const auto r = opt::ratio_at_optima(p, opts);
        const double asym = static_cast<double>(p.Y) / (p.Y - 1);
        t.rows[i] = {std::to_string(p.K), fmt(r.ratio), fmt(asym),
                     std::to_string(r.rlnc.m_opt), fmt(r.rlnc.R_opt),
                     std::to_string(r.tdma.m_opt), fmt(r.tdma.R_opt)};
    });

    if (find_crossing) {
        const long lo = static_cast<long>(Ks.front());
        const long hi = static_cast<long>(Ks.back());
        try {
            const double kc = opt::crossing_message_length(base, lo, hi, opts);
            t.metadata.push_back("crossing_K=" + fmt(kc));
        } catch (const ModelDomainError&) {
            t.metadata.push_back("crossing_K=none_in_range");
        }
    }
    emit(t, out);
    return kExitOk;
}

// ----------------------------------------------------------------------
// simulate: Monte Carlo runs plus the analytic comparison table
// ----------------------------------------------------------------------

int cmd_simulate(sim::TrialConfig base, const std::vector<int>& qs, const std::vector<int>& Ys,
                 const std::vector<long>& Ks, const std::vector<double>& ps, bool optimize_point,
                 const std::string& report_path, const OutputOptions& out) {
    Table t;
    t.metadata.push_back(common_metadata("simulate",
                                         base.params.model == channel::CodingModel::Ppv ? "ppv" : "ee",
                                         base.seed, base.trials, base.params.strict_divisibility));
    t.columns = {"label", "analytic", "simulated", "se", "z", "flagged"};

    struct Point { int q, Y; long K; double p; };
    std::vector<Point> points;
    for (int q : qs)
        for (int Y : Ys)
            for (long K : Ks)
                for (double p : ps) points.push_back({q, Y, K, p});
    t.rows.resize(points.size());
    std::vector<sim::SimulationReport> reports(points.size());
    std::atomic<int> flagged{0};

    run_indexed(points.size(), [&](std::size_t i) {
        sim::TrialConfig cfg = base;
        cfg.params.q = points[i].q;
        cfg.params.Y = points[i].Y;
        cfg.params.K = points[i].K;
        cfg.params.p_mac = cfg.params.p_br = points[i].p;
        cfg.seed = rng::derive_key({base.seed, static_cast<std::uint64_t>(i)});
        if (optimize_point) {
            const auto res = opt::optimize(cfg.params,
                                           cfg.scheme == sim::SimScheme::Rlnc ? opt::Scheme::Rlnc
                                                                              : opt::Scheme::Tdma,
                                           opt::Phase::Joint);
            cfg.params.m = res.m_opt;
            cfg.params.R = res.R_opt;
        }
        reports[i] = sim::simulate(cfg);
        const auto& rep = reports[i];
        const double analytic =
            std::isnan(cfg.analytic_override)
                ? (cfg.scheme == sim::SimScheme::Rlnc ? throughput::star_rlnc_slots(cfg.params)
                                                      : throughput::star_tdma_slots(cfg.params))
                : cfg.analytic_override;
        const double z = rep.se_total_slots > 0
                             ? (rep.mean_total_slots - analytic) / rep.se_total_slots
                             : (rep.mean_total_slots == analytic ? 0.0 : INFINITY);
        const bool is_flagged = std::abs(z) > 4.0;
        if (is_flagged) ++flagged;
        std::ostringstream label;
        label << rep.scheme << " Y=" << rep.Y << " K=" << rep.K << " h=" << rep.h
              << " q=" << rep.q << " m=" << rep.m << " p=" << rep.p_mac;
        t.rows[i] = {label.str(), fmt(analytic), fmt(rep.mean_total_slots),
                     fmt(rep.se_total_slots), fmt(z), is_flagged ? "1" : "0"};
    });

    if (!report_path.empty()) {
        json all = json::array();
        for (auto& r : reports) all.push_back(json::parse(r.to_json()));
        std::ofstream f(report_path);
        if (!f) throw ConfigError("cannot open report path: " + report_path);
        f << all.dump(2) << '\n';
    }
    emit(t, out);
    return flagged > 0 ? kExitValidation : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"star network coding/channel coding throughput toolkit"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help"); // frees -h for header bits
    auto add_sub = [&](const std::string& name, const std::string& desc) {
        auto* sub = app.add_subcommand(name, desc);
        sub->set_help_flag("--help", "print help");
        return sub;
    };

    // shared options
    std::string out_path, format = "csv", model_s = "ee";
    std::uint64_t seed = 1;
    long trials = 10000;
    bool strict = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out_path, "output path (default stdout)");
        sub->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--model", model_s, "block error model: ee or ppv")
            ->check(CLI::IsMember({"ee", "ppv"}));
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--trials", trials, "Monte Carlo trials per point");
        sub->add_flag("--strict-divisibility", strict,
                      "reject K not divisible by m*l instead of padding");
    };

    // overhead
    auto* ov = app.add_subcommand("overhead", "coding overhead: closed forms, bounds, simulation");
    std::vector<int> ov_m{1, 2, 4, 8, 16}, ov_q{2, 4, 16, 64}, ov_Y{1, 2, 4, 6};
    ov->add_option("--m", ov_m, "block counts");
    ov->add_option("--q", ov_q, "field sizes");
    ov->add_option("--Y", ov_Y, "source counts");
    add_common(ov);

    // optimize
    auto* op = app.add_subcommand("optimize", "throughput-maximizing block count and rate");
    std::string op_phase = "joint", op_scheme, op_sweep = "K", op_proxy = "upper";
    std::vector<double> op_values;
    double op_from = 0, op_to = 0;
    int op_points = 0;
    long op_K = 10000;
    int op_q = 4, op_Y = 2, op_h = 16;
    double op_p = 0.04, op_pmac = -1, op_pbr = -1;
    bool op_exhaustive = false;
    op->add_option("--phase", op_phase)->check(CLI::IsMember({"mac", "broadcast", "joint"}));
    op->add_option("--scheme", op_scheme)->required()->check(CLI::IsMember({"rlnc", "tdma"}));
    op->add_option("--sweep", op_sweep, "swept axis: K, q, Y, h or p")
        ->check(CLI::IsMember({"K", "q", "Y", "h", "p"}));
    op->add_option("--values", op_values, "explicit sweep values");
    op->add_option("--from", op_from);
    op->add_option("--to", op_to);
    op->add_option("--points", op_points, "log-spaced point count for --from/--to");
    op->add_option("--K", op_K);
    op->add_option("--q", op_q);
    op->add_option("--Y", op_Y);
    op->add_option("--h", op_h);
    op->add_option("--p", op_p, "symmetric crossover probability");
    op->add_option("--p-mac", op_pmac);
    op->add_option("--p-br", op_pbr);
    op->add_option("--overhead-proxy", op_proxy)->check(CLI::IsMember({"upper", "exact", "zero"}));
    op->add_flag("--exhaustive", op_exhaustive, "scan every admissible m");
    add_common(op);

    // ratio
    auto* ra = app.add_subcommand("ratio", "TDMA/RLNC bit-time ratio at per-scheme optima");
    std::vector<double> ra_K;
    double ra_from = 100, ra_to = 100000;
    int ra_points = 13;
    long ra_q = 4;
    int ra_Y = 2, ra_h = 16;
    double ra_p = 0.04;
    bool ra_cross = false;
    ra->add_option("--K-values", ra_K, "explicit message lengths");
    ra->add_option("--K-from", ra_from);
    ra->add_option("--K-to", ra_to);
    ra->add_option("--K-points", ra_points);
    ra->add_option("--q", ra_q);
    ra->add_option("--Y", ra_Y);
    ra->add_option("--h", ra_h);
    ra->add_option("--p", ra_p);
    ra->add_flag("--find-crossing", ra_cross, "report the K where the ratio crosses 1");
    add_common(ra);

    // simulate
    auto* si = app.add_subcommand("simulate", "Monte Carlo protocol runs and validation table");
    std::string si_scheme = "rlnc", si_fidelity = "rank", si_coeff = "independent";
    std::string si_report, si_trace;
    std::vector<int> si_q{4}, si_Y{2};
    std::vector<long> si_K{1000};
    std::vector<double> si_p{0.04};
    int si_h = 16, si_m = 1;
    double si_R = 0.25;
    bool si_opt = false;
    double si_mutate = std::numeric_limits<double>::quiet_NaN();
    si->add_option("--scheme", si_scheme)->check(CLI::IsMember({"rlnc", "tdma"}));
    si->add_option("--q", si_q);
    si->add_option("--Y", si_Y);
    si->add_option("--K", si_K);
    si->add_option("--p", si_p, "symmetric crossover probability");
    si->add_option("--h", si_h);
    si->add_option("--m", si_m);
    si->add_option("--R", si_R);
    si->add_flag("--optimize", si_opt, "use the jointly optimal (m, R) per point");
    si->add_option("--fidelity", si_fidelity)->check(CLI::IsMember({"rank", "symbolic"}));
    si->add_option("--coeff-model", si_coeff)->check(CLI::IsMember({"independent", "shared"}));
    si->add_option("--report", si_report, "write full simulation reports (JSON) here");
    si->add_option("--trace", si_trace, "write newline-delimited event records here");
    si->add_option("--mutate-analytic", si_mutate,
                   "self-test: replace the analytic mean in the comparison");
    add_common(si);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ov->parsed())
            return cmd_overhead(ov_m, ov_q, ov_Y, trials, seed, {out_path, format});

        if (op->parsed()) {
            throughput::NetworkParams base;
            base.K = op_K;
            base.q = op_q;
            base.Y = op_Y;
            base.h = op_h;
            base.p_mac = op_pmac >= 0 ? op_pmac : op_p;
            base.p_br = op_pbr >= 0 ? op_pbr : op_p;
            base.model = parse_model(model_s);
            base.strict_divisibility = strict;
            SweepAxis sweep{op_sweep, op_values};
            if (sweep.values.empty()) {
                if (op_points > 0) sweep.values = log_spaced(op_from, op_to, op_points);
                else sweep.values = {static_cast<double>(op_K)};
            }
            if (sweep.values.empty()) throw ConfigError("empty sweep");
            opt::OptimizeOptions opts;
            opts.proxy = parse_proxy(op_proxy);
            opts.exhaustive = op_exhaustive;
            return cmd_optimize(op_phase, op_scheme, base, sweep, opts, seed, {out_path, format});
        }

        if (ra->parsed()) {
            throughput::NetworkParams base;
            base.q = static_cast<int>(ra_q);
            base.Y = ra_Y;
            base.h = ra_h;
            base.p_mac = base.p_br = ra_p;
            base.model = parse_model(model_s);
            base.strict_divisibility = strict;
            std::vector<double> Ks = ra_K;
            if (Ks.empty()) Ks = log_spaced(ra_from, ra_to, ra_points);
            return cmd_ratio(base, Ks, ra_cross, {}, seed, {out_path, format});
        }

        if (si->parsed()) {
            sim::TrialConfig base;
            base.scheme = si_scheme == "rlnc" ? sim::SimScheme::Rlnc : sim::SimScheme::Tdma;
            base.fidelity = si_fidelity == "symbolic" ? sim::Fidelity::Symbolic
                                                      : sim::Fidelity::RankOnly;
            base.coeff_model = si_coeff == "shared" ? sim::CoeffModel::SharedStreams
                                                    : sim::CoeffModel::IndependentPerReceiver;
            base.params.h = si_h;
            base.params.m = si_m;
            base.params.R = si_R;
            base.params.model = parse_model(model_s);
            base.params.strict_divisibility = strict;
            base.trials = trials;
            base.seed = seed;
            base.trace_path = si_trace;
            base.analytic_override = si_mutate;
            return cmd_simulate(base, si_q, si_Y, si_K, si_p, si_opt, si_report,
                                {out_path, format});
        }
    } catch (const ModelDomainError& e) {
        std::cerr << "model-domain error: " << e.what() << '\n';
        return kExitModelDomain;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
