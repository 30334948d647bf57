#include "starnc/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "starnc/rlnc.hpp"
#include "starnc/rng.hpp"
#include "starnc/version.hpp"

namespace starnc::sim {

using json = nlohmann::json;
using gf::BitslicedRank;
using gf::Element;
using gf::Field;

namespace {

// Stream-id domains keyed into the per-trial RNG space.
constexpr std::uint64_t kDomainProtocol = 0x50;
constexpr std::uint64_t kDomainCoeff = 0x43;
constexpr std::uint64_t kDomainMessage = 0x4D;

struct Accumulator {
    long trials = 0;
    double sum_mac = 0, sum_br = 0, sum_total = 0, sumsq_total = 0;
    double sum_overhead = 0;
    long overhead_samples = 0;
    std::map<long, long> histogram;
    long aborted = 0;
    long mismatches = 0;
    long duplicates = 0;

    void add_trial(double mac, double br) {
        ++trials;
        sum_mac += mac;
        sum_br += br;
        const double tot = mac + br;
        sum_total += tot;
        sumsq_total += tot * tot;
    }
    void add_overhead(long x) {
        sum_overhead += static_cast<double>(x);
        ++overhead_samples;
        ++histogram[x];
    }
    void merge(const Accumulator& o) {
        trials += o.trials;
        sum_mac += o.sum_mac;
        sum_br += o.sum_br;
        sum_total += o.sum_total;
        sumsq_total += o.sumsq_total;
        sum_overhead += o.sum_overhead;
        overhead_samples += o.overhead_samples;
        for (auto& [k, v] : o.histogram) histogram[k] += v;
        aborted += o.aborted;
        mismatches += o.mismatches;
        duplicates += o.duplicates;
    }
};

struct TrialContext {
    const TrialConfig* cfg;
    const Field* field;
    int mp; // unknowns per receiver
    double eps_mac, eps_br;
    std::ofstream* trace;
};

std::uint64_t coeff_seed(const TrialConfig& cfg, long trial, int receiver) {
    const int slot = cfg.coeff_model == CoeffModel::SharedStreams ? 0 : receiver;
    return rng::derive_key({cfg.seed, kDomainCoeff, static_cast<std::uint64_t>(trial),
                            static_cast<std::uint64_t>(slot)});
}

void run_rlnc_trial(const TrialContext& ctx, long trial, Accumulator& acc) {
    const TrialConfig& cfg = *ctx.cfg;
    const auto& par = cfg.params;
    const int Y = par.Y;
    const int m = par.m;
    const std::size_t mp = static_cast<std::size_t>(ctx.mp);
    rng::Counter protocol(cfg.seed, {kDomainProtocol, static_cast<std::uint64_t>(trial)});

    // Per-receiver coefficient streams (per receiver r: one stream per source).
    std::vector<std::vector<rlnc::CoefficientStream>> streams;
    streams.reserve(static_cast<std::size_t>(Y));
    for (int r = 1; r <= Y; ++r) {
        std::vector<rlnc::CoefficientStream> row;
        row.reserve(static_cast<std::size_t>(Y));
        for (int s = 1; s <= Y; ++s)
            row.emplace_back(*ctx.field, coeff_seed(cfg, trial, r), s, m);
        streams.push_back(std::move(row));
    }

    const bool symbolic = cfg.fidelity == Fidelity::Symbolic;
    std::vector<rlnc::SourceMessage> messages;
    std::vector<rlnc::ReceiverState> receivers;
    std::vector<BitslicedRank> trackers;
    if (symbolic) {
        const long Kp = par.padded_K();
        for (int s = 1; s <= Y; ++s) {
            rng::Counter mrng(cfg.seed, {kDomainMessage, static_cast<std::uint64_t>(trial),
                                         static_cast<std::uint64_t>(s)});
            messages.push_back(rlnc::SourceMessage::random(s, m, par.l(), Kp, mrng));
        }
        for (int r = 0; r < Y; ++r)
            receivers.emplace_back(*ctx.field, messages[static_cast<std::size_t>(r)], Y);
    } else {
        for (int r = 0; r < Y; ++r) trackers.emplace_back(*ctx.field, mp);
    }

    auto rank_of = [&](int r) {
        return symbolic ? receivers[static_cast<std::size_t>(r)].rank()
                        : trackers[static_cast<std::size_t>(r)].rank();
    };
    std::vector<long> received_count(static_cast<std::size_t>(Y), 0);
    std::vector<std::uint8_t> done(static_cast<std::size_t>(Y), 0);
    std::vector<Element> column(mp);

    long mac_slots = 0, br_slots = 0;
    std::uint64_t block_index = 0;
    int remaining = Y;
    bool aborted = false;

    while (remaining > 0) {
        const long attempts = static_cast<long>(
            ctx.eps_mac > 0.0 ? protocol.geometric(1.0 - ctx.eps_mac) : 1);
        mac_slots += attempts;
        block_index += static_cast<std::uint64_t>(attempts);
        const std::uint64_t b = block_index - 1; // the block the relay decoded
        ++br_slots;

        std::vector<int> delivered;
        for (int r = 0; r < Y; ++r) {
            if (done[static_cast<std::size_t>(r)]) continue;
            if (ctx.eps_br > 0.0 && protocol.bernoulli(ctx.eps_br)) continue;
            delivered.push_back(r);
            ++received_count[static_cast<std::size_t>(r)];
            if (symbolic) {
                // Receiver r's realization of the superposed block.
                std::vector<rlnc::SymbolVec> parts;
                parts.reserve(static_cast<std::size_t>(Y));
                for (int s = 0; s < Y; ++s)
                    parts.push_back(rlnc::encode_block(
                        *ctx.field, messages[static_cast<std::size_t>(s)],
                        streams[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)].coefficients(b)));
                const auto superposed = rlnc::superpose_symbols(parts);
                receivers[static_cast<std::size_t>(r)].ingest(
                    b, superposed, streams[static_cast<std::size_t>(r)]);
            } else {
                std::size_t at = 0;
                for (int s = 0; s < Y; ++s) {
                    if (s == r) continue;
                    const auto& st = streams[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
                    for (int j = 0; j < m; ++j) column[at++] = st.coefficient(b, j);
                }
                trackers[static_cast<std::size_t>(r)].ingest(column);
            }
            if (rank_of(r) == mp) {
                done[static_cast<std::size_t>(r)] = 1;
                --remaining;
                acc.add_overhead(received_count[static_cast<std::size_t>(r)] - static_cast<long>(mp));
            }
        }

        if (ctx.trace) {
            json ev{{"trial", trial},
                    {"type", "round"},
                    {"mac_attempts", attempts},
                    {"br_slot", br_slots},
                    {"delivered", delivered}};
            std::vector<std::size_t> ranks;
            for (int r = 0; r < Y; ++r) ranks.push_back(rank_of(r));
            ev["ranks"] = ranks;
            *ctx.trace << ev.dump() << '\n';
        }
        if (mac_slots + br_slots > cfg.max_slots_per_trial) {
            aborted = true;
            break;
        }
    }

    if (symbolic && !aborted) {
        for (int r = 0; r < Y; ++r) {
            const auto blocks = receivers[static_cast<std::size_t>(r)].decode();
            std::size_t at = 0;
            bool ok = true;
            for (int s = 1; s <= Y; ++s) {
                if (s == r + 1) continue;
                for (int j = 0; j < m; ++j) {
                    const auto truth = messages[static_cast<std::size_t>(s - 1)].block(j);
                    const auto& got = blocks[at++];
                    if (!std::equal(truth.begin(), truth.end(), got.begin(), got.end())) ok = false;
                }
            }
            if (!ok) ++acc.mismatches;
            acc.duplicates += receivers[static_cast<std::size_t>(r)].duplicate_warnings();
        }
    }
    if (aborted) ++acc.aborted;
    acc.add_trial(static_cast<double>(mac_slots), static_cast<double>(br_slots));
}

void run_tdma_trial(const TrialContext& ctx, long trial, Accumulator& acc) {
    const TrialConfig& cfg = *ctx.cfg;
    const auto& par = cfg.params;
    rng::Counter protocol(cfg.seed, {kDomainProtocol, static_cast<std::uint64_t>(trial)});

    long mac_slots = 0, br_slots = 0;
    bool aborted = false;
    for (int s = 0; s < par.Y && !aborted; ++s) {
        for (int round = 0; round < par.m && !aborted; ++round) {
            mac_slots += static_cast<long>(
                ctx.eps_mac > 0.0 ? protocol.geometric(1.0 - ctx.eps_mac) : 1);
            int alive = par.Y - 1;
            while (alive > 0) {
                ++br_slots;
                const int listening = alive;
                for (int d = 0; d < listening; ++d)
                    if (!(ctx.eps_br > 0.0 && protocol.bernoulli(ctx.eps_br))) --alive;
                if (mac_slots + br_slots > cfg.max_slots_per_trial) {
                    aborted = true;
                    break;
                }
            }
            if (ctx.trace) {
                json ev{{"trial", trial}, {"type", "block"}, {"source", s + 1},
                        {"round", round + 1}, {"mac_slots", mac_slots}, {"br_slots", br_slots}};
                *ctx.trace << ev.dump() << '\n';
            }
        }
    }
    if (aborted) ++acc.aborted;
    acc.add_trial(static_cast<double>(mac_slots), static_cast<double>(br_slots));
}

} // namespace

SimulationReport simulate(const TrialConfig& config) {
    const auto& par = config.params;
    par.validate();
    if (config.trials < 1) throw ConfigError("netsim: need at least one trial");
    if (config.scheme == SimScheme::Rlnc && par.Y < 2)
        throw ConfigError("netsim: the network-coded exchange needs Y >= 2");

    TrialContext ctx;
    ctx.cfg = &config;
    ctx.field = &Field::of(par.l());
    ctx.mp = (par.Y - 1) * par.m;
    ctx.eps_mac = par.eps_mac();
    ctx.eps_br = par.eps_br();

    std::ofstream trace;
    ctx.trace = nullptr;
    if (!config.trace_path.empty()) {
        trace.open(config.trace_path);
        if (!trace) throw ConfigError("netsim: cannot open trace path");
        ctx.trace = &trace;
    }

    const auto run_range = [&](long lo, long hi, Accumulator& acc) {
        for (long t = lo; t < hi; ++t) {
            if (config.scheme == SimScheme::Rlnc)
                run_rlnc_trial(ctx, t, acc);
            else
                run_tdma_trial(ctx, t, acc);
        }
    };

    Accumulator total;
    unsigned want = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                       : std::thread::hardware_concurrency();
    if (want < 1) want = 1;
    // Tracing forces the sequential path so the event order is stable.
    if (ctx.trace || want == 1 || config.trials < 256) {
        run_range(0, config.trials, total);
    } else {
        const unsigned workers = std::min<unsigned>(want, 16);
        std::vector<Accumulator> parts(workers);
        std::vector<std::thread> pool;
        const long chunk = (config.trials + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const long lo = static_cast<long>(w) * chunk;
            const long hi = std::min<long>(config.trials, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi, w] { run_range(lo, hi, parts[w]); });
        }
        for (auto& th : pool) th.join();
        for (const auto& p : parts) total.merge(p);
    }

    SimulationReport rep;
    rep.schema_version = kReportSchemaVersion;
    rep.scheme = config.scheme == SimScheme::Rlnc ? "rlnc" : "tdma";
    rep.fidelity = config.fidelity == Fidelity::Symbolic ? "symbolic" : "rank_only";
    rep.coeff_model = config.coeff_model == CoeffModel::SharedStreams
                          ? "shared_streams"
                          : "independent_per_receiver";
    rep.model = par.model == channel::CodingModel::ErrorExponent ? "ee" : "ppv";
    rep.trials = total.trials;
    rep.seed = config.seed;
    rep.Y = par.Y;
    rep.K = par.K;
    rep.h = par.h;
    rep.q = par.q;
    rep.m = par.m;
    rep.p_mac = par.p_mac;
    rep.p_br = par.p_br;
    rep.R = par.R;
    rep.eps_mac = ctx.eps_mac;
    rep.eps_br = ctx.eps_br;
    rep.n_real = par.n();
    rep.n_bits = par.n_int();

    const double n = static_cast<double>(total.trials);
    rep.mean_mac_slots = total.sum_mac / n;
    rep.mean_br_slots = total.sum_br / n;
    rep.mean_total_slots = total.sum_total / n;
    const double var =
        n > 1 ? std::max(0.0, (total.sumsq_total - total.sum_total * total.sum_total / n) / (n - 1))
              : 0.0;
    rep.se_total_slots = std::sqrt(var / n);
    rep.ci95_total_slots = 1.959963984540054 * rep.se_total_slots;
    rep.mac_to_br_slot_ratio =
        rep.mean_br_slots > 0 ? rep.mean_mac_slots / rep.mean_br_slots : 0.0;

    rep.mean_bits = rep.mean_total_slots * static_cast<double>(rep.n_bits);
    rep.ci95_bits = rep.ci95_total_slots * static_cast<double>(rep.n_bits);
    rep.realized_throughput =
        static_cast<double>(par.Y) * static_cast<double>(par.K) / rep.mean_bits;

    rep.mean_decode_overhead = total.overhead_samples > 0
                                   ? total.sum_overhead / static_cast<double>(total.overhead_samples)
                                   : 0.0;
    rep.overhead_histogram = std::move(total.histogram);
    rep.aborted_trials = total.aborted;
    rep.decode_mismatches = total.mismatches;
    rep.duplicate_warnings = total.duplicates;
    return rep;
}

std::string SimulationReport::to_json() const {
    json j;
    j["schema_version"] = schema_version;
    j["tool_version"] = kVersion;
    j["config"] = {{"scheme", scheme},   {"fidelity", fidelity},
                   {"coeff_model", coeff_model}, {"model", model},
                   {"trials", trials},   {"seed", seed},
                   {"Y", Y},             {"K", K},
                   {"h", h},             {"q", q},
                   {"m", m},             {"p_mac", p_mac},
                   {"p_br", p_br},       {"R", R}};
    j["derived"] = {{"eps_mac", eps_mac}, {"eps_br", eps_br},
                    {"n_real", n_real},   {"n_bits", n_bits}};
    json hist = json::object();
    for (auto& [k, v] : overhead_histogram) hist[std::to_string(k)] = v;
    j["results"] = {{"mean_mac_slots", mean_mac_slots},
                    {"mean_br_slots", mean_br_slots},
                    {"mean_total_slots", mean_total_slots},
                    {"se_total_slots", se_total_slots},
                    {"ci95_total_slots", ci95_total_slots},
                    {"mac_to_br_slot_ratio", mac_to_br_slot_ratio},
                    {"mean_bits", mean_bits},
                    {"ci95_bits", ci95_bits},
                    {"realized_throughput", realized_throughput},
                    {"mean_decode_overhead", mean_decode_overhead},
                    {"overhead_histogram", hist},
                    {"aborted_trials", aborted_trials},
                    {"decode_mismatches", decode_mismatches},
                    {"duplicate_warnings", duplicate_warnings}};
    return j.dump(2);
}

SimulationReport SimulationReport::from_json(const std::string& text) {
    const json j = json::parse(text);
    SimulationReport r;
    r.schema_version = j.at("schema_version").get<int>();
    const auto& c = j.at("config");
    r.scheme = c.at("scheme").get<std::string>();
    r.fidelity = c.at("fidelity").get<std::string>();
    r.coeff_model = c.at("coeff_model").get<std::string>();
    r.model = c.at("model").get<std::string>();
    r.trials = c.at("trials").get<long>();
    r.seed = c.at("seed").get<std::uint64_t>();
    r.Y = c.at("Y").get<int>();
    r.K = c.at("K").get<long>();
    r.h = c.at("h").get<int>();
    r.q = c.at("q").get<int>();
    r.m = c.at("m").get<int>();
    r.p_mac = c.at("p_mac").get<double>();
    r.p_br = c.at("p_br").get<double>();
    r.R = c.at("R").get<double>();
    const auto& d = j.at("derived");
    r.eps_mac = d.at("eps_mac").get<double>();
    r.eps_br = d.at("eps_br").get<double>();
    r.n_real = d.at("n_real").get<double>();
    r.n_bits = d.at("n_bits").get<long>();
    const auto& res = j.at("results");
    r.mean_mac_slots = res.at("mean_mac_slots").get<double>();
    r.mean_br_slots = res.at("mean_br_slots").get<double>();
    r.mean_total_slots = res.at("mean_total_slots").get<double>();
    r.se_total_slots = res.at("se_total_slots").get<double>();
    r.ci95_total_slots = res.at("ci95_total_slots").get<double>();
    r.mac_to_br_slot_ratio = res.at("mac_to_br_slot_ratio").get<double>();
    r.mean_bits = res.at("mean_bits").get<double>();
    r.ci95_bits = res.at("ci95_bits").get<double>();
    r.realized_throughput = res.at("realized_throughput").get<double>();
    r.mean_decode_overhead = res.at("mean_decode_overhead").get<double>();
    for (auto& [k, v] : res.at("overhead_histogram").items())
        r.overhead_histogram[std::stol(k)] = v.get<long>();
    r.aborted_trials = res.at("aborted_trials").get<long>();
    r.decode_mismatches = res.at("decode_mismatches").get<long>();
    r.duplicate_warnings = res.at("duplicate_warnings").get<long>();
    return r;
}

ValidationRow validate_point(const TrialConfig& config, double z_threshold) {
    ValidationRow row;
    row.analytic = std::isnan(config.analytic_override)
                       ? (config.scheme == SimScheme::Rlnc
                              ? throughput::star_rlnc_slots(config.params)
                              : throughput::star_tdma_slots(config.params))
                       : config.analytic_override;
    const auto rep = simulate(config);
    row.label = rep.scheme + " Y=" + std::to_string(rep.Y) + " K=" + std::to_string(rep.K) +
                " h=" + std::to_string(rep.h) + " q=" + std::to_string(rep.q) +
                " m=" + std::to_string(rep.m) + " p=" + std::to_string(rep.p_mac);
    row.simulated = rep.mean_total_slots;
    row.se = rep.se_total_slots;
    row.z = row.se > 0 ? (row.simulated - row.analytic) / row.se
                       : (row.simulated == row.analytic ? 0.0
                                                        : std::numeric_limits<double>::infinity());
    row.flagged = std::abs(row.z) > z_threshold;
    return row;
}

namespace {

OverheadStats overhead_experiment(int m, int q, int Y, long trials, std::uint64_t seed) {
    if (m < 1 || Y < 1 || trials < 1) throw ConfigError("netsim: bad overhead experiment");
    throughput::NetworkParams probe;
    probe.q = q;
    const int l = probe.l();
    const Field& f = Field::of(l);
    const std::size_t unknowns =
        static_cast<std::size_t>(Y >= 2 ? (Y - 1) * m : m);

    OverheadStats st;
    st.trials = trials;
    double sum = 0, sumsq = 0;
    std::vector<Element> column(unknowns);
    const int receivers = Y >= 2 ? Y : 1;
    for (long t = 0; t < trials; ++t) {
        rng::Counter rng(seed, {0x58, static_cast<std::uint64_t>(t)});
        std::vector<BitslicedRank> trackers;
        trackers.reserve(static_cast<std::size_t>(receivers));
        for (int r = 0; r < receivers; ++r) trackers.emplace_back(f, unknowns);
        long blocks = 0;
        int remaining = receivers;
        while (remaining > 0) {
            ++blocks;
            for (auto& tr : trackers) {
                if (tr.complete()) continue;
                for (auto& c : column)
                    c = static_cast<Element>(rng.next_below(static_cast<std::uint32_t>(q)));
                if (tr.ingest(column) && tr.complete()) --remaining;
            }
        }
        const long x = blocks - static_cast<long>(unknowns);
        sum += static_cast<double>(x);
        sumsq += static_cast<double>(x) * static_cast<double>(x);
        ++st.histogram[x];
    }
    st.mean = sum / static_cast<double>(trials);
    const double var = trials > 1
        ? std::max(0.0, (sumsq - sum * sum / static_cast<double>(trials)) / static_cast<double>(trials - 1))
        : 0.0;
    st.se = std::sqrt(var / static_cast<double>(trials));
    return st;
}

} // namespace

OverheadStats sim_overhead_single(int m, int q, long trials, std::uint64_t seed) {
    return overhead_experiment(m, q, 1, trials, seed);
}

OverheadStats sim_overhead_star(int m, int q, int Y, long trials, std::uint64_t seed) {
    return overhead_experiment(m, q, Y, trials, seed);
}

} // namespace starnc::sim
