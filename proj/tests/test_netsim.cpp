#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "starnc/netsim.hpp"
#include "starnc/optimizer.hpp"
#include "starnc/version.hpp"

using namespace starnc;
using namespace starnc::sim;
using doctest::Approx;

namespace {

TrialConfig noiseless_config() {
    TrialConfig cfg;
    cfg.params.Y = 2;
    cfg.params.K = 1 << 10;
    cfg.params.h = 0;
    cfg.params.q = 1 << 16;
    cfg.params.m = 1;
    cfg.params.p_mac = cfg.params.p_br = 0.0;
    cfg.params.R = 0.5;
    cfg.trials = 200;
    cfg.seed = 9;
    return cfg;
}

TrialConfig tuned_config(int Y, int q, int m, long K, int h, double p) {
    TrialConfig cfg;
    cfg.params.Y = Y;
    cfg.params.q = q;
    cfg.params.m = m;
    cfg.params.K = K;
    cfg.params.h = h;
    cfg.params.p_mac = cfg.params.p_br = p;
    auto res = opt::optimize(cfg.params, opt::Scheme::Rlnc, opt::Phase::Joint);
    cfg.params.m = m > 0 ? m : res.m_opt;
    cfg.params.R = res.R_opt;
    return cfg;
}

} // namespace

TEST_CASE("determinism: identical config and seed give identical reports") {
    TrialConfig cfg = tuned_config(3, 4, 2, 1000, 16, 0.04);
    cfg.trials = 500;
    cfg.threads = 1;
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    CHECK(a.to_json() == b.to_json());
    cfg.seed += 1;
    const auto c = simulate(cfg);
    CHECK(a.mean_total_slots != c.mean_total_slots);
}

TEST_CASE("noiseless huge-field exchange costs exactly two slots per unknown") {
    TrialConfig cfg = noiseless_config();
    const auto rep = simulate(cfg);
    CHECK(rep.mean_total_slots == Approx(2.0)); // one MAC + one broadcast, every trial
    CHECK(rep.mean_mac_slots == Approx(1.0));
    CHECK(rep.mean_br_slots == Approx(1.0));
    CHECK(rep.se_total_slots == Approx(0.0));
    CHECK(rep.aborted_trials == 0);
}

TEST_CASE("network-coded exchange matches the analytic slot count") {
    // moderate trials; optimum operating point
    TrialConfig cfg = tuned_config(2, 4, 2, 1000, 16, 0.04);
    cfg.trials = 4000;
    const auto row = validate_point(cfg);
    CHECK_FALSE(row.flagged);
    CHECK(std::abs(row.z) <= 4.0);
}

TEST_CASE("decode overhead histogram matches the closed form mean") {
    TrialConfig cfg;
    cfg.params.Y = 2;
    cfg.params.q = 4;
    cfg.params.m = 4;
    cfg.params.K = 1000;
    cfg.params.h = 16;
    cfg.params.p_mac = 0.04;
    cfg.params.p_br = 0.0; // every broadcast arrives
    cfg.params.R = 0.25;
    cfg.trials = 30000;
    const auto rep = simulate(cfg);
    const int mp = (cfg.params.Y - 1) * cfg.params.m;
    const double expect = overhead::expected_overhead(mp, cfg.params.q);
    // standard error from the histogram
    double sum = 0, sumsq = 0, cnt = 0;
    for (auto& [x, c] : rep.overhead_histogram) {
        sum += static_cast<double>(x) * static_cast<double>(c);
        sumsq += static_cast<double>(x) * static_cast<double>(x) * static_cast<double>(c);
        cnt += static_cast<double>(c);
    }
    const double mean = sum / cnt;
    const double se = std::sqrt((sumsq - sum * sum / cnt) / (cnt - 1) / cnt);
    CHECK(mean == Approx(rep.mean_decode_overhead));
    CHECK(std::abs(mean - expect) < 3 * se);
    // loss-independence: the overhead in received blocks has the same law
    TrialConfig lossy = cfg;
    lossy.params.p_br = 0.04;
    lossy.params.R = 0.25;
    const auto rep2 = simulate(lossy);
    CHECK(std::abs(rep2.mean_decode_overhead - expect) < 4 * se + 0.02);
}

TEST_CASE("repetition scheme matches its analytic expectations") {
    SUBCASE("noiseless: exactly 2 Y m slots") {
        TrialConfig cfg = noiseless_config();
        cfg.scheme = SimScheme::Tdma;
        cfg.params.Y = 3;
        cfg.params.m = 2;
        cfg.params.q = 4;
        const auto rep = simulate(cfg);
        CHECK(rep.mean_total_slots == Approx(2.0 * 3 * 2));
        CHECK(rep.se_total_slots == Approx(0.0));
    }
    SUBCASE("five sources at moderate loss agree with the finite sum") {
        TrialConfig cfg;
        cfg.scheme = SimScheme::Tdma;
        cfg.params.Y = 5;
        cfg.params.q = 4;
        cfg.params.m = 1;
        cfg.params.K = 1000;
        cfg.params.h = 16;
        cfg.params.p_mac = cfg.params.p_br = 0.11;
        // pick the rate so the block error rate is near 0.1
        const double r0 = channel::cutoff_rate(0.11);
        const double k = cfg.params.k();
        cfg.params.R = r0 / (1.0 + std::log2(1.0 / 0.1) / k);
        cfg.trials = 10000;
        const auto row = validate_point(cfg);
        CHECK_FALSE(row.flagged);
    }
}

TEST_CASE("slot accounting: uplink-to-broadcast ratio approaches the retry factor") {
    TrialConfig cfg = tuned_config(2, 16, 2, 2000, 16, 0.11);
    // pick the rate so the uplink block error rate is near 0.2
    const double r0 = channel::cutoff_rate(0.11);
    cfg.params.R = r0 / (1.0 + std::log2(1.0 / 0.2) / cfg.params.k());
    cfg.trials = 20000;
    const auto rep = simulate(cfg);
    const double expect = 1.0 / (1.0 - rep.eps_mac);
    CHECK(rep.mac_to_br_slot_ratio == Approx(expect).epsilon(0.02));
    CHECK(rep.mean_total_slots == Approx(rep.mean_mac_slots + rep.mean_br_slots));
}

TEST_CASE("fidelities consume identical randomness and agree exactly") {
    TrialConfig cfg;
    cfg.params.Y = 3;
    cfg.params.q = 4;
    cfg.params.m = 2;
    cfg.params.K = 240;
    cfg.params.h = 8;
    cfg.params.p_mac = cfg.params.p_br = 0.08;
    cfg.params.R = 0.2;
    cfg.trials = 300;
    cfg.threads = 1;

    cfg.fidelity = Fidelity::RankOnly;
    const auto rank_only = simulate(cfg);
    cfg.fidelity = Fidelity::Symbolic;
    const auto symbolic = simulate(cfg);

    CHECK(rank_only.mean_total_slots == Approx(symbolic.mean_total_slots));
    CHECK(rank_only.mean_mac_slots == Approx(symbolic.mean_mac_slots));
    CHECK(rank_only.overhead_histogram == symbolic.overhead_histogram);
    CHECK(symbolic.decode_mismatches == 0);

    // And as independent samples (different seeds) they are statistically
    // indistinguishable.
    cfg.seed = 1001;
    cfg.fidelity = Fidelity::RankOnly;
    cfg.trials = 2000;
    const auto a = simulate(cfg);
    cfg.seed = 2002;
    cfg.fidelity = Fidelity::Symbolic;
    const auto b = simulate(cfg);
    const double z = (a.mean_total_slots - b.mean_total_slots) /
                     std::sqrt(a.se_total_slots * a.se_total_slots +
                               b.se_total_slots * b.se_total_slots);
    CHECK(std::abs(z) < 4.0);
}

TEST_CASE("shared-stream coefficients are measurably correlated across receivers") {
    // GF(2), three sources, one block: with shared streams all receivers see
    // entries of the same two columns and succeed together more often than
    // the independent product 27/512; the simulated slot mean drops below
    // the independence-based analytic value.
    TrialConfig cfg;
    cfg.params.Y = 3;
    cfg.params.q = 2;
    cfg.params.m = 1;
    cfg.params.K = 16;
    cfg.params.h = 0;
    cfg.params.p_mac = cfg.params.p_br = 0.0;
    cfg.params.R = 0.5;
    cfg.trials = 20000;

    cfg.coeff_model = CoeffModel::IndependentPerReceiver;
    const auto indep = validate_point(cfg);
    CHECK_FALSE(indep.flagged);

    cfg.coeff_model = CoeffModel::SharedStreams;
    const auto shared = validate_point(cfg);
    CHECK(shared.flagged);
    CHECK(shared.z < -4.0); // positively correlated receivers finish sooner
}

TEST_CASE("event trace shows sources transmitting until global termination") {
    TrialConfig cfg;
    cfg.params.Y = 3;
    cfg.params.q = 2;
    cfg.params.m = 2;
    cfg.params.K = 64;
    cfg.params.h = 0;
    cfg.params.p_mac = 0.0;
    cfg.params.p_br = 0.11;
    // push the block error rate near 0.3 so receivers diverge often
    cfg.params.R = channel::cutoff_rate(0.11) /
                   (1.0 + std::log2(1.0 / 0.3) / cfg.params.k());
    cfg.trials = 50;
    cfg.trace_path = "netsim_trace_test.ndjson";
    const auto rep = simulate(cfg);
    CHECK(rep.trials == 50);

    std::ifstream in(cfg.trace_path);
    REQUIRE(in.good());
    std::string line;
    long rounds_after_first_done = 0;
    long current_trial = -1;
    bool someone_done = false;
    const std::size_t mp = static_cast<std::size_t>((cfg.params.Y - 1) * cfg.params.m);
    while (std::getline(in, line)) {
        const auto ev = nlohmann::json::parse(line);
        if (ev.at("type") != "round") continue;
        const long trial = ev.at("trial").get<long>();
        if (trial != current_trial) {
            current_trial = trial;
            someone_done = false;
        }
        const auto ranks = ev.at("ranks").get<std::vector<std::size_t>>();
        std::size_t done = 0;
        for (auto r : ranks) done += r == mp;
        // A round was executed (MAC attempts included) even though some
        // receiver had already decoded: transmission only stops globally.
        if (someone_done && done < ranks.size()) ++rounds_after_first_done;
        if (done > 0 && done < ranks.size()) someone_done = true;
    }
    CHECK(rounds_after_first_done > 0);
    std::remove(cfg.trace_path.c_str());
}

TEST_CASE("validation harness flags a corrupted analytic value") {
    TrialConfig cfg = tuned_config(2, 4, 1, 1000, 16, 0.04);
    cfg.trials = 4000;
    const auto honest = validate_point(cfg);
    CHECK_FALSE(honest.flagged);
    cfg.analytic_override = honest.analytic * 1.25;
    const auto corrupted = validate_point(cfg);
    CHECK(corrupted.flagged);
}

TEST_CASE("report JSON round trip") {
    TrialConfig cfg = tuned_config(2, 4, 2, 1000, 16, 0.04);
    cfg.trials = 300;
    const auto rep = simulate(cfg);
    const auto text = rep.to_json();
    const auto back = SimulationReport::from_json(text);
    CHECK(back.to_json() == text);
    CHECK(back.schema_version == kReportSchemaVersion);
    CHECK(back.mean_total_slots == Approx(rep.mean_total_slots));
}

TEST_CASE("single-source overhead experiment matches the closed form") {
    for (auto [m, q] : {std::pair<int, int>{1, 2}, {4, 4}, {8, 16}}) {
        const auto st = sim_overhead_single(m, q, 30000, 321);
        const double expect = overhead::expected_overhead(m, q);
        CHECK(std::abs(st.mean - expect) < 3.5 * std::max(st.se, 1e-4));
    }
}

TEST_CASE("invalid configurations are rejected") {
    TrialConfig cfg = noiseless_config();
    cfg.trials = 0;
    CHECK_THROWS_AS(simulate(cfg), ConfigError);
    cfg = noiseless_config();
    cfg.params.Y = 1;
    CHECK_THROWS_AS(simulate(cfg), ConfigError);
}
