#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "starnc/throughput.hpp"

namespace starnc::sim {

enum class SimScheme { Rlnc, Tdma };

/// Symbolic fidelity drives real field blocks through the codec and checks
/// the decoded payloads; rank-only tracks coefficient matrices alone. Both
/// consume identical randomness, so slot counts agree bit for bit.
enum class Fidelity { RankOnly, Symbolic };

/// Coefficient realizations seen by the receivers. The analytic expressions
/// treat the Y receivers as independent, so that is the default; the shared
/// mode replays the physically shared relay block, whose per-receiver decode
/// events are positively correlated for Y >= 3.
enum class CoeffModel { IndependentPerReceiver, SharedStreams };

struct TrialConfig {
    throughput::NetworkParams params;
    SimScheme scheme = SimScheme::Rlnc;
    Fidelity fidelity = Fidelity::RankOnly;
    CoeffModel coeff_model = CoeffModel::IndependentPerReceiver;
    long trials = 10000;
    std::uint64_t seed = 1;
    long max_slots_per_trial = 1000000;
    std::string trace_path; // newline-delimited JSON events when non-empty
    int threads = 0;        // 0 picks hardware concurrency
    /// Self-test hook: stands in for the analytic mean in validate_point so
    /// the |z| flagging machinery can be exercised against a corrupted value.
    double analytic_override = std::numeric_limits<double>::quiet_NaN();
};

struct SimulationReport {
    int schema_version = 0;

    // configuration echo
    std::string scheme, fidelity, coeff_model, model;
    long trials = 0;
    std::uint64_t seed = 0;
    int Y = 0, h = 0, q = 0, m = 0;
    long K = 0;
    double p_mac = 0, p_br = 0, R = 0;
    double eps_mac = 0, eps_br = 0;
    double n_real = 0; // analytic coded-block bits k/R
    long n_bits = 0;   // whole-bit block length used for bit accounting

    // slot statistics
    double mean_mac_slots = 0, mean_br_slots = 0, mean_total_slots = 0;
    double se_total_slots = 0, ci95_total_slots = 0;
    double mac_to_br_slot_ratio = 0;

    // bit-time statistics (total slots times n_bits)
    double mean_bits = 0, ci95_bits = 0;
    double realized_throughput = 0; // Y*K / mean_bits

    // per-receiver decode overhead (correctly received blocks beyond the
    // unknown count), network-coded scheme only
    double mean_decode_overhead = 0;
    std::map<long, long> overhead_histogram;

    long aborted_trials = 0;    // hit max_slots_per_trial
    long decode_mismatches = 0; // symbolic round trips that failed
    long duplicate_warnings = 0;

    std::string to_json() const;
    static SimulationReport from_json(const std::string& text);
};

SimulationReport simulate(const TrialConfig& config);

struct ValidationRow {
    std::string label;
    double analytic = 0;
    double simulated = 0;
    double se = 0;
    double z = 0;
    bool flagged = false;
};

/// Compares the simulated mean total slots against the analytic expectation
/// for the configured scheme; |z| beyond the threshold is flagged.
ValidationRow validate_point(const TrialConfig& config, double z_threshold = 4.0);

/// Pure coding-overhead experiments (no channel losses).
struct OverheadStats {
    double mean = 0;
    double se = 0;
    long trials = 0;
    std::map<long, long> histogram;
};

/// One receiver collecting i.i.d. uniform coefficient columns for m unknowns.
OverheadStats sim_overhead_single(int m, int q, long trials, std::uint64_t seed);

/// Star network: Y receivers with (Y-1)m unknowns each (m unknowns when
/// Y = 1), all fed independent columns per broadcast; the overhead is the
/// number of blocks past the unknown count until the last receiver is done.
OverheadStats sim_overhead_star(int m, int q, int Y, long trials, std::uint64_t seed);

} // namespace starnc::sim
