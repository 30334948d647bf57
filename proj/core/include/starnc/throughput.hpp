#pragma once

#include "starnc/channel.hpp"
#include "starnc/errors.hpp"
#include "starnc/overhead.hpp"

namespace starnc::throughput {

using channel::CodingModel;

/// Full scenario description for one operating point. The padding policy
/// mirrors the divisibility assumption: strict mode rejects K not divisible
/// by m*l, relaxed mode pads the message to the next multiple and charges
/// the extra bits to every cost expression.
struct NetworkParams {
    int Y = 2;               // sources
    long K = 10000;          // message bits per source
    int h = 16;              // header bits per block
    int q = 4;               // field size, power of two up to 2^16
    int m = 1;               // data blocks per source
    double p_mac = 0.04;     // source->relay crossover probability
    double p_br = 0.04;      // relay->source crossover probability
    CodingModel model = CodingModel::ErrorExponent;
    double R = 0.5;          // channel code rate
    bool strict_divisibility = false;

    int l() const;           // extension degree, q = 2^l
    long padded_K() const;   // message bits after padding (== K in strict mode)
    double k() const;        // channel input block bits: padded_K/m + h
    double n() const;        // real-valued coded block bits k/R
    long n_int() const;      // whole-bit block length ceil(k/R), used by reports
    double eps_mac() const;
    double eps_br() const;

    void validate() const;
};

/// Which overhead figure stands in for the expected star-network coding
/// overhead in the MAC-phase expressions: the m-independent upper bound
/// (the paper-facing default), the exact series, or zero (large-q limit).
enum class OverheadProxy { UpperBound, Exact, Zero };

double overhead_proxy_value(const NetworkParams& p, OverheadProxy proxy);

/// Costs of one phase or the whole exchange, in blocks (or slots) and in
/// bit-time units; throughput is delivered bits Y*K over bit-time.
struct ExpectedCost {
    double blocks = 0;
    double bits = 0;
    double throughput = 0;
};

// MAC phase.
double mac_rlnc_blocks(const NetworkParams& p, OverheadProxy proxy = OverheadProxy::UpperBound);
double mac_rlnc_bits(const NetworkParams& p, OverheadProxy proxy = OverheadProxy::UpperBound);
double mac_tdma_blocks(const NetworkParams& p);
double mac_tdma_bits(const NetworkParams& p);

// Broadcast phase, repetition/ARQ scheme. The series and the finite
// inclusion-exclusion sum are algebraically equal; both are kept as a
// standing regression pair.
double br_tdma_blocks(const NetworkParams& p);        // finite sum over Y-1 destinations
double br_tdma_blocks_series(const NetworkParams& p); // direct series
double br_tdma_bits(const NetworkParams& p);

// Broadcast phase, network-coded scheme.
struct SeriesValue {
    double value = 0;
    int truncation_index = 0; // last overhead index included
};
SeriesValue br_rlnc_blocks_detail(const NetworkParams& p);
double br_rlnc_blocks(const NetworkParams& p);

// Whole star exchange, same (m, R) in both phases. One slot is one coded
// block of n bit-times; every broadcast costs on average 1/(1-eps_mac)
// uplink slots on top of itself.
double star_rlnc_slots(const NetworkParams& p);
double star_tdma_slots(const NetworkParams& p);
double star_rlnc_bits(const NetworkParams& p);
double star_tdma_bits(const NetworkParams& p);

ExpectedCost star_rlnc_cost(const NetworkParams& p);
ExpectedCost star_tdma_cost(const NetworkParams& p);

/// Bit-time ratio TDMA/RLNC of the full exchange; above 1 the network-coded
/// scheme is the more throughput-efficient one.
double throughput_ratio(const NetworkParams& rlnc, const NetworkParams& tdma);

} // namespace starnc::throughput
