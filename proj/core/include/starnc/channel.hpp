#pragma once

#include <span>
#include <vector>

#include "starnc/errors.hpp"
#include "starnc/rlnc.hpp"
#include "starnc/rng.hpp"

namespace starnc::channel {

using rlnc::BitVec;

struct BscParams {
    double p = 0.0; // crossover probability in [0, 0.5]
};

/// How block decoding failure is modeled as a function of (R, k, p):
/// the union-bound random-coding exponent (valid for R below the cutoff
/// rate) or the finite-blocklength normal approximation (valid for R below
/// capacity).
enum class CodingModel { ErrorExponent, Ppv };

struct CodeParams {
    double R = 0.5; // code rate, bits per channel use
    double k = 0;   // information bits per block
    double n() const { return k / R; }
};

void validate_crossover(double p);

/// Each bit flipped independently with probability p.
BitVec bsc_transmit(std::span<const std::uint8_t> block, BscParams p, rng::Counter& rng);

/// Hard-decision binary adder channel: mod-2 superposition of the inputs
/// followed by a BSC. Identical to bsc_transmit(superpose(blocks)).
BitVec adder_mac(std::span<const BitVec> blocks, BscParams p_mac, rng::Counter& rng);

/// Cutoff rate -log2(1/2 + sqrt(p(1-p))). Monotone decreasing on [0, 0.5].
double cutoff_rate(double p);

double binary_entropy(double x);
double capacity(double p); // 1 - H(p)

/// Union-bound random-coding block error probability 2^(-k (R0/R - 1)).
/// Requires 0 < R < R0(p).
double block_error_ee(double R, double k, double p);

/// Gaussian tail Q and its inverse (safeguarded Newton on Q).
double q_func(double x);
double q_inv(double y);

/// Normal-approximation achievable rate at block length n and target block
/// error epsilon, and its exact inverse in epsilon. Degenerate dispersion
/// (p = 0 or 0.5) is a model-domain error. Epsilon is clamped to
/// [1e-12, 1 - 1e-12] before the Gaussian inverse.
double ppv_rate(double n, double p, double epsilon);
double ppv_epsilon(double n, double p, double R);

/// Block error probability under the selected model with n = k/R.
double model_epsilon(CodingModel model, double R, double k, double p);

/// Largest admissible rate under the model: cutoff rate or capacity.
double rate_limit(CodingModel model, double p);

} // namespace starnc::channel
