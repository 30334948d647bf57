#pragma once

#include "starnc/throughput.hpp"

namespace starnc::opt {

using throughput::ExpectedCost;
using throughput::NetworkParams;
using throughput::OverheadProxy;
using channel::CodingModel;

/// Lower real branch of the Lambert W function on [-1/e, 0): closed-form
/// approximation (max relative error 0.025%) refined by Halley iteration on
/// ln(-W) + W + a = 0 until |W e^W - x| <= 1e-12 |x|.
double lambert_w_m1(double x);

/// W_-1(-e^-a) for a >= 1. Stable for arguments whose -e^-a underflows.
double lambert_w_m1_exp(double a);

/// Raw closed-form approximation, before refinement, parameterized either by
/// x or by sigma = -ln(-x) - 1.
double lambert_w_m1_approx(double x);
double lambert_w_m1_approx_sigma(double sigma);

/// Throughput-maximizing rate for a single point-to-point phase as a
/// fraction of the cutoff rate. Function of the block length k only.
double optimal_rate_ratio_mac(double k);

/// Continuous throughput-maximizing block count for h = 0 and two sources,
/// at a fixed rate deficit z = R0/R - 1.
double optimal_m_closed_form(double K, double q, double z);

/// Stationarity residuals of the bit-cost objectives, as functions of
/// u = R/R0 at block length k. Roots coincide with the minimizing rates;
/// used to cross-check the search results.
double residual_rate_mac(double u, double k);
double residual_rate_broadcast_tdma(double u, double k, int Y);
double residual_rate_joint_tdma(double u, double k, int Y);

enum class Phase { Mac, Broadcast, Joint };
enum class Scheme { Rlnc, Tdma };

struct OptimizeOptions {
    OverheadProxy proxy = OverheadProxy::UpperBound;
    bool exhaustive = false; // scan every admissible m up to m_max
    int m_max = 0;           // 0 selects min(K/l, 4096)
};

struct OptimizationResult {
    int m_opt = 1;
    double R_opt = 0;
    double rate_ratio = 0; // R_opt over the model's rate limit
    ExpectedCost cost;
    int m_scanned = 0;
    long rate_evals = 0;
    bool exhaustive = false;
    bool grid_fallback = false; // golden section rejected a non-unimodal bracket
};

/// Expected bit-time of the selected scheme and phase at the operating point
/// (params.m, params.R).
double objective_bits(const NetworkParams& params, Scheme scheme, Phase phase,
                      OverheadProxy proxy = OverheadProxy::UpperBound);

/// Minimizes objective_bits over admissible m (integer scan, early-stopped
/// unless exhaustive) and R (golden section on a unimodality-checked
/// bracket, dense-grid fallback otherwise).
OptimizationResult optimize(const NetworkParams& base, Scheme scheme, Phase phase,
                            const OptimizeOptions& options = {});

/// Broadcast-phase optimal rate ratio for the repetition scheme at block
/// length k and Y destinations' worth of receivers.
double optimal_rate_broadcast_tdma(double k, int Y, double p, CodingModel model);

struct RatioAtOptima {
    OptimizationResult rlnc;
    OptimizationResult tdma;
    double ratio = 0; // TDMA bits over RLNC bits, each at its own optimum
};

RatioAtOptima ratio_at_optima(const NetworkParams& base,
                              const OptimizeOptions& options = {});

/// Message length where the full-exchange ratio crosses 1, by bisection.
/// Requires a sign change over [K_lo, K_hi].
double crossing_message_length(const NetworkParams& base, long K_lo, long K_hi,
                               const OptimizeOptions& options = {});

} // namespace starnc::opt
