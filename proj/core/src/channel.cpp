#include "starnc/channel.hpp"

#include <algorithm>
#include <cmath>

namespace starnc::channel {

namespace {
constexpr double kEpsClampLo = 1e-12;
constexpr double kEpsClampHi = 1.0 - 1e-12;
} // namespace

void validate_crossover(double p) {
    if (!(p >= 0.0 && p <= 0.5))
        throw ConfigError("channel: crossover probability must lie in [0, 0.5]");
}

BitVec bsc_transmit(std::span<const std::uint8_t> block, BscParams par, rng::Counter& rng) {
    validate_crossover(par.p);
    BitVec out(block.begin(), block.end());
    if (par.p == 0.0) return out;
    for (auto& b : out)
        if (rng.bernoulli(par.p)) b ^= 1u;
    return out;
}

BitVec adder_mac(std::span<const BitVec> blocks, BscParams p_mac, rng::Counter& rng) {
    return bsc_transmit(rlnc::superpose(blocks), p_mac, rng);
}

double cutoff_rate(double p) {
    validate_crossover(p);
    return -std::log2(0.5 + std::sqrt(p * (1.0 - p)));
}

double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw ConfigError("channel: entropy argument outside [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double capacity(double p) {
    validate_crossover(p);
    return 1.0 - binary_entropy(p);
}

double block_error_ee(double R, double k, double p) {
    validate_crossover(p);
    const double r0 = cutoff_rate(p);
    if (!(R > 0.0) || R >= r0)
        throw ModelDomainError("channel: union-bound exponent requires 0 < R < R0");
    if (!(k > 0.0)) throw ConfigError("channel: block length must be positive");
    return std::exp2(-k * (r0 / R - 1.0));
}

double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double q_inv(double y) {
    if (!(y > 0.0 && y < 1.0))
        throw ModelDomainError("channel: Q^-1 argument must lie in (0, 1)");
    // Bisection bracket, then Newton with the bracket as safeguard.
    double lo = -41.0, hi = 41.0;
    double x = 0.0;
    for (int i = 0; i < 80; ++i) {
        const double q = q_func(x);
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        if (q > y) lo = x; else hi = x;
        double nx = (pdf > 0.0) ? x + (q - y) / pdf : 0.5 * (lo + hi);
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        if (std::abs(nx - x) <= 1e-16 * std::max(1.0, std::abs(x))) { x = nx; break; }
        x = nx;
    }
    return x;
}

namespace {
void validate_dispersion(double n, double p) {
    validate_crossover(p);
    if (p == 0.0 || p == 0.5)
        throw ModelDomainError("channel: normal approximation needs 0 < p < 0.5");
    if (!(n >= 1.0)) throw ConfigError("channel: block length must be >= 1");
}
} // namespace

double ppv_rate(double n, double p, double epsilon) {
    validate_dispersion(n, p);
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ModelDomainError("channel: epsilon must lie in (0, 1)");
    const double eps = std::clamp(epsilon, kEpsClampLo, kEpsClampHi);
    return capacity(p) -
           std::sqrt(p * (1.0 - p) / n) * std::log2((1.0 - p) / p) * q_inv(eps) +
           std::log2(n) / (2.0 * n);
}

double ppv_epsilon(double n, double p, double R) {
    validate_dispersion(n, p);
    if (!(R > 0.0)) throw ModelDomainError("channel: rate must be positive");
    const double arg = (capacity(p) - R + std::log2(n) / (2.0 * n)) *
                       std::sqrt(n / (p * (1.0 - p))) / std::log2((1.0 - p) / p);
    return std::clamp(q_func(arg), kEpsClampLo, kEpsClampHi);
}

double model_epsilon(CodingModel model, double R, double k, double p) {
    validate_crossover(p);
    if (p == 0.0) return 0.0; // noiseless channel decodes every block
    if (model == CodingModel::ErrorExponent) return block_error_ee(R, k, p);
    if (R >= capacity(p))
        throw ModelDomainError("channel: normal approximation requires R < C");
    return ppv_epsilon(k / R, p, R);
}

double rate_limit(CodingModel model, double p) {
    return model == CodingModel::ErrorExponent ? cutoff_rate(p) : capacity(p);
}

} // namespace starnc::channel
