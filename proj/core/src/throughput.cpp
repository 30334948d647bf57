#include "starnc/throughput.hpp"

#include <bit>
#include <cmath>
#include <vector>

namespace starnc::throughput {

int NetworkParams::l() const {
    const auto uq = static_cast<unsigned>(q);
    if (q < 2 || q > (1 << 16) || !std::has_single_bit(uq))
        throw ConfigError("params: q must be a power of two in [2, 2^16]");
    return std::countr_zero(uq);
}

long NetworkParams::padded_K() const {
    const long unit = static_cast<long>(m) * l();
    if (K <= 0 || m < 1) throw ConfigError("params: K and m must be positive");
    if (K % unit == 0) return K;
    if (strict_divisibility)
        throw ConfigError("params: K must be divisible by m*l in strict mode");
    return (K / unit + 1) * unit;
}

double NetworkParams::k() const {
    return static_cast<double>(padded_K()) / m + h;
}

double NetworkParams::n() const {
    if (!(R > 0.0) || R > 1.0) throw ConfigError("params: rate must lie in (0, 1]");
    return k() / R;
}

long NetworkParams::n_int() const { return static_cast<long>(std::ceil(n())); }

double NetworkParams::eps_mac() const {
    return channel::model_epsilon(model, R, k(), p_mac);
}

double NetworkParams::eps_br() const {
    return channel::model_epsilon(model, R, k(), p_br);
}

void NetworkParams::validate() const {
    if (Y < 1) throw ConfigError("params: Y must be >= 1");
    if (h < 0) throw ConfigError("params: h must be >= 0");
    channel::validate_crossover(p_mac);
    channel::validate_crossover(p_br);
    (void)l();
    (void)padded_K();
    (void)n();
}

namespace {

double binomial(int n, int kk) {
    double v = 1.0;
    for (int i = 1; i <= kk; ++i) v = v * static_cast<double>(n - kk + i) / static_cast<double>(i);
    return v;
}

constexpr double kTermTol = 1e-12;
constexpr double kTailTol = 1e-10;

} // namespace

double overhead_proxy_value(const NetworkParams& p, OverheadProxy proxy) {
    switch (proxy) {
        case OverheadProxy::UpperBound: return overhead::overhead_upper(p.q, p.Y);
        case OverheadProxy::Exact: return overhead::star_expected_overhead(p.m, p.q, p.Y);
        case OverheadProxy::Zero: return 0.0;
    }
    return 0.0;
}

double mac_rlnc_blocks(const NetworkParams& p, OverheadProxy proxy) {
    const double e = p.eps_mac();
    if (!(e < 1.0)) throw ModelDomainError("throughput: eps_mac must be < 1");
    return (static_cast<double>(p.Y - 1) * p.m + overhead_proxy_value(p, proxy)) / (1.0 - e);
}

double mac_rlnc_bits(const NetworkParams& p, OverheadProxy proxy) {
    return mac_rlnc_blocks(p, proxy) * p.n();
}

double mac_tdma_blocks(const NetworkParams& p) {
    const double e = p.eps_mac();
    if (!(e < 1.0)) throw ModelDomainError("throughput: eps_mac must be < 1");
    return static_cast<double>(p.Y) * p.m / (1.0 - e);
}

double mac_tdma_bits(const NetworkParams& p) { return mac_tdma_blocks(p) * p.n(); }

double br_tdma_blocks(const NetworkParams& p) {
    if (p.Y < 2) return 0.0;
    const double e = p.eps_br();
    double s = 0.0;
    for (int i = 1; i <= p.Y - 1; ++i) {
        const double sign = (i % 2 == 1) ? 1.0 : -1.0;
        s += sign * binomial(p.Y - 1, i) / (1.0 - std::pow(e, i));
    }
    return static_cast<double>(p.Y) * p.m * s;
}

double br_tdma_blocks_series(const NetworkParams& p) {
    if (p.Y < 2) return 0.0;
    const double e = p.eps_br();
    double s = 0.0;
    for (int i = 0;; ++i) {
        const double term = 1.0 - std::pow(1.0 - std::pow(e, i), p.Y - 1);
        s += term;
        if (term < 1e-15 && i > 0) break;
        if (i > 10000000) throw ModelDomainError("throughput: ARQ series failed to converge");
    }
    return static_cast<double>(p.Y) * p.m * s;
}

double br_tdma_bits(const NetworkParams& p) { return br_tdma_blocks(p) * p.n(); }

SeriesValue br_rlnc_blocks_detail(const NetworkParams& p) {
    const int mp = p.m * (p.Y - 1);
    if (mp == 0) return {0.0, 0};
    const double e = p.eps_br();
    if (!(e < 1.0)) throw ModelDomainError("throughput: eps_br must be < 1");
    const double q = p.q;

    // Rank-completion probabilities flatten once q^-x is below precision.
    int xcap = 1;
    while (std::pow(q, -xcap) > 1e-17 && xcap < 4000) ++xcap;
    std::vector<double> psucc(static_cast<std::size_t>(xcap) + 1);
    for (int x = 0; x <= xcap; ++x) psucc[static_cast<std::size_t>(x)] = overhead::p_success(mp, x, q);
    auto P = [&](int x) { return psucc[static_cast<std::size_t>(std::min(x, xcap))]; };

    const double log_keep = std::log1p(-e);
    const double log_lose = (e > 0.0) ? std::log(e) : 0.0;
    const double tail_r = std::min(0.99, std::max(e, 1.0 / q));

    // Binomial(i, 1-e) weight of j received out of i, evaluated at the mode
    // and swept outward so neither endpoint underflow nor a distant mode can
    // hide probability mass.
    auto log_pmf = [&](int i, int j) {
        return std::lgamma(i + 1.0) - std::lgamma(j + 1.0) - std::lgamma(i - j + 1.0) +
               j * log_keep + (i - j) * log_lose;
    };

    double s = static_cast<double>(mp);
    int i = mp;
    for (;; ++i) {
        // P(one receiver done after i blocks) =
        //   sum_{j=mp..i} C(i,j) (1-e)^j e^(i-j) P(mp, j-mp, q)
        double F = 0.0;
        if (e == 0.0) {
            F = P(i - mp);
        } else {
            const int jmode = std::clamp(static_cast<int>((1.0 - e) * (i + 1)), mp, i);
            double pmf = std::exp(log_pmf(i, jmode));
            for (int j = jmode; j >= mp; --j) { // downward from the mode
                F += pmf * P(j - mp);
                if (pmf < 1e-18) break;
                pmf *= (1.0 / ((1.0 - e) * (i - j + 1.0))) * (e * j);
            }
            if (jmode < i) {
                pmf = std::exp(log_pmf(i, jmode + 1));
                for (int j = jmode + 1; j <= i; ++j) { // upward from the mode
                    F += pmf * P(j - mp);
                    if (pmf < 1e-18) break;
                    pmf *= ((1.0 - e) * (i - j)) / (e * (j + 1.0));
                }
            }
        }
        const double term = 1.0 - std::pow(std::min(F, 1.0), p.Y);
        s += term;
        const double tail_bound = term * tail_r / (1.0 - tail_r);
        if (term < kTermTol && tail_bound < kTailTol && i > mp + 1) break;
        if (i - mp > 2000000) throw ModelDomainError("throughput: NC broadcast series failed to converge");
    }
    return {s, i - mp};
}

double br_rlnc_blocks(const NetworkParams& p) { return br_rlnc_blocks_detail(p).value; }

double star_rlnc_slots(const NetworkParams& p) {
    const double e_mac = p.eps_mac();
    if (!(e_mac < 1.0)) throw ModelDomainError("throughput: eps_mac must be < 1");
    return br_rlnc_blocks(p) * (1.0 + 1.0 / (1.0 - e_mac));
}

double star_tdma_slots(const NetworkParams& p) {
    return mac_tdma_blocks(p) + br_tdma_blocks(p);
}

double star_rlnc_bits(const NetworkParams& p) { return star_rlnc_slots(p) * p.n(); }
double star_tdma_bits(const NetworkParams& p) { return star_tdma_slots(p) * p.n(); }

namespace {
ExpectedCost make_cost(const NetworkParams& p, double slots) {
    ExpectedCost c;
    c.blocks = slots;
    c.bits = slots * p.n();
    c.throughput = static_cast<double>(p.Y) * static_cast<double>(p.K) / c.bits;
    return c;
}
} // namespace

ExpectedCost star_rlnc_cost(const NetworkParams& p) { return make_cost(p, star_rlnc_slots(p)); }
ExpectedCost star_tdma_cost(const NetworkParams& p) { return make_cost(p, star_tdma_slots(p)); }

double throughput_ratio(const NetworkParams& rlnc, const NetworkParams& tdma) {
    return star_tdma_bits(tdma) / star_rlnc_bits(rlnc);
}

} // namespace starnc::throughput
