#include "starnc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace starnc::opt {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kA1 = 0.3361, kA2 = 0.0042, kA3 = 0.0201;

/// Halley iteration on g(W) = ln(-W) + W + a, the defining identity of
/// W_-1(-e^-a) written in logs so it never under- or overflows.
double refine_wm1(double w, double a) {
    for (int it = 0; it < 100; ++it) {
        const double g = std::log(-w) + w + a;
        const double gp = 1.0 / w + 1.0;
        const double gpp = -1.0 / (w * w);
        double step = g * gp / (gp * gp - 0.5 * g * gpp);
        double next = w - step;
        if (!std::isfinite(next) || next >= -1.0) next = w - g / gp;
        if (!std::isfinite(next) || next >= -1.0) next = -1.0 - 0.5 * (-1.0 - w);
        if (std::abs(next - w) <= 1e-16 * std::abs(w)) return next;
        w = next;
    }
    return w;
}

} // namespace

double lambert_w_m1_approx_sigma(double sigma) {
    if (sigma < 0) throw ModelDomainError("lambert: argument outside [-1/e, 0)");
    if (sigma == 0.0) return -1.0;
    const double inner = 1.0 - kA2 * sigma * std::exp(-kA3 * std::sqrt(sigma));
    const double frac = kA1 * std::sqrt(0.5 * sigma) / inner;
    return -(sigma + 1.0) - (2.0 / kA1) * (1.0 - 1.0 / (1.0 + frac));
}

double lambert_w_m1_approx(double x) {
    if (!(x >= -1.0 / M_E) || !(x < 0.0))
        throw ModelDomainError("lambert: argument outside [-1/e, 0)");
    return lambert_w_m1_approx_sigma(std::max(0.0, -std::log(-x) - 1.0));
}

double lambert_w_m1_exp(double a) {
    if (!(a >= 1.0)) throw ModelDomainError("lambert: need a >= 1 for the lower branch");
    const double sigma = a - 1.0;
    if (sigma == 0.0) return -1.0;
    double w = lambert_w_m1_approx_sigma(sigma);
    // The approximation has a removable pole where its inner denominator
    // crosses zero; fall back to the asymptotic start there.
    if (!std::isfinite(w) || w >= -1.0) w = -a - std::log1p(sigma);
    return refine_wm1(w, a);
}

double lambert_w_m1(double x) {
    if (!(x >= -1.0 / M_E) || !(x < 0.0))
        throw ModelDomainError("lambert: argument outside [-1/e, 0)");
    return lambert_w_m1_exp(-std::log(-x));
}

double optimal_rate_ratio_mac(double k) {
    if (!(k >= 1.0)) throw ConfigError("optimizer: block length must be >= 1");
    const double a = kLn2 * k + 1.0;
    return -kLn2 * k / (lambert_w_m1_exp(a) + 1.0);
}

double optimal_m_closed_form(double K, double q, double z) {
    if (!(K > 0) || !(z > 0)) throw ConfigError("optimizer: need K > 0 and z > 0");
    const double xs = overhead::overhead_upper(q, 2);
    const double a = 1.0 + kLn2 * z * K / xs;
    return -kLn2 * z * K / (a + lambert_w_m1_exp(a));
}

double residual_rate_mac(double u, double k) {
    const double z = 1.0 / u - 1.0;
    const double eps = std::exp2(-k * z);
    return 1.0 - eps - kLn2 * k / u * eps;
}

namespace {

double binomial(int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * static_cast<double>(n - k + i) / static_cast<double>(i);
    return v;
}

double residual_br_part(double u, double k, int Y) {
    const double z = 1.0 / u - 1.0;
    double s = 0.0;
    for (int i = 1; i <= Y - 1; ++i) {
        const double sign = (i % 2 == 1) ? 1.0 : -1.0;
        const double ei = std::exp2(-static_cast<double>(i) * k * z);
        s += sign * binomial(Y - 1, i) * ((1.0 - ei) - i * kLn2 * k / u * ei) /
             ((1.0 - ei) * (1.0 - ei));
    }
    return s;
}

} // namespace

double residual_rate_broadcast_tdma(double u, double k, int Y) {
    if (Y < 2) throw ConfigError("optimizer: broadcast needs Y >= 2");
    return residual_br_part(u, k, Y);
}

double residual_rate_joint_tdma(double u, double k, int Y) {
    if (Y < 2) throw ConfigError("optimizer: joint needs Y >= 2");
    const double z = 1.0 / u - 1.0;
    const double eps = std::exp2(-k * z);
    const double mac = ((1.0 - eps) - kLn2 * k / u * eps) / ((1.0 - eps) * (1.0 - eps));
    return mac + residual_br_part(u, k, Y);
}

double objective_bits(const NetworkParams& params, Scheme scheme, Phase phase,
                      OverheadProxy proxy) {
    using namespace throughput;
    if (scheme == Scheme::Rlnc) {
        switch (phase) {
            case Phase::Mac: return mac_rlnc_bits(params, proxy);
            case Phase::Broadcast: return br_rlnc_blocks(params) * params.n();
            case Phase::Joint: return star_rlnc_bits(params);
        }
    } else {
        switch (phase) {
            case Phase::Mac: return mac_tdma_bits(params);
            case Phase::Broadcast: return br_tdma_bits(params);
            case Phase::Joint: return star_tdma_bits(params);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

namespace {

struct RateSearch {
    double R = 0;
    double value = std::numeric_limits<double>::infinity();
    long evals = 0;
    bool grid_fallback = false;
};

RateSearch golden_section(const std::function<double(double)>& f, double lo, double hi) {
    RateSearch out;
    auto eval = [&](double r) {
        ++out.evals;
        return f(r);
    };

    // Unimodality screen: a bracket with more than one strict local minimum
    // goes to a dense grid instead.
    constexpr int kScreen = 33;
    std::vector<double> xs(kScreen), vs(kScreen);
    for (int i = 0; i < kScreen; ++i) {
        xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (kScreen - 1);
        vs[static_cast<std::size_t>(i)] = eval(xs[static_cast<std::size_t>(i)]);
    }
    int minima = 0;
    int best_i = 0;
    for (int i = 0; i < kScreen; ++i) {
        if (vs[static_cast<std::size_t>(i)] < vs[static_cast<std::size_t>(best_i)]) best_i = i;
        const bool left_up = i == 0 || vs[static_cast<std::size_t>(i - 1)] > vs[static_cast<std::size_t>(i)];
        const bool right_up = i == kScreen - 1 || vs[static_cast<std::size_t>(i + 1)] > vs[static_cast<std::size_t>(i)];
        if (left_up && right_up) ++minima;
    }

    double a = xs[static_cast<std::size_t>(std::max(0, best_i - 1))];
    double b = xs[static_cast<std::size_t>(std::min(kScreen - 1, best_i + 1))];
    if (minima > 1) {
        out.grid_fallback = true;
        constexpr int kGrid = 4001;
        double bv = std::numeric_limits<double>::infinity();
        double bx = lo;
        for (int i = 0; i < kGrid; ++i) {
            const double x = lo + (hi - lo) * i / (kGrid - 1);
            const double v = eval(x);
            if (v < bv) { bv = v; bx = x; }
        }
        a = std::max(lo, bx - (hi - lo) / (kGrid - 1));
        b = std::min(hi, bx + (hi - lo) / (kGrid - 1));
    }

    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    while (b - a > 1e-10) {
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = eval(x2);
        }
    }
    out.R = 0.5 * (a + b);
    out.value = eval(out.R);
    return out;
}

} // namespace

OptimizationResult optimize(const NetworkParams& base, Scheme scheme, Phase phase,
                            const OptimizeOptions& options) {
    NetworkParams p = base;
    p.m = 1;
    p.validate();
    // Only the channels the phase actually uses constrain the rate.
    double limit = 0;
    switch (phase) {
        case Phase::Mac: limit = channel::rate_limit(p.model, p.p_mac); break;
        case Phase::Broadcast: limit = channel::rate_limit(p.model, p.p_br); break;
        case Phase::Joint:
            limit = std::min(channel::rate_limit(p.model, p.p_mac),
                             channel::rate_limit(p.model, p.p_br));
            break;
    }
    const double r_lo = 1e-3;
    const double r_hi = 0.999 * std::min(limit, 1.0);
    if (!(r_lo < r_hi)) throw ModelDomainError("optimizer: empty rate bracket");

    // The point-to-point closed form is the exact per-m minimizer whenever
    // the objective is (rate-independent prefactor) * k/(R (1-eps_ee)).
    const bool closed_form_rate =
        p.model == CodingModel::ErrorExponent && phase == Phase::Mac &&
        p.p_mac > 0.0;

    long m_cap = options.m_max > 0 ? options.m_max
                                   : std::min<long>(base.K / base.l(), 4096);
    m_cap = std::max<long>(1, m_cap);

    OptimizationResult out;
    out.exhaustive = options.exhaustive;
    double best = std::numeric_limits<double>::infinity();
    int since_improvement = 0;

    for (int m = 1; m <= m_cap; ++m) {
        p.m = m;
        if (base.strict_divisibility &&
            base.K % (static_cast<long>(m) * base.l()) != 0)
            continue;
        ++out.m_scanned;

        double R = 0, value = 0;
        if (closed_form_rate) {
            R = optimal_rate_ratio_mac(p.k()) * channel::cutoff_rate(p.p_mac);
            R = std::clamp(R, r_lo, r_hi);
            p.R = R;
            value = objective_bits(p, scheme, phase, options.proxy);
            ++out.rate_evals;
        } else {
            auto search = golden_section(
                [&](double r) {
                    p.R = r;
                    return objective_bits(p, scheme, phase, options.proxy);
                },
                r_lo, r_hi);
            R = search.R;
            value = search.value;
            out.rate_evals += search.evals;
            out.grid_fallback = out.grid_fallback || search.grid_fallback;
        }

        if (value < best) {
            best = value;
            out.m_opt = m;
            out.R_opt = R;
            since_improvement = 0;
        } else if (!options.exhaustive) {
            if (++since_improvement >= 16 && m > 2 * out.m_opt) break;
        }
    }

    p.m = out.m_opt;
    p.R = out.R_opt;
    out.rate_ratio = out.R_opt / limit;
    out.cost.blocks = objective_bits(p, scheme, phase, options.proxy) / p.n();
    out.cost.bits = best;
    out.cost.throughput = static_cast<double>(p.Y) * static_cast<double>(p.K) / best;
    return out;
}

double optimal_rate_broadcast_tdma(double k, int Y, double p, CodingModel model) {
    if (Y < 2) throw ConfigError("optimizer: broadcast needs Y >= 2");
    const double limit = channel::rate_limit(model, p);
    auto bits = [&](double R) {
        const double e = channel::model_epsilon(model, R, k, p);
        double s = 0.0;
        for (int i = 1; i <= Y - 1; ++i) {
            const double sign = (i % 2 == 1) ? 1.0 : -1.0;
            s += sign * binomial(Y - 1, i) / (1.0 - std::pow(e, i));
        }
        return k / R * s;
    };
    auto search = golden_section(bits, 1e-3, 0.999 * std::min(limit, 1.0));
    return search.R / limit;
}

RatioAtOptima ratio_at_optima(const NetworkParams& base, const OptimizeOptions& options) {
    RatioAtOptima out;
    out.rlnc = optimize(base, Scheme::Rlnc, Phase::Joint, options);
    out.tdma = optimize(base, Scheme::Tdma, Phase::Joint, options);
    out.ratio = out.tdma.cost.bits / out.rlnc.cost.bits;
    return out;
}

double crossing_message_length(const NetworkParams& base, long K_lo, long K_hi,
                               const OptimizeOptions& options) {
    NetworkParams p = base;
    auto excess = [&](long K) {
        p.K = K;
        return ratio_at_optima(p, options).ratio - 1.0;
    };
    double f_lo = excess(K_lo);
    double f_hi = excess(K_hi);
    if (f_lo * f_hi > 0)
        throw ModelDomainError("optimizer: no ratio crossing inside the bracket");
    double lo = static_cast<double>(K_lo), hi = static_cast<double>(K_hi);
    while (hi - lo > 1.0) {
        const long mid = static_cast<long>(0.5 * (lo + hi));
        const double f_mid = excess(mid);
        if ((f_lo < 0) == (f_mid < 0)) {
            lo = static_cast<double>(mid);
            f_lo = f_mid;
        } else {
            hi = static_cast<double>(mid);
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace starnc::opt
