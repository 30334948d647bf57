#include "starnc/overhead.hpp"

#include <cmath>

namespace starnc::overhead {

namespace {

void validate(int m, int x, double q, int Y = 1) {
    if (m < 1) throw ConfigError("overhead: m must be >= 1");
    if (x < 0) throw ConfigError("overhead: x must be >= 0");
    if (!(q >= 2.0)) throw ConfigError("overhead: q must be >= 2");
    if (Y < 1) throw ConfigError("overhead: Y must be >= 1");
}

double binomial(int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * static_cast<double>(n - k + i) / static_cast<double>(i);
    return v;
}

} // namespace

double p_success(int m, int x, double q) {
    validate(m, x, q);
    double pr = 1.0;
    for (int i = 1; i <= m; ++i) {
        const double t = std::pow(q, -static_cast<double>(x + i));
        if (t < 1e-18) break; // remaining factors are 1 to double precision
        pr *= 1.0 - t;
    }
    return pr;
}

double p_success_star(int m, int x, double q, int Y) {
    validate(m, x, q, Y);
    if (Y == 1) return 1.0;
    return std::pow(p_success((Y - 1) * m, x, q), Y);
}

std::pair<double, double> p_success_bounds(int m, int x, double q) {
    validate(m, x, q);
    const double lower = 1.0 - std::pow(q, -x) / (q - 1.0);
    const double upper = 1.0 - std::pow(q, -(x + 1.0));
    return {lower, upper};
}

double expected_overhead(int m, double q) {
    validate(m, 0, q);
    double s = 0.0;
    for (int i = 1; i <= m; ++i) {
        const double t = 1.0 / (std::pow(q, i) - 1.0);
        s += t;
        if (t < 1e-18) break;
    }
    return s;
}

double overhead_upper(double q, int Y) {
    validate(1, 0, q, Y);
    double s = 0.0;
    for (int j = 1; j <= Y; ++j) {
        const double sign = (j % 2 == 1) ? 1.0 : -1.0;
        const double qj = std::pow(q, j);
        s += sign * binomial(Y, j) * (qj * qj - std::pow(q - 1.0, j)) /
             (std::pow(q - 1.0, j) * (qj - 1.0) * (qj - 1.0));
    }
    return s;
}

double overhead_lower(double q, int Y) {
    validate(1, 0, q, Y);
    double s = 0.0;
    for (int j = 1; j <= Y; ++j) {
        const double sign = (j % 2 == 1) ? 1.0 : -1.0;
        const double qj = std::pow(q, j);
        s += sign * binomial(Y, j) * (std::pow(q * q - q, j) - qj) /
             (std::pow(q - 1.0, j) * (qj - 1.0) * (qj - 1.0));
    }
    return s;
}

double star_expected_overhead(int m, double q, int Y) {
    validate(m, 0, q, Y);
    const int unknowns = (Y >= 2) ? (Y - 1) * m : m;
    const int power = (Y >= 2) ? Y : 1;
    double s = 0.0;
    for (int x = 0;; ++x) {
        const double term = 1.0 - std::pow(p_success(unknowns, x, q), power);
        s += term;
        // Tail after x is geometrically dominated by sum_i q^(-x-i) terms.
        if (term < 1e-14 && x > 1) break;
        if (x > 100000) throw ModelDomainError("overhead: series failed to converge");
    }
    return s;
}

} // namespace starnc::overhead
