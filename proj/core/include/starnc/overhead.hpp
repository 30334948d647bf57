#pragma once

#include <utility>

#include "starnc/errors.hpp"

namespace starnc::overhead {

/// Probability that m + x independently uniform coefficient columns over
/// GF(q) contain m linearly independent ones: prod_{i=1..m} (1 - q^(-x-i)).
double p_success(int m, int x, double q);

/// Star-network variant: every one of the Y receivers resolves its (Y-1)m
/// unknowns from (Y-1)m + x columns, receivers independent. Y = 1 has no
/// unknowns and succeeds with probability 1 (empty product convention).
double p_success_star(int m, int x, double q, int Y);

/// m-independent bounds: lower = 1 - q^(-x)/(q-1), upper = 1 - q^(-x-1);
/// lower < p_success(m, x, q) <= upper. m is part of the contract but does
/// not enter the bounds.
std::pair<double, double> p_success_bounds(int m, int x, double q);

/// Expected number of extra columns beyond m until full rank:
/// sum_{i=1..m} 1/(q^i - 1).
double expected_overhead(int m, double q);

/// Closed-form bounds on the expected star-network overhead, independent of
/// the number of blocks m. Alternating inclusion-exclusion sums over the Y
/// receivers; both tend to zero as q grows.
double overhead_upper(double q, int Y);
double overhead_lower(double q, int Y);

/// Exact expected star-network overhead under receiver independence:
/// sum_{x>=0} (1 - p_success((Y-1)m, x, q)^Y). For Y = 1 this is the
/// single-source experiment with m unknowns, i.e. expected_overhead(m, q).
double star_expected_overhead(int m, double q, int Y);

} // namespace starnc::overhead
