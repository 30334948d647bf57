#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "starnc/errors.hpp"

namespace starnc::gf {

using Element = std::uint16_t;

/// Arithmetic context for GF(2^l), 1 <= l <= 16. Addition is bitwise XOR of
/// l-bit words; multiplication is polynomial multiplication modulo the
/// numerically least primitive polynomial of degree l (the table is fixed so
/// coefficient streams reproduce bit-for-bit across implementations).
/// Immutable after construction and safe to share across threads.
class Field {
public:
    explicit Field(int degree);

    /// Cached shared context per degree.
    static const Field& of(int degree);

    int degree() const { return degree_; }
    std::uint32_t size() const { return size_; }
    std::uint32_t reduction_poly() const { return poly_; }

    static Element add(Element a, Element b) { return a ^ b; }

    Element mul(Element a, Element b) const {
        if (a == 0 || b == 0) return 0;
        return exp_[log_[a] + log_[b]];
    }

    /// Multiplicative inverse; a = 0 is a division-by-zero error.
    Element inv(Element a) const {
        if (a == 0) throw ModelDomainError("gf: inverse of zero");
        return exp_[size_ - 1 - log_[a]];
    }

    Element div(Element a, Element b) const { return mul(a, inv(b)); }

private:
    int degree_;
    std::uint32_t size_;
    std::uint32_t poly_;
    std::vector<Element> exp_; // x^i for i in [0, 2(q-1))
    std::vector<std::uint32_t> log_;
};

/// Numerically least primitive polynomial of degree l, as the bitmask of its
/// coefficients including the x^l term (index 1..16).
std::uint32_t primitive_poly(int degree);

using SymbolVec = std::vector<Element>;

/// Dense matrix of field elements, addressed (row, col).
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), e_(rows * cols, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Element& at(std::size_t r, std::size_t c) { return e_[r * cols_ + c]; }
    Element at(std::size_t r, std::size_t c) const { return e_[r * cols_ + c]; }

    static Matrix identity(const Field& f, std::size_t n);

    std::size_t rank(const Field& f) const;

private:
    std::size_t rows_, cols_;
    std::vector<Element> e_;
};

/// Incremental Gauss-Jordan over an augmented system [A | B]. Equations
/// arrive one at a time; the reduced basis is kept so each ingest costs
/// O(unknowns * (unknowns + payload)) and the current rank is always
/// available. Single writer, no internal locking.
class IncrementalSolver {
public:
    IncrementalSolver(const Field& f, std::size_t unknowns, std::size_t payload)
        : f_(&f), unknowns_(unknowns), payload_(payload) {}

    /// Adds equation  sum_j coeffs[j] * u_j = payload. Returns true when the
    /// rank increased. A dependent equation whose payload disagrees with the
    /// stored rows marks the system inconsistent.
    bool ingest(std::span<const Element> coeffs, std::span<const Element> payload);

    std::size_t rank() const { return rows_.size(); }
    std::size_t unknowns() const { return unknowns_; }
    bool decodable() const { return rank() == unknowns_; }
    bool inconsistent() const { return inconsistent_; }

    /// Unknowns as payload rows; requires decodable().
    std::vector<SymbolVec> solve() const;

private:
    const Field* f_;
    std::size_t unknowns_, payload_;
    bool inconsistent_ = false;
    std::vector<SymbolVec> rows_;      // reduced rows, width unknowns_+payload_
    std::vector<std::size_t> pivots_;  // pivot column of rows_[i]
};

struct RankSolveResult {
    std::size_t rank = 0;
    std::optional<std::vector<SymbolVec>> solution;
};

/// Rank of `coeffs` and, when it equals the row count, the unique solution of
/// coeffs^T * unknowns = rhs. rhs holds one symbol vector per column of
/// `coeffs`; a mismatch is a contract error.
RankSolveResult rank_and_solve(const Field& f, const Matrix& coeffs,
                               std::span<const SymbolVec> rhs);

/// Rank-only tracker with bitsliced rows: a vector over GF(2^l) is stored as
/// l bit planes, so a scalar multiply-accumulate is at most l^2 word XORs.
/// This is the hot path of the protocol simulator.
class BitslicedRank {
public:
    BitslicedRank(const Field& f, std::size_t unknowns);

    /// Returns true when the column increased the rank.
    bool ingest(std::span<const Element> column);

    std::size_t rank() const { return pivots_.size(); }
    std::size_t unknowns() const { return unknowns_; }
    bool complete() const { return rank() == unknowns_; }

private:
    Element get(const std::uint64_t* planes, std::size_t pos) const;

    const Field* f_;
    int l_;
    std::size_t unknowns_, words_;
    std::vector<std::uint64_t> rows_;  // row-major: row r at rows_[r*l_*words_]
    std::vector<std::size_t> pivots_;  // ascending pivot positions
    std::vector<std::uint64_t> work_;
    std::vector<std::uint64_t> norm_;
};

} // namespace starnc::gf
