#include "starnc/galois.hpp"

#include <array>
#include <bit>
#include <map>
#include <mutex>

namespace starnc::gf {

namespace {

// Numerically least primitive polynomial per degree, verified at table build
// time by checking that x has multiplicative order 2^l - 1.
constexpr std::array<std::uint32_t, 17> kPrimitivePoly = {
    0,       0x3,    0x7,    0xB,    0x13,   0x25,    0x43,   0x83,  0x11D,
    0x211,   0x409,  0x805,  0x1053, 0x201B, 0x402B,  0x8003, 0x1002D,
};

} // namespace

std::uint32_t primitive_poly(int degree) {
    if (degree < 1 || degree > 16)
        throw ConfigError("gf: extension degree must be in [1, 16]");
    return kPrimitivePoly[static_cast<std::size_t>(degree)];
}

Field::Field(int degree)
    : degree_(degree),
      size_(degree >= 1 && degree <= 16 ? (1u << degree) : 0),
      poly_(primitive_poly(degree)) {
    const std::uint32_t q = size_;
    exp_.assign(2 * (q - 1) + 1, 0);
    log_.assign(q, 0);
    std::uint32_t v = 1;
    for (std::uint32_t i = 0; i < q - 1; ++i) {
        exp_[i] = static_cast<Element>(v);
        if (log_[v] != 0 && v != 1)
            throw ConfigError("gf: reduction polynomial is not primitive");
        log_[v] = i;
        v <<= 1;
        if (v & q) v ^= poly_;
    }
    if (v != 1) throw ConfigError("gf: reduction polynomial is not primitive");
    for (std::uint32_t i = 0; i < q - 1; ++i) exp_[q - 1 + i] = exp_[i];
}

const Field& Field::of(int degree) {
    static std::mutex mu;
    static std::map<int, Field> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(degree);
    if (it == cache.end()) it = cache.emplace(degree, Field(degree)).first;
    return it->second;
}

Matrix Matrix::identity(const Field&, std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

std::size_t Matrix::rank(const Field& f) const {
    // Plain row echelon on a copy.
    std::vector<SymbolVec> work;
    work.reserve(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        SymbolVec row(cols_);
        for (std::size_t j = 0; j < cols_; ++j) row[j] = at(i, j);
        work.push_back(std::move(row));
    }
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols_ && rank < rows_; ++col) {
        std::size_t piv = rank;
        while (piv < rows_ && work[piv][col] == 0) ++piv;
        if (piv == rows_) continue;
        std::swap(work[piv], work[rank]);
        const Element lead_inv = f.inv(work[rank][col]);
        for (std::size_t j = col; j < cols_; ++j)
            work[rank][j] = f.mul(work[rank][j], lead_inv);
        for (std::size_t i = rank + 1; i < rows_; ++i) {
            const Element c = work[i][col];
            if (c == 0) continue;
            for (std::size_t j = col; j < cols_; ++j)
                work[i][j] = Field::add(work[i][j], f.mul(c, work[rank][j]));
        }
        ++rank;
    }
    return rank;
}

bool IncrementalSolver::ingest(std::span<const Element> coeffs,
                               std::span<const Element> payload) {
    if (coeffs.size() != unknowns_ || payload.size() != payload_)
        throw ConfigError("gf: equation width mismatch");
    SymbolVec cur(unknowns_ + payload_);
    std::copy(coeffs.begin(), coeffs.end(), cur.begin());
    std::copy(payload.begin(), payload.end(), cur.begin() + static_cast<std::ptrdiff_t>(unknowns_));

    for (std::size_t r = 0; r < rows_.size(); ++r) {
        const Element c = cur[pivots_[r]];
        if (c == 0) continue;
        const SymbolVec& row = rows_[r];
        for (std::size_t j = 0; j < cur.size(); ++j)
            cur[j] = Field::add(cur[j], f_->mul(c, row[j]));
    }
    std::size_t pivot = unknowns_;
    for (std::size_t j = 0; j < unknowns_; ++j)
        if (cur[j] != 0) { pivot = j; break; }
    if (pivot == unknowns_) {
        for (std::size_t j = unknowns_; j < cur.size(); ++j)
            if (cur[j] != 0) { inconsistent_ = true; break; }
        return false;
    }
    const Element lead_inv = f_->inv(cur[pivot]);
    for (auto& v : cur) v = f_->mul(v, lead_inv);
    // Back-eliminate so stored rows stay fully reduced.
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        const Element c = rows_[r][pivot];
        if (c == 0) continue;
        for (std::size_t j = 0; j < cur.size(); ++j)
            rows_[r][j] = Field::add(rows_[r][j], f_->mul(c, cur[j]));
    }
    rows_.push_back(std::move(cur));
    pivots_.push_back(pivot);
    return true;
}

std::vector<SymbolVec> IncrementalSolver::solve() const {
    if (!decodable()) throw StateError("gf: solve requires full rank");
    if (inconsistent_) throw StateError("gf: inconsistent system");
    std::vector<SymbolVec> out(unknowns_, SymbolVec(payload_));
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        SymbolVec& dst = out[pivots_[r]];
        for (std::size_t j = 0; j < payload_; ++j) dst[j] = rows_[r][unknowns_ + j];
    }
    return out;
}

RankSolveResult rank_and_solve(const Field& f, const Matrix& coeffs,
                               std::span<const SymbolVec> rhs) {
    const bool solving = !rhs.empty();
    if (solving && rhs.size() != coeffs.cols())
        throw ConfigError("gf: rhs count must equal coefficient column count");
    const std::size_t payload = solving ? rhs.front().size() : 0;
    IncrementalSolver solver(f, coeffs.rows(), payload);
    const SymbolVec empty;
    for (std::size_t c = 0; c < coeffs.cols(); ++c) {
        SymbolVec eq(coeffs.rows());
        for (std::size_t r = 0; r < coeffs.rows(); ++r) eq[r] = coeffs.at(r, c);
        if (solving && rhs[c].size() != payload)
            throw ConfigError("gf: ragged rhs symbol vectors");
        solver.ingest(eq, solving ? std::span<const Element>(rhs[c]) : std::span<const Element>(empty));
    }
    RankSolveResult out;
    out.rank = solver.rank();
    if (solving && solver.decodable() && !solver.inconsistent())
        out.solution = solver.solve();
    return out;
}

BitslicedRank::BitslicedRank(const Field& f, std::size_t unknowns)
    : f_(&f),
      l_(f.degree()),
      unknowns_(unknowns),
      words_(unknowns == 0 ? 1 : (unknowns + 63) / 64),
      work_(static_cast<std::size_t>(l_) * words_) {
    rows_.reserve(static_cast<std::size_t>(l_) * words_ * unknowns);
}

Element BitslicedRank::get(const std::uint64_t* planes, std::size_t pos) const {
    const std::size_t w = pos >> 6;
    const unsigned b = static_cast<unsigned>(pos & 63);
    Element v = 0;
    for (int i = 0; i < l_; ++i)
        v = static_cast<Element>(v | (((planes[static_cast<std::size_t>(i) * words_ + w] >> b) & 1u) << i));
    return v;
}

bool BitslicedRank::ingest(std::span<const Element> column) {
    if (column.size() != unknowns_)
        throw ConfigError("gf: column length mismatch");
    if (complete()) return false;

    std::uint64_t* cur = work_.data();
    std::fill(work_.begin(), work_.end(), 0);
    for (std::size_t p = 0; p < unknowns_; ++p) {
        const Element v = column[p];
        if (v == 0) continue;
        const std::size_t w = p >> 6;
        const std::uint64_t bit = 1ull << (p & 63);
        for (int i = 0; i < l_; ++i)
            if ((v >> i) & 1) cur[static_cast<std::size_t>(i) * words_ + w] |= bit;
    }

    // Eliminate against stored rows in ascending pivot order. Rows are in
    // echelon form and pivot-normalized, so the factor is cur[pivot].
    for (std::size_t r = 0; r < pivots_.size(); ++r) {
        const Element c = get(cur, pivots_[r]);
        if (c == 0) continue;
        const std::uint64_t* row = rows_.data() + r * static_cast<std::size_t>(l_) * words_;
        // plane i of c*row is the XOR of row planes j with bit i of c*x^j set
        for (int j = 0; j < l_; ++j) {
            const Element cj = f_->mul(c, static_cast<Element>(1u << j));
            const std::uint64_t* src = row + static_cast<std::size_t>(j) * words_;
            for (int i = 0; i < l_; ++i) {
                if (!((cj >> i) & 1)) continue;
                std::uint64_t* dst = cur + static_cast<std::size_t>(i) * words_;
                for (std::size_t w = 0; w < words_; ++w) dst[w] ^= src[w];
            }
        }
    }

    // First nonzero position across planes.
    std::size_t pivot = unknowns_;
    for (std::size_t w = 0; w < words_ && pivot == unknowns_; ++w) {
        std::uint64_t any = 0;
        for (int i = 0; i < l_; ++i) any |= cur[static_cast<std::size_t>(i) * words_ + w];
        if (any) pivot = (w << 6) + static_cast<std::size_t>(std::countr_zero(any));
    }
    if (pivot >= unknowns_) return false;

    const Element lead = get(cur, pivot);
    if (lead != 1) {
        const Element s = f_->inv(lead);
        norm_.assign(static_cast<std::size_t>(l_) * words_, 0);
        for (int j = 0; j < l_; ++j) {
            const Element sj = f_->mul(s, static_cast<Element>(1u << j));
            for (int i = 0; i < l_; ++i) {
                if (!((sj >> i) & 1)) continue;
                for (std::size_t w = 0; w < words_; ++w)
                    norm_[static_cast<std::size_t>(i) * words_ + w] ^=
                        cur[static_cast<std::size_t>(j) * words_ + w];
            }
        }
        std::copy(norm_.begin(), norm_.end(), cur);
    }

    // Insert keeping pivots ascending.
    std::size_t at = pivots_.size();
    while (at > 0 && pivots_[at - 1] > pivot) --at;
    pivots_.insert(pivots_.begin() + static_cast<std::ptrdiff_t>(at), pivot);
    rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(at * static_cast<std::size_t>(l_) * words_),
                 cur, cur + static_cast<std::size_t>(l_) * words_);
    return true;
}

} // namespace starnc::gf
