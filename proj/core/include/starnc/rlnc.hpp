#pragma once

#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "starnc/galois.hpp"
#include "starnc/rng.hpp"

namespace starnc::rlnc {

using gf::Element;
using gf::Field;
using gf::SymbolVec;

using BitVec = std::vector<std::uint8_t>; // one bit per entry, values 0/1

/// Bits -> GF(2^l) symbols, l bits per symbol, bit j of a symbol carrying
/// weight 2^j. Exact inverse of symbols_to_bits for every l <= 16.
SymbolVec bits_to_symbols(std::span<const std::uint8_t> bits, int l);
BitVec symbols_to_bits(std::span<const Element> symbols, int l);

/// One source's message: K bits split into m blocks, each viewable as
/// K/(m*l) field symbols. K must divide evenly.
class SourceMessage {
public:
    SourceMessage(int source_id, int m, int l, BitVec bits);

    static SourceMessage random(int source_id, int m, int l, long K,
                                rng::Counter& rng);

    int source_id() const { return source_id_; }
    int block_count() const { return m_; }
    int symbol_degree() const { return l_; }
    long bit_length() const { return static_cast<long>(bits_.size()); }
    std::size_t symbols_per_block() const { return symbols_per_block_; }

    const BitVec& bits() const { return bits_; }
    /// q-ary view of block j (0-based).
    std::span<const Element> block(int j) const;

private:
    int source_id_, m_, l_;
    std::size_t symbols_per_block_;
    BitVec bits_;
    SymbolVec symbols_; // m * symbols_per_block
};

/// Linear combination of the message blocks with the given coefficients:
/// output symbol t = sum_j coeffs[j] * block_j[t].
SymbolVec encode_block(const Field& f, const SourceMessage& msg,
                       std::span<const Element> coeffs);

/// Modulo-2 superposition of equal-length binary blocks.
BitVec superpose(std::span<const BitVec> blocks);
/// Same operation in symbol space (addition in GF(2^l) is XOR).
SymbolVec superpose_symbols(std::span<const SymbolVec> blocks);

/// Synchronized pseudo-random coefficient source. A (seed, source_id) pair
/// names a stream; the coefficient vector for block index b is a pure
/// function of (stream, b), so erasures and out-of-order queries need no
/// state replay.
class CoefficientStream {
public:
    CoefficientStream(const Field& f, std::uint64_t seed, int source_id, int m);

    int source_id() const { return source_id_; }
    int block_count() const { return m_; }

    Element coefficient(std::uint64_t block_index, int j) const;
    SymbolVec coefficients(std::uint64_t block_index) const;

private:
    const Field* f_;
    std::uint64_t key_;
    int source_id_, m_;
};

/// Receiver-side state of one source: subtracts its own contribution from
/// each superposed block and accumulates the other sources' coefficients as
/// columns until the (Y-1)m unknowns are resolvable. Single writer.
class ReceiverState {
public:
    ReceiverState(const Field& f, const SourceMessage& own, int sources);

    /// Ingests a channel-decoded superposed block. Duplicate block indices
    /// are ignored (counted as warnings). Returns decodable().
    bool ingest(std::uint64_t block_index, std::span<const Element> superposed,
                std::span<const CoefficientStream> streams);

    std::size_t rank() const { return solver_.rank(); }
    std::size_t unknowns() const { return solver_.unknowns(); }
    bool decodable() const { return solver_.decodable(); }
    long ingested() const { return ingested_; }
    int duplicate_warnings() const { return duplicate_warnings_; }

    /// Recovered blocks of the other sources, ordered by ascending source id
    /// then block index. Requires decodable().
    std::vector<SymbolVec> decode() const;

private:
    const Field* f_;
    const SourceMessage* own_;
    int sources_;
    gf::IncrementalSolver solver_;
    std::unordered_set<std::uint64_t> seen_;
    long ingested_ = 0;
    int duplicate_warnings_ = 0;
};

} // namespace starnc::rlnc
