#include "starnc/rlnc.hpp"

#include <algorithm>

namespace starnc::rlnc {

SymbolVec bits_to_symbols(std::span<const std::uint8_t> bits, int l) {
    if (l < 1 || l > 16) throw ConfigError("rlnc: symbol degree out of range");
    if (bits.size() % static_cast<std::size_t>(l) != 0)
        throw ConfigError("rlnc: bit count not divisible by symbol degree");
    SymbolVec out(bits.size() / static_cast<std::size_t>(l));
    for (std::size_t s = 0; s < out.size(); ++s) {
        Element v = 0;
        for (int j = 0; j < l; ++j)
            v = static_cast<Element>(v | ((bits[s * static_cast<std::size_t>(l) + static_cast<std::size_t>(j)] & 1u) << j));
        out[s] = v;
    }
    return out;
}

BitVec symbols_to_bits(std::span<const Element> symbols, int l) {
    if (l < 1 || l > 16) throw ConfigError("rlnc: symbol degree out of range");
    BitVec out(symbols.size() * static_cast<std::size_t>(l));
    for (std::size_t s = 0; s < symbols.size(); ++s)
        for (int j = 0; j < l; ++j)
            out[s * static_cast<std::size_t>(l) + static_cast<std::size_t>(j)] =
                static_cast<std::uint8_t>((symbols[s] >> j) & 1u);
    return out;
}

SourceMessage::SourceMessage(int source_id, int m, int l, BitVec bits)
    : source_id_(source_id), m_(m), l_(l), bits_(std::move(bits)) {
    if (m < 1) throw ConfigError("rlnc: block count must be positive");
    const std::size_t K = bits_.size();
    if (K == 0 || K % (static_cast<std::size_t>(m) * static_cast<std::size_t>(l)) != 0)
        throw ConfigError("rlnc: message length must be a positive multiple of m*l");
    symbols_ = bits_to_symbols(bits_, l);
    symbols_per_block_ = symbols_.size() / static_cast<std::size_t>(m);
}

SourceMessage SourceMessage::random(int source_id, int m, int l, long K,
                                    rng::Counter& rng) {
    BitVec bits(static_cast<std::size_t>(K));
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    return SourceMessage(source_id, m, l, std::move(bits));
}

std::span<const Element> SourceMessage::block(int j) const {
    if (j < 0 || j >= m_) throw ConfigError("rlnc: block index out of range");
    return {symbols_.data() + static_cast<std::size_t>(j) * symbols_per_block_,
            symbols_per_block_};
}

SymbolVec encode_block(const Field& f, const SourceMessage& msg,
                       std::span<const Element> coeffs) {
    if (coeffs.size() != static_cast<std::size_t>(msg.block_count()))
        throw ConfigError("rlnc: coefficient count must equal block count");
    SymbolVec out(msg.symbols_per_block(), 0);
    for (int j = 0; j < msg.block_count(); ++j) {
        const Element c = coeffs[static_cast<std::size_t>(j)];
        if (c == 0) continue;
        auto blk = msg.block(j);
        for (std::size_t t = 0; t < out.size(); ++t)
            out[t] = Field::add(out[t], f.mul(c, blk[t]));
    }
    return out;
}

BitVec superpose(std::span<const BitVec> blocks) {
    if (blocks.empty()) throw ConfigError("rlnc: nothing to superpose");
    BitVec out(blocks.front().size(), 0);
    for (const auto& b : blocks) {
        if (b.size() != out.size()) throw ConfigError("rlnc: unequal block lengths");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= b[i] & 1u;
    }
    return out;
}

SymbolVec superpose_symbols(std::span<const SymbolVec> blocks) {
    if (blocks.empty()) throw ConfigError("rlnc: nothing to superpose");
    SymbolVec out(blocks.front().size(), 0);
    for (const auto& b : blocks) {
        if (b.size() != out.size()) throw ConfigError("rlnc: unequal block lengths");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= b[i];
    }
    return out;
}

CoefficientStream::CoefficientStream(const Field& f, std::uint64_t seed,
                                     int source_id, int m)
    : f_(&f),
      key_(rng::derive_key({seed, static_cast<std::uint64_t>(source_id)})),
      source_id_(source_id),
      m_(m) {
    if (m < 1) throw ConfigError("rlnc: block count must be positive");
}

Element CoefficientStream::coefficient(std::uint64_t block_index, int j) const {
    const std::uint64_t raw =
        rng::at(key_, block_index * static_cast<std::uint64_t>(m_) + static_cast<std::uint64_t>(j));
    return static_cast<Element>(
        (static_cast<unsigned __int128>(raw) * f_->size()) >> 64);
}

SymbolVec CoefficientStream::coefficients(std::uint64_t block_index) const {
    SymbolVec out(static_cast<std::size_t>(m_));
    for (int j = 0; j < m_; ++j) out[static_cast<std::size_t>(j)] = coefficient(block_index, j);
    return out;
}

ReceiverState::ReceiverState(const Field& f, const SourceMessage& own, int sources)
    : f_(&f),
      own_(&own),
      sources_(sources),
      solver_(f,
              static_cast<std::size_t>(sources - 1) * static_cast<std::size_t>(own.block_count()),
              own.symbols_per_block()) {
    if (sources < 1) throw ConfigError("rlnc: need at least one source");
}

bool ReceiverState::ingest(std::uint64_t block_index,
                           std::span<const Element> superposed,
                           std::span<const CoefficientStream> streams) {
    if (streams.size() != static_cast<std::size_t>(sources_))
        throw ConfigError("rlnc: need one coefficient stream per source");
    if (superposed.size() != own_->symbols_per_block())
        throw ConfigError("rlnc: superposed block length mismatch");
    if (!seen_.insert(block_index).second) {
        ++duplicate_warnings_;
        return decodable();
    }
    ++ingested_;

    const int m = own_->block_count();
    const auto& own_stream = streams[static_cast<std::size_t>(own_->source_id() - 1)];
    SymbolVec own_contrib = encode_block(*f_, *own_, own_stream.coefficients(block_index));
    SymbolVec reduced(superposed.size());
    for (std::size_t t = 0; t < reduced.size(); ++t)
        reduced[t] = Field::add(superposed[t], own_contrib[t]);

    SymbolVec coeffs(solver_.unknowns());
    std::size_t at = 0;
    for (int s = 1; s <= sources_; ++s) {
        if (s == own_->source_id()) continue;
        const auto& st = streams[static_cast<std::size_t>(s - 1)];
        for (int j = 0; j < m; ++j) coeffs[at++] = st.coefficient(block_index, j);
    }
    solver_.ingest(coeffs, reduced);
    return decodable();
}

std::vector<SymbolVec> ReceiverState::decode() const {
    if (!decodable()) throw StateError("rlnc: decode requires full rank");
    return solver_.solve();
}

} // namespace starnc::rlnc
