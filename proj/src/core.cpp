#include "authsim/core.hpp"

#include <algorithm>
#include <stdexcept>

namespace authsim {

// ---------------------------------------------------------------------------
// ProtocolParams

ProtocolParams ProtocolParams::make(std::uint32_t n, std::uint32_t l,
                                    std::uint32_t keyword_len,
                                    std::vector<Bits> keywords) {
    ProtocolParams p;
    p.n = n;
    p.l = l;
    p.keyword_len = keyword_len;
    p.keywords = std::move(keywords);
    if (p.keywords.empty()) p.keywords.push_back(default_keyword(keyword_len));
    p.validate();
    return p;
}

void ProtocolParams::validate() const {
    if (n < 2) throw std::invalid_argument("params.n: must be >= 2");
    if (l < 1) throw std::invalid_argument("params.l: must be >= 1");
    if (keyword_len < 1) throw std::invalid_argument("params.keyword_len: must be >= 1");
    if (keywords.empty()) throw std::invalid_argument("params.keywords: must be non-empty");
    for (const Bits& k : keywords)
        if (k.size() != keyword_len)
            throw std::invalid_argument("params.keywords: keyword width != keyword_len");
    for (std::size_t a = 0; a < keywords.size(); ++a)
        for (std::size_t b = a + 1; b < keywords.size(); ++b)
            if (keywords[a] == keywords[b])
                throw std::invalid_argument("params.keywords: duplicate keyword");
}

bool ProtocolParams::is_keyword(const Bits& candidate) const {
    return std::find(keywords.begin(), keywords.end(), candidate) != keywords.end();
}

Bits default_keyword(std::uint32_t keyword_len) {
    Bits out;
    for (std::uint32_t i = 0; i < keyword_len; ++i) out.append_bit(i % 2 == 0);
    return out;
}

// ---------------------------------------------------------------------------
// SecretVector

SecretVector::SecretVector(std::uint32_t n, std::uint32_t width)
    : width_(width), entries_(n, Bits(width)) {}

SecretVector SecretVector::random(std::uint32_t n, std::uint32_t width, PadStream& rng) {
    SecretVector v(n, width);
    for (std::uint32_t i = 0; i < n; ++i) v.entries_[i] = rng.next_bits(width);
    return v;
}

SecretVector SecretVector::from_values(const std::vector<std::uint64_t>& values,
                                       std::uint32_t width) {
    SecretVector v(static_cast<std::uint32_t>(values.size()), width);
    for (std::size_t i = 0; i < values.size(); ++i)
        v.entries_[i] = Bits::from_uint(values[i], width);
    return v;
}

const Bits& SecretVector::at(std::uint32_t index1) const {
    if (index1 < 1 || index1 > entries_.size())
        throw std::out_of_range("SecretVector::at: index out of 1..n");
    return entries_[index1 - 1];
}

void SecretVector::set(std::uint32_t index1, Bits value) {
    if (index1 < 1 || index1 > entries_.size())
        throw std::out_of_range("SecretVector::set: index out of 1..n");
    if (value.size() != width_)
        throw std::invalid_argument("SecretVector::set: entry width mismatch");
    entries_[index1 - 1] = std::move(value);
}

std::uint64_t SecretVector::value_u64(std::uint32_t index1) const {
    return at(index1).fold_u64();
}

Bits SecretVector::concat() const {
    Bits out;
    for (const Bits& e : entries_) out.append(e);
    return out;
}

// ---------------------------------------------------------------------------
// RefreshVector

RefreshVector RefreshVector::dense_random(std::uint32_t n, std::uint32_t width,
                                          PadStream& rng) {
    RefreshVector r;
    r.form = Form::dense;
    r.entries.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) r.entries.push_back(rng.next_bits(width));
    return r;
}

RefreshVector RefreshVector::make_dense(std::vector<Bits> entries) {
    RefreshVector r;
    r.form = Form::dense;
    r.entries = std::move(entries);
    return r;
}

RefreshVector RefreshVector::make_sparse(
    std::vector<std::pair<std::uint32_t, Bits>> pairs) {
    RefreshVector r;
    r.form = Form::sparse;
    r.pairs = std::move(pairs);
    return r;
}

// ---------------------------------------------------------------------------
// Framing

namespace {

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32_be(std::span<const std::uint8_t> in, std::size_t pos) {
    return (std::uint32_t{in[pos]} << 24) | (std::uint32_t{in[pos + 1]} << 16) |
           (std::uint32_t{in[pos + 2]} << 8) | std::uint32_t{in[pos + 3]};
}

std::vector<std::uint8_t> encode_frame(ProtocolId id, std::uint32_t session,
                                       const Bits& payload) {
    std::vector<std::uint8_t> out;
    out.reserve(10 + (payload.size() + 7) / 8);
    out.push_back(kWireVersion);
    out.push_back(static_cast<std::uint8_t>(id));
    put_u32_be(out, session);
    put_u32_be(out, static_cast<std::uint32_t>(payload.size()));
    const std::vector<std::uint8_t> packed = payload.to_bytes();
    out.insert(out.end(), packed.begin(), packed.end());
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_message(const KeyMessage& msg) {
    if (msg.protocol == ProtocolId::verdict)
        throw std::invalid_argument("encode_message: key message with verdict id");
    return encode_frame(msg.protocol, msg.session_index, msg.payload);
}

std::vector<std::uint8_t> encode_message(const VerdictMessage& msg) {
    Bits payload;
    payload.append_bit(msg.verdict == Verdict::open);
    return encode_frame(ProtocolId::verdict, 0, payload);
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
    if (std::holds_alternative<KeyMessage>(msg))
        return encode_message(std::get<KeyMessage>(msg));
    return encode_message(std::get<VerdictMessage>(msg));
}

std::optional<Message> decode_message(std::span<const std::uint8_t> wire) {
    if (wire.size() < 10) return std::nullopt;
    if (wire[0] != kWireVersion) return std::nullopt;
    const std::uint8_t id = wire[1];
    if (id > static_cast<std::uint8_t>(ProtocolId::ap2t)) return std::nullopt;
    const std::uint32_t session = get_u32_be(wire, 2);
    const std::uint32_t bit_len = get_u32_be(wire, 6);
    auto payload = Bits::from_bytes(wire.subspan(10), bit_len);
    if (!payload) return std::nullopt;

    if (id == static_cast<std::uint8_t>(ProtocolId::verdict)) {
        if (session != 0 || bit_len != 1) return std::nullopt;
        return Message{VerdictMessage{payload->get(0) ? Verdict::open : Verdict::do_not_open}};
    }
    KeyMessage km;
    km.protocol = static_cast<ProtocolId>(id);
    km.session_index = session;
    km.payload = std::move(*payload);
    return Message{km};
}

}  // namespace authsim
