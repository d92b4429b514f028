// Shared domain types: protocol parameters, the accumulated secret vector
// and its refresh payloads, key/verdict messages, and the versioned byte
// framing every protocol uses on the wire.
//
// Vector indices are 1-based in the public API; storage is 0-based.
#ifndef AUTHSIM_CORE_HPP
#define AUTHSIM_CORE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "authsim/bits.hpp"
#include "authsim/padstream.hpp"

namespace authsim {

// ---------------------------------------------------------------------------
// Parameters

struct ProtocolParams {
    std::uint32_t n = 0;            // secret vector entries
    std::uint32_t l = 0;            // bits per entry
    std::uint32_t keyword_len = 0;  // bits per keyword
    std::vector<Bits> keywords;     // valid command words, each keyword_len bits

    static ProtocolParams make(std::uint32_t n, std::uint32_t l,
                               std::uint32_t keyword_len,
                               std::vector<Bits> keywords = {});

    // throws std::invalid_argument naming the offending field
    void validate() const;

    bool is_keyword(const Bits& candidate) const;
    const Bits& primary_keyword() const { return keywords.front(); }

    std::size_t pad_bits() const {  // m = n*l + keyword_len
        return std::size_t{n} * l + keyword_len;
    }
};

// The default command word when a config does not list any: alternating
// bits starting with 1.
Bits default_keyword(std::uint32_t keyword_len);

// ---------------------------------------------------------------------------
// Secret and refresh vectors

class SecretVector {
public:
    SecretVector() = default;
    SecretVector(std::uint32_t n, std::uint32_t width);  // all-zero entries

    static SecretVector random(std::uint32_t n, std::uint32_t width, PadStream& rng);
    static SecretVector from_values(const std::vector<std::uint64_t>& values,
                                    std::uint32_t width);

    std::uint32_t size() const { return static_cast<std::uint32_t>(entries_.size()); }
    std::uint32_t width() const { return width_; }

    const Bits& at(std::uint32_t index1) const;       // index in 1..n
    void set(std::uint32_t index1, Bits value);
    std::uint64_t value_u64(std::uint32_t index1) const;

    Bits concat() const;  // entries 1..n in order, n*width bits

    bool operator==(const SecretVector&) const = default;

private:
    std::uint32_t width_ = 0;
    std::vector<Bits> entries_;
};

struct RefreshVector {
    enum class Form { dense, sparse };

    Form form = Form::dense;
    std::vector<Bits> entries;                        // dense: exactly n values
    std::vector<std::pair<std::uint32_t, Bits>> pairs;  // sparse: (1-based index, value)

    static RefreshVector dense_random(std::uint32_t n, std::uint32_t width,
                                      PadStream& rng);
    static RefreshVector make_dense(std::vector<Bits> entries);
    static RefreshVector make_sparse(std::vector<std::pair<std::uint32_t, Bits>> pairs);
};

// ---------------------------------------------------------------------------
// Messages and framing

enum class ProtocolId : std::uint8_t {
    verdict = 0x00,
    ap1 = 0x01,
    ap2 = 0x02,
    ap2t = 0x03,
};

enum class Verdict : std::uint8_t { do_not_open = 0, open = 1 };

struct KeyMessage {
    ProtocolId protocol = ProtocolId::ap1;
    std::uint32_t session_index = 0;
    Bits payload;

    bool operator==(const KeyMessage&) const = default;
};

struct VerdictMessage {
    Verdict verdict = Verdict::do_not_open;

    bool operator==(const VerdictMessage&) const = default;
    bool is_open() const { return verdict == Verdict::open; }
};

using Message = std::variant<KeyMessage, VerdictMessage>;

inline constexpr std::uint8_t kWireVersion = 0x01;

// Framing: version byte 0x01, protocol-id byte, 4-byte big-endian session
// index (0 for verdicts), 4-byte big-endian payload bit length, payload
// bits packed MSB-first and zero-padded to a byte boundary. Verdict payload
// is the single bit Open=1 / DoNotOpen=0.
std::vector<std::uint8_t> encode_message(const KeyMessage& msg);
std::vector<std::uint8_t> encode_message(const VerdictMessage& msg);
std::vector<std::uint8_t> encode_message(const Message& msg);

// strict: rejects bad version/id, length mismatches, nonzero padding,
// trailing bytes and malformed verdicts
std::optional<Message> decode_message(std::span<const std::uint8_t> wire);

// ---------------------------------------------------------------------------
// Key-entry schedule shared by every protocol: entry n - ((i-1) mod n),
// scanning the vector from entry n downward, one entry per session.
inline std::uint32_t key_entry_index(std::uint32_t n, std::uint64_t session) {
    return n - static_cast<std::uint32_t>((session - 1) % n);
}

}  // namespace authsim

#endif
