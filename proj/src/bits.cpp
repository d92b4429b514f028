#include "authsim/bits.hpp"

#include <stdexcept>

namespace authsim {

Bits Bits::from_binary(std::string_view text) {
    Bits out;
    for (char c : text) {
        if (c == '0')
            out.append_bit(false);
        else if (c == '1')
            out.append_bit(true);
        else if (c == ' ' || c == '_')
            continue;  // readability separators
        else
            throw std::invalid_argument("Bits::from_binary: bad character");
    }
    return out;
}

Bits Bits::from_uint(std::uint64_t value, std::size_t width) {
    Bits out;
    out.append_uint(value, width);
    return out;
}

std::optional<Bits> Bits::from_bytes(std::span<const std::uint8_t> bytes,
                                     std::size_t bit_count) {
    if (bytes.size() != (bit_count + 7) / 8) return std::nullopt;
    Bits out;
    out.size_ = bit_count;
    out.words_.assign(word_count(bit_count), 0);
    for (std::size_t i = 0; i < bit_count; ++i) {
        const bool bit = (bytes[i >> 3] >> (7 - (i & 7))) & 1u;
        if (bit) out.words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
    // padding bits past bit_count must be zero
    for (std::size_t i = bit_count; i < bytes.size() * 8; ++i) {
        if ((bytes[i >> 3] >> (7 - (i & 7))) & 1u) return std::nullopt;
    }
    return out;
}

void Bits::append(const Bits& other) {
    for (std::size_t i = 0; i < other.size_; ++i) append_bit(other.get(i));
}

void Bits::append_uint(std::uint64_t value, std::size_t width) {
    if (width > 64) throw std::invalid_argument("Bits::append_uint: width > 64");
    if (width < 64 && (value >> width) != 0)
        throw std::invalid_argument("Bits::append_uint: value does not fit width");
    for (std::size_t k = 0; k < width; ++k)
        append_bit((value >> (width - 1 - k)) & 1u);
}

std::uint64_t Bits::read_uint(std::size_t pos, std::size_t width) const {
    if (width > 64) throw std::invalid_argument("Bits::read_uint: width > 64");
    if (pos + width > size_) throw std::out_of_range("Bits::read_uint: out of range");
    std::uint64_t out = 0;
    for (std::size_t k = 0; k < width; ++k) out = (out << 1) | (get(pos + k) ? 1u : 0u);
    return out;
}

Bits Bits::slice(std::size_t pos, std::size_t count) const {
    if (pos + count > size_) throw std::out_of_range("Bits::slice: out of range");
    Bits out;
    out.size_ = count;
    out.words_.assign(word_count(count), 0);
    for (std::size_t i = 0; i < count; ++i)
        if (get(pos + i)) out.words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    return out;
}

std::uint64_t Bits::fold_u64() const {
    std::uint64_t acc = 0;
    for (std::size_t pos = 0; pos < size_; pos += 64) {
        const std::size_t width = std::min<std::size_t>(64, size_ - pos);
        acc ^= read_uint(pos, width);
    }
    return acc;
}

bool Bits::is_zero() const {
    for (std::uint64_t w : words_)
        if (w != 0) return false;
    return true;
}

std::size_t Bits::count_ones() const {
    std::size_t total = 0;
    for (std::uint64_t w : words_) total += static_cast<std::size_t>(__builtin_popcountll(w));
    return total;
}

std::vector<std::uint8_t> Bits::to_bytes() const {
    std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
    for (std::size_t i = 0; i < size_; ++i)
        if (get(i)) out[i >> 3] |= static_cast<std::uint8_t>(1u << (7 - (i & 7)));
    return out;
}

std::string Bits::to_binary() const {
    std::string out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back(get(i) ? '1' : '0');
    return out;
}

Bits& Bits::operator^=(const Bits& other) {
    if (size_ != other.size_)
        throw std::invalid_argument("Bits: xor operands differ in length");
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    return *this;
}

Bits xor_bits(const Bits& a, const Bits& b) { return a ^ b; }

}  // namespace authsim
