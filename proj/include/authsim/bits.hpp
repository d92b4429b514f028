// Packed bit-string value type used for keys, refresh vectors, pads and
// protocol frames. Bit 0 is the first bit on the wire; byte serialization
// packs bit 0 into the most significant bit of the first byte.
#ifndef AUTHSIM_BITS_HPP
#define AUTHSIM_BITS_HPP

#include <cassert>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace authsim {

class Bits {
public:
    Bits() = default;

    // count zero bits
    explicit Bits(std::size_t count) : size_(count), words_(word_count(count), 0) {}

    static Bits from_binary(std::string_view text);
    // the low `width` bits of value, appended most significant first
    static Bits from_uint(std::uint64_t value, std::size_t width);
    static std::optional<Bits> from_bytes(std::span<const std::uint8_t> bytes,
                                          std::size_t bit_count);

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    bool get(std::size_t pos) const {
        assert(pos < size_);
        return (words_[pos >> 6] >> (pos & 63)) & 1u;
    }

    void set(std::size_t pos, bool value) {
        assert(pos < size_);
        const std::uint64_t mask = std::uint64_t{1} << (pos & 63);
        if (value)
            words_[pos >> 6] |= mask;
        else
            words_[pos >> 6] &= ~mask;
    }

    void flip(std::size_t pos) {
        assert(pos < size_);
        words_[pos >> 6] ^= std::uint64_t{1} << (pos & 63);
    }

    void append_bit(bool value) {
        if ((size_ & 63) == 0) words_.push_back(0);
        if (value) words_.back() |= std::uint64_t{1} << (size_ & 63);
        ++size_;
    }

    void append(const Bits& other);
    void append_uint(std::uint64_t value, std::size_t width);

    // bits [pos, pos+width) as an integer, first bit most significant; width <= 64
    std::uint64_t read_uint(std::size_t pos, std::size_t width) const;

    Bits slice(std::size_t pos, std::size_t count) const;

    // xor of 64-bit chunks (chunk k = bits [64k, 64k+64) via read_uint,
    // the trailing partial chunk zero-extended); equals the integer value
    // of the string when size() <= 64
    std::uint64_t fold_u64() const;

    bool is_zero() const;
    std::size_t count_ones() const;

    std::vector<std::uint8_t> to_bytes() const;
    std::string to_binary() const;

    Bits& operator^=(const Bits& other);
    friend Bits operator^(Bits lhs, const Bits& rhs) {
        lhs ^= rhs;
        return lhs;
    }

    bool operator==(const Bits&) const = default;

private:
    static std::size_t word_count(std::size_t bits) { return (bits + 63) / 64; }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;  // bit i at words_[i/64] bit (i%64); spare bits zero
};

// elementwise exclusive-or; throws std::invalid_argument on length mismatch
Bits xor_bits(const Bits& a, const Bits& b);

}  // namespace authsim

#endif
