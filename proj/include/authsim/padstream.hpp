// Deterministic seeded pad generation. A PadStream turns a 64-bit seed into
// an unbounded bit sequence through a pluggable generator; protocols use it
// for refresh vectors, one-time-pad substitutes, watermark values and
// permutation draws.
//
// The default generator is the 64-bit shift/xor construction with a final
// odd-constant multiply. It is fast and statistically solid, but it is not
// a cryptographic primitive; swap in a stronger generator via the registry
// if that matters for your use.
#ifndef AUTHSIM_PADSTREAM_HPP
#define AUTHSIM_PADSTREAM_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "authsim/bits.hpp"

namespace authsim {

inline constexpr const char* kDefaultGenerator = "xorshift-star";

// Generators are degenerate or weak at state 0, and the protocols start
// from seed := 0, so a zero seed is remapped to this constant before any
// word is produced.
inline constexpr std::uint64_t kZeroSeedReplacement = 0x9E3779B97F4A7C15ull;

// 64-bit word source behind a PadStream. Implementations must be pure
// functions of their state words.
class PadGenerator {
public:
    virtual ~PadGenerator() = default;
    virtual std::uint64_t next_word() = 0;
    virtual std::vector<std::uint64_t> state() const = 0;
    virtual void restore_state(const std::vector<std::uint64_t>& words) = 0;
    virtual std::unique_ptr<PadGenerator> clone() const = 0;
};

using GeneratorFactory =
    std::function<std::unique_ptr<PadGenerator>(std::uint64_t seed)>;

// Registry of generator constructions, keyed by the id recorded in
// experiment configs and output metadata. "xorshift-star" and "splitmix64"
// are built in; tests may register stubs.
void register_generator(const std::string& id, GeneratorFactory factory);
bool generator_registered(const std::string& id);
std::vector<std::string> registered_generators();

// Chained seed accumulator: value_{new} = key_entry ⊕ value_{old}, entries
// zero-extended (or folded) to 64 bits; initial value 0.
struct SeedState {
    std::uint64_t value = 0;

    void absorb(const Bits& key_entry) { value ^= key_entry.fold_u64(); }
};

class PadStream {
public:
    // throws std::invalid_argument for an unregistered generator_id
    explicit PadStream(std::uint64_t seed,
                       const std::string& generator_id = kDefaultGenerator);

    PadStream(const PadStream& other);
    PadStream& operator=(const PadStream& other);
    PadStream(PadStream&&) = default;
    PadStream& operator=(PadStream&&) = default;

    bool next_bit() {
        if (avail_ == 0) {
            word_ = gen_->next_word();
            avail_ = 64;
        }
        const bool bit = (word_ >> 63) & 1u;
        word_ <<= 1;
        --avail_;
        ++bits_emitted_;
        return bit;
    }

    Bits next_bits(std::size_t count);

    // next `width` bits assembled first-bit-most-significant; width <= 64
    std::uint64_t next_uint(std::size_t width);
    std::uint64_t next_word() { return next_uint(64); }

    // uniform draw in [0, bound) by rejection; bound >= 1
    std::uint64_t next_below(std::uint64_t bound);

    std::uint64_t bits_emitted() const { return bits_emitted_; }
    const std::string& generator_id() const { return generator_id_; }

    // checkpointing support: generator-internal words plus buffer position
    std::vector<std::uint64_t> save_state() const;
    static PadStream restore(const std::string& generator_id,
                             const std::vector<std::uint64_t>& state);

private:
    PadStream() = default;

    std::string generator_id_;
    std::unique_ptr<PadGenerator> gen_;
    std::uint64_t word_ = 0;
    unsigned avail_ = 0;
    std::uint64_t bits_emitted_ = 0;
};

// Four independent stream seeds from one master value: the first four
// 64-bit words of a default-generator stream seeded with master.
std::array<std::uint64_t, 4> derive_subseeds(std::uint64_t master);

}  // namespace authsim

#endif
