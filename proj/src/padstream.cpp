#include "authsim/padstream.hpp"

#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace authsim {

namespace {

// xorshift64* (shifts 12/25/27, Vigna's multiplier); high bits are the
// strong ones, and PadStream consumes words MSB-first accordingly.
class XorshiftStar final : public PadGenerator {
public:
    explicit XorshiftStar(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_word() override {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1Dull;
    }

    std::vector<std::uint64_t> state() const override { return {state_}; }

    void restore_state(const std::vector<std::uint64_t>& words) override {
        if (words.size() != 1) throw std::invalid_argument("xorshift-star: bad state size");
        state_ = words[0];
    }

    std::unique_ptr<PadGenerator> clone() const override {
        return std::make_unique<XorshiftStar>(state_);
    }

private:
    std::uint64_t state_;
};

class SplitMix64 final : public PadGenerator {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_word() override {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::vector<std::uint64_t> state() const override { return {state_}; }

    void restore_state(const std::vector<std::uint64_t>& words) override {
        if (words.size() != 1) throw std::invalid_argument("splitmix64: bad state size");
        state_ = words[0];
    }

    std::unique_ptr<PadGenerator> clone() const override {
        auto g = std::make_unique<SplitMix64>(0);
        g->state_ = state_;
        return g;
    }

private:
    std::uint64_t state_;
};

struct Registry {
    std::mutex mutex;
    std::unordered_map<std::string, GeneratorFactory> factories;

    Registry() {
        factories[kDefaultGenerator] = [](std::uint64_t seed) {
            return std::make_unique<XorshiftStar>(seed);
        };
        factories["splitmix64"] = [](std::uint64_t seed) {
            return std::make_unique<SplitMix64>(seed);
        };
    }
};

Registry& registry() {
    static Registry r;
    return r;
}

std::unique_ptr<PadGenerator> make_generator(const std::string& id, std::uint64_t seed) {
    Registry& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.factories.find(id);
    if (it == r.factories.end())
        throw std::invalid_argument("unknown generator id: " + id);
    return it->second(seed);
}

}  // namespace

void register_generator(const std::string& id, GeneratorFactory factory) {
    Registry& r = registry();
    std::lock_guard lock(r.mutex);
    r.factories[id] = std::move(factory);
}

bool generator_registered(const std::string& id) {
    Registry& r = registry();
    std::lock_guard lock(r.mutex);
    return r.factories.count(id) != 0;
}

std::vector<std::string> registered_generators() {
    Registry& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> ids;
    for (const auto& [id, _] : r.factories) ids.push_back(id);
    return ids;
}

PadStream::PadStream(std::uint64_t seed, const std::string& generator_id)
    : generator_id_(generator_id),
      gen_(make_generator(generator_id, seed == 0 ? kZeroSeedReplacement : seed)) {}

PadStream::PadStream(const PadStream& other)
    : generator_id_(other.generator_id_),
      gen_(other.gen_ ? other.gen_->clone() : nullptr),
      word_(other.word_),
      avail_(other.avail_),
      bits_emitted_(other.bits_emitted_) {}

PadStream& PadStream::operator=(const PadStream& other) {
    if (this != &other) {
        generator_id_ = other.generator_id_;
        gen_ = other.gen_ ? other.gen_->clone() : nullptr;
        word_ = other.word_;
        avail_ = other.avail_;
        bits_emitted_ = other.bits_emitted_;
    }
    return *this;
}

Bits PadStream::next_bits(std::size_t count) {
    Bits out;
    for (std::size_t i = 0; i < count; ++i) out.append_bit(next_bit());
    return out;
}

std::uint64_t PadStream::next_uint(std::size_t width) {
    if (width > 64) throw std::invalid_argument("PadStream::next_uint: width > 64");
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < width; ++i) out = (out << 1) | (next_bit() ? 1u : 0u);
    return out;
}

std::uint64_t PadStream::next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("PadStream::next_below: zero bound");
    if (bound == 1) return 0;
    std::size_t width = 0;
    for (std::uint64_t v = bound - 1; v != 0; v >>= 1) ++width;
    for (;;) {
        const std::uint64_t draw = next_uint(width);
        if (draw < bound) return draw;
    }
}

std::vector<std::uint64_t> PadStream::save_state() const {
    std::vector<std::uint64_t> out = gen_->state();
    out.push_back(word_);
    out.push_back(avail_);
    out.push_back(bits_emitted_);
    return out;
}

PadStream PadStream::restore(const std::string& generator_id,
                             const std::vector<std::uint64_t>& state) {
    if (state.size() < 3) throw std::invalid_argument("PadStream::restore: bad state");
    PadStream s;
    s.generator_id_ = generator_id;
    s.gen_ = make_generator(generator_id, 1);
    s.gen_->restore_state({state.begin(), state.end() - 3});
    s.word_ = state[state.size() - 3];
    s.avail_ = static_cast<unsigned>(state[state.size() - 2]);
    s.bits_emitted_ = state[state.size() - 1];
    return s;
}

std::array<std::uint64_t, 4> derive_subseeds(std::uint64_t master) {
    PadStream s(master);
    return {s.next_word(), s.next_word(), s.next_word(), s.next_word()};
}

}  // namespace authsim
