#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "authsim/ap2_iima.hpp"

using namespace authsim;

namespace {

// Walk every error pattern of the given weight over a codeword of
// payload_bits + redundancy bits, apply it to a real codeword, and count how
// many survive verification. Independent of the encoder internals.
std::uint64_t accepted_patterns(const Bits& payload, std::uint32_t dims,
                                std::uint32_t weight) {
    const Bits redundancy = parity_encode(payload, dims);
    const std::size_t total = payload.size() + redundancy.size();
    std::vector<std::size_t> pos(weight);
    for (std::uint32_t i = 0; i < weight; ++i) pos[i] = i;

    std::uint64_t accepted = 0;
    for (;;) {
        Bits p = payload;
        Bits r = redundancy;
        for (std::size_t flip : pos) {
            if (flip < p.size())
                p.flip(flip);
            else
                r.flip(flip - p.size());
        }
        accepted += parity_verify(p, r, dims);

        // next combination in lexicographic order
        std::size_t k = weight;
        while (k > 0 && pos[k - 1] == total - weight + (k - 1)) --k;
        if (k == 0) break;
        ++pos[k - 1];
        for (std::size_t j = k; j < weight; ++j) pos[j] = pos[j - 1] + 1;
    }
    return accepted;
}

}  // namespace

TEST_CASE("parity examples evaluate by hand") {
    CHECK(parity_encode(Bits::from_binary("1011"), 1) == Bits::from_binary("1"));
    // 2x2 grid of 1001: row parities (1,1), then column parities (1,1)
    CHECK(parity_encode(Bits::from_binary("1001"), 2) == Bits::from_binary("1111"));
    for (std::uint32_t dims : {1u, 2u, 3u}) {
        const Bits zeros(9);
        CHECK(parity_encode(zeros, dims).is_zero());
        CHECK(parity_verify(zeros, parity_encode(zeros, dims), dims));
    }
}

TEST_CASE("grid geometry") {
    CHECK(parity_grid_side(4, 2) == 2);
    CHECK(parity_grid_side(32, 4) == 3);  // 2^4 = 16 < 32 <= 81 = 3^4
    CHECK(parity_redundancy_bits(4, 2) == 4);
    CHECK(parity_redundancy_bits(16, 2) == 8);
    CHECK(parity_redundancy_bits(8, 1) == 1);
    CHECK(parity_redundancy_bits(32, 4) == 108);
}

TEST_CASE("every single bit flip is caught") {
    PadStream rng(7);
    const Bits payload = rng.next_bits(12);
    for (std::uint32_t dims : {1u, 2u, 3u}) {
        CHECK(accepted_patterns(payload, dims, 1) == 0);
    }
    // length mismatch rejects outright
    CHECK_FALSE(parity_verify(payload, Bits(3), 2));
}

TEST_CASE("brute force pins the code distance at dims + 1") {
    PadStream rng(8);
    struct Case {
        std::uint32_t m, dims;
    };
    for (const Case c : {Case{16, 2}, Case{8, 1}, Case{16, 3}, Case{9, 2}, Case{12, 3}}) {
        const Bits payload = rng.next_bits(c.m);
        for (std::uint32_t w = 1; w <= c.dims; ++w)
            CHECK(accepted_patterns(payload, c.dims, w) == 0);
        CHECK(accepted_patterns(payload, c.dims, c.dims + 1) > 0);
    }
}

TEST_CASE("frame layout for the worked half-watermark example") {
    const auto params = ProtocolParams::make(2, 8, 16);  // n*l = 16
    const FrameLayout layout = FrameLayout::make(params);
    CHECK(layout.m == 32);
    CHECK(layout.dims == 4);  // round(log2(16))
    CHECK(layout.q == 108);
    CHECK(layout.v == 140);  // m + q, half the frame
    CHECK(layout.t == 280);

    const SecurityBound bound = compute_security_bound(layout);
    CHECK(bound.d_min == 5);
    CHECK(bound.alpha == doctest::Approx(0.5));
    CHECK(bound.p_a_bound == doctest::Approx(1.0 / 32));  // (1/2)^5 = 1/(2 n l)
}

TEST_CASE("security bound edge cases") {
    const auto params = ProtocolParams::make(2, 8, 16);
    const FrameLayout bare = FrameLayout::make(params, 4, 0);
    CHECK(compute_security_bound(bare).p_a_bound == doctest::Approx(1.0));

    double previous = 1.0;
    for (std::uint32_t dims = 1; dims <= 8; ++dims) {
        FrameLayout layout = FrameLayout::make(params, dims);
        layout.v = layout.m + layout.q;  // hold alpha at 1/2
        layout.t = layout.m + layout.q + layout.v;
        const double bound = compute_security_bound(layout).p_a_bound;
        CHECK(bound < previous);
        previous = bound;
    }
}

TEST_CASE("permutations are deterministic bijections") {
    CHECK(Permutation::from_seed(9, 1).dest_of(0) == 0);  // t = 1 is the identity

    PadStream rng(10);
    const Permutation p = Permutation::from_seed(1234, 257);
    for (int round = 0; round < 20; ++round) {
        const Bits frame = rng.next_bits(257);
        CHECK(p.invert(p.apply(frame)) == frame);
        CHECK(p.apply(p.invert(frame)) == frame);
    }
    // same seed, same mapping
    const Permutation q = Permutation::from_seed(1234, 257);
    for (std::uint32_t j = 0; j < 257; ++j) CHECK(p.dest_of(j) == q.dest_of(j));
}

TEST_CASE("permutation position mapping is uniform across seeds") {
    const std::uint32_t t = 8;
    const int draws = 10000;
    PadStream seeds(161803);
    std::vector<std::vector<std::uint32_t>> counts(t, std::vector<std::uint32_t>(t, 0));
    for (int d = 0; d < draws; ++d) {
        const Permutation p = Permutation::from_seed(seeds.next_word(), t);
        for (std::uint32_t j = 0; j < t; ++j) ++counts[j][p.dest_of(j)];
    }
    const double expected = draws / static_cast<double>(t);
    const double sigma = std::sqrt(draws * (1.0 / t) * (1.0 - 1.0 / t));
    for (std::uint32_t j = 0; j < t; ++j)
        for (std::uint32_t k = 0; k < t; ++k)
            CHECK(std::abs(counts[j][k] - expected) < 3 * sigma);
}

TEST_CASE("zero pads expose the frame structure: body, parity, marks") {
    register_generator("test-zeros", [](std::uint64_t) {
        class Zeros final : public PadGenerator {
        public:
            std::uint64_t next_word() override { return 0; }
            std::vector<std::uint64_t> state() const override { return {}; }
            void restore_state(const std::vector<std::uint64_t>&) override {}
            std::unique_ptr<PadGenerator> clone() const override {
                return std::make_unique<Zeros>();
            }
        };
        return std::make_unique<Zeros>();
    });

    const auto params = ProtocolParams::make(2, 4, 4);
    const FrameLayout layout = FrameLayout::make(params, 2);
    const auto arv = SecretVector::from_values({0x3, 0x9}, 4);
    Ap2tTag tag(params, layout, arv, PadStream(3), "test-zeros");
    Ap2tVerifier verifier(params, layout, arv, "test-zeros");

    const KeyMessage msg = tag.begin_session();
    REQUIRE(msg.payload.size() == layout.t);

    // undo the (zero-seeded) permutation; all pads are zero, so the frame is
    // plaintext, then its parity bits, then zero watermark values
    const Permutation perm = Permutation::from_seed(0, layout.t, "test-zeros");
    const Bits frame = perm.invert(msg.payload);
    const Bits body = frame.slice(0, layout.m);
    const Bits redundancy = frame.slice(layout.m, layout.q);
    const Bits marks = frame.slice(layout.m + layout.q, layout.v);
    CHECK(marks.is_zero());
    CHECK(parity_verify(body, redundancy, layout.dims));
    CHECK(body.slice(2 * 4, 4) == params.primary_keyword());
    CHECK(verifier.handle(msg).is_open());
}

TEST_CASE("honest frames open and both sides stay synchronized") {
    const auto params = ProtocolParams::make(2, 8, 8);
    const FrameLayout layout = FrameLayout::make(params, 2);
    PadStream init(21);
    const auto arv = SecretVector::random(2, 8, init);
    Ap2tTag tag(params, layout, arv, PadStream(22));
    Ap2tVerifier verifier(params, layout, arv);
    for (int s = 0; s < 60; ++s) {
        const KeyMessage msg = tag.begin_session();
        const VerdictMessage verdict = verifier.handle(msg);
        CHECK(verdict.is_open());
        tag.complete_session(verdict);
        CHECK(tag.arv() == verifier.arv());
        CHECK(tag.seed() == verifier.seed());
    }

    Ap2tTag again(params, layout, arv, PadStream(22));
    Ap2tTag again2(params, layout, arv, PadStream(22));
    CHECK(again.begin_session() == again2.begin_session());
}

TEST_CASE("every single-bit in-flight flip is rejected, then recovery opens") {
    const auto params = ProtocolParams::make(2, 4, 4);
    const FrameLayout layout = FrameLayout::make(params);  // dims = 3 for n*l = 8
    PadStream init(31);
    const auto arv = SecretVector::random(2, 4, init);
    Ap2tTag tag(params, layout, arv, PadStream(32));
    Ap2tVerifier verifier(params, layout, arv);

    const KeyMessage msg = tag.begin_session();
    for (std::uint32_t pos = 0; pos < layout.t; ++pos) {
        KeyMessage bad = msg;
        bad.payload.flip(pos);
        CHECK_FALSE(verifier.handle(bad).is_open());
        CHECK(verifier.arv() == arv);  // full rollback
        CHECK(verifier.seed() == 0);
        CHECK(verifier.session() == 1);
    }
    const VerdictMessage verdict = verifier.handle(msg);
    CHECK(verdict.is_open());
    tag.complete_session(verdict);
    CHECK(tag.arv() == verifier.arv());
}

TEST_CASE("wrong frame length is rejected") {
    const auto params = ProtocolParams::make(2, 4, 4);
    const FrameLayout layout = FrameLayout::make(params);
    const auto arv = SecretVector::from_values({1, 2}, 4);
    Ap2tVerifier verifier(params, layout, arv);
    PadStream rng(41);
    CHECK_FALSE(
        verifier.handle(KeyMessage{ProtocolId::ap2t, 1, rng.next_bits(layout.t - 1)})
            .is_open());
}

TEST_CASE("d_min random flips stay under the watermark bound") {
    const auto params = ProtocolParams::make(2, 8, 16);
    const FrameLayout layout = FrameLayout::make(params);  // alpha = 1/2, d_min = 5
    const SecurityBound bound = compute_security_bound(layout);
    PadStream seeds(51);
    PadStream flip_rng(52);

    const int trials = 5000;
    int successes = 0;
    for (int t = 0; t < trials; ++t) {
        PadStream init(seeds.next_word());
        const auto arv = SecretVector::random(2, 8, init);
        Ap2tTag tag(params, layout, arv, PadStream(seeds.next_word()));
        Ap2tVerifier verifier(params, layout, arv);
        KeyMessage msg = tag.begin_session();
        std::vector<std::uint32_t> flips;
        while (flips.size() < bound.d_min) {
            const auto pos = static_cast<std::uint32_t>(flip_rng.next_below(layout.t));
            if (std::find(flips.begin(), flips.end(), pos) != flips.end()) continue;
            flips.push_back(pos);
            msg.payload.flip(pos);
        }
        successes += verifier.handle(msg).is_open();
    }
    const double rate = successes / static_cast<double>(trials);
    const double sigma = std::sqrt(bound.p_a_bound * (1 - bound.p_a_bound) / trials);
    CHECK(rate <= bound.p_a_bound + 3 * sigma);
}
