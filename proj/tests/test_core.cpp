#include "doctest.h"

#include <stdexcept>

#include "authsim/core.hpp"

using namespace authsim;

TEST_CASE("verdict framing is pinned byte for byte") {
    // version 01, id 00, session 0, bit length 1, then the bit 1 packed MSB-first
    const auto open_wire = encode_message(VerdictMessage{Verdict::open});
    const std::vector<std::uint8_t> expected = {0x01, 0x00, 0x00, 0x00, 0x00, 0x00,
                                                0x00, 0x00, 0x00, 0x01, 0x80};
    CHECK(open_wire == expected);

    const auto closed_wire = encode_message(VerdictMessage{Verdict::do_not_open});
    CHECK(closed_wire[10] == 0x00);

    const auto decoded = decode_message(open_wire);
    REQUIRE(decoded.has_value());
    REQUIRE(std::holds_alternative<VerdictMessage>(*decoded));
    CHECK(std::get<VerdictMessage>(*decoded).verdict == Verdict::open);
}

TEST_CASE("key message framing example: n=2 l=4 X=F LRV=(3,5)") {
    KeyMessage msg;
    msg.protocol = ProtocolId::ap1;
    msg.session_index = 1;
    msg.payload.append_uint(0xF, 4);
    msg.payload.append_uint(0x3, 4);
    msg.payload.append_uint(0x5, 4);

    const auto wire = encode_message(msg);
    const std::vector<std::uint8_t> expected = {0x01, 0x01, 0x00, 0x00, 0x00, 0x01,
                                                0x00, 0x00, 0x00, 0x0C, 0xF3, 0x50};
    CHECK(wire == expected);

    const auto decoded = decode_message(wire);
    REQUIRE(decoded.has_value());
    CHECK(std::get<KeyMessage>(*decoded) == msg);
}

TEST_CASE("decode(encode(m)) == m for random messages") {
    PadStream rng(0xC0DE);
    for (int round = 0; round < 1000; ++round) {
        if (round % 7 == 0) {
            const VerdictMessage v{rng.next_bit() ? Verdict::open : Verdict::do_not_open};
            const auto decoded = decode_message(encode_message(v));
            REQUIRE(decoded.has_value());
            CHECK(std::get<VerdictMessage>(*decoded) == v);
            continue;
        }
        KeyMessage m;
        const auto pick = rng.next_below(3);
        m.protocol = pick == 0   ? ProtocolId::ap1
                     : pick == 1 ? ProtocolId::ap2
                                 : ProtocolId::ap2t;
        m.session_index = static_cast<std::uint32_t>(rng.next_uint(32));
        m.payload = rng.next_bits(1 + rng.next_below(200));
        const auto decoded = decode_message(encode_message(m));
        REQUIRE(decoded.has_value());
        CHECK(std::get<KeyMessage>(*decoded) == m);
    }
}

TEST_CASE("decoder rejects malformed frames") {
    const auto good = encode_message(VerdictMessage{Verdict::open});
    auto bad = good;
    bad[0] = 0x02;  // wrong version
    CHECK_FALSE(decode_message(bad).has_value());
    bad = good;
    bad[1] = 0x07;  // unknown protocol id
    CHECK_FALSE(decode_message(bad).has_value());
    bad = good;
    bad[5] = 0x01;  // verdicts carry session 0
    CHECK_FALSE(decode_message(bad).has_value());
    bad = good;
    bad.push_back(0x00);  // trailing bytes
    CHECK_FALSE(decode_message(bad).has_value());
    CHECK_FALSE(decode_message(std::vector<std::uint8_t>{0x01, 0x00}).has_value());
}

TEST_CASE("params invariants are enforced") {
    CHECK_THROWS_AS(ProtocolParams::make(1, 8, 4), std::invalid_argument);
    CHECK_THROWS_AS(ProtocolParams::make(4, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(ProtocolParams::make(4, 8, 0), std::invalid_argument);
    // keyword width must equal keyword_len
    CHECK_THROWS_AS(ProtocolParams::make(4, 8, 4, {Bits::from_binary("101")}),
                    std::invalid_argument);
    // duplicates rejected
    CHECK_THROWS_AS(ProtocolParams::make(4, 8, 3,
                                         {Bits::from_binary("101"),
                                          Bits::from_binary("101")}),
                    std::invalid_argument);

    const auto p = ProtocolParams::make(4, 8, 4);
    CHECK(p.keywords.size() == 1);
    CHECK(p.is_keyword(default_keyword(4)));
    CHECK(p.pad_bits() == 4 * 8 + 4);
}

TEST_CASE("secret vector is 1-indexed and width-checked") {
    const auto v = SecretVector::from_values({0xA, 0xB, 0xC}, 4);
    CHECK(v.size() == 3);
    CHECK(v.value_u64(1) == 0xA);
    CHECK(v.value_u64(3) == 0xC);
    CHECK_THROWS_AS(v.at(0), std::out_of_range);
    CHECK_THROWS_AS(v.at(4), std::out_of_range);
    CHECK(v.concat() == Bits::from_binary("1010 1011 1100"));

    SecretVector w = v;
    CHECK_THROWS_AS(w.set(1, Bits::from_binary("10101")), std::invalid_argument);
}

TEST_CASE("key entry schedule walks the vector downward and cycles") {
    CHECK(key_entry_index(4, 1) == 4);
    CHECK(key_entry_index(4, 2) == 3);
    CHECK(key_entry_index(4, 4) == 1);
    CHECK(key_entry_index(4, 5) == 4);
    for (std::uint64_t i = 1; i < 300; ++i) {
        const auto k = key_entry_index(7, i);
        CHECK(k >= 1);
        CHECK(k <= 7);
        CHECK(key_entry_index(7, i + 7) == k);  // period n
    }
}
