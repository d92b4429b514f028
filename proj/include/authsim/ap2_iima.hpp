// Tamper-resistant extension of the computational protocol for channels
// where sessions are not atomic. The plaintext is extended with the
// redundancy of a multidimensional parity-check code, watermark bits whose
// values come from a third pad, and the whole frame is scrambled by a
// seed-derived permutation. Four subseeds derived from the session master
// seed key the body pad, the redundancy pad, the watermark values and the
// permutation respectively.
//
// An in-flight bit flip must avoid every watermark position and land on a
// parity-consistent pattern to survive, which bounds the tamper success
// probability by (1 - v/t)^(dims+1).
#ifndef AUTHSIM_AP2_IIMA_HPP
#define AUTHSIM_AP2_IIMA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "authsim/ap2.hpp"
#include "authsim/core.hpp"

namespace authsim {

// ---------------------------------------------------------------------------
// Parity-check code over a D-dimensional grid

// Smallest side s with s^dims >= payload_bits.
std::uint32_t parity_grid_side(std::uint32_t payload_bits, std::uint32_t dims);

// Redundancy width: dims * side^(dims-1), one bit per grid line.
std::uint32_t parity_redundancy_bits(std::uint32_t payload_bits, std::uint32_t dims);

// The payload fills the grid in lexicographic cell order and is zero-padded
// to side^dims cells. For each dimension, starting with the fastest-varying
// one, every grid line contributes the xor of its bits.
Bits parity_encode(const Bits& payload, std::uint32_t dims);

// accept iff the redundancy matches a fresh encode; length mismatch rejects
bool parity_verify(const Bits& payload, const Bits& redundancy, std::uint32_t dims);

// ---------------------------------------------------------------------------
// Frame geometry

struct FrameLayout {
    std::uint32_t m = 0;     // body bits, n*l + keyword_len
    std::uint32_t q = 0;     // redundancy bits
    std::uint32_t v = 0;     // watermark bits
    std::uint32_t t = 0;     // total frame bits, m + q + v
    std::uint32_t dims = 0;  // parity code dimensions

    // dims == 0 selects round(log2(n*l)) (minimum 1); watermarks default to
    // m + q, which makes them exactly half the frame.
    static FrameLayout make(const ProtocolParams& params, std::uint32_t dims = 0,
                            std::optional<std::uint32_t> watermarks = std::nullopt);
};

struct SecurityBound {
    std::uint32_t d_min = 0;  // dims + 1
    double alpha = 0.0;       // v / t
    double p_a_bound = 0.0;   // (1 - alpha)^d_min
};

SecurityBound compute_security_bound(const FrameLayout& layout);

// ---------------------------------------------------------------------------
// Seed-derived permutation

class Permutation {
public:
    // Fisher-Yates over the identity, driven by a pad stream
    static Permutation from_seed(std::uint64_t seed, std::uint32_t size,
                                 const std::string& generator_id = kDefaultGenerator);

    std::uint32_t size() const { return static_cast<std::uint32_t>(map_.size()); }
    std::uint32_t dest_of(std::uint32_t pos) const { return map_[pos]; }

    Bits apply(const Bits& in) const;   // out[map[j]] = in[j]
    Bits invert(const Bits& in) const;  // out[j] = in[map[j]]

private:
    std::vector<std::uint32_t> map_;
};

// ---------------------------------------------------------------------------
// Protocol state machines

class Ap2tTag {
public:
    Ap2tTag(ProtocolParams params, FrameLayout layout, SecretVector initial_arv,
            PadStream rng, std::string generator_id = kDefaultGenerator);

    KeyMessage begin_session(const Bits& keyword);
    KeyMessage begin_session() { return begin_session(params_.primary_keyword()); }
    void complete_session(const VerdictMessage& verdict);

    const SecretVector& arv() const { return arv_; }
    std::uint64_t session() const { return i_; }
    std::uint64_t seed() const { return seed_.value; }
    bool session_pending() const { return pending_.has_value(); }
    const FrameLayout& layout() const { return layout_; }
    const ProtocolParams& params() const { return params_; }

private:
    struct Pending {
        RefreshVector lrv;
        std::uint64_t staged_seed;
    };

    ProtocolParams params_;
    FrameLayout layout_;
    SecretVector arv_;
    std::uint64_t i_ = 1;
    SeedState seed_;
    PadStream rng_;
    std::string generator_id_;
    std::optional<Pending> pending_;
};

class Ap2tVerifier {
public:
    Ap2tVerifier(ProtocolParams params, FrameLayout layout, SecretVector initial_arv,
                 std::string generator_id = kDefaultGenerator);

    // Open only when the watermarks, the parity redundancy and the keyword
    // all check out; anything else rolls back completely.
    VerdictMessage handle(const KeyMessage& msg);

    const SecretVector& arv() const { return arv_; }
    std::uint64_t session() const { return i_; }
    std::uint64_t seed() const { return seed_.value; }
    const FrameLayout& layout() const { return layout_; }
    const ProtocolParams& params() const { return params_; }

private:
    ProtocolParams params_;
    FrameLayout layout_;
    SecretVector arv_;
    std::uint64_t i_ = 1;
    SeedState seed_;
    std::string generator_id_;
};

}  // namespace authsim

#endif
