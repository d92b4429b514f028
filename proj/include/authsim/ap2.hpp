// The computational protocol: each session the shared entry for the
// scheduled slot is xor-folded into a chained seed, the seed keys a pad
// stream of m = n*l + keyword_len bits, and the Tag ships
// (refresh-vector || keyword) encrypted under that pad. The Verifier
// accepts when the decrypted suffix is a valid keyword.
//
// Seed and vector updates are staged and committed only on Open, so a
// reject leaves both sides bit-identical to their pre-session state.
#ifndef AUTHSIM_AP2_HPP
#define AUTHSIM_AP2_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "authsim/ap1.hpp"
#include "authsim/core.hpp"

namespace authsim {

class Ap2Tag {
public:
    Ap2Tag(ProtocolParams params, SecretVector initial_arv, PadStream rng,
           std::string generator_id = kDefaultGenerator);

    // throws on an unknown keyword or an already pending session
    KeyMessage begin_session(const Bits& keyword);
    KeyMessage begin_session() { return begin_session(params_.primary_keyword()); }
    void complete_session(const VerdictMessage& verdict);

    const SecretVector& arv() const { return arv_; }
    std::uint64_t session() const { return i_; }
    std::uint64_t seed() const { return seed_.value; }
    bool session_pending() const { return pending_.has_value(); }
    const ProtocolParams& params() const { return params_; }

private:
    struct Pending {
        RefreshVector lrv;
        std::uint64_t staged_seed;
    };

    ProtocolParams params_;
    SecretVector arv_;
    std::uint64_t i_ = 1;
    SeedState seed_;
    PadStream rng_;
    std::string generator_id_;
    std::optional<Pending> pending_;
};

class Ap2Verifier {
public:
    Ap2Verifier(ProtocolParams params, SecretVector initial_arv,
                std::string generator_id = kDefaultGenerator);

    VerdictMessage handle(const KeyMessage& msg);

    const SecretVector& arv() const { return arv_; }
    std::uint64_t session() const { return i_; }
    std::uint64_t seed() const { return seed_.value; }
    const ProtocolParams& params() const { return params_; }

private:
    ProtocolParams params_;
    SecretVector arv_;
    std::uint64_t i_ = 1;
    SeedState seed_;
    std::string generator_id_;
};

// Split a decrypted m-bit string into its dense refresh vector (leading
// n*l bits) and keyword (trailing keyword_len bits).
std::pair<RefreshVector, Bits> ap2_split_plain(const Bits& plain,
                                               const ProtocolParams& params);

}  // namespace authsim

#endif
