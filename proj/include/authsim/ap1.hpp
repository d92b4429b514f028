// The proactive information-theoretic protocol: Tag and Verifier share a
// secret vector; each session the Tag proves knowledge of the scheduled
// entry and ships a refresh vector that both sides fold in on acceptance.
//
// The Tag defers its own update until the Open verdict arrives, so a lost
// or forged verdict cannot desynchronize the pair on its own, and it draws
// a fresh refresh vector on every retry after a reject.
#ifndef AUTHSIM_AP1_HPP
#define AUTHSIM_AP1_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "authsim/core.hpp"
#include "authsim/refresh.hpp"

namespace authsim {

// Zero the used entry, then xor every entry with the refresh vector; the
// used entry therefore ends as the refresh vector's value for it. Dense
// refresh only; sparse refresh goes through apply_sparse_refresh.
SecretVector updating_procedure(const SecretVector& arv, std::uint32_t keyentry,
                                const RefreshVector& lrv);

// Payload layout. Dense: key value X (l bits) then n entries of l bits.
// Sparse: X then r records of (index-1 in ceil(log2 n) bits, value in l
// bits), indices strictly ascending.
std::size_t ap1_frame_bits(const ProtocolParams& params, const RefreshPolicy& policy);
Bits ap1_build_payload(const Bits& key_value, const RefreshVector& refresh,
                       const ProtocolParams& params, const RefreshPolicy& policy);
// nullopt on any malformed payload (wrong length, bad indices, wrong order)
std::optional<std::pair<Bits, RefreshVector>> ap1_parse_payload(
    const Bits& payload, const ProtocolParams& params, const RefreshPolicy& policy);

class Ap1Tag {
public:
    Ap1Tag(ProtocolParams params, SecretVector initial_arv, PadStream rng,
           RefreshPolicy policy = RefreshPolicy::dense());

    // throws std::logic_error if a session is already pending
    KeyMessage begin_session();
    // throws std::logic_error if no session is pending
    void complete_session(const VerdictMessage& verdict);

    const SecretVector& arv() const { return arv_; }
    std::uint64_t session() const { return i_; }
    bool session_pending() const { return pending_.has_value(); }
    const ProtocolParams& params() const { return params_; }
    const RefreshPolicy& policy() const { return policy_; }

    std::vector<std::uint8_t> save() const;
    static Ap1Tag load(std::span<const std::uint8_t> bytes);

private:
    ProtocolParams params_;
    RefreshPolicy policy_;
    SecretVector arv_;
    std::uint64_t i_ = 1;
    std::optional<RefreshVector> pending_;
    PadStream rng_;
};

class Ap1Verifier {
public:
    Ap1Verifier(ProtocolParams params, SecretVector initial_arv,
                RefreshPolicy policy = RefreshPolicy::dense());

    // Open and update on a matching key value; DoNotOpen with untouched
    // state on anything else, malformed payloads included.
    VerdictMessage handle(const KeyMessage& msg);

    const SecretVector& arv() const { return arv_; }
    std::uint64_t session() const { return i_; }
    const ProtocolParams& params() const { return params_; }

    std::vector<std::uint8_t> save() const;
    static Ap1Verifier load(std::span<const std::uint8_t> bytes);

private:
    ProtocolParams params_;
    RefreshPolicy policy_;
    SecretVector arv_;
    std::uint64_t i_ = 1;
};

}  // namespace authsim

#endif
