// Simulated channel between one Tag and one Verifier with pluggable
// adversaries. A Byzantine adversary may listen to some sessions, insert
// whole forged sessions when sessions are atomic, and rewrite in-flight
// frames when they are not.
//
// Eavesdropping adversaries carry an explicit knowledge model (which vector
// entries and seeds they currently know), so the forgery-rate experiments
// measure a best-possible guesser rather than a strawman.
#ifndef AUTHSIM_CHANNEL_HPP
#define AUTHSIM_CHANNEL_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "authsim/ap1.hpp"
#include "authsim/ap2.hpp"
#include "authsim/ap2_iima.hpp"
#include "authsim/core.hpp"

namespace authsim {

// ---------------------------------------------------------------------------
// Protocol-agnostic session endpoints

class TagSession {
public:
    virtual ~TagSession() = default;
    virtual ProtocolId protocol() const = 0;
    virtual KeyMessage begin_session() = 0;
    virtual void complete_session(const VerdictMessage& verdict) = 0;
};

class VerifierSession {
public:
    virtual ~VerifierSession() = default;
    virtual ProtocolId protocol() const = 0;
    virtual VerdictMessage handle(const KeyMessage& msg) = 0;
};

class Ap1TagSession final : public TagSession {
public:
    explicit Ap1TagSession(Ap1Tag tag) : tag_(std::move(tag)) {}
    ProtocolId protocol() const override { return ProtocolId::ap1; }
    KeyMessage begin_session() override { return tag_.begin_session(); }
    void complete_session(const VerdictMessage& v) override { tag_.complete_session(v); }
    Ap1Tag& tag() { return tag_; }

private:
    Ap1Tag tag_;
};

class Ap1VerifierSession final : public VerifierSession {
public:
    explicit Ap1VerifierSession(Ap1Verifier verifier) : verifier_(std::move(verifier)) {}
    ProtocolId protocol() const override { return ProtocolId::ap1; }
    VerdictMessage handle(const KeyMessage& msg) override { return verifier_.handle(msg); }
    Ap1Verifier& verifier() { return verifier_; }

private:
    Ap1Verifier verifier_;
};

class Ap2TagSession final : public TagSession {
public:
    explicit Ap2TagSession(Ap2Tag tag) : tag_(std::move(tag)) {}
    ProtocolId protocol() const override { return ProtocolId::ap2; }
    KeyMessage begin_session() override { return tag_.begin_session(); }
    void complete_session(const VerdictMessage& v) override { tag_.complete_session(v); }
    Ap2Tag& tag() { return tag_; }

private:
    Ap2Tag tag_;
};

class Ap2VerifierSession final : public VerifierSession {
public:
    explicit Ap2VerifierSession(Ap2Verifier verifier) : verifier_(std::move(verifier)) {}
    ProtocolId protocol() const override { return ProtocolId::ap2; }
    VerdictMessage handle(const KeyMessage& msg) override { return verifier_.handle(msg); }
    Ap2Verifier& verifier() { return verifier_; }

private:
    Ap2Verifier verifier_;
};

class Ap2tTagSession final : public TagSession {
public:
    explicit Ap2tTagSession(Ap2tTag tag) : tag_(std::move(tag)) {}
    ProtocolId protocol() const override { return ProtocolId::ap2t; }
    KeyMessage begin_session() override { return tag_.begin_session(); }
    void complete_session(const VerdictMessage& v) override { tag_.complete_session(v); }
    Ap2tTag& tag() { return tag_; }

private:
    Ap2tTag tag_;
};

class Ap2tVerifierSession final : public VerifierSession {
public:
    explicit Ap2tVerifierSession(Ap2tVerifier verifier) : verifier_(std::move(verifier)) {}
    ProtocolId protocol() const override { return ProtocolId::ap2t; }
    VerdictMessage handle(const KeyMessage& msg) override { return verifier_.handle(msg); }
    Ap2tVerifier& verifier() { return verifier_; }

private:
    Ap2tVerifier verifier_;
};

// ---------------------------------------------------------------------------
// Listening patterns

enum class MissPlacement { worst_case, random };

// Schedule of `sessions` entries, true = the adversary hears that session.
// Every window of n consecutive sessions contains at least k_private unheard
// ones. Worst-case placement puts the misses adjacent at the end of each
// n-block; random placement draws one set of in-block offsets and repeats it,
// which keeps the guarantee under every window alignment.
std::vector<bool> build_listening_pattern(PadStream& rng, std::uint32_t n,
                                          std::uint32_t k_private,
                                          std::uint64_t sessions,
                                          MissPlacement placement);

// ---------------------------------------------------------------------------
// Adversaries

class Adversary {
public:
    virtual ~Adversary() = default;

    // the sessions this adversary hears; defaults to all of them
    void set_listening_pattern(std::vector<bool> pattern) {
        pattern_ = std::move(pattern);
    }
    bool listening(std::uint64_t session_no) const {
        if (pattern_.empty()) return true;
        const std::size_t idx = static_cast<std::size_t>(session_no - 1);
        return idx < pattern_.size() ? pattern_[idx] : true;
    }

    // Non-atomic channels only: replacement payload for an in-flight frame.
    virtual std::optional<Bits> tamper(std::uint64_t session_no, const KeyMessage& sent) {
        (void)session_no;
        (void)sent;
        return std::nullopt;
    }

    // A heard session delivers the original frame and the verdict.
    virtual void observe(const KeyMessage& sent, const VerdictMessage& verdict) {
        (void)sent;
        (void)verdict;
    }

    // An unheard session delivers nothing; the verdict parameter is
    // simulation bookkeeping so knowledge models can note that an accepted
    // session re-randomized the shared state.
    virtual void unheard_session(const VerdictMessage& verdict) { (void)verdict; }

    // Atomic channels: a whole forged key message to insert, or nothing.
    virtual std::optional<KeyMessage> forge() { return std::nullopt; }
    virtual void forge_result(const VerdictMessage& verdict) { (void)verdict; }

private:
    std::vector<bool> pattern_;
};

// Passive adversary; useful as the "none"/pure-eavesdrop baseline.
class NullAdversary final : public Adversary {};

// Flips payload bits of every in-flight frame: either a fixed position list
// or `flip_count` fresh distinct random positions per frame.
class BitFlipAdversary final : public Adversary {
public:
    BitFlipAdversary(std::uint32_t flip_count, PadStream rng);
    explicit BitFlipAdversary(std::vector<std::uint32_t> positions);

    std::optional<Bits> tamper(std::uint64_t session_no, const KeyMessage& sent) override;

private:
    std::uint32_t flip_count_ = 0;
    std::vector<std::uint32_t> fixed_positions_;
    std::optional<PadStream> rng_;
};

enum class GuessMode { uniform, replay };

// Bayesian eavesdropper against the information-theoretic protocol. Tracks,
// per vector entry, the best value estimate and whether it is exact; heard
// sessions reveal the used key value and the refresh vector, unheard
// accepted sessions turn every entry stale.
class Ap1Eavesdropper final : public Adversary {
public:
    Ap1Eavesdropper(ProtocolParams params, RefreshPolicy policy, PadStream rng,
                    GuessMode mode = GuessMode::uniform);

    // break-in: hand the adversary an exact copy of the current vector
    void seed_full_knowledge(const SecretVector& arv, std::uint64_t session_no);

    bool knows_current_key() const;
    std::uint64_t tracked_session() const { return i_; }

    void observe(const KeyMessage& sent, const VerdictMessage& verdict) override;
    void unheard_session(const VerdictMessage& verdict) override;

    std::optional<KeyMessage> forge() override;
    void forge_result(const VerdictMessage& verdict) override;

private:
    struct EntryKnowledge {
        Bits value;
        bool current = false;
    };

    ProtocolParams params_;
    RefreshPolicy policy_;
    PadStream rng_;
    GuessMode mode_;
    std::vector<EntryKnowledge> entries_;
    std::uint64_t i_ = 1;
    std::optional<RefreshVector> pending_forge_;
};

// Eavesdropper against the computational protocols, treating the pad
// generator as a black box: with the full state it decrypts and tracks
// everything; without it the best forgery is a uniformly random cipher
// string. One unheard accepted session destroys vector knowledge; the seed
// alone is useless from then on.
class Ap2Eavesdropper final : public Adversary {
public:
    Ap2Eavesdropper(ProtocolParams params, PadStream rng,
                    std::string generator_id = kDefaultGenerator);

    void seed_full_knowledge(const SecretVector& arv, std::uint64_t seed_value,
                             std::uint64_t session_no);

    bool knows_state() const { return arv_known_ && seed_known_; }
    std::uint64_t tracked_session() const { return i_; }

    void observe(const KeyMessage& sent, const VerdictMessage& verdict) override;
    void unheard_session(const VerdictMessage& verdict) override;

    std::optional<KeyMessage> forge() override;
    void forge_result(const VerdictMessage& verdict) override;

private:
    ProtocolParams params_;
    PadStream rng_;
    std::string generator_id_;
    bool arv_known_ = false;
    bool seed_known_ = false;
    SecretVector arv_;
    std::uint64_t seed_ = 0;
    std::uint64_t i_ = 1;
    std::optional<std::pair<RefreshVector, std::uint64_t>> pending_forge_;
};

// ---------------------------------------------------------------------------
// Session driving

struct SessionTranscript {
    std::uint64_t session_index = 0;
    std::vector<std::uint8_t> tag_message;  // frame as sent (empty for forgeries' tag side)
    std::optional<Verdict> verdict;
    bool observed_by_adversary = false;
    bool tampered = false;
    bool adversary_session = false;
};

struct RunStats {
    std::uint64_t honest_sessions = 0;
    std::uint64_t honest_accepts = 0;
    std::uint64_t adversary_attempts = 0;
    std::uint64_t adversary_accepts = 0;
    std::uint64_t tampered_deliveries = 0;
    std::uint64_t tamper_accepts = 0;
    std::uint64_t deadlocks = 0;
};

struct RunOptions {
    std::uint64_t sessions = 0;
    bool atomic = true;
    bool record_transcripts = true;
    // consecutive honest rejections that count as a deadlock; 0 disables
    std::uint32_t deadlock_threshold = 0;
    // poll the adversary for a forgery after each honest session (atomic only)
    bool poll_forgeries = false;
};

struct RunResult {
    RunStats stats;
    std::vector<SessionTranscript> transcripts;
};

// throws std::invalid_argument when tag/verifier protocols differ
RunResult run_sessions(TagSession& tag, VerifierSession& verifier,
                       Adversary& adversary, const RunOptions& options);

// One impersonation attempt against the verifier's current session; returns
// whether it was accepted. No-op (false) if the adversary declines to forge.
bool attempt_forgery(VerifierSession& verifier, Adversary& adversary,
                     RunStats* stats = nullptr);

struct TamperRoundStats {
    std::uint64_t rounds = 0;
    std::uint64_t tamper_accepts = 0;
    std::uint64_t tamper_rejects = 0;
    std::uint64_t recovery_attempts = 0;
    std::uint64_t deadlocks = 0;
};

// Non-atomic rounds: each round delivers one in-flight-modified frame, then
// lets the honest pair retry unmolested until a session opens (at most
// recovery_cap attempts). A round whose recovery never opens is a deadlock;
// stop_on_deadlock ends the run there.
TamperRoundStats run_tamper_rounds(TagSession& tag, VerifierSession& verifier,
                                   Adversary& adversary, std::uint64_t rounds,
                                   std::uint32_t recovery_cap,
                                   bool stop_on_deadlock = true);

// One JSON object per line: session_index, tag_message (hex), verdict,
// observed_by_adversary, tampered, adversary_session.
std::string transcripts_to_jsonl(const std::vector<SessionTranscript>& transcripts);

}  // namespace authsim

#endif
