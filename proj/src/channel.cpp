#include "authsim/channel.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace authsim {

// ---------------------------------------------------------------------------
// Listening patterns

std::vector<bool> build_listening_pattern(PadStream& rng, std::uint32_t n,
                                          std::uint32_t k_private,
                                          std::uint64_t sessions,
                                          MissPlacement placement) {
    if (k_private < 1 || k_private > n)
        throw std::invalid_argument("listening pattern: k_private out of 1..n");
    if (sessions < n)
        throw std::invalid_argument("listening pattern: fewer sessions than one window");

    std::vector<bool> miss_offsets(n, false);
    if (placement == MissPlacement::worst_case) {
        for (std::uint32_t o = n - k_private; o < n; ++o) miss_offsets[o] = true;
    } else {
        // one random offset set, repeated per block; per-block independent
        // draws could leave a straddling window with fewer than k misses
        std::uint32_t chosen = 0;
        while (chosen < k_private) {
            const auto o = static_cast<std::uint32_t>(rng.next_below(n));
            if (miss_offsets[o]) continue;
            miss_offsets[o] = true;
            ++chosen;
        }
    }

    std::vector<bool> pattern(sessions);
    for (std::uint64_t s = 0; s < sessions; ++s)
        pattern[s] = !miss_offsets[static_cast<std::uint32_t>(s % n)];
    return pattern;
}

// ---------------------------------------------------------------------------
// BitFlipAdversary

BitFlipAdversary::BitFlipAdversary(std::uint32_t flip_count, PadStream rng)
    : flip_count_(flip_count), rng_(std::move(rng)) {
    if (flip_count_ < 1)
        throw std::invalid_argument("BitFlipAdversary: flip_count must be >= 1");
}

BitFlipAdversary::BitFlipAdversary(std::vector<std::uint32_t> positions)
    : fixed_positions_(std::move(positions)) {
    if (fixed_positions_.empty())
        throw std::invalid_argument("BitFlipAdversary: empty position list");
}

std::optional<Bits> BitFlipAdversary::tamper(std::uint64_t, const KeyMessage& sent) {
    Bits modified = sent.payload;
    if (!fixed_positions_.empty()) {
        for (std::uint32_t pos : fixed_positions_) {
            if (pos >= modified.size())
                throw std::invalid_argument("BitFlipAdversary: position beyond frame");
            modified.flip(pos);
        }
        return modified;
    }
    if (flip_count_ > modified.size())
        throw std::invalid_argument("BitFlipAdversary: more flips than frame bits");
    // distinct random positions
    std::vector<std::uint32_t> chosen;
    chosen.reserve(flip_count_);
    while (chosen.size() < flip_count_) {
        const auto pos = static_cast<std::uint32_t>(rng_->next_below(modified.size()));
        if (std::find(chosen.begin(), chosen.end(), pos) != chosen.end()) continue;
        chosen.push_back(pos);
        modified.flip(pos);
    }
    return modified;
}

// ---------------------------------------------------------------------------
// Ap1Eavesdropper

Ap1Eavesdropper::Ap1Eavesdropper(ProtocolParams params, RefreshPolicy policy,
                                 PadStream rng, GuessMode mode)
    : params_(std::move(params)),
      policy_(policy),
      rng_(std::move(rng)),
      mode_(mode),
      entries_(params_.n, EntryKnowledge{Bits(params_.l), false}) {}

void Ap1Eavesdropper::seed_full_knowledge(const SecretVector& arv,
                                          std::uint64_t session_no) {
    for (std::uint32_t j = 1; j <= params_.n; ++j)
        entries_[j - 1] = EntryKnowledge{arv.at(j), true};
    i_ = session_no;
}

bool Ap1Eavesdropper::knows_current_key() const {
    return entries_[key_entry_index(params_.n, i_) - 1].current;
}

void Ap1Eavesdropper::observe(const KeyMessage& sent, const VerdictMessage& verdict) {
    if (sent.protocol != ProtocolId::ap1) return;
    const auto parsed = ap1_parse_payload(sent.payload, params_, policy_);
    if (!parsed) return;
    const auto& [key_value, refresh] = *parsed;
    const std::uint32_t keyentry = key_entry_index(params_.n, i_);
    // the key message exposes the current value of the used entry
    entries_[keyentry - 1] = EntryKnowledge{key_value, true};
    if (!verdict.is_open()) return;
    if (refresh.form == RefreshVector::Form::dense) {
        for (std::uint32_t j = 1; j <= params_.n; ++j) {
            if (j == keyentry)
                entries_[j - 1] = EntryKnowledge{refresh.entries[j - 1], true};
            else
                entries_[j - 1].value ^= refresh.entries[j - 1];
        }
    } else {
        entries_[keyentry - 1] = EntryKnowledge{Bits(params_.l), true};
        for (const auto& [index, value] : refresh.pairs)
            entries_[index - 1].value ^= value;
    }
    ++i_;
}

void Ap1Eavesdropper::unheard_session(const VerdictMessage& verdict) {
    if (!verdict.is_open()) return;
    // an unseen refresh turns every estimate stale
    for (EntryKnowledge& e : entries_) e.current = false;
    ++i_;
}

std::optional<KeyMessage> Ap1Eavesdropper::forge() {
    const std::uint32_t keyentry = key_entry_index(params_.n, i_);
    const EntryKnowledge& known = entries_[keyentry - 1];
    Bits guess = known.value;
    if (!known.current && mode_ == GuessMode::uniform) guess = rng_.next_bits(params_.l);

    RefreshVector refresh =
        policy_.mode == RefreshPolicy::Mode::dense
            ? RefreshVector::dense_random(params_.n, params_.l, rng_)
            : sparse_refresh_random(params_.n, params_.l, policy_.per_session_count, rng_);
    pending_forge_ = refresh;

    KeyMessage msg;
    msg.protocol = ProtocolId::ap1;
    msg.session_index = static_cast<std::uint32_t>(i_);
    msg.payload = ap1_build_payload(guess, refresh, params_, policy_);
    return msg;
}

void Ap1Eavesdropper::forge_result(const VerdictMessage& verdict) {
    if (!pending_forge_) return;
    if (verdict.is_open()) {
        // the verifier folded in our refresh, which we obviously know
        const std::uint32_t keyentry = key_entry_index(params_.n, i_);
        const RefreshVector& refresh = *pending_forge_;
        if (refresh.form == RefreshVector::Form::dense) {
            for (std::uint32_t j = 1; j <= params_.n; ++j) {
                if (j == keyentry)
                    entries_[j - 1] = EntryKnowledge{refresh.entries[j - 1], true};
                else
                    entries_[j - 1].value ^= refresh.entries[j - 1];
            }
        } else {
            entries_[keyentry - 1] = EntryKnowledge{Bits(params_.l), true};
            for (const auto& [index, value] : refresh.pairs)
                entries_[index - 1].value ^= value;
        }
        ++i_;
    }
    pending_forge_.reset();
}

// ---------------------------------------------------------------------------
// Ap2Eavesdropper

Ap2Eavesdropper::Ap2Eavesdropper(ProtocolParams params, PadStream rng,
                                 std::string generator_id)
    : params_(std::move(params)),
      rng_(std::move(rng)),
      generator_id_(std::move(generator_id)),
      arv_(params_.n, params_.l) {}

void Ap2Eavesdropper::seed_full_knowledge(const SecretVector& arv,
                                          std::uint64_t seed_value,
                                          std::uint64_t session_no) {
    arv_ = arv;
    seed_ = seed_value;
    arv_known_ = true;
    seed_known_ = true;
    i_ = session_no;
}

void Ap2Eavesdropper::observe(const KeyMessage& sent, const VerdictMessage& verdict) {
    if (sent.protocol != ProtocolId::ap2) return;
    if (!verdict.is_open()) return;  // verifier rolled back, nothing moved
    if (arv_known_ && seed_known_ && sent.payload.size() == params_.pad_bits()) {
        const std::uint32_t keyentry = key_entry_index(params_.n, i_);
        const std::uint64_t staged = seed_ ^ arv_.at(keyentry).fold_u64();
        PadStream pad(staged, generator_id_);
        const Bits plain = sent.payload ^ pad.next_bits(params_.pad_bits());
        auto [lrv, keyword] = ap2_split_plain(plain, params_);
        (void)keyword;
        arv_ = updating_procedure(arv_, keyentry, lrv);
        seed_ = staged;
    } else {
        // ciphertext alone teaches nothing usable; state drifted away
        arv_known_ = false;
        seed_known_ = false;
    }
    ++i_;
}

void Ap2Eavesdropper::unheard_session(const VerdictMessage& verdict) {
    if (!verdict.is_open()) return;
    if (arv_known_ && seed_known_) {
        // the new seed folds an entry we still knew; the refresh we missed
        // does not touch it
        const std::uint32_t keyentry = key_entry_index(params_.n, i_);
        seed_ ^= arv_.at(keyentry).fold_u64();
    } else {
        seed_known_ = false;
    }
    arv_known_ = false;
    ++i_;
}

std::optional<KeyMessage> Ap2Eavesdropper::forge() {
    KeyMessage msg;
    msg.protocol = ProtocolId::ap2;
    msg.session_index = static_cast<std::uint32_t>(i_);
    if (arv_known_ && seed_known_) {
        const std::uint32_t keyentry = key_entry_index(params_.n, i_);
        const std::uint64_t staged = seed_ ^ arv_.at(keyentry).fold_u64();
        RefreshVector lrv = RefreshVector::dense_random(params_.n, params_.l, rng_);
        Bits plain;
        for (const Bits& e : lrv.entries) plain.append(e);
        plain.append(params_.primary_keyword());
        PadStream pad(staged, generator_id_);
        msg.payload = plain ^ pad.next_bits(params_.pad_bits());
        pending_forge_ = {std::move(lrv), staged};
    } else {
        msg.payload = rng_.next_bits(params_.pad_bits());
        pending_forge_.reset();
    }
    return msg;
}

void Ap2Eavesdropper::forge_result(const VerdictMessage& verdict) {
    if (!verdict.is_open()) {
        pending_forge_.reset();
        return;
    }
    if (pending_forge_) {
        const std::uint32_t keyentry = key_entry_index(params_.n, i_);
        arv_ = updating_procedure(arv_, keyentry, pending_forge_->first);
        seed_ = pending_forge_->second;
        pending_forge_.reset();
    } else {
        // a blind guess went through; the verifier now holds pad-derived
        // values we cannot reconstruct
        arv_known_ = false;
        seed_known_ = false;
    }
    ++i_;
}

// ---------------------------------------------------------------------------
// Session driving

namespace {

std::string to_hex(const std::vector<std::uint8_t>& bytes) {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

}  // namespace

RunResult run_sessions(TagSession& tag, VerifierSession& verifier,
                       Adversary& adversary, const RunOptions& options) {
    if (tag.protocol() != verifier.protocol())
        throw std::invalid_argument("run_sessions: tag/verifier protocol mismatch");

    RunResult result;
    std::uint32_t consecutive_rejects = 0;
    for (std::uint64_t s = 1; s <= options.sessions; ++s) {
        KeyMessage sent = tag.begin_session();
        KeyMessage delivered = sent;
        bool tampered = false;
        if (!options.atomic) {
            if (auto modified = adversary.tamper(s, sent)) {
                delivered.payload = std::move(*modified);
                tampered = delivered.payload != sent.payload;
            }
        }
        const VerdictMessage verdict = verifier.handle(delivered);
        const bool heard = adversary.listening(s);
        if (heard)
            adversary.observe(sent, verdict);
        else
            adversary.unheard_session(verdict);
        tag.complete_session(verdict);

        ++result.stats.honest_sessions;
        result.stats.honest_accepts += verdict.is_open();
        result.stats.tampered_deliveries += tampered;
        result.stats.tamper_accepts += tampered && verdict.is_open();
        if (options.record_transcripts) {
            SessionTranscript tr;
            tr.session_index = s;
            tr.tag_message = encode_message(sent);
            tr.verdict = verdict.verdict;
            tr.observed_by_adversary = heard;
            tr.tampered = tampered;
            result.transcripts.push_back(std::move(tr));
        }

        if (verdict.is_open())
            consecutive_rejects = 0;
        else if (options.deadlock_threshold != 0 &&
                 ++consecutive_rejects >= options.deadlock_threshold) {
            result.stats.deadlocks = 1;
            break;
        }

        if (options.atomic && options.poll_forgeries) {
            if (auto forged = adversary.forge()) {
                const VerdictMessage fv = verifier.handle(*forged);
                adversary.forge_result(fv);
                ++result.stats.adversary_attempts;
                result.stats.adversary_accepts += fv.is_open();
                if (options.record_transcripts) {
                    SessionTranscript tr;
                    tr.session_index = s;
                    tr.tag_message = encode_message(*forged);
                    tr.verdict = fv.verdict;
                    tr.observed_by_adversary = true;
                    tr.adversary_session = true;
                    result.transcripts.push_back(std::move(tr));
                }
            }
        }
    }
    return result;
}

bool attempt_forgery(VerifierSession& verifier, Adversary& adversary, RunStats* stats) {
    auto forged = adversary.forge();
    if (!forged) return false;
    const VerdictMessage verdict = verifier.handle(*forged);
    adversary.forge_result(verdict);
    if (stats) {
        ++stats->adversary_attempts;
        stats->adversary_accepts += verdict.is_open();
    }
    return verdict.is_open();
}

TamperRoundStats run_tamper_rounds(TagSession& tag, VerifierSession& verifier,
                                   Adversary& adversary, std::uint64_t rounds,
                                   std::uint32_t recovery_cap, bool stop_on_deadlock) {
    if (tag.protocol() != verifier.protocol())
        throw std::invalid_argument("run_tamper_rounds: tag/verifier protocol mismatch");

    TamperRoundStats stats;
    for (std::uint64_t round = 0; round < rounds; ++round) {
        ++stats.rounds;
        KeyMessage sent = tag.begin_session();
        KeyMessage delivered = sent;
        bool tampered = false;
        if (auto modified = adversary.tamper(round + 1, sent)) {
            delivered.payload = std::move(*modified);
            tampered = delivered.payload != sent.payload;
        }
        const VerdictMessage verdict = verifier.handle(delivered);
        tag.complete_session(verdict);
        if (tampered && verdict.is_open())
            ++stats.tamper_accepts;
        else if (tampered)
            ++stats.tamper_rejects;

        // honest recovery: the pair must be able to open again
        bool recovered = false;
        for (std::uint32_t attempt = 0; attempt < recovery_cap; ++attempt) {
            ++stats.recovery_attempts;
            const KeyMessage retry = tag.begin_session();
            const VerdictMessage rv = verifier.handle(retry);
            tag.complete_session(rv);
            if (rv.is_open()) {
                recovered = true;
                break;
            }
        }
        if (!recovered) {
            ++stats.deadlocks;
            if (stop_on_deadlock) break;
        }
    }
    return stats;
}

std::string transcripts_to_jsonl(const std::vector<SessionTranscript>& transcripts) {
    std::ostringstream out;
    for (const SessionTranscript& tr : transcripts) {
        out << "{\"session_index\":" << tr.session_index << ",\"tag_message\":\""
            << to_hex(tr.tag_message) << "\",\"verdict\":";
        if (tr.verdict)
            out << (*tr.verdict == Verdict::open ? "\"open\"" : "\"do_not_open\"");
        else
            out << "null";
        out << ",\"observed_by_adversary\":" << (tr.observed_by_adversary ? "true" : "false")
            << ",\"tampered\":" << (tr.tampered ? "true" : "false")
            << ",\"adversary_session\":" << (tr.adversary_session ? "true" : "false")
            << "}\n";
    }
    return out.str();
}

}  // namespace authsim
