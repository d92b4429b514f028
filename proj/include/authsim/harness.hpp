// Experiment runner: JSON-configured Monte Carlo experiments that drive the
// protocols against the adversary models and compare empirical rates with
// the analytic bounds, plus a registry for many independent tag/verifier
// pairs sharing one verifier process.
//
// Every experiment is fully determined by its config (master_seed included);
// identical configs produce byte-identical CSV output.
#ifndef AUTHSIM_HARNESS_HPP
#define AUTHSIM_HARNESS_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "authsim/channel.hpp"
#include "authsim/refresh.hpp"

namespace authsim {

// Deterministic stream of trial seeds chained from one master value; its
// first four outputs coincide with derive_subseeds(master).
class SeedSequence {
public:
    explicit SeedSequence(std::uint64_t master) : stream_(master) {}
    std::uint64_t next() { return stream_.next_word(); }

private:
    PadStream stream_;
};

struct AdversaryConfig {
    // none | eavesdrop | guess | impersonate | breakin-recovery | bitflip-iima
    std::string kind = "none";
    std::uint32_t k_private = 1;            // unheard sessions per window of n
    MissPlacement placement = MissPlacement::worst_case;
    GuessMode guess_mode = GuessMode::uniform;
    std::uint32_t flip_count = 0;           // 0 -> layout's d_min for ap2t
    std::vector<std::uint32_t> flip_positions;  // fixed positions, overrides flip_count
    std::string mode = "rate";              // bitflip-iima: rate | deadlock
};

struct ExperimentConfig {
    std::string protocol = "ap1";  // ap1 | ap2 | ap2t
    std::uint32_t n = 4;
    std::uint32_t l = 8;
    std::uint32_t keyword_len = 16;
    std::vector<std::string> keywords;  // binary strings; empty -> default word

    std::string refresh_mode = "dense";  // dense | sparse-random
    std::uint32_t refresh_r = 0;         // 0 -> ceil(2 log2 n)
    std::uint32_t refresh_k_private = 1;

    std::uint32_t layout_dims = 0;                  // 0 -> auto
    std::optional<std::uint32_t> layout_watermarks;  // absent -> m + q

    AdversaryConfig adversary;

    std::uint64_t trials = 1000;
    std::uint64_t sessions_per_trial = 0;  // 0 -> experiment default
    bool atomic = true;
    std::uint64_t master_seed = 1;
    std::string generator_id = kDefaultGenerator;

    ProtocolParams make_params() const;
    RefreshPolicy make_policy() const;
    FrameLayout make_layout() const;

    // throws std::invalid_argument naming the offending field
    void validate() const;

    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

struct ExperimentResult {
    ExperimentConfig config;

    std::uint64_t honest_sessions = 0;
    std::uint64_t honest_accepts = 0;
    std::uint64_t adversary_attempts = 0;
    std::uint64_t adversary_successes = 0;
    std::uint64_t sync_failures = 0;
    std::uint64_t deadlocks = 0;

    double honest_rate = 1.0;  // 1.0 when no honest sessions ran
    double adv_rate = 0.0;
    double adv_stderr = 0.0;  // binomial, computed from the bound
    double bound = 0.0;
    // which analytic bound the run was judged against:
    // guess-entry (2^-l), guess-keyword (|keywords| * 2^-keyword_len),
    // tamper-watermark ((1-alpha)^d_min), or none
    std::string bound_kind = "none";
    bool two_sided = false;  // bound check |rate-bound| <= 3s vs rate <= bound+3s
    bool pass = false;

    static std::string csv_header();
    std::string csv_row() const;
    std::string to_csv() const { return csv_header() + csv_row(); }
    std::string to_json() const;
};

// Deterministic given cfg.master_seed; throws on inconsistent configs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Drive `sessions` honest sessions for the configured pair (adversary kind
// none or eavesdrop) and return the line-delimited JSON transcript log.
std::string record_transcript_log(const ExperimentConfig& cfg, std::uint64_t sessions);

// ---------------------------------------------------------------------------
// Multi-pair registry: one verifier process holding an isolated protocol
// state per registered tag. Cross-pair deliveries reject because the pairs
// share no secrets.
class PairRegistry {
public:
    explicit PairRegistry(ExperimentConfig base);

    struct Pair {
        std::unique_ptr<TagSession> tag;
        std::unique_ptr<VerifierSession> verifier;
    };

    // throws std::invalid_argument on duplicate ids
    void register_pair(const std::string& tag_id);
    // throws std::out_of_range on unknown ids
    Pair& lookup(const std::string& tag_id);

    KeyMessage begin_session(const std::string& tag_id);
    VerdictMessage deliver(const std::string& tag_id, const KeyMessage& msg);
    void complete_session(const std::string& tag_id, const VerdictMessage& verdict);

    std::size_t size() const { return pairs_.size(); }

private:
    ExperimentConfig base_;
    SeedSequence seeds_;
    std::map<std::string, Pair> pairs_;
};

}  // namespace authsim

#endif
