#include "authsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace authsim {

namespace {

using nlohmann::json;

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Memoryless forger: a fresh uniformly random key message per attempt,
// shaped for the target protocol. Used by the "guess" adversary kind.
class BlindForger final : public Adversary {
public:
    BlindForger(ProtocolId protocol, ProtocolParams params, RefreshPolicy policy,
                std::size_t frame_bits, PadStream rng)
        : protocol_(protocol),
          params_(std::move(params)),
          policy_(policy),
          frame_bits_(frame_bits),
          rng_(std::move(rng)) {}

    std::optional<KeyMessage> forge() override {
        KeyMessage msg;
        msg.protocol = protocol_;
        msg.session_index = 0;
        if (protocol_ == ProtocolId::ap1) {
            const Bits guess = rng_.next_bits(params_.l);
            const RefreshVector refresh =
                policy_.mode == RefreshPolicy::Mode::dense
                    ? RefreshVector::dense_random(params_.n, params_.l, rng_)
                    : sparse_refresh_random(params_.n, params_.l,
                                            policy_.per_session_count, rng_);
            msg.payload = ap1_build_payload(guess, refresh, params_, policy_);
        } else {
            msg.payload = rng_.next_bits(frame_bits_);
        }
        return msg;
    }

private:
    ProtocolId protocol_;
    ProtocolParams params_;
    RefreshPolicy policy_;
    std::size_t frame_bits_;
    PadStream rng_;
};

struct TrialSeeds {
    std::uint64_t arv;
    std::uint64_t tag_rng;
    std::uint64_t adversary;
    std::uint64_t aux;
};

TrialSeeds trial_seeds(SeedSequence& seq) {
    const auto sub = derive_subseeds(seq.next());
    return {sub[0], sub[1], sub[2], sub[3]};
}

SecretVector fresh_arv(const ExperimentConfig& cfg, const ProtocolParams& params,
                       std::uint64_t seed) {
    PadStream rng(seed, cfg.generator_id);
    return SecretVector::random(params.n, params.l, rng);
}

ProtocolId protocol_id(const std::string& name) {
    if (name == "ap1") return ProtocolId::ap1;
    if (name == "ap2") return ProtocolId::ap2;
    if (name == "ap2t") return ProtocolId::ap2t;
    throw std::invalid_argument("protocol: must be ap1, ap2 or ap2t");
}

// ---------------------------------------------------------------------------
// bound selection

void assign_bound(const ExperimentConfig& cfg, const ProtocolParams& params,
                  ExperimentResult& out) {
    const std::string& kind = cfg.adversary.kind;
    if (kind == "none" || kind == "eavesdrop") {
        out.bound = 0.0;
        out.bound_kind = "none";
        return;
    }
    if (cfg.protocol == "ap1") {
        out.bound = std::pow(2.0, -static_cast<double>(params.l));
        out.bound_kind = "guess-entry";
        // an impersonation attempt against the information-theoretic scheme
        // should match blind guessing exactly, not merely stay below it
        out.two_sided = kind != "bitflip-iima";
        return;
    }
    if (kind == "bitflip-iima" && cfg.protocol == "ap2t") {
        out.bound = compute_security_bound(cfg.make_layout()).p_a_bound;
        out.bound_kind = "tamper-watermark";
        return;
    }
    out.bound = static_cast<double>(params.keywords.size()) *
                std::pow(2.0, -static_cast<double>(params.keyword_len));
    out.bound_kind = "guess-keyword";
}

void finish_result(ExperimentResult& out) {
    if (out.honest_sessions > 0)
        out.honest_rate = static_cast<double>(out.honest_accepts) /
                          static_cast<double>(out.honest_sessions);
    bool bound_ok = true;
    if (out.adversary_attempts > 0 && out.bound_kind != "none") {
        out.adv_rate = static_cast<double>(out.adversary_successes) /
                       static_cast<double>(out.adversary_attempts);
        out.adv_stderr = std::sqrt(out.bound * (1.0 - out.bound) /
                                   static_cast<double>(out.adversary_attempts));
        bound_ok = out.two_sided
                       ? std::abs(out.adv_rate - out.bound) <= 3.0 * out.adv_stderr
                       : out.adv_rate <= out.bound + 3.0 * out.adv_stderr;
    }
    const bool honest_ok = out.honest_sessions == 0 ||
                           out.honest_accepts == out.honest_sessions;
    out.pass = bound_ok && honest_ok && out.sync_failures == 0 && out.deadlocks == 0;
}

// ---------------------------------------------------------------------------
// honest completeness runs (adversary "none", or "eavesdrop" with a pattern)

template <class Tag, class Verifier, class SyncFn>
void honest_loop(Tag& tag, Verifier& verifier, std::uint64_t sessions,
                 ExperimentResult& out, SyncFn&& in_sync) {
    for (std::uint64_t s = 0; s < sessions; ++s) {
        const KeyMessage msg = tag.begin_session();
        const VerdictMessage verdict = verifier.handle(msg);
        tag.complete_session(verdict);
        ++out.honest_sessions;
        out.honest_accepts += verdict.is_open();
        if (!in_sync(tag, verifier)) ++out.sync_failures;
    }
}

void run_honest_experiment(const ExperimentConfig& cfg, ExperimentResult& out) {
    const ProtocolParams params = cfg.make_params();
    const RefreshPolicy policy = cfg.make_policy();
    const std::uint64_t sessions =
        cfg.sessions_per_trial ? cfg.sessions_per_trial : 2 * std::uint64_t{params.n};
    SeedSequence seq(cfg.master_seed);

    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        const TrialSeeds seeds = trial_seeds(seq);
        const SecretVector arv = fresh_arv(cfg, params, seeds.arv);
        if (cfg.protocol == "ap1") {
            Ap1Tag tag(params, arv, PadStream(seeds.tag_rng, cfg.generator_id), policy);
            Ap1Verifier verifier(params, arv, policy);
            honest_loop(tag, verifier, sessions, out, [](auto& tg, auto& vf) {
                return tg.arv() == vf.arv() && tg.session() == vf.session();
            });
        } else if (cfg.protocol == "ap2") {
            Ap2Tag tag(params, arv, PadStream(seeds.tag_rng, cfg.generator_id),
                       cfg.generator_id);
            Ap2Verifier verifier(params, arv, cfg.generator_id);
            honest_loop(tag, verifier, sessions, out, [](auto& tg, auto& vf) {
                return tg.arv() == vf.arv() && tg.session() == vf.session() &&
                       tg.seed() == vf.seed();
            });
        } else {
            const FrameLayout layout = cfg.make_layout();
            Ap2tTag tag(params, layout, arv,
                        PadStream(seeds.tag_rng, cfg.generator_id), cfg.generator_id);
            Ap2tVerifier verifier(params, layout, arv, cfg.generator_id);
            honest_loop(tag, verifier, sessions, out, [](auto& tg, auto& vf) {
                return tg.arv() == vf.arv() && tg.session() == vf.session() &&
                       tg.seed() == vf.seed();
            });
        }
    }
}

// ---------------------------------------------------------------------------
// blind guessing (kind "guess"): one standing verifier, `trials` attempts

void run_guess_experiment(const ExperimentConfig& cfg, ExperimentResult& out) {
    const ProtocolParams params = cfg.make_params();
    const RefreshPolicy policy = cfg.make_policy();
    SeedSequence seq(cfg.master_seed);
    const TrialSeeds seeds = trial_seeds(seq);
    const SecretVector arv = fresh_arv(cfg, params, seeds.arv);

    std::unique_ptr<VerifierSession> verifier;
    std::size_t frame_bits = 0;
    if (cfg.protocol == "ap1") {
        verifier = std::make_unique<Ap1VerifierSession>(Ap1Verifier(params, arv, policy));
    } else if (cfg.protocol == "ap2") {
        verifier = std::make_unique<Ap2VerifierSession>(
            Ap2Verifier(params, arv, cfg.generator_id));
        frame_bits = params.pad_bits();
    } else {
        const FrameLayout layout = cfg.make_layout();
        verifier = std::make_unique<Ap2tVerifierSession>(
            Ap2tVerifier(params, layout, arv, cfg.generator_id));
        frame_bits = layout.t;
    }

    BlindForger forger(protocol_id(cfg.protocol), params, policy, frame_bits,
                       PadStream(seeds.adversary, cfg.generator_id));
    RunStats stats;
    for (std::uint64_t t = 0; t < cfg.trials; ++t)
        attempt_forgery(*verifier, forger, &stats);
    out.adversary_attempts = stats.adversary_attempts;
    out.adversary_successes = stats.adversary_accepts;
}

// ---------------------------------------------------------------------------
// eavesdrop / eavesdrop-then-impersonate

void run_impersonate_experiment(const ExperimentConfig& cfg, ExperimentResult& out,
                                bool with_forgery) {
    const ProtocolParams params = cfg.make_params();
    const RefreshPolicy policy = cfg.make_policy();
    const std::uint64_t warmup =
        cfg.sessions_per_trial ? cfg.sessions_per_trial : params.n;
    SeedSequence seq(cfg.master_seed);

    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        const TrialSeeds seeds = trial_seeds(seq);
        const SecretVector arv = fresh_arv(cfg, params, seeds.arv);

        std::unique_ptr<TagSession> tag;
        std::unique_ptr<VerifierSession> verifier;
        std::unique_ptr<Adversary> adversary;
        if (cfg.protocol == "ap1") {
            tag = std::make_unique<Ap1TagSession>(Ap1Tag(
                params, arv, PadStream(seeds.tag_rng, cfg.generator_id), policy));
            verifier =
                std::make_unique<Ap1VerifierSession>(Ap1Verifier(params, arv, policy));
            adversary = std::make_unique<Ap1Eavesdropper>(
                params, policy, PadStream(seeds.adversary, cfg.generator_id),
                cfg.adversary.guess_mode);
        } else {
            tag = std::make_unique<Ap2TagSession>(
                Ap2Tag(params, arv, PadStream(seeds.tag_rng, cfg.generator_id),
                       cfg.generator_id));
            verifier = std::make_unique<Ap2VerifierSession>(
                Ap2Verifier(params, arv, cfg.generator_id));
            adversary = std::make_unique<Ap2Eavesdropper>(
                params, PadStream(seeds.adversary, cfg.generator_id), cfg.generator_id);
        }
        if (cfg.adversary.k_private > 0) {
            PadStream pattern_rng(seeds.aux, cfg.generator_id);
            adversary->set_listening_pattern(
                build_listening_pattern(pattern_rng, params.n, cfg.adversary.k_private,
                                        warmup, cfg.adversary.placement));
        }

        RunOptions options;
        options.sessions = warmup;
        options.record_transcripts = false;
        const RunResult rr = run_sessions(*tag, *verifier, *adversary, options);
        out.honest_sessions += rr.stats.honest_sessions;
        out.honest_accepts += rr.stats.honest_accepts;

        if (with_forgery) {
            RunStats stats;
            attempt_forgery(*verifier, *adversary, &stats);
            out.adversary_attempts += stats.adversary_attempts;
            out.adversary_successes += stats.adversary_accepts;
        }
    }
}

// ---------------------------------------------------------------------------
// break-in followed by one unheard session (proactive recovery)

void run_breakin_experiment(const ExperimentConfig& cfg, ExperimentResult& out) {
    const ProtocolParams params = cfg.make_params();
    const RefreshPolicy policy = cfg.make_policy();
    const std::uint64_t attempts_per_trial =
        cfg.sessions_per_trial ? cfg.sessions_per_trial
                               : std::max<std::uint64_t>(1, params.n - 1);
    SeedSequence seq(cfg.master_seed);

    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        const TrialSeeds seeds = trial_seeds(seq);
        const SecretVector arv = fresh_arv(cfg, params, seeds.arv);

        if (cfg.protocol == "ap1") {
            Ap1Tag tag(params, arv, PadStream(seeds.tag_rng, cfg.generator_id), policy);
            Ap1Verifier verifier(params, arv, policy);
            Ap1Eavesdropper adversary(params, policy,
                                      PadStream(seeds.adversary, cfg.generator_id),
                                      cfg.adversary.guess_mode);

            // one heard session, then the break-in snapshot
            {
                const KeyMessage msg = tag.begin_session();
                const VerdictMessage v = verifier.handle(msg);
                adversary.observe(msg, v);
                tag.complete_session(v);
                ++out.honest_sessions;
                out.honest_accepts += v.is_open();
            }
            adversary.seed_full_knowledge(verifier.arv(), verifier.session());
            // the one session the adversary misses
            {
                const KeyMessage msg = tag.begin_session();
                const VerdictMessage v = verifier.handle(msg);
                adversary.unheard_session(v);
                tag.complete_session(v);
                ++out.honest_sessions;
                out.honest_accepts += v.is_open();
            }
            for (std::uint64_t a = 0; a < attempts_per_trial; ++a) {
                ++out.adversary_attempts;
                const auto forged = adversary.forge();
                const VerdictMessage fv = verifier.handle(*forged);
                adversary.forge_result(fv);
                if (fv.is_open()) {
                    ++out.adversary_successes;
                    break;  // the verifier now holds adversary state; end trial
                }
                if (a + 1 == attempts_per_trial) break;
                const KeyMessage msg = tag.begin_session();
                const VerdictMessage v = verifier.handle(msg);
                adversary.observe(msg, v);
                tag.complete_session(v);
                ++out.honest_sessions;
                out.honest_accepts += v.is_open();
            }
        } else {
            Ap2Tag tag(params, arv, PadStream(seeds.tag_rng, cfg.generator_id),
                       cfg.generator_id);
            Ap2Verifier verifier(params, arv, cfg.generator_id);
            Ap2Eavesdropper adversary(
                params, PadStream(seeds.adversary, cfg.generator_id), cfg.generator_id);

            {
                const KeyMessage msg = tag.begin_session();
                const VerdictMessage v = verifier.handle(msg);
                adversary.observe(msg, v);
                tag.complete_session(v);
                ++out.honest_sessions;
                out.honest_accepts += v.is_open();
            }
            adversary.seed_full_knowledge(verifier.arv(), verifier.seed(),
                                          verifier.session());
            {
                const KeyMessage msg = tag.begin_session();
                const VerdictMessage v = verifier.handle(msg);
                adversary.unheard_session(v);
                tag.complete_session(v);
                ++out.honest_sessions;
                out.honest_accepts += v.is_open();
            }
            for (std::uint64_t a = 0; a < attempts_per_trial; ++a) {
                ++out.adversary_attempts;
                const auto forged = adversary.forge();
                const VerdictMessage fv = verifier.handle(*forged);
                adversary.forge_result(fv);
                if (fv.is_open()) {
                    ++out.adversary_successes;
                    break;
                }
                if (a + 1 == attempts_per_trial) break;
                const KeyMessage msg = tag.begin_session();
                const VerdictMessage v = verifier.handle(msg);
                adversary.observe(msg, v);
                tag.complete_session(v);
                ++out.honest_sessions;
                out.honest_accepts += v.is_open();
            }
        }
    }
}

// ---------------------------------------------------------------------------
// in-flight bit flipping

std::unique_ptr<BitFlipAdversary> make_bitflip(const ExperimentConfig& cfg,
                                               std::uint64_t rng_seed) {
    if (!cfg.adversary.flip_positions.empty())
        return std::make_unique<BitFlipAdversary>(cfg.adversary.flip_positions);
    std::uint32_t flips = cfg.adversary.flip_count;
    if (flips == 0 && cfg.protocol == "ap2t")
        flips = compute_security_bound(cfg.make_layout()).d_min;
    return std::make_unique<BitFlipAdversary>(flips,
                                              PadStream(rng_seed, cfg.generator_id));
}

void run_bitflip_rate_experiment(const ExperimentConfig& cfg, ExperimentResult& out) {
    const ProtocolParams params = cfg.make_params();
    const RefreshPolicy policy = cfg.make_policy();
    SeedSequence seq(cfg.master_seed);

    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        const TrialSeeds seeds = trial_seeds(seq);
        const SecretVector arv = fresh_arv(cfg, params, seeds.arv);
        auto adversary = make_bitflip(cfg, seeds.adversary);

        KeyMessage sent, delivered;
        VerdictMessage verdict;
        if (cfg.protocol == "ap1") {
            Ap1Tag tag(params, arv, PadStream(seeds.tag_rng, cfg.generator_id), policy);
            Ap1Verifier verifier(params, arv, policy);
            sent = tag.begin_session();
            delivered = sent;
            delivered.payload = *adversary->tamper(1, sent);
            verdict = verifier.handle(delivered);
            tag.complete_session(verdict);
        } else if (cfg.protocol == "ap2") {
            Ap2Tag tag(params, arv, PadStream(seeds.tag_rng, cfg.generator_id),
                       cfg.generator_id);
            Ap2Verifier verifier(params, arv, cfg.generator_id);
            sent = tag.begin_session();
            delivered = sent;
            delivered.payload = *adversary->tamper(1, sent);
            verdict = verifier.handle(delivered);
            tag.complete_session(verdict);
        } else {
            const FrameLayout layout = cfg.make_layout();
            Ap2tTag tag(params, layout, arv,
                        PadStream(seeds.tag_rng, cfg.generator_id), cfg.generator_id);
            Ap2tVerifier verifier(params, layout, arv, cfg.generator_id);
            sent = tag.begin_session();
            delivered = sent;
            delivered.payload = *adversary->tamper(1, sent);
            verdict = verifier.handle(delivered);
            tag.complete_session(verdict);
        }
        ++out.adversary_attempts;
        out.adversary_successes += verdict.is_open();
    }
}

void run_bitflip_deadlock_experiment(const ExperimentConfig& cfg,
                                     ExperimentResult& out) {
    const ProtocolParams params = cfg.make_params();
    const RefreshPolicy policy = cfg.make_policy();
    SeedSequence seq(cfg.master_seed);
    const TrialSeeds seeds = trial_seeds(seq);
    const SecretVector arv = fresh_arv(cfg, params, seeds.arv);
    auto adversary = make_bitflip(cfg, seeds.adversary);
    const std::uint32_t recovery_cap = 2 * params.n;

    std::unique_ptr<TagSession> tag;
    std::unique_ptr<VerifierSession> verifier;
    if (cfg.protocol == "ap1") {
        tag = std::make_unique<Ap1TagSession>(
            Ap1Tag(params, arv, PadStream(seeds.tag_rng, cfg.generator_id), policy));
        verifier = std::make_unique<Ap1VerifierSession>(Ap1Verifier(params, arv, policy));
    } else if (cfg.protocol == "ap2") {
        tag = std::make_unique<Ap2TagSession>(Ap2Tag(
            params, arv, PadStream(seeds.tag_rng, cfg.generator_id), cfg.generator_id));
        verifier = std::make_unique<Ap2VerifierSession>(
            Ap2Verifier(params, arv, cfg.generator_id));
    } else {
        const FrameLayout layout = cfg.make_layout();
        tag = std::make_unique<Ap2tTagSession>(
            Ap2tTag(params, layout, arv, PadStream(seeds.tag_rng, cfg.generator_id),
                    cfg.generator_id));
        verifier = std::make_unique<Ap2tVerifierSession>(
            Ap2tVerifier(params, layout, arv, cfg.generator_id));
    }

    const TamperRoundStats stats =
        run_tamper_rounds(*tag, *verifier, *adversary, cfg.trials, recovery_cap);
    out.adversary_attempts = stats.tamper_accepts + stats.tamper_rejects;
    out.adversary_successes = stats.tamper_accepts;
    out.honest_sessions = stats.recovery_attempts;
    out.honest_accepts = stats.rounds - stats.deadlocks;
    out.deadlocks = stats.deadlocks;
}

}  // namespace

// ---------------------------------------------------------------------------
// config

ProtocolParams ExperimentConfig::make_params() const {
    std::vector<Bits> words;
    for (const std::string& k : keywords) words.push_back(Bits::from_binary(k));
    return ProtocolParams::make(n, l, keyword_len, std::move(words));
}

RefreshPolicy ExperimentConfig::make_policy() const {
    if (refresh_mode == "dense") {
        RefreshPolicy p = RefreshPolicy::dense();
        p.k_private = refresh_k_private;
        p.validate(n);
        return p;
    }
    if (refresh_mode == "sparse-random")
        return RefreshPolicy::sparse(n, refresh_k_private, refresh_r);
    throw std::invalid_argument("refresh.mode: must be dense or sparse-random");
}

FrameLayout ExperimentConfig::make_layout() const {
    return FrameLayout::make(make_params(), layout_dims, layout_watermarks);
}

void ExperimentConfig::validate() const {
    protocol_id(protocol);  // throws on bad name
    make_params();
    make_policy();
    if (protocol == "ap2t") make_layout();
    if (!generator_registered(generator_id))
        throw std::invalid_argument("generator_id: unknown generator " + generator_id);
    if (trials < 1) throw std::invalid_argument("trials: must be >= 1");

    const std::string& kind = adversary.kind;
    static const std::set<std::string> kinds = {
        "none", "eavesdrop", "guess", "impersonate", "breakin-recovery",
        "bitflip-iima"};
    if (!kinds.count(kind))
        throw std::invalid_argument("adversary.kind: unknown kind " + kind);

    if (kind == "bitflip-iima") {
        if (atomic)
            throw std::invalid_argument(
                "adversary.kind: bitflip-iima edits frames in flight and needs "
                "atomic=false");
        if (adversary.mode != "rate" && adversary.mode != "deadlock")
            throw std::invalid_argument("adversary.mode: must be rate or deadlock");
        if (adversary.flip_positions.empty() && adversary.flip_count == 0 &&
            protocol != "ap2t")
            throw std::invalid_argument(
                "adversary.flip_count: required (no default outside ap2t)");
    } else if (!atomic) {
        throw std::invalid_argument(
            "atomic: only the bitflip-iima adversary runs on non-atomic channels");
    }
    if ((kind == "impersonate" || kind == "breakin-recovery") && protocol == "ap2t")
        throw std::invalid_argument(
            "adversary.kind: use guess or bitflip-iima against ap2t");
    if (adversary.k_private > n)
        throw std::invalid_argument("adversary.k_private: must be <= n");
    if (refresh_mode != "dense" && protocol != "ap1")
        throw std::invalid_argument("refresh.mode: sparse refresh applies to ap1 only");
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw std::invalid_argument("config: unknown field " + where + key);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    check_keys(j,
               {"protocol", "n", "l", "keyword_len", "keywords", "refresh", "layout",
                "adversary", "trials", "sessions_per_trial", "atomic", "master_seed",
                "generator_id"},
               "");
    ExperimentConfig cfg;
    cfg.protocol = j.value("protocol", cfg.protocol);
    cfg.n = j.value("n", cfg.n);
    cfg.l = j.value("l", cfg.l);
    cfg.keyword_len = j.value("keyword_len", cfg.keyword_len);
    if (j.contains("keywords"))
        cfg.keywords = j.at("keywords").get<std::vector<std::string>>();
    if (j.contains("refresh")) {
        const json& r = j.at("refresh");
        check_keys(r, {"mode", "r", "k_private"}, "refresh.");
        cfg.refresh_mode = r.value("mode", cfg.refresh_mode);
        cfg.refresh_r = r.value("r", cfg.refresh_r);
        cfg.refresh_k_private = r.value("k_private", cfg.refresh_k_private);
    }
    if (j.contains("layout")) {
        const json& lj = j.at("layout");
        check_keys(lj, {"dims", "watermarks"}, "layout.");
        cfg.layout_dims = lj.value("dims", cfg.layout_dims);
        if (lj.contains("watermarks"))
            cfg.layout_watermarks = lj.at("watermarks").get<std::uint32_t>();
    }
    if (j.contains("adversary")) {
        const json& a = j.at("adversary");
        check_keys(a,
                   {"kind", "k_private", "placement", "guess_mode", "flip_count",
                    "flip_positions", "mode"},
                   "adversary.");
        cfg.adversary.kind = a.value("kind", cfg.adversary.kind);
        cfg.adversary.k_private = a.value("k_private", cfg.adversary.k_private);
        if (a.contains("placement")) {
            const std::string p = a.at("placement").get<std::string>();
            if (p == "worst-case")
                cfg.adversary.placement = MissPlacement::worst_case;
            else if (p == "random")
                cfg.adversary.placement = MissPlacement::random;
            else
                throw std::invalid_argument(
                    "adversary.placement: must be worst-case or random");
        }
        if (a.contains("guess_mode")) {
            const std::string g = a.at("guess_mode").get<std::string>();
            if (g == "uniform")
                cfg.adversary.guess_mode = GuessMode::uniform;
            else if (g == "replay")
                cfg.adversary.guess_mode = GuessMode::replay;
            else
                throw std::invalid_argument(
                    "adversary.guess_mode: must be uniform or replay");
        }
        cfg.adversary.flip_count = a.value("flip_count", cfg.adversary.flip_count);
        if (a.contains("flip_positions"))
            cfg.adversary.flip_positions =
                a.at("flip_positions").get<std::vector<std::uint32_t>>();
        cfg.adversary.mode = a.value("mode", cfg.adversary.mode);
    }
    cfg.trials = j.value("trials", cfg.trials);
    cfg.sessions_per_trial = j.value("sessions_per_trial", cfg.sessions_per_trial);
    cfg.atomic = j.value("atomic", cfg.atomic);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.generator_id = j.value("generator_id", cfg.generator_id);
    return cfg;
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["protocol"] = protocol;
    j["n"] = n;
    j["l"] = l;
    j["keyword_len"] = keyword_len;
    if (!keywords.empty()) j["keywords"] = keywords;
    j["refresh"] = {{"mode", refresh_mode},
                    {"r", refresh_r},
                    {"k_private", refresh_k_private}};
    json lj;
    lj["dims"] = layout_dims;
    if (layout_watermarks) lj["watermarks"] = *layout_watermarks;
    j["layout"] = lj;
    json a;
    a["kind"] = adversary.kind;
    a["k_private"] = adversary.k_private;
    a["placement"] =
        adversary.placement == MissPlacement::worst_case ? "worst-case" : "random";
    a["guess_mode"] = adversary.guess_mode == GuessMode::uniform ? "uniform" : "replay";
    a["flip_count"] = adversary.flip_count;
    if (!adversary.flip_positions.empty()) a["flip_positions"] = adversary.flip_positions;
    a["mode"] = adversary.mode;
    j["adversary"] = a;
    j["trials"] = trials;
    j["sessions_per_trial"] = sessions_per_trial;
    j["atomic"] = atomic;
    j["master_seed"] = master_seed;
    j["generator_id"] = generator_id;
    return j.dump();
}

// ---------------------------------------------------------------------------
// results

std::string ExperimentResult::csv_header() {
    return "protocol,n,l,keyword_len,adversary,trials,honest_rate,adv_rate,"
           "adv_stderr,bound,deadlocks,pass\n";
}

std::string ExperimentResult::csv_row() const {
    std::ostringstream out;
    out << config.protocol << ',' << config.n << ',' << config.l << ','
        << config.keyword_len << ',' << config.adversary.kind << ',' << config.trials
        << ',' << format_double(honest_rate) << ',' << format_double(adv_rate) << ','
        << format_double(adv_stderr) << ',' << format_double(bound) << ',' << deadlocks
        << ',' << (pass ? "true" : "false") << '\n';
    return out.str();
}

std::string ExperimentResult::to_json() const {
    json j;
    j["config"] = json::parse(config.to_json_text());
    j["honest_sessions"] = honest_sessions;
    j["honest_accepts"] = honest_accepts;
    j["honest_rate"] = honest_rate;
    j["adversary_attempts"] = adversary_attempts;
    j["adversary_successes"] = adversary_successes;
    j["adv_rate"] = adv_rate;
    j["adv_stderr"] = adv_stderr;
    j["sync_failures"] = sync_failures;
    j["deadlocks"] = deadlocks;
    j["bound"] = bound;
    j["bound_kind"] = bound_kind;
    j["two_sided"] = two_sided;
    j["pass"] = pass;
    return j.dump();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult out;
    out.config = cfg;
    assign_bound(cfg, cfg.make_params(), out);

    const std::string& kind = cfg.adversary.kind;
    if (kind == "none")
        run_honest_experiment(cfg, out);
    else if (kind == "eavesdrop")
        run_impersonate_experiment(cfg, out, /*with_forgery=*/false);
    else if (kind == "guess")
        run_guess_experiment(cfg, out);
    else if (kind == "impersonate")
        run_impersonate_experiment(cfg, out, /*with_forgery=*/true);
    else if (kind == "breakin-recovery")
        run_breakin_experiment(cfg, out);
    else if (cfg.adversary.mode == "deadlock")
        run_bitflip_deadlock_experiment(cfg, out);
    else
        run_bitflip_rate_experiment(cfg, out);

    finish_result(out);
    return out;
}

std::string record_transcript_log(const ExperimentConfig& cfg, std::uint64_t sessions) {
    cfg.validate();
    if (cfg.adversary.kind != "none" && cfg.adversary.kind != "eavesdrop")
        throw std::invalid_argument(
            "transcript recording drives honest traffic only: use adversary kind "
            "none or eavesdrop");
    const ProtocolParams params = cfg.make_params();
    const RefreshPolicy policy = cfg.make_policy();
    SeedSequence seq(cfg.master_seed);
    const TrialSeeds seeds = trial_seeds(seq);
    const SecretVector arv = fresh_arv(cfg, params, seeds.arv);

    std::unique_ptr<TagSession> tag;
    std::unique_ptr<VerifierSession> verifier;
    if (cfg.protocol == "ap1") {
        tag = std::make_unique<Ap1TagSession>(
            Ap1Tag(params, arv, PadStream(seeds.tag_rng, cfg.generator_id), policy));
        verifier = std::make_unique<Ap1VerifierSession>(Ap1Verifier(params, arv, policy));
    } else if (cfg.protocol == "ap2") {
        tag = std::make_unique<Ap2TagSession>(Ap2Tag(
            params, arv, PadStream(seeds.tag_rng, cfg.generator_id), cfg.generator_id));
        verifier = std::make_unique<Ap2VerifierSession>(
            Ap2Verifier(params, arv, cfg.generator_id));
    } else {
        const FrameLayout layout = cfg.make_layout();
        tag = std::make_unique<Ap2tTagSession>(
            Ap2tTag(params, layout, arv, PadStream(seeds.tag_rng, cfg.generator_id),
                    cfg.generator_id));
        verifier = std::make_unique<Ap2tVerifierSession>(
            Ap2tVerifier(params, layout, arv, cfg.generator_id));
    }

    NullAdversary adversary;
    if (cfg.adversary.kind == "none") {
        adversary.set_listening_pattern(std::vector<bool>(sessions, false));
    } else if (cfg.adversary.k_private > 0) {
        PadStream pattern_rng(seeds.aux, cfg.generator_id);
        adversary.set_listening_pattern(
            build_listening_pattern(pattern_rng, params.n, cfg.adversary.k_private,
                                    std::max<std::uint64_t>(sessions, params.n),
                                    cfg.adversary.placement));
    }

    RunOptions options;
    options.sessions = sessions;
    options.record_transcripts = true;
    const RunResult rr = run_sessions(*tag, *verifier, adversary, options);
    return transcripts_to_jsonl(rr.transcripts);
}

// ---------------------------------------------------------------------------
// registry

PairRegistry::PairRegistry(ExperimentConfig base)
    : base_(std::move(base)), seeds_(base_.master_seed) {
    base_.validate();
}

void PairRegistry::register_pair(const std::string& tag_id) {
    if (pairs_.count(tag_id))
        throw std::invalid_argument("registry: duplicate tag id " + tag_id);
    const TrialSeeds seeds = trial_seeds(seeds_);
    const ProtocolParams params = base_.make_params();
    const RefreshPolicy policy = base_.make_policy();
    const SecretVector arv = fresh_arv(base_, params, seeds.arv);

    Pair pair;
    if (base_.protocol == "ap1") {
        pair.tag = std::make_unique<Ap1TagSession>(
            Ap1Tag(params, arv, PadStream(seeds.tag_rng, base_.generator_id), policy));
        pair.verifier =
            std::make_unique<Ap1VerifierSession>(Ap1Verifier(params, arv, policy));
    } else if (base_.protocol == "ap2") {
        pair.tag = std::make_unique<Ap2TagSession>(Ap2Tag(
            params, arv, PadStream(seeds.tag_rng, base_.generator_id),
            base_.generator_id));
        pair.verifier = std::make_unique<Ap2VerifierSession>(
            Ap2Verifier(params, arv, base_.generator_id));
    } else {
        const FrameLayout layout = base_.make_layout();
        pair.tag = std::make_unique<Ap2tTagSession>(
            Ap2tTag(params, layout, arv, PadStream(seeds.tag_rng, base_.generator_id),
                    base_.generator_id));
        pair.verifier = std::make_unique<Ap2tVerifierSession>(
            Ap2tVerifier(params, layout, arv, base_.generator_id));
    }
    pairs_.emplace(tag_id, std::move(pair));
}

PairRegistry::Pair& PairRegistry::lookup(const std::string& tag_id) {
    auto it = pairs_.find(tag_id);
    if (it == pairs_.end())
        throw std::out_of_range("registry: unknown tag id " + tag_id);
    return it->second;
}

KeyMessage PairRegistry::begin_session(const std::string& tag_id) {
    return lookup(tag_id).tag->begin_session();
}

VerdictMessage PairRegistry::deliver(const std::string& tag_id, const KeyMessage& msg) {
    return lookup(tag_id).verifier->handle(msg);
}

void PairRegistry::complete_session(const std::string& tag_id,
                                    const VerdictMessage& verdict) {
    lookup(tag_id).tag->complete_session(verdict);
}

}  // namespace authsim
