#include "authsim/ap2.hpp"

#include <stdexcept>

namespace authsim {

std::pair<RefreshVector, Bits> ap2_split_plain(const Bits& plain,
                                               const ProtocolParams& params) {
    std::vector<Bits> entries;
    entries.reserve(params.n);
    for (std::uint32_t j = 0; j < params.n; ++j)
        entries.push_back(plain.slice(std::size_t{j} * params.l, params.l));
    Bits keyword = plain.slice(std::size_t{params.n} * params.l, params.keyword_len);
    return {RefreshVector::make_dense(std::move(entries)), std::move(keyword)};
}

// ---------------------------------------------------------------------------
// Tag

Ap2Tag::Ap2Tag(ProtocolParams params, SecretVector initial_arv, PadStream rng,
               std::string generator_id)
    : params_(std::move(params)),
      arv_(std::move(initial_arv)),
      rng_(std::move(rng)),
      generator_id_(std::move(generator_id)) {
    params_.validate();
    if (arv_.size() != params_.n || arv_.width() != params_.l)
        throw std::invalid_argument("Ap2Tag: initial vector shape mismatch");
    if (!generator_registered(generator_id_))
        throw std::invalid_argument("Ap2Tag: unknown generator id " + generator_id_);
}

KeyMessage Ap2Tag::begin_session(const Bits& keyword) {
    if (pending_) throw std::logic_error("Ap2Tag: session already pending");
    if (!params_.is_keyword(keyword))
        throw std::invalid_argument("Ap2Tag: keyword not in the configured set");

    const std::uint32_t keyentry = key_entry_index(params_.n, i_);
    SeedState staged = seed_;
    staged.absorb(arv_.at(keyentry));

    RefreshVector lrv = RefreshVector::dense_random(params_.n, params_.l, rng_);
    Bits plain;
    for (const Bits& e : lrv.entries) plain.append(e);
    plain.append(keyword);

    PadStream pad(staged.value, generator_id_);
    const Bits cipher = plain ^ pad.next_bits(params_.pad_bits());

    pending_ = Pending{std::move(lrv), staged.value};
    KeyMessage msg;
    msg.protocol = ProtocolId::ap2;
    msg.session_index = static_cast<std::uint32_t>(i_);
    msg.payload = cipher;
    return msg;
}

void Ap2Tag::complete_session(const VerdictMessage& verdict) {
    if (!pending_) throw std::logic_error("Ap2Tag: no session pending");
    if (verdict.is_open()) {
        const std::uint32_t keyentry = key_entry_index(params_.n, i_);
        arv_ = updating_procedure(arv_, keyentry, pending_->lrv);
        seed_.value = pending_->staged_seed;
        ++i_;
    }
    pending_.reset();
}

// ---------------------------------------------------------------------------
// Verifier

Ap2Verifier::Ap2Verifier(ProtocolParams params, SecretVector initial_arv,
                         std::string generator_id)
    : params_(std::move(params)),
      arv_(std::move(initial_arv)),
      generator_id_(std::move(generator_id)) {
    params_.validate();
    if (arv_.size() != params_.n || arv_.width() != params_.l)
        throw std::invalid_argument("Ap2Verifier: initial vector shape mismatch");
    if (!generator_registered(generator_id_))
        throw std::invalid_argument("Ap2Verifier: unknown generator id " + generator_id_);
}

VerdictMessage Ap2Verifier::handle(const KeyMessage& msg) {
    if (msg.protocol != ProtocolId::ap2) return {Verdict::do_not_open};
    if (msg.payload.size() != params_.pad_bits()) return {Verdict::do_not_open};

    const std::uint32_t keyentry = key_entry_index(params_.n, i_);
    SeedState candidate = seed_;
    candidate.absorb(arv_.at(keyentry));

    PadStream pad(candidate.value, generator_id_);
    const Bits plain = msg.payload ^ pad.next_bits(params_.pad_bits());
    auto [lrv, keyword] = ap2_split_plain(plain, params_);
    if (!params_.is_keyword(keyword)) return {Verdict::do_not_open};

    arv_ = updating_procedure(arv_, keyentry, lrv);
    seed_ = candidate;
    ++i_;
    return {Verdict::open};
}

}  // namespace authsim
