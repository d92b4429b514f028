#include "authsim/ap1.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace authsim {

namespace {

std::uint32_t index_bits(std::uint32_t n) {
    return std::max(1u, static_cast<std::uint32_t>(std::bit_width(n - 1)));
}

// --- small byte writer/reader for state checkpoints ---

struct Writer {
    std::vector<std::uint8_t> out;

    void u8(std::uint8_t v) { out.push_back(v); }
    void u32(std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void u64(std::uint64_t v) {
        for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void bits(const Bits& b) {
        u32(static_cast<std::uint32_t>(b.size()));
        for (std::uint8_t byte : b.to_bytes()) out.push_back(byte);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }
};

struct Reader {
    std::span<const std::uint8_t> in;
    std::size_t pos = 0;

    void need(std::size_t count) const {
        if (pos + count > in.size()) throw std::invalid_argument("checkpoint truncated");
    }
    std::uint8_t u8() {
        need(1);
        return in[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v = (v << 8) | in[pos++];
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v = (v << 8) | in[pos++];
        return v;
    }
    Bits bits() {
        const std::uint32_t len = u32();
        const std::size_t bytes = (len + 7) / 8;
        need(bytes);
        auto b = Bits::from_bytes(in.subspan(pos, bytes), len);
        if (!b) throw std::invalid_argument("checkpoint: bad bit payload");
        pos += bytes;
        return *b;
    }
    std::string str() {
        const std::uint32_t len = u32();
        need(len);
        std::string s(in.begin() + pos, in.begin() + pos + len);
        pos += len;
        return s;
    }
    void done() const {
        if (pos != in.size()) throw std::invalid_argument("checkpoint: trailing bytes");
    }
};

constexpr std::uint8_t kCheckpointVersion = 0x01;

void write_params(Writer& w, const ProtocolParams& p) {
    w.u32(p.n);
    w.u32(p.l);
    w.u32(p.keyword_len);
    w.u32(static_cast<std::uint32_t>(p.keywords.size()));
    for (const Bits& k : p.keywords) w.bits(k);
}

ProtocolParams read_params(Reader& r) {
    ProtocolParams p;
    p.n = r.u32();
    p.l = r.u32();
    p.keyword_len = r.u32();
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) p.keywords.push_back(r.bits());
    p.validate();
    return p;
}

void write_policy(Writer& w, const RefreshPolicy& p) {
    w.u8(p.mode == RefreshPolicy::Mode::dense ? 0 : 1);
    w.u32(p.per_session_count);
    w.u32(p.k_private);
}

RefreshPolicy read_policy(Reader& r) {
    RefreshPolicy p;
    p.mode = r.u8() == 0 ? RefreshPolicy::Mode::dense : RefreshPolicy::Mode::sparse_random;
    p.per_session_count = r.u32();
    p.k_private = r.u32();
    return p;
}

void write_refresh(Writer& w, const RefreshVector& rv) {
    w.u8(rv.form == RefreshVector::Form::dense ? 0 : 1);
    if (rv.form == RefreshVector::Form::dense) {
        w.u32(static_cast<std::uint32_t>(rv.entries.size()));
        for (const Bits& e : rv.entries) w.bits(e);
    } else {
        w.u32(static_cast<std::uint32_t>(rv.pairs.size()));
        for (const auto& [idx, val] : rv.pairs) {
            w.u32(idx);
            w.bits(val);
        }
    }
}

RefreshVector read_refresh(Reader& r) {
    RefreshVector rv;
    rv.form = r.u8() == 0 ? RefreshVector::Form::dense : RefreshVector::Form::sparse;
    const std::uint32_t count = r.u32();
    if (rv.form == RefreshVector::Form::dense) {
        for (std::uint32_t i = 0; i < count; ++i) rv.entries.push_back(r.bits());
    } else {
        for (std::uint32_t i = 0; i < count; ++i) {
            const std::uint32_t idx = r.u32();
            rv.pairs.emplace_back(idx, r.bits());
        }
    }
    return rv;
}

void write_arv(Writer& w, const SecretVector& v) {
    w.u32(v.size());
    w.u32(v.width());
    for (std::uint32_t i = 1; i <= v.size(); ++i) w.bits(v.at(i));
}

SecretVector read_arv(Reader& r) {
    const std::uint32_t n = r.u32();
    const std::uint32_t width = r.u32();
    SecretVector v(n, width);
    for (std::uint32_t i = 1; i <= n; ++i) v.set(i, r.bits());
    return v;
}

RefreshVector draw_refresh(const ProtocolParams& params, const RefreshPolicy& policy,
                           PadStream& rng) {
    if (policy.mode == RefreshPolicy::Mode::dense)
        return RefreshVector::dense_random(params.n, params.l, rng);
    return sparse_refresh_random(params.n, params.l, policy.per_session_count, rng);
}

SecretVector apply_refresh(const SecretVector& arv, std::uint32_t keyentry,
                           const RefreshVector& rv) {
    if (rv.form == RefreshVector::Form::dense)
        return updating_procedure(arv, keyentry, rv);
    return apply_sparse_refresh(arv, keyentry, rv);
}

}  // namespace

SecretVector updating_procedure(const SecretVector& arv, std::uint32_t keyentry,
                                const RefreshVector& lrv) {
    if (lrv.form != RefreshVector::Form::dense)
        throw std::invalid_argument("updating_procedure: refresh must be dense");
    if (lrv.entries.size() != arv.size())
        throw std::invalid_argument("updating_procedure: refresh length != n");
    SecretVector out = arv;
    out.set(keyentry, Bits(arv.width()));
    for (std::uint32_t j = 1; j <= arv.size(); ++j)
        out.set(j, out.at(j) ^ lrv.entries[j - 1]);
    return out;
}

std::size_t ap1_frame_bits(const ProtocolParams& params, const RefreshPolicy& policy) {
    if (policy.mode == RefreshPolicy::Mode::dense)
        return std::size_t{params.l} * (params.n + 1);
    return params.l + std::size_t{policy.per_session_count} *
                          (index_bits(params.n) + params.l);
}

Bits ap1_build_payload(const Bits& key_value, const RefreshVector& refresh,
                       const ProtocolParams& params, const RefreshPolicy& policy) {
    Bits payload = key_value;
    if (policy.mode == RefreshPolicy::Mode::dense) {
        for (const Bits& e : refresh.entries) payload.append(e);
    } else {
        const std::uint32_t ib = index_bits(params.n);
        for (const auto& [index, value] : refresh.pairs) {
            payload.append_uint(index - 1, ib);
            payload.append(value);
        }
    }
    return payload;
}

std::optional<std::pair<Bits, RefreshVector>> ap1_parse_payload(
    const Bits& payload, const ProtocolParams& params, const RefreshPolicy& policy) {
    if (payload.size() != ap1_frame_bits(params, policy)) return std::nullopt;
    Bits key_value = payload.slice(0, params.l);
    if (policy.mode == RefreshPolicy::Mode::dense) {
        std::vector<Bits> entries;
        entries.reserve(params.n);
        for (std::uint32_t j = 0; j < params.n; ++j)
            entries.push_back(payload.slice(params.l + std::size_t{j} * params.l, params.l));
        return std::pair{std::move(key_value),
                         RefreshVector::make_dense(std::move(entries))};
    }
    const std::uint32_t ib = index_bits(params.n);
    std::vector<std::pair<std::uint32_t, Bits>> pairs;
    std::size_t pos = params.l;
    std::uint32_t previous = 0;
    for (std::uint32_t j = 0; j < policy.per_session_count; ++j) {
        const auto index = static_cast<std::uint32_t>(payload.read_uint(pos, ib)) + 1;
        pos += ib;
        if (index > params.n || index <= previous) return std::nullopt;  // canonical order
        previous = index;
        pairs.emplace_back(index, payload.slice(pos, params.l));
        pos += params.l;
    }
    return std::pair{std::move(key_value), RefreshVector::make_sparse(std::move(pairs))};
}

// ---------------------------------------------------------------------------
// Tag

Ap1Tag::Ap1Tag(ProtocolParams params, SecretVector initial_arv, PadStream rng,
               RefreshPolicy policy)
    : params_(std::move(params)),
      policy_(policy),
      arv_(std::move(initial_arv)),
      rng_(std::move(rng)) {
    params_.validate();
    policy_.validate(params_.n);
    if (arv_.size() != params_.n || arv_.width() != params_.l)
        throw std::invalid_argument("Ap1Tag: initial vector shape mismatch");
}

KeyMessage Ap1Tag::begin_session() {
    if (pending_) throw std::logic_error("Ap1Tag: session already pending");
    const std::uint32_t keyentry = key_entry_index(params_.n, i_);
    pending_ = draw_refresh(params_, policy_, rng_);
    KeyMessage msg;
    msg.protocol = ProtocolId::ap1;
    msg.session_index = static_cast<std::uint32_t>(i_);
    msg.payload = ap1_build_payload(arv_.at(keyentry), *pending_, params_, policy_);
    return msg;
}

void Ap1Tag::complete_session(const VerdictMessage& verdict) {
    if (!pending_) throw std::logic_error("Ap1Tag: no session pending");
    if (verdict.is_open()) {
        const std::uint32_t keyentry = key_entry_index(params_.n, i_);
        arv_ = apply_refresh(arv_, keyentry, *pending_);
        ++i_;
    }
    pending_.reset();
}

std::vector<std::uint8_t> Ap1Tag::save() const {
    Writer w;
    w.u8(kCheckpointVersion);
    w.u8('T');
    write_params(w, params_);
    write_policy(w, policy_);
    write_arv(w, arv_);
    w.u64(i_);
    w.u8(pending_ ? 1 : 0);
    if (pending_) write_refresh(w, *pending_);
    w.str(rng_.generator_id());
    const auto state = rng_.save_state();
    w.u32(static_cast<std::uint32_t>(state.size()));
    for (std::uint64_t word : state) w.u64(word);
    return std::move(w.out);
}

Ap1Tag Ap1Tag::load(std::span<const std::uint8_t> bytes) {
    Reader r{bytes};
    if (r.u8() != kCheckpointVersion || r.u8() != 'T')
        throw std::invalid_argument("Ap1Tag::load: not a tag checkpoint");
    ProtocolParams params = read_params(r);
    RefreshPolicy policy = read_policy(r);
    SecretVector arv = read_arv(r);
    const std::uint64_t i = r.u64();
    std::optional<RefreshVector> pending;
    if (r.u8()) pending = read_refresh(r);
    const std::string gen = r.str();
    const std::uint32_t words = r.u32();
    std::vector<std::uint64_t> state;
    for (std::uint32_t k = 0; k < words; ++k) state.push_back(r.u64());
    r.done();

    Ap1Tag tag(std::move(params), std::move(arv),
               PadStream::restore(gen, state), policy);
    tag.i_ = i;
    tag.pending_ = std::move(pending);
    return tag;
}

// ---------------------------------------------------------------------------
// Verifier

Ap1Verifier::Ap1Verifier(ProtocolParams params, SecretVector initial_arv,
                         RefreshPolicy policy)
    : params_(std::move(params)), policy_(policy), arv_(std::move(initial_arv)) {
    params_.validate();
    policy_.validate(params_.n);
    if (arv_.size() != params_.n || arv_.width() != params_.l)
        throw std::invalid_argument("Ap1Verifier: initial vector shape mismatch");
}

VerdictMessage Ap1Verifier::handle(const KeyMessage& msg) {
    if (msg.protocol != ProtocolId::ap1) return {Verdict::do_not_open};
    const auto parsed = ap1_parse_payload(msg.payload, params_, policy_);
    if (!parsed) return {Verdict::do_not_open};
    const auto& [key_value, refresh] = *parsed;
    const std::uint32_t keyentry = key_entry_index(params_.n, i_);
    if (key_value != arv_.at(keyentry)) return {Verdict::do_not_open};
    arv_ = apply_refresh(arv_, keyentry, refresh);
    ++i_;
    return {Verdict::open};
}

std::vector<std::uint8_t> Ap1Verifier::save() const {
    Writer w;
    w.u8(kCheckpointVersion);
    w.u8('V');
    write_params(w, params_);
    write_policy(w, policy_);
    write_arv(w, arv_);
    w.u64(i_);
    return std::move(w.out);
}

Ap1Verifier Ap1Verifier::load(std::span<const std::uint8_t> bytes) {
    Reader r{bytes};
    if (r.u8() != kCheckpointVersion || r.u8() != 'V')
        throw std::invalid_argument("Ap1Verifier::load: not a verifier checkpoint");
    ProtocolParams params = read_params(r);
    RefreshPolicy policy = read_policy(r);
    SecretVector arv = read_arv(r);
    const std::uint64_t i = r.u64();
    r.done();
    Ap1Verifier v(std::move(params), std::move(arv), policy);
    v.i_ = i;
    return v;
}

}  // namespace authsim
