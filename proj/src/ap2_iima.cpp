#include "authsim/ap2_iima.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace authsim {

// ---------------------------------------------------------------------------
// Parity code

std::uint32_t parity_grid_side(std::uint32_t payload_bits, std::uint32_t dims) {
    if (dims < 1) throw std::invalid_argument("parity code: dims must be >= 1");
    if (payload_bits < 1) throw std::invalid_argument("parity code: empty payload");
    std::uint32_t side = 1;
    auto cells = [dims](std::uint64_t s) {
        std::uint64_t c = 1;
        for (std::uint32_t d = 0; d < dims; ++d) c *= s;
        return c;
    };
    while (cells(side) < payload_bits) ++side;
    return side;
}

std::uint32_t parity_redundancy_bits(std::uint32_t payload_bits, std::uint32_t dims) {
    const std::uint64_t side = parity_grid_side(payload_bits, dims);
    std::uint64_t lines = dims;
    for (std::uint32_t d = 0; d + 1 < dims; ++d) lines *= side;
    return static_cast<std::uint32_t>(lines);
}

Bits parity_encode(const Bits& payload, std::uint32_t dims) {
    const std::uint32_t m = static_cast<std::uint32_t>(payload.size());
    const std::uint32_t side = parity_grid_side(m, dims);

    // stride of coordinate d in the cell index (coordinate 0 most significant)
    std::vector<std::uint64_t> stride(dims, 1);
    for (std::uint32_t d = dims; d-- > 1;) stride[d - 1] = stride[d] * side;

    const auto bit_at = [&](std::uint64_t cell) {
        return cell < m && payload.get(static_cast<std::size_t>(cell));
    };

    Bits redundancy;
    std::vector<std::uint32_t> fixed(dims > 1 ? dims - 1 : 0, 0);
    // fastest-varying dimension first: for a 2-D grid this emits the row
    // parities, then the column parities
    for (std::uint32_t k = 0; k < dims; ++k) {
        const std::uint32_t varying = dims - 1 - k;
        std::fill(fixed.begin(), fixed.end(), 0);
        for (;;) {
            std::uint64_t base = 0;
            std::uint32_t fi = 0;
            for (std::uint32_t d = 0; d < dims; ++d)
                if (d != varying) base += std::uint64_t{fixed[fi++]} * stride[d];
            bool parity = false;
            for (std::uint32_t x = 0; x < side; ++x)
                parity ^= bit_at(base + std::uint64_t{x} * stride[varying]);
            redundancy.append_bit(parity);

            // advance the fixed coordinates lexicographically
            std::uint32_t pos = static_cast<std::uint32_t>(fixed.size());
            while (pos > 0) {
                if (++fixed[pos - 1] < side) break;
                fixed[pos - 1] = 0;
                --pos;
            }
            if (pos == 0) break;
        }
        if (dims == 1) break;  // a 1-D grid has the single full line
    }
    return redundancy;
}

bool parity_verify(const Bits& payload, const Bits& redundancy, std::uint32_t dims) {
    if (redundancy.size() !=
        parity_redundancy_bits(static_cast<std::uint32_t>(payload.size()), dims))
        return false;
    return parity_encode(payload, dims) == redundancy;
}

// ---------------------------------------------------------------------------
// Frame geometry

FrameLayout FrameLayout::make(const ProtocolParams& params, std::uint32_t dims,
                              std::optional<std::uint32_t> watermarks) {
    FrameLayout layout;
    layout.m = static_cast<std::uint32_t>(params.pad_bits());
    if (dims == 0) {
        const double bits = static_cast<double>(params.n) * params.l;
        dims = std::max<std::uint32_t>(
            1, static_cast<std::uint32_t>(std::lround(std::log2(bits))));
    }
    layout.dims = dims;
    layout.q = parity_redundancy_bits(layout.m, dims);
    layout.v = watermarks.value_or(layout.m + layout.q);
    layout.t = layout.m + layout.q + layout.v;
    return layout;
}

SecurityBound compute_security_bound(const FrameLayout& layout) {
    SecurityBound bound;
    bound.d_min = layout.dims + 1;
    bound.alpha = static_cast<double>(layout.v) / layout.t;
    bound.p_a_bound = std::pow(1.0 - bound.alpha, bound.d_min);
    return bound;
}

// ---------------------------------------------------------------------------
// Permutation

Permutation Permutation::from_seed(std::uint64_t seed, std::uint32_t size,
                                   const std::string& generator_id) {
    if (size < 1) throw std::invalid_argument("Permutation: size must be >= 1");
    Permutation p;
    p.map_.resize(size);
    std::iota(p.map_.begin(), p.map_.end(), 0u);
    PadStream draws(seed, generator_id);
    for (std::uint32_t j = size; j-- > 1;) {
        const auto k = static_cast<std::uint32_t>(draws.next_below(j + 1));
        std::swap(p.map_[j], p.map_[k]);
    }
    return p;
}

Bits Permutation::apply(const Bits& in) const {
    if (in.size() != map_.size())
        throw std::invalid_argument("Permutation::apply: size mismatch");
    Bits out(in.size());
    for (std::size_t j = 0; j < map_.size(); ++j)
        if (in.get(j)) out.set(map_[j], true);
    return out;
}

Bits Permutation::invert(const Bits& in) const {
    if (in.size() != map_.size())
        throw std::invalid_argument("Permutation::invert: size mismatch");
    Bits out(in.size());
    for (std::size_t j = 0; j < map_.size(); ++j)
        if (in.get(map_[j])) out.set(j, true);
    return out;
}

// ---------------------------------------------------------------------------
// Tag

namespace {

void check_layout(const FrameLayout& layout, const ProtocolParams& params) {
    if (layout.m != params.pad_bits())
        throw std::invalid_argument("frame layout does not match the parameters");
    if (layout.q != parity_redundancy_bits(layout.m, layout.dims))
        throw std::invalid_argument("frame layout redundancy inconsistent");
    if (layout.t != layout.m + layout.q + layout.v)
        throw std::invalid_argument("frame layout total inconsistent");
}

}  // namespace

Ap2tTag::Ap2tTag(ProtocolParams params, FrameLayout layout, SecretVector initial_arv,
                 PadStream rng, std::string generator_id)
    : params_(std::move(params)),
      layout_(layout),
      arv_(std::move(initial_arv)),
      rng_(std::move(rng)),
      generator_id_(std::move(generator_id)) {
    params_.validate();
    check_layout(layout_, params_);
    if (arv_.size() != params_.n || arv_.width() != params_.l)
        throw std::invalid_argument("Ap2tTag: initial vector shape mismatch");
    if (!generator_registered(generator_id_))
        throw std::invalid_argument("Ap2tTag: unknown generator id " + generator_id_);
}

KeyMessage Ap2tTag::begin_session(const Bits& keyword) {
    if (pending_) throw std::logic_error("Ap2tTag: session already pending");
    if (!params_.is_keyword(keyword))
        throw std::invalid_argument("Ap2tTag: keyword not in the configured set");

    const std::uint32_t keyentry = key_entry_index(params_.n, i_);
    SeedState staged = seed_;
    staged.absorb(arv_.at(keyentry));
    const auto sub = derive_subseeds(staged.value);

    RefreshVector lrv = RefreshVector::dense_random(params_.n, params_.l, rng_);
    Bits plain;
    for (const Bits& e : lrv.entries) plain.append(e);
    plain.append(keyword);

    PadStream body_pad(sub[0], generator_id_);
    PadStream red_pad(sub[1], generator_id_);
    PadStream mark_pad(sub[2], generator_id_);

    Bits frame = plain ^ body_pad.next_bits(layout_.m);
    frame.append(parity_encode(plain, layout_.dims) ^ red_pad.next_bits(layout_.q));
    frame.append(mark_pad.next_bits(layout_.v));

    pending_ = Pending{std::move(lrv), staged.value};
    KeyMessage msg;
    msg.protocol = ProtocolId::ap2t;
    msg.session_index = static_cast<std::uint32_t>(i_);
    msg.payload = Permutation::from_seed(sub[3], layout_.t, generator_id_).apply(frame);
    return msg;
}

void Ap2tTag::complete_session(const VerdictMessage& verdict) {
    if (!pending_) throw std::logic_error("Ap2tTag: no session pending");
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

Ap2tVerifier::Ap2tVerifier(ProtocolParams params, FrameLayout layout,
                           SecretVector initial_arv, std::string generator_id)
    : params_(std::move(params)),
      layout_(layout),
      arv_(std::move(initial_arv)),
      generator_id_(std::move(generator_id)) {
    params_.validate();
    check_layout(layout_, params_);
    if (arv_.size() != params_.n || arv_.width() != params_.l)
        throw std::invalid_argument("Ap2tVerifier: initial vector shape mismatch");
    if (!generator_registered(generator_id_))
        throw std::invalid_argument("Ap2tVerifier: unknown generator id " + generator_id_);
}

VerdictMessage Ap2tVerifier::handle(const KeyMessage& msg) {
    if (msg.protocol != ProtocolId::ap2t) return {Verdict::do_not_open};
    if (msg.payload.size() != layout_.t) return {Verdict::do_not_open};

    const std::uint32_t keyentry = key_entry_index(params_.n, i_);
    SeedState candidate = seed_;
    candidate.absorb(arv_.at(keyentry));
    const auto sub = derive_subseeds(candidate.value);

    const Bits frame =
        Permutation::from_seed(sub[3], layout_.t, generator_id_).invert(msg.payload);

    PadStream mark_pad(sub[2], generator_id_);
    if (frame.slice(layout_.m + layout_.q, layout_.v) != mark_pad.next_bits(layout_.v))
        return {Verdict::do_not_open};

    PadStream body_pad(sub[0], generator_id_);
    PadStream red_pad(sub[1], generator_id_);
    const Bits plain = frame.slice(0, layout_.m) ^ body_pad.next_bits(layout_.m);
    const Bits redundancy =
        frame.slice(layout_.m, layout_.q) ^ red_pad.next_bits(layout_.q);
    if (!parity_verify(plain, redundancy, layout_.dims)) return {Verdict::do_not_open};

    auto [lrv, keyword] = ap2_split_plain(plain, params_);
    if (!params_.is_keyword(keyword)) return {Verdict::do_not_open};

    arv_ = updating_procedure(arv_, keyentry, lrv);
    seed_ = candidate;
    ++i_;
    return {Verdict::open};
}

}  // namespace authsim
