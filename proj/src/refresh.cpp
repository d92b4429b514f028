#include "authsim/refresh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace authsim {

RefreshPolicy RefreshPolicy::dense() { return RefreshPolicy{}; }

RefreshPolicy RefreshPolicy::sparse(std::uint32_t n, std::uint32_t k_private,
                                    std::uint32_t r) {
    RefreshPolicy p;
    p.mode = Mode::sparse_random;
    p.per_session_count = r == 0 ? default_refresh_count(n) : r;
    p.k_private = k_private;
    p.validate(n);
    return p;
}

void RefreshPolicy::validate(std::uint32_t n) const {
    if (k_private < 1 || k_private > n)
        throw std::invalid_argument("refresh.k_private: must be in 1..n");
    if (mode == Mode::sparse_random &&
        (per_session_count < 1 || per_session_count > n))
        throw std::invalid_argument("refresh.r: must be in 1..n");
}

std::uint32_t default_refresh_count(std::uint32_t n) {
    const double r = 2.0 * std::log2(static_cast<double>(n));
    return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(r)));
}

void choose_refresh_set(PadStream& rng, std::uint32_t n, std::uint32_t r,
                        std::vector<std::uint32_t>& out) {
    if (r < 1 || r > n) throw std::invalid_argument("choose_refresh_set: r out of 1..n");
    out.clear();
    if (r == n) {
        for (std::uint32_t i = 1; i <= n; ++i) out.push_back(i);
        return;
    }
    // sequential rejection keeps each draw uniform over the remaining indices
    static thread_local std::vector<std::uint8_t> taken;
    taken.assign(n, 0);
    while (out.size() < r) {
        const auto idx = static_cast<std::uint32_t>(rng.next_below(n));
        if (taken[idx]) continue;
        taken[idx] = 1;
        out.push_back(idx + 1);
    }
    std::sort(out.begin(), out.end());
}

std::vector<std::uint32_t> choose_refresh_set(PadStream& rng, std::uint32_t n,
                                              std::uint32_t r) {
    std::vector<std::uint32_t> out;
    choose_refresh_set(rng, n, r, out);
    return out;
}

SecretVector apply_sparse_refresh(const SecretVector& arv, std::uint32_t keyentry,
                                  const RefreshVector& refresh) {
    if (refresh.form != RefreshVector::Form::sparse)
        throw std::invalid_argument("apply_sparse_refresh: refresh is not sparse");
    SecretVector out = arv;
    out.set(keyentry, Bits(arv.width()));
    std::vector<bool> seen(arv.size(), false);
    for (const auto& [index, value] : refresh.pairs) {
        if (index < 1 || index > arv.size())
            throw std::invalid_argument("apply_sparse_refresh: index out of 1..n");
        if (seen[index - 1])
            throw std::invalid_argument("apply_sparse_refresh: duplicate index");
        seen[index - 1] = true;
        out.set(index, out.at(index) ^ value);
    }
    return out;
}

RefreshVector sparse_refresh_random(std::uint32_t n, std::uint32_t width,
                                    std::uint32_t r, PadStream& rng) {
    std::vector<std::pair<std::uint32_t, Bits>> pairs;
    pairs.reserve(r);
    for (std::uint32_t index : choose_refresh_set(rng, n, r))
        pairs.emplace_back(index, rng.next_bits(width));
    return RefreshVector::make_sparse(std::move(pairs));
}

// ---------------------------------------------------------------------------
// Coverage estimation

namespace {

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

CoverageEstimate coverage_probability(std::uint32_t n, std::uint32_t r,
                                      std::uint32_t sessions, std::uint64_t trials,
                                      std::uint64_t seed,
                                      const std::string& generator_id) {
    if (n < 1 || r < 1 || sessions < 1 || trials < 1)
        throw std::invalid_argument("coverage_probability: all parameters must be >= 1");
    if (r > n) throw std::invalid_argument("coverage_probability: r > n");

    PadStream rng(seed, generator_id);
    std::vector<std::uint32_t> chosen;
    std::vector<std::uint8_t> hit(n, 0);
    std::uint64_t covered = 0;
    std::uint64_t entry_misses = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::fill(hit.begin(), hit.end(), 0);
        for (std::uint32_t s = 0; s < sessions; ++s) {
            choose_refresh_set(rng, n, r, chosen);
            for (std::uint32_t idx : chosen) hit[idx - 1] = 1;
        }
        std::uint32_t misses = 0;
        for (std::uint8_t h : hit) misses += h == 0;
        entry_misses += misses;
        covered += misses == 0;
    }

    CoverageEstimate est;
    est.n = n;
    est.r = r;
    est.sessions = sessions;
    est.trials = trials;
    est.estimate = static_cast<double>(covered) / static_cast<double>(trials);
    est.stderr_ = std::sqrt(est.estimate * (1.0 - est.estimate) /
                            static_cast<double>(trials));
    est.bound = 1.0 - 1.0 / static_cast<double>(n);
    est.entry_miss_rate = static_cast<double>(entry_misses) /
                          (static_cast<double>(trials) * n);
    est.entry_miss_bound = std::pow(1.0 - 1.0 / static_cast<double>(n),
                                    static_cast<double>(r) * sessions);
    est.pass = est.estimate >= est.bound;
    return est;
}

std::string CoverageEstimate::to_json() const {
    std::ostringstream out;
    out << "{\"n\":" << n << ",\"r\":" << r << ",\"sessions\":" << sessions
        << ",\"trials\":" << trials << ",\"estimate\":" << format_double(estimate)
        << ",\"stderr\":" << format_double(stderr_)
        << ",\"bound\":" << format_double(bound)
        << ",\"entry_miss_rate\":" << format_double(entry_miss_rate)
        << ",\"entry_miss_bound\":" << format_double(entry_miss_bound)
        << ",\"pass\":" << (pass ? "true" : "false") << "}";
    return out.str();
}

// ---------------------------------------------------------------------------
// Schedule audit

ScheduleAudit audit_deterministic_schedule(const RefreshSchedule& schedule,
                                           std::uint32_t n, std::uint32_t k_private) {
    if (n < 1) throw std::invalid_argument("audit: n must be >= 1");
    if (k_private < 1 || k_private > n)
        throw std::invalid_argument("audit: k_private out of 1..n");
    if (schedule.size() < n)
        throw std::invalid_argument("audit: schedule shorter than one window");
    for (const auto& session : schedule)
        for (std::uint32_t idx : session)
            if (idx < 1 || idx > n)
                throw std::invalid_argument("audit: refresh index out of 1..n");

    ScheduleAudit audit;
    audit.n = n;
    audit.k_private = k_private;
    audit.required_window_total =
        static_cast<std::uint64_t>(n) * (n - k_private + 1);
    audit.alt_claimed_total = static_cast<std::uint64_t>(n) * (k_private + 1);

    const std::uint32_t required_gap = n - k_private + 1;
    bool entries_ok = true;
    for (std::uint32_t entry = 1; entry <= n; ++entry) {
        EntryAudit ea;
        ea.entry = entry;
        ea.required = required_gap;
        std::optional<std::size_t> last_usage;
        std::optional<std::uint32_t> min_gap;
        for (std::size_t s = 1; s <= schedule.size(); ++s) {
            if (key_entry_index(n, s) != entry) continue;
            if (last_usage) {
                // refreshes in sessions [last_usage, s): the refresh sent in
                // the usage session itself protects the next usage
                std::uint32_t count = 0;
                for (std::size_t w = *last_usage; w < s; ++w) {
                    const auto& set = schedule[w - 1];
                    count += std::find(set.begin(), set.end(), entry) != set.end();
                }
                min_gap = min_gap ? std::min(*min_gap, count) : count;
            }
            last_usage = s;
        }
        ea.min_gap_refreshes = min_gap;
        ea.ok = !min_gap || *min_gap >= required_gap;
        entries_ok = entries_ok && ea.ok;
        audit.entries.push_back(ea);
    }

    // sliding n-session windows
    std::uint64_t window_total = 0;
    for (std::size_t s = 0; s < n; ++s) window_total += schedule[s].size();
    audit.min_window_total = window_total;
    for (std::size_t start = 1; start + n <= schedule.size(); ++start) {
        window_total -= schedule[start - 1].size();
        window_total += schedule[start + n - 1].size();
        audit.min_window_total = std::min(audit.min_window_total, window_total);
    }
    audit.window_ok = audit.min_window_total >= audit.required_window_total;
    audit.pass = entries_ok && audit.window_ok;
    return audit;
}

std::string ScheduleAudit::to_json() const {
    std::ostringstream out;
    out << "{\"n\":" << n << ",\"k_private\":" << k_private << ",\"entries\":[";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const EntryAudit& ea = entries[i];
        if (i) out << ",";
        out << "{\"entry\":" << ea.entry << ",\"min_gap_refreshes\":";
        if (ea.min_gap_refreshes)
            out << *ea.min_gap_refreshes;
        else
            out << "null";
        out << ",\"required\":" << ea.required
            << ",\"ok\":" << (ea.ok ? "true" : "false") << "}";
    }
    out << "],\"min_window_total\":" << min_window_total
        << ",\"required_window_total\":" << required_window_total
        << ",\"alt_claimed_total\":" << alt_claimed_total
        << ",\"window_ok\":" << (window_ok ? "true" : "false")
        << ",\"pass\":" << (pass ? "true" : "false") << "}";
    return out.str();
}

RefreshSchedule dense_schedule(std::uint32_t n, std::uint32_t sessions) {
    std::vector<std::uint32_t> all;
    for (std::uint32_t i = 1; i <= n; ++i) all.push_back(i);
    return RefreshSchedule(sessions, all);
}

RefreshSchedule single_entry_schedule(std::uint32_t entry, std::uint32_t sessions) {
    return RefreshSchedule(sessions, {entry});
}

}  // namespace authsim
