// Sparse randomized refresh: policies choosing how many vector entries a
// session renews, the sparse update rule, a Monte Carlo estimator for the
// probability that every entry gets refreshed within a window of private
// sessions, and an auditor that checks deterministic refresh schedules
// against the per-entry and per-window counting bounds.
#ifndef AUTHSIM_REFRESH_HPP
#define AUTHSIM_REFRESH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "authsim/core.hpp"

namespace authsim {

struct RefreshPolicy {
    enum class Mode { dense, sparse_random };

    Mode mode = Mode::dense;
    std::uint32_t per_session_count = 0;  // r; sparse mode only
    std::uint32_t k_private = 1;          // private sessions assumed per window of n

    static RefreshPolicy dense();
    static RefreshPolicy sparse(std::uint32_t n, std::uint32_t k_private = 1,
                                std::uint32_t r = 0);  // r==0 -> default_r(n)

    double pcf(std::uint32_t n) const {  // fraction of private communication n/k
        return static_cast<double>(n) / k_private;
    }
    void validate(std::uint32_t n) const;
};

// default per-session refresh count: ceil(2*log2(n))
std::uint32_t default_refresh_count(std::uint32_t n);

// Uniform r-subset of 1..n, ascending, no duplicates. Throws if r < 1 or
// r > n. The overload writing into `out` avoids allocation in trial loops.
std::vector<std::uint32_t> choose_refresh_set(PadStream& rng, std::uint32_t n,
                                              std::uint32_t r);
void choose_refresh_set(PadStream& rng, std::uint32_t n, std::uint32_t r,
                        std::vector<std::uint32_t>& out);

// Sparse update: zero the used entry first, then xor each (index, value)
// pair in; an entry listed in the pairs therefore ends as that pair's value
// when it is the used entry. Throws on non-sparse input, out-of-range or
// duplicate indices, or width mismatch.
SecretVector apply_sparse_refresh(const SecretVector& arv, std::uint32_t keyentry,
                                  const RefreshVector& refresh);

// Fresh sparse refresh payload: r uniformly chosen indices with random values.
RefreshVector sparse_refresh_random(std::uint32_t n, std::uint32_t width,
                                    std::uint32_t r, PadStream& rng);

// ---------------------------------------------------------------------------
// Coverage estimation

struct CoverageEstimate {
    std::uint32_t n = 0;
    std::uint32_t r = 0;
    std::uint32_t sessions = 0;
    std::uint64_t trials = 0;
    double estimate = 0.0;     // Pr[every entry refreshed at least once]
    double stderr_ = 0.0;      // binomial standard error of `estimate`
    double bound = 0.0;        // 1 - 1/n
    double entry_miss_rate = 0.0;   // misses / (trials * n)
    double entry_miss_bound = 0.0;  // (1 - 1/n)^(r * sessions)
    bool pass = false;         // estimate >= bound

    std::string to_json() const;
};

CoverageEstimate coverage_probability(std::uint32_t n, std::uint32_t r,
                                      std::uint32_t sessions, std::uint64_t trials,
                                      std::uint64_t seed,
                                      const std::string& generator_id = kDefaultGenerator);

// ---------------------------------------------------------------------------
// Deterministic schedule audit

// One session's refreshed indices (1-based); the schedule's first element is
// session 1 and key-entry usage follows key_entry_index.
using RefreshSchedule = std::vector<std::vector<std::uint32_t>>;

struct EntryAudit {
    std::uint32_t entry = 0;
    std::optional<std::uint32_t> min_gap_refreshes;  // absent if used < 2 times
    std::uint32_t required = 0;                      // n - k_private + 1
    bool ok = true;
};

struct ScheduleAudit {
    std::uint32_t n = 0;
    std::uint32_t k_private = 0;
    std::vector<EntryAudit> entries;
    std::uint64_t min_window_total = 0;     // fewest refreshes in any n-session window
    std::uint64_t required_window_total = 0;  // n * (n - k_private + 1)
    std::uint64_t alt_claimed_total = 0;      // n * (k_private + 1), printed for comparison
    bool window_ok = false;
    bool pass = false;  // all per-entry gaps ok and window_ok

    std::string to_json() const;
};

// Flags violations; never throws on a bad schedule. Requires schedule length
// >= n and every index in 1..n.
ScheduleAudit audit_deterministic_schedule(const RefreshSchedule& schedule,
                                           std::uint32_t n, std::uint32_t k_private);

// The schedules the audit examples exercise.
RefreshSchedule dense_schedule(std::uint32_t n, std::uint32_t sessions);
RefreshSchedule single_entry_schedule(std::uint32_t entry, std::uint32_t sessions);

}  // namespace authsim

#endif
