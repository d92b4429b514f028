#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "authsim/refresh.hpp"

using namespace authsim;

namespace {

// binomial coefficient, exact in double for the small sizes used here
double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double out = 1.0;
    for (int i = 0; i < k; ++i) out = out * (n - i) / (i + 1);
    return out;
}

// independent oracle: inclusion-exclusion over the entries that stay
// unrefreshed, with per-session subsets drawn uniformly without replacement
double coverage_exact(int n, int r, int sessions) {
    double total = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double miss_one_session = choose(n - j, r) / choose(n, r);
        total += (j % 2 == 0 ? 1.0 : -1.0) * choose(n, j) *
                 std::pow(miss_one_session, sessions);
    }
    return total;
}

// chi-square critical value via the Wilson-Hilferty approximation
double chi_square_crit(double df, double z) {
    const double a = 2.0 / (9.0 * df);
    const double c = 1.0 - a + z * std::sqrt(a);
    return df * c * c * c;
}

}  // namespace

TEST_CASE("default refresh count is ceil(2 log2 n)") {
    CHECK(default_refresh_count(2) == 2);
    CHECK(default_refresh_count(8) == 6);
    CHECK(default_refresh_count(64) == 12);
    CHECK(default_refresh_count(100) == 14);  // ceil(13.28...)
}

TEST_CASE("choose_refresh_set basics") {
    PadStream rng(5);
    const auto full = choose_refresh_set(rng, 6, 6);
    CHECK(full == std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6});

    PadStream a(123);
    PadStream b(123);
    CHECK(choose_refresh_set(a, 16, 5) == choose_refresh_set(b, 16, 5));

    CHECK_THROWS_AS(choose_refresh_set(rng, 4, 5), std::invalid_argument);
    CHECK_THROWS_AS(choose_refresh_set(rng, 4, 0), std::invalid_argument);

    const auto set = choose_refresh_set(rng, 40, 11);
    CHECK(set.size() == 11);
    for (std::size_t i = 1; i < set.size(); ++i) CHECK(set[i] > set[i - 1]);
}

TEST_CASE("choose_refresh_set inclusion frequencies are uniform") {
    const std::uint32_t n = 8, r = 3;
    const int draws = 100000;
    PadStream rng(2024);
    std::vector<std::uint64_t> counts(n, 0);
    std::vector<std::uint32_t> set;
    for (int d = 0; d < draws; ++d) {
        choose_refresh_set(rng, n, r, set);
        for (std::uint32_t idx : set) ++counts[idx - 1];
    }
    const double p = static_cast<double>(r) / n;
    const double sigma = std::sqrt(p * (1 - p) / draws);
    double chi2 = 0.0;
    const double expected = draws * p;
    for (std::uint64_t c : counts) {
        const double freq = static_cast<double>(c) / draws;
        CHECK(std::abs(freq - p) < 3 * sigma);
        chi2 += (c - expected) * (c - expected) / expected;
    }
    // p > 0.001 for the uniformity hypothesis
    CHECK(chi2 < chi_square_crit(n - 1, 3.090232));
}

TEST_CASE("apply_sparse_refresh zeroes the used entry, then xors pairs") {
    const auto arv = SecretVector::from_values({1, 2, 3}, 4);

    auto out = apply_sparse_refresh(
        arv, 3, RefreshVector::make_sparse({{1, Bits::from_uint(4, 4)}}));
    CHECK(out == SecretVector::from_values({5, 2, 0}, 4));

    out = apply_sparse_refresh(
        arv, 3, RefreshVector::make_sparse({{3, Bits::from_uint(7, 4)}}));
    CHECK(out == SecretVector::from_values({1, 2, 7}, 4));

    out = apply_sparse_refresh(arv, 2, RefreshVector::make_sparse({}));
    CHECK(out == SecretVector::from_values({1, 0, 3}, 4));
}

TEST_CASE("apply_sparse_refresh rejects bad input") {
    const auto arv = SecretVector::from_values({1, 2, 3}, 4);
    CHECK_THROWS_AS(apply_sparse_refresh(
                        arv, 1, RefreshVector::make_sparse({{4, Bits::from_uint(1, 4)}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_sparse_refresh(
                        arv, 1,
                        RefreshVector::make_sparse(
                            {{2, Bits::from_uint(1, 4)}, {2, Bits::from_uint(2, 4)}})),
                    std::invalid_argument);
    PadStream rng(1);
    CHECK_THROWS_AS(
        apply_sparse_refresh(arv, 1, RefreshVector::dense_random(3, 4, rng)),
        std::invalid_argument);
}

TEST_CASE("coverage probability: exact corner cases") {
    const auto certain = coverage_probability(8, 8, 1, 100, 1);
    CHECK(certain.estimate == 1.0);

    // with one refresh per session and a single session, one entry is missed
    const auto impossible = coverage_probability(2, 1, 1, 500, 1);
    CHECK(impossible.estimate == 0.0);
}

TEST_CASE("coverage probability matches the inclusion-exclusion oracle") {
    const int n = 6, r = 2, sessions = 5;
    const double exact = coverage_exact(n, r, sessions);
    const auto mc = coverage_probability(n, r, sessions, 40000, 7);
    CHECK(std::abs(mc.estimate - exact) < 4 * std::sqrt(exact * (1 - exact) / 40000));
}

TEST_CASE("coverage meets the 1 - 1/n bound at n=64") {
    const auto est = coverage_probability(64, 12, 64, 20000, 11);
    CHECK(est.bound == doctest::Approx(1.0 - 1.0 / 64));
    CHECK(est.estimate >= est.bound);
    CHECK(est.pass);
    const double miss_sigma =
        std::sqrt(est.entry_miss_bound * (1 - est.entry_miss_bound) / (20000.0 * 64));
    CHECK(est.entry_miss_rate <= est.entry_miss_bound + 3 * miss_sigma);
}

TEST_CASE("coverage runs are reproducible and emit json") {
    const auto a = coverage_probability(16, 8, 16, 5000, 99);
    const auto b = coverage_probability(16, 8, 16, 5000, 99);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json().find("\"n\":16") != std::string::npos);
}

TEST_CASE("audit: the dense schedule satisfies the counting bound") {
    const auto audit = audit_deterministic_schedule(dense_schedule(4, 8), 4, 1);
    for (const EntryAudit& ea : audit.entries) {
        REQUIRE(ea.min_gap_refreshes.has_value());
        CHECK(*ea.min_gap_refreshes == 4);  // every entry refreshed every session
        CHECK(ea.required == 4);            // n - k + 1
        CHECK(ea.ok);
    }
    CHECK(audit.min_window_total == 16);       // n^2
    CHECK(audit.required_window_total == 16);  // n (n - k + 1)
    CHECK(audit.alt_claimed_total == 8);       // n (k + 1), reported for comparison
    CHECK(audit.pass);
}

TEST_CASE("audit: refreshing only entry 1 is flagged for the others") {
    const auto audit = audit_deterministic_schedule(single_entry_schedule(1, 8), 4, 1);
    CHECK_FALSE(audit.pass);
    for (const EntryAudit& ea : audit.entries) {
        if (ea.entry == 1) {
            CHECK(ea.ok);  // entry 1 itself is refreshed every session
        } else {
            REQUIRE(ea.min_gap_refreshes.has_value());
            CHECK(*ea.min_gap_refreshes == 0);
            CHECK_FALSE(ea.ok);
        }
    }
    CHECK_FALSE(audit.window_ok);
}

TEST_CASE("audit: an empty schedule flags every entry") {
    const RefreshSchedule empty(8, std::vector<std::uint32_t>{});
    const auto audit = audit_deterministic_schedule(empty, 4, 1);
    for (const EntryAudit& ea : audit.entries) CHECK_FALSE(ea.ok);
    CHECK(audit.min_window_total == 0);
    CHECK_FALSE(audit.pass);
}

TEST_CASE("audit validates its inputs") {
    CHECK_THROWS_AS(audit_deterministic_schedule(dense_schedule(4, 2), 4, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(audit_deterministic_schedule(dense_schedule(4, 8), 4, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(audit_deterministic_schedule(single_entry_schedule(9, 8), 4, 1),
                    std::invalid_argument);
}

TEST_CASE("policy validation") {
    CHECK_THROWS_AS(RefreshPolicy::sparse(8, 0), std::invalid_argument);
    CHECK_THROWS_AS(RefreshPolicy::sparse(8, 9), std::invalid_argument);
    const auto p = RefreshPolicy::sparse(64, 1);
    CHECK(p.per_session_count == 12);
    CHECK(p.pcf(64) == doctest::Approx(64.0));
}
