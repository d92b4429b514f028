// auth-sim: experiment runner for the proactive authentication protocols.
//
//   auth-sim run --config experiment.json [overrides] --out results.csv
//   auth-sim audit-schedule --config schedule.json
//   auth-sim coverage --n 64 --r 12 --sessions 64 --trials 100000
//
// Exit code 0 iff every pass flag in the produced output is true.
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "authsim/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text;
}

authsim::RefreshSchedule schedule_from_json(const nlohmann::json& j) {
    using namespace authsim;
    const std::uint32_t n = j.at("n").get<std::uint32_t>();
    const auto sessions = j.value("sessions", 2 * n);
    if (!j.contains("schedule") || j.at("schedule").is_string()) {
        const std::string kind = j.value("schedule", std::string("dense"));
        if (kind == "dense") return dense_schedule(n, sessions);
        if (kind == "single-entry")
            return single_entry_schedule(j.value("entry", 1u), sessions);
        if (kind == "sparse-random") {
            const std::uint32_t r = j.value("r", default_refresh_count(n));
            PadStream rng(j.value("seed", 1ull),
                          j.value("generator_id", std::string(kDefaultGenerator)));
            RefreshSchedule schedule;
            for (std::uint32_t s = 0; s < sessions; ++s)
                schedule.push_back(choose_refresh_set(rng, n, r));
            return schedule;
        }
        throw std::runtime_error("schedule: unknown kind " + kind);
    }
    return j.at("schedule").get<authsim::RefreshSchedule>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo harness for proactive tag/verifier authentication"};
    app.require_subcommand(1);

    // --- run ---
    auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
    std::string run_config, run_out, run_format = "csv";
    std::optional<std::string> opt_protocol;
    std::optional<std::uint32_t> opt_n, opt_l, opt_keyword_len;
    std::optional<std::uint64_t> opt_trials, opt_sessions, opt_seed;
    std::optional<std::string> opt_generator, opt_adversary;
    run->add_option("--config", run_config, "experiment config JSON file");
    run->add_option("--protocol", opt_protocol, "override: ap1 | ap2 | ap2t");
    run->add_option("--n", opt_n, "override: secret vector entries");
    run->add_option("--l", opt_l, "override: bits per entry");
    run->add_option("--keyword-len", opt_keyword_len, "override: keyword bits");
    run->add_option("--trials", opt_trials, "override: Monte Carlo trials");
    run->add_option("--sessions", opt_sessions, "override: sessions per trial");
    run->add_option("--seed", opt_seed, "override: master seed");
    run->add_option("--generator", opt_generator, "override: pad generator id");
    run->add_option("--adversary", opt_adversary, "override: adversary kind");
    run->add_option("--out", run_out, "output file (default stdout)");
    run->add_option("--format", run_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    // --- transcript ---
    auto* transcript = app.add_subcommand(
        "transcript", "record honest sessions as a line-delimited JSON log");
    std::string tr_config, tr_out;
    std::uint64_t tr_sessions = 32;
    transcript->add_option("--config", tr_config, "experiment config JSON file");
    transcript->add_option("--sessions", tr_sessions, "sessions to record");
    transcript->add_option("--out", tr_out, "output file (default stdout)");

    // --- audit-schedule ---
    auto* audit = app.add_subcommand(
        "audit-schedule", "check a refresh schedule against the counting bounds");
    std::string audit_config, audit_out;
    audit->add_option("--config", audit_config, "schedule config JSON file")
        ->required();
    audit->add_option("--out", audit_out, "output file (default stdout)");

    // --- coverage ---
    auto* coverage = app.add_subcommand(
        "coverage", "estimate the probability that sparse refresh hits every entry");
    std::uint32_t cov_n = 64, cov_r = 0, cov_sessions = 0;
    std::uint64_t cov_trials = 100000, cov_seed = 1;
    std::string cov_generator = authsim::kDefaultGenerator, cov_out;
    coverage->add_option("--n", cov_n, "vector entries")->required();
    coverage->add_option("--r", cov_r, "refreshes per session (0 = ceil(2 log2 n))");
    coverage->add_option("--sessions", cov_sessions, "private sessions (0 = n)");
    coverage->add_option("--trials", cov_trials, "Monte Carlo trials");
    coverage->add_option("--seed", cov_seed, "rng seed");
    coverage->add_option("--generator", cov_generator, "pad generator id");
    coverage->add_option("--out", cov_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            authsim::ExperimentConfig cfg;
            if (!run_config.empty())
                cfg = authsim::ExperimentConfig::from_json_text(read_file(run_config));
            if (opt_protocol) cfg.protocol = *opt_protocol;
            if (opt_n) cfg.n = *opt_n;
            if (opt_l) cfg.l = *opt_l;
            if (opt_keyword_len) cfg.keyword_len = *opt_keyword_len;
            if (opt_trials) cfg.trials = *opt_trials;
            if (opt_sessions) cfg.sessions_per_trial = *opt_sessions;
            if (opt_seed) cfg.master_seed = *opt_seed;
            if (opt_generator) cfg.generator_id = *opt_generator;
            if (opt_adversary) cfg.adversary.kind = *opt_adversary;

            const authsim::ExperimentResult result = authsim::run_experiment(cfg);
            // the leading comment pins the full config (generator id included)
            // next to the data for reproducibility
            const std::string csv =
                "# " + cfg.to_json_text() + "\n" + result.to_csv();
            write_output(run_format == "csv" ? csv : result.to_json() + "\n", run_out);
            return result.pass ? 0 : 1;
        }

        if (transcript->parsed()) {
            authsim::ExperimentConfig cfg;
            if (!tr_config.empty())
                cfg = authsim::ExperimentConfig::from_json_text(read_file(tr_config));
            write_output(authsim::record_transcript_log(cfg, tr_sessions), tr_out);
            return 0;
        }

        if (audit->parsed()) {
            const nlohmann::json j = nlohmann::json::parse(read_file(audit_config));
            const authsim::RefreshSchedule schedule = schedule_from_json(j);
            const authsim::ScheduleAudit report = authsim::audit_deterministic_schedule(
                schedule, j.at("n").get<std::uint32_t>(), j.value("k_private", 1u));
            write_output(report.to_json() + "\n", audit_out);
            return report.pass ? 0 : 1;
        }

        if (coverage->parsed()) {
            if (cov_r == 0) cov_r = authsim::default_refresh_count(cov_n);
            if (cov_sessions == 0) cov_sessions = cov_n;
            const authsim::CoverageEstimate est = authsim::coverage_probability(
                cov_n, cov_r, cov_sessions, cov_trials, cov_seed, cov_generator);
            write_output(est.to_json() + "\n", cov_out);
            return est.pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
