#pragma once

#include <string>

#include "ffrelay/baselines.hpp"
#include "ffrelay/config_io.hpp"

namespace ffrelay {

enum class ExperimentKind { rate_vs_power, rate_vs_alpha, single_solve, verify_lemma1 };

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::single_solve;
    dvec sweep;                       ///< budgets [dBm] or loop-back gains alpha^2
    int trials = 50;
    std::vector<std::string> schemes{"joint", "equal", "source_only", "relay_only"};
    SystemConfig base_config;
    SolverOptions solver;
    dvec zeta_db_list{90.0, 120.0};
    SimKeys sim;
    int threads = 0;                  ///< worker pool size; 0 = hardware
};

struct ResultRow {
    double sweep_value = 0.0;
    std::string scheme;
    int trial = 0;
    double rate_bps_hz = 0.0;
    double source_power_w = 0.0;
    double relay_power_w = 0.0;
    double gap = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;
    std::string flag = "ok";
};

/// Fig.-2-style sweep: for each budget (dBm, applied to both P and Q) and each
/// requested scheme, one row per trial. All schemes at a given trial share
/// bit-identical channels, and the channels do not depend on the budget.
/// Solver failures are flagged per row; the sweep never aborts.
std::vector<ResultRow> run_rate_vs_power(const ExperimentSpec& spec);

/// Fig.-3-style sweep over the loop-back gain alpha^2: the jointly optimized
/// design (loop-blind, computed once per trial) plus the cancellation baseline
/// per zeta, evaluated under the residual-SI PSD of each alpha^2.
std::vector<ResultRow> run_rate_vs_alpha(const ExperimentSpec& spec);

struct LemmaFixtureResult {
    int id = 0;
    double alpha = 0.0;
    int delay = 0;
    double loop_gain = 0.0;
    double transfer_median_err = 0.0;
    double transfer_max_err = 0.0;
    double relay_psd_err = 0.0;
    double dnoise_psd_err = 0.0;
    bool stable = true;
    bool pass = false;
    std::string note;
};

struct LemmaVerification {
    std::vector<LemmaFixtureResult> fixtures;
    bool all_pass = false;
};

/// Runs the built-in stable fixture set through the time simulator and checks
/// the closed-form loop formulas: transfer (median <= 1%, max <= 5%),
/// integrated relay transmit PSD (<= 5%) and destination noise PSD (<= 5%).
/// Divergent fixtures are reported as skipped, not failed.
LemmaVerification run_verify_lemma1(const ExperimentSpec& spec);

/// One joint solve at the base config; rows for every requested scheme.
std::vector<ResultRow> run_single_solve(const ExperimentSpec& spec);

std::string csv_header();
std::string to_csv(const std::vector<ResultRow>& rows);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::string format_lemma_report(const LemmaVerification& v);

}  // namespace ffrelay
