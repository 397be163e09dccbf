#pragma once

// The stopping-time walk that approximates excursions into the tails, its
// exact expectations, and the full-map first return time to M.
//
// Minus walk: after the forced first symbol −, each further symbol adds +1
// (symbol −, prob p₋) or −γ (symbol +, prob p₊) to the level, starting at 0.
// The walk stops at the first n ≥ 2 with X₂ + … + X_n ≤ −1. The plus walk is
// the mirror image with the roles of the symbols exchanged.

#include "amdim/am_core.hpp"
#include "amdim/batch_means.hpp"
#include "amdim/rng.hpp"
#include "amdim/sim_engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace amdim {

enum class WalkKind : unsigned char { Minus, Plus };

inline constexpr std::uint64_t kDefaultTrials = 40'000;
inline constexpr std::uint64_t kDefaultCap = 3'000;
inline constexpr std::uint64_t kDefaultDepth = 400;
inline constexpr double kCensorWarning = 1e-3;

struct WalkOutcome {
    std::uint64_t n = 0;  // stopping index N (≥ 2); the cap when censored
    double s = 0.0;       // terminal sum S_N; the running sum when censored
    bool censored = false;
};

/// Runs one walk on `symbols`, which must already be past the forced first
/// symbol. Partial sums are accumulated exactly as the tail levels of an
/// orbit, so the two agree bit for bit. Censored when N would exceed `cap`.
template <typename Source>
WalkOutcome sample_walk(double gamma, Source& symbols, std::uint64_t cap, WalkKind kind = WalkKind::Minus) {
    if (cap < 2) throw DomainError("walk cap must be >= 2");
    const Symbol up = kind == WalkKind::Minus ? Symbol::Minus : Symbol::Plus;
    WalkOutcome out;
    out.n = 1;
    double level = 0.0;
    while (out.n < cap) {
        ++out.n;
        level = symbols.next() == up ? level + 1.0 : level - gamma;
        if (level_exits(level)) {
            out.s = level;
            return out;
        }
    }
    out.s = level;
    out.censored = true;
    return out;
}

struct WalkSummary {
    EstimateWithError mean_n;  // over uncensored trials
    EstimateWithError mean_s;
    double censored_fraction = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t cap = 0;
    bool warning = false;  // censored_fraction > 1e-3
    /// Per trial-batch means of n and s over uncensored trials (batches with
    /// no uncensored trial are skipped in both).
    std::vector<double> batch_mean_n;
    std::vector<double> batch_mean_s;
    /// stop_counts[n] = uncensored trials with N = n; only when requested.
    std::vector<std::uint64_t> stop_counts;
};

struct WalkOptions {
    std::uint64_t stream_id = 0;
    unsigned threads = 1;
    WalkKind kind = WalkKind::Minus;
    bool keep_stop_counts = false;
};

/// `trials` walks split into 100 trial-batches; batch k draws from
/// RngStream(seed, substream_id(stream_id, k)). Independent of `threads`.
WalkSummary walk_summary(double p_minus, double gamma, std::uint64_t seed, std::uint64_t trials,
                         std::uint64_t cap = kDefaultCap, const WalkOptions& options = {});

/// Empirical P(N > n + 1) over all trials (censored ones count as survivors).
/// Requires a summary with stop counts.
double empirical_survival(const WalkSummary& summary, std::uint64_t n);

struct ExactWalkStats {
    double e_n = 0.0;
    double e_s = 0.0;
    double truncation_bound = 0.0;  // Hoeffding bound on P(N > depth)
    double alive_mass = 0.0;        // exact unstopped mass at depth
    std::uint64_t depth = 0;
};

/// Expectations of the minus walk by propagating mass over the exact lattice
/// of states (steps, down-steps); sums u − γv are never rounded to a grid.
ExactWalkStats exact_walk_stats(double p_minus, double gamma, std::uint64_t depth = kDefaultDepth);

/// Drift p₋ − γp₊ of the minus walk.
inline double walk_drift(double p_minus, double gamma) { return p_minus - gamma * (1.0 - p_minus); }

/// |mean_s − drift·(mean_n − 1)|.
double wald_residual(const WalkSummary& summary, double p_minus, double gamma);
/// Standard error of the Wald residual from the trial-batch series.
double wald_propagated_se(const WalkSummary& summary, double p_minus, double gamma);

/// exp(−2t²/(n(γ+1)²)) with t = −(1 + n·drift); 1 when t ≤ 0.
double hoeffding_tail(double p_minus, double gamma, std::uint64_t n);

struct EsnRow {
    double gamma = 0.0;
    WalkSummary summary;
};

/// Summaries on the open grid γ_i = min + (max − min)(i + 1)/(points + 1);
/// cell i uses stream_id i.
std::vector<EsnRow> esn_sweep(double p_minus, double gamma_min, double gamma_max, std::uint64_t points,
                              std::uint64_t seed, std::uint64_t trials = kDefaultTrials,
                              std::uint64_t cap = kDefaultCap, unsigned threads = 1);

/// (γ − 1)/(γ − 1 − e_s).
double mu_M_walk_bound(double e_s, double gamma);

enum class ExitSide : unsigned char { Stayed, LeftViaL, RightViaR };

struct ReturnOutcome {
    std::uint64_t n_return = 0;
    ExitSide exit_side = ExitSide::Stayed;
    bool censored = false;
};

/// Iterates the full maps from `start` ∈ M until the orbit is back in M.
template <typename Source>
ReturnOutcome sample_return_time(const OrbitStepper& stepper, Source& symbols, const HybridPoint& start,
                                 std::uint64_t cap) {
    if (!start.in_bulk()) throw DomainError("return time needs a starting point in M");
    ReturnOutcome out;
    HybridPoint point = stepper.step(start, symbols.next());
    out.n_return = 1;
    if (point.in_bulk()) return out;
    out.exit_side = point.side() == Side::Low ? ExitSide::LeftViaL : ExitSide::RightViaR;
    while (!point.in_bulk()) {
        if (out.n_return >= cap) {
            out.censored = true;
            return out;
        }
        point = stepper.step(point, symbols.next());
        ++out.n_return;
    }
    return out;
}

std::string to_string(ExitSide side);

}  // namespace amdim
