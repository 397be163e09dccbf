#include "amdim/walk_stats.hpp"

#include "amdim/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace amdim {

namespace {

struct BatchTally {
    std::uint64_t trials = 0;
    std::uint64_t uncensored = 0;
    double sum_n = 0.0;
    double sum_s = 0.0;
    std::vector<std::uint64_t> stop_counts;
};

}  // namespace

WalkSummary walk_summary(double p_minus, double gamma, std::uint64_t seed, std::uint64_t trials,
                         std::uint64_t cap, const WalkOptions& options) {
    if (trials == 0) throw DomainError("walk summary needs at least one trial");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("walk step gamma must be positive");
    if (cap < 2) throw DomainError("walk cap must be >= 2");

    const std::uint64_t batches = std::min<std::uint64_t>(trials, BatchMeans::kDefaultBatches);
    const std::uint64_t base = trials / batches;
    const std::uint64_t extra = trials % batches;
    std::vector<BatchTally> tallies(batches);

    parallel_for(batches, options.threads, [&](std::size_t k) {
        BatchTally& t = tallies[k];
        t.trials = base + (k < extra ? 1 : 0);
        if (options.keep_stop_counts) t.stop_counts.assign(cap + 1, 0);
        SymbolStream symbols(RngStream(seed, substream_id(options.stream_id, k)), p_minus);
        for (std::uint64_t i = 0; i < t.trials; ++i) {
            const WalkOutcome w = sample_walk(gamma, symbols, cap, options.kind);
            if (w.censored) continue;
            ++t.uncensored;
            t.sum_n += static_cast<double>(w.n);
            t.sum_s += w.s;
            if (options.keep_stop_counts) ++t.stop_counts[w.n];
        }
    });

    WalkSummary out;
    out.trials = trials;
    out.cap = cap;
    std::uint64_t uncensored = 0;
    double sum_n = 0.0;
    double sum_s = 0.0;
    if (options.keep_stop_counts) out.stop_counts.assign(cap + 1, 0);
    for (const BatchTally& t : tallies) {
        uncensored += t.uncensored;
        sum_n += t.sum_n;
        sum_s += t.sum_s;
        if (t.uncensored > 0) {
            out.batch_mean_n.push_back(t.sum_n / static_cast<double>(t.uncensored));
            out.batch_mean_s.push_back(t.sum_s / static_cast<double>(t.uncensored));
        }
        for (std::size_t n = 0; n < t.stop_counts.size(); ++n) out.stop_counts[n] += t.stop_counts[n];
    }
    out.censored_fraction = static_cast<double>(trials - uncensored) / static_cast<double>(trials);
    out.warning = out.censored_fraction > kCensorWarning;
    if (uncensored > 0) {
        out.mean_n = {sum_n / static_cast<double>(uncensored), batch_standard_error(out.batch_mean_n), uncensored};
        out.mean_s = {sum_s / static_cast<double>(uncensored), batch_standard_error(out.batch_mean_s), uncensored};
    }
    return out;
}

double empirical_survival(const WalkSummary& summary, std::uint64_t n) {
    if (summary.stop_counts.empty()) throw DomainError("summary was built without stop counts");
    std::uint64_t stopped = 0;
    const std::uint64_t last = std::min<std::uint64_t>(n + 1, summary.stop_counts.size() - 1);
    for (std::uint64_t k = 0; k <= last; ++k) stopped += summary.stop_counts[k];
    return static_cast<double>(summary.trials - stopped) / static_cast<double>(summary.trials);
}

ExactWalkStats exact_walk_stats(double p_minus, double gamma, std::uint64_t depth) {
    if (!(p_minus >= 0.0 && p_minus <= 1.0)) throw DomainError("p_minus must lie in [0,1]");
    if (depth < 2) throw DomainError("walk depth must be >= 2");
    if (!(walk_drift(p_minus, gamma) < 0.0)) throw DomainError("minus walk needs negative drift p- - gamma p+");
    const double p_plus = 1.0 - p_minus;

    // alive[v]: mass after j steps with v down-steps, all partial sums > −1 so far.
    std::vector<double> alive{1.0};
    std::vector<double> next;
    ExactWalkStats out;
    out.depth = depth;
    for (std::uint64_t j = 0; j + 2 <= depth; ++j) {
        const auto n = static_cast<double>(j + 2);
        next.assign(alive.size() + 1, 0.0);
        for (std::size_t v = 0; v < alive.size(); ++v) {
            const double m = alive[v];
            if (m == 0.0) continue;
            next[v] += m * p_minus;  // up-step keeps the sum above −1
            const double s = static_cast<double>(j - v) - gamma * static_cast<double>(v + 1);
            if (s <= -1.0) {
                out.e_n += m * p_plus * n;
                out.e_s += m * p_plus * s;
            } else {
                next[v + 1] += m * p_plus;
            }
        }
        while (next.size() > 1 && next.back() == 0.0) next.pop_back();
        alive.swap(next);
    }
    for (double m : alive) out.alive_mass += m;
    out.truncation_bound = hoeffding_tail(p_minus, gamma, depth - 1);
    return out;
}

double wald_residual(const WalkSummary& summary, double p_minus, double gamma) {
    const double drift = walk_drift(p_minus, gamma);
    return std::abs(summary.mean_s.value - drift * (summary.mean_n.value - 1.0));
}

double wald_propagated_se(const WalkSummary& summary, double p_minus, double gamma) {
    const double drift = walk_drift(p_minus, gamma);
    std::vector<double> r(summary.batch_mean_s.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        r[k] = summary.batch_mean_s[k] - drift * (summary.batch_mean_n[k] - 1.0);
    }
    return batch_standard_error(r);
}

double hoeffding_tail(double p_minus, double gamma, std::uint64_t n) {
    if (n == 0) return 1.0;
    const double nn = static_cast<double>(n);
    const double t = -(1.0 + nn * walk_drift(p_minus, gamma));
    if (!(t > 0.0)) return 1.0;
    return std::exp(-2.0 * t * t / (nn * (gamma + 1.0) * (gamma + 1.0)));
}

std::vector<EsnRow> esn_sweep(double p_minus, double gamma_min, double gamma_max, std::uint64_t points,
                              std::uint64_t seed, std::uint64_t trials, std::uint64_t cap, unsigned threads) {
    if (points == 0) throw DomainError("sweep needs at least one point");
    if (!(gamma_max > gamma_min)) throw DomainError("sweep needs gamma_min < gamma_max");
    std::vector<EsnRow> rows(points);
    parallel_for(points, threads, [&](std::size_t i) {
        rows[i].gamma = gamma_min + (gamma_max - gamma_min) * static_cast<double>(i + 1) /
                                        static_cast<double>(points + 1);
        WalkOptions opts;
        opts.stream_id = i;
        rows[i].summary = walk_summary(p_minus, rows[i].gamma, seed, trials, cap, opts);
    });
    return rows;
}

double mu_M_walk_bound(double e_s, double gamma) {
    if (!(gamma > 1.0)) throw DomainError("walk bound needs gamma > 1");
    if (!(e_s < 0.0)) throw DomainError("walk bound needs a negative expected stopped sum");
    return (gamma - 1.0) / (gamma - 1.0 - e_s);
}

std::string to_string(ExitSide side) {
    switch (side) {
        case ExitSide::Stayed: return "stayed";
        case ExitSide::LeftViaL: return "left-via-L";
        case ExitSide::RightViaR: return "right-via-R";
    }
    return "unknown";
}

}  // namespace amdim
