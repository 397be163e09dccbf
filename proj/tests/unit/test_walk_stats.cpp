#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "amdim/measure_stats.hpp"
#include "amdim/walk_stats.hpp"
#include "../support/property.hpp"

#include <cmath>
#include <functional>

using namespace amdim;
using amdim::testing::for_all;
using amdim::testing::Gen;

namespace {

// Replays a fixed list of symbols, then repeats the last one.
struct Scripted {
    std::vector<Symbol> seq;
    std::size_t i = 0;
    Symbol next() {
        const Symbol s = seq[std::min(i, seq.size() - 1)];
        ++i;
        return s;
    }
};

// Records every partial sum a walk passes through.
struct Tracing {
    SymbolStream inner;
    double gamma;
    double level = 0.0;
    std::vector<double> sums;
    Symbol next() {
        const Symbol s = inner.next();
        level = s == Symbol::Minus ? level + 1.0 : level - gamma;
        sums.push_back(level);
        return s;
    }
};

struct Expectation {
    double e_n = 0.0;
    double e_s = 0.0;
};

// Exhaustive enumeration of all symbol sequences up to `depth`, independent
// of the lattice bookkeeping in exact_walk_stats.
Expectation brute_force(double p_minus, double gamma, std::uint64_t depth) {
    Expectation out;
    std::function<void(std::uint64_t, double, double)> go = [&](std::uint64_t n, double sum, double prob) {
        if (n == depth) return;
        go(n + 1, sum + 1.0, prob * p_minus);
        const double down = sum - gamma;
        const double pd = prob * (1.0 - p_minus);
        if (down <= -1.0) {
            out.e_n += pd * static_cast<double>(n + 1);
            out.e_s += pd * down;
        } else {
            go(n + 1, down, pd);
        }
    };
    go(1, 0.0, 1.0);
    return out;
}

}  // namespace

TEST_CASE("walk examples") {
    Scripted drop{{Symbol::Plus}};
    const WalkOutcome w = sample_walk(1.7, drop, 100);
    CHECK(w.n == 2);
    CHECK(w.s == -1.7);
    CHECK_FALSE(w.censored);

    Scripted up{{Symbol::Minus}};
    const WalkOutcome c = sample_walk(1.7, up, 50);
    CHECK(c.censored);
    CHECK(c.n == 50);

    // +1 +1 −γ −γ with γ = 1.2: sums 1, 2, 0.8, −0.4, −1.6.
    Scripted mix{{Symbol::Minus, Symbol::Minus, Symbol::Plus, Symbol::Plus, Symbol::Plus}};
    const WalkOutcome m = sample_walk(1.2, mix, 100);
    CHECK(m.n == 6);
    CHECK(m.s == doctest::Approx(-1.6));

    Scripted mirror{{Symbol::Minus}};
    CHECK(sample_walk(1.5, mirror, 10, WalkKind::Plus).n == 2);
    CHECK_THROWS_AS(sample_walk(1.5, mirror, 1), DomainError);
}

TEST_CASE("property: every uncensored walk stops in [-1-gamma, -1] with earlier sums above -1") {
    for_all(3000, 51, [](Gen& g) {
        const double gamma = g.uniform(1.01, 4.0);
        Tracing t{SymbolStream(RngStream(g.raw(), 0), g.uniform(0.2, 0.6)), gamma};
        const WalkOutcome w = sample_walk(gamma, t, 3000);
        if (w.censored) return;
        CHECK(w.n >= 2);
        CHECK(w.s >= -1.0 - gamma);
        CHECK(level_exits(w.s));
        CHECK(t.sums.size() == w.n - 1);
        for (std::size_t j = 0; j + 1 < t.sums.size(); ++j) CHECK_FALSE(level_exits(t.sums[j]));
        CHECK(t.sums.back() == w.s);
    });
}

TEST_CASE("exact walk expectations match brute-force enumeration") {
    for (double gamma : {2.0, 2.5, std::sqrt(5.0), 3.0}) {
        for (double p : {0.5, 0.4}) {
            const ExactWalkStats ex = exact_walk_stats(p, gamma, 22);
            const Expectation bf = brute_force(p, gamma, 22);
            INFO("gamma=" << gamma << " p=" << p);
            CHECK(ex.e_n == doctest::Approx(bf.e_n).epsilon(1e-13));
            CHECK(ex.e_s == doctest::Approx(bf.e_s).epsilon(1e-13));
        }
    }
}

TEST_CASE("exact walk at gamma = 2 and p = 1/2") {
    const ExactWalkStats ex = exact_walk_stats(0.5, 2.0, 3000);
    CHECK(ex.e_n == doctest::Approx(2.0 + std::sqrt(5.0)).epsilon(1e-12));
    CHECK(ex.e_s == doctest::Approx(-(1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(ex.alive_mass < 1e-30);
    CHECK(exact_walk_stats(0.5, 3.0, 400).e_s <= -2.0);
}

TEST_CASE("property: exact expectations satisfy Wald and the stopping-time bound") {
    for_all(60, 52, [](Gen& g) {
        const double p = g.uniform(0.3, 0.55);
        const double gamma = g.uniform(p / (1.0 - p) + 0.6, 4.0);
        const ExactWalkStats ex = exact_walk_stats(p, gamma, 400);
        const double drift = walk_drift(p, gamma);
        CHECK(ex.alive_mass < 1e-9);
        CHECK(std::abs(ex.e_s - drift * (ex.e_n - 1.0)) < 1e-8);
        CHECK(ex.e_n - 1.0 <= (p + gamma) / (gamma * (1.0 - p) - p) + 1e-12);
        CHECK(ex.e_s >= -1.0 - gamma);
        CHECK(ex.e_s <= -1.0);
        CHECK(ex.truncation_bound >= ex.alive_mass);
    });
}

TEST_CASE("exact walk domain checks") {
    CHECK_THROWS_AS(exact_walk_stats(0.5, 1.0, 400), DomainError);
    CHECK_THROWS_AS(exact_walk_stats(0.6, 1.4, 400), DomainError);
    CHECK_THROWS_AS(exact_walk_stats(0.5, 1.2, 1), DomainError);
}

TEST_CASE("Hoeffding tail bound") {
    CHECK(hoeffding_tail(0.5, 1.2, 100) == doctest::Approx(std::exp(-162.0 / 484.0)).epsilon(1e-15));
    CHECK(hoeffding_tail(0.5, 1.2, 100) == doctest::Approx(0.7155450322567010).epsilon(1e-14));
    CHECK(hoeffding_tail(0.5, 1.2, 5) == 1.0);  // 1 + 5·(−0.1) > 0
    CHECK(hoeffding_tail(0.5, 0.9, 1000) == 1.0);
    for_all(500, 53, [](Gen& g) {
        const double b = hoeffding_tail(g.uniform(0.1, 0.9), g.uniform(1.0, 5.0), g.below(5000) + 1);
        CHECK(b >= 0.0);
        CHECK(b <= 1.0);
    });
}

TEST_CASE("walk summaries: determinism, thread independence and degenerate case") {
    WalkOptions one;
    WalkOptions four;
    four.threads = 4;
    const WalkSummary a = walk_summary(0.5, 1.25, 11, 20000, 3000, one);
    const WalkSummary b = walk_summary(0.5, 1.25, 11, 20000, 3000, four);
    CHECK(a.mean_s.value == b.mean_s.value);
    CHECK(a.mean_n.std_error == b.mean_n.std_error);
    CHECK(a.batch_mean_s == b.batch_mean_s);
    CHECK(a.trials == 20000);
    CHECK(a.batch_mean_n.size() == 100);

    const WalkSummary d = walk_summary(0.0, 1.7, 1, 1000, 100);
    CHECK(d.mean_n.value == 2.0);
    CHECK(d.mean_s.value == doctest::Approx(-1.7).epsilon(1e-14));
    CHECK(d.censored_fraction == 0.0);
    CHECK(wald_residual(d, 0.0, 1.7) < 1e-13);
    CHECK_THROWS_AS(walk_summary(0.5, 1.2, 0, 0), DomainError);
}

TEST_CASE("walk summary at gamma = 1.25 sits inside the stopped-sum bracket") {
    const WalkSummary s = walk_summary(0.5, 1.25, 0, 40000);
    const double se = s.mean_s.std_error;
    CHECK(s.mean_s.value >= -0.5 - 1.25 - 3.0 * se);
    CHECK(s.mean_s.value <= -(1.0 + 1.25) / 2.0 + 3.0 * se);
    CHECK(s.mean_n.value - 1.0 <= (0.5 + 1.25) / (1.25 * 0.5 - 0.5) + 3.0 * s.mean_n.std_error);
    CHECK_FALSE(s.warning);
}

TEST_CASE("Wald residual stays within three propagated standard errors") {
    const WalkSummary s = walk_summary(0.5, 1.2, 5, 100000);
    CHECK(wald_residual(s, 0.5, 1.2) <= 3.0 * wald_propagated_se(s, 0.5, 1.2));
}

TEST_CASE("Monte Carlo agrees with the exact expectations") {
    for (double gamma : {1.4, 1.5, 2.5}) {
        const ExactWalkStats ex = exact_walk_stats(0.5, gamma, 2000);
        const WalkSummary s = walk_summary(0.5, gamma, 2, 40000);
        INFO("gamma=" << gamma);
        CHECK(std::abs(s.mean_n.value - ex.e_n) <= 3.0 * s.mean_n.std_error + ex.truncation_bound);
        CHECK(std::abs(s.mean_s.value - ex.e_s) <= 3.0 * s.mean_s.std_error + ex.truncation_bound);
    }
}

TEST_CASE("plus walk mirrors the minus walk at p = 1/2") {
    WalkOptions plus;
    plus.kind = WalkKind::Plus;
    plus.stream_id = 1;
    const WalkSummary m = walk_summary(0.5, 1.3, 4, 40000);
    const WalkSummary p = walk_summary(0.5, 1.3, 4, 40000, kDefaultCap, plus);
    CHECK(std::abs(m.mean_s.value - p.mean_s.value) <= 3.0 * std::hypot(m.mean_s.std_error, p.mean_s.std_error));
    CHECK(std::abs(m.mean_n.value - p.mean_n.value) <= 3.0 * std::hypot(m.mean_n.std_error, p.mean_n.std_error));
}

TEST_CASE("empirical survival stays under the Hoeffding bound") {
    WalkOptions keep;
    keep.keep_stop_counts = true;
    const WalkSummary s = walk_summary(0.5, 1.2, 8, 50000, 3000, keep);
    for (std::uint64_t n : {20u, 50u, 100u, 200u, 500u}) {
        const double emp = empirical_survival(s, n);
        const double se = std::sqrt(emp * (1.0 - emp) / 50000.0);
        CHECK(emp <= hoeffding_tail(0.5, 1.2, n) + 3.0 * se);
    }
    CHECK_THROWS_AS(empirical_survival(walk_summary(0.5, 1.2, 8, 10), 5), DomainError);
}

TEST_CASE("sweep uses an open grid and is thread independent") {
    const auto a = esn_sweep(0.5, 1.0, 3.0, 9, 0, 500, 3000, 1);
    const auto b = esn_sweep(0.5, 1.0, 3.0, 9, 0, 500, 3000, 3);
    REQUIRE(a.size() == 9);
    CHECK(a.front().gamma == doctest::Approx(1.2));
    CHECK(a.back().gamma == doctest::Approx(2.8));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].gamma == b[i].gamma);
        CHECK(a[i].summary.mean_s.value == b[i].summary.mean_s.value);
    }
    // Distinct cells draw from distinct streams.
    CHECK(a[0].summary.batch_mean_s != walk_summary(0.5, a[0].gamma, 0, 500, 3000, WalkOptions{1}).batch_mean_s);
}

TEST_CASE("mu(M) bound from the walk") {
    CHECK(mu_M_walk_bound(-1.3, 1.2) == doctest::Approx(0.2 / 1.5).epsilon(1e-15));
    CHECK(mu_M_walk_bound(-2.0, 1.2) < mu_M_walk_bound(-1.3, 1.2));
    CHECK_THROWS_AS(mu_M_walk_bound(0.1, 1.2), DomainError);
    CHECK_THROWS_AS(mu_M_walk_bound(-1.3, 1.0), DomainError);
}

TEST_CASE("return times: stays in C, exits through L") {
    const AMSystem s(0.1, 1.3, 0.5);
    const OrbitStepper st(s);
    const double c_point = 0.5;  // C = [0.4533, 0.5467]
    for (Symbol sym : {Symbol::Minus, Symbol::Plus}) {
        Scripted seq{{sym}};
        const ReturnOutcome r = sample_return_time(st, seq, HybridPoint::bulk(Side::Low, c_point), 100);
        CHECK(r.n_return == 1);
        CHECK(r.exit_side == ExitSide::Stayed);
    }
    Scripted left{{Symbol::Minus, Symbol::Plus}};
    const ReturnOutcome l = sample_return_time(st, left, HybridPoint::bulk(Side::Low, 0.1), 100);
    CHECK(l.n_return > 1);
    CHECK(l.exit_side == ExitSide::LeftViaL);
    CHECK(to_string(l.exit_side) == "left-via-L");

    Scripted stuck{{Symbol::Minus}};
    CHECK(sample_return_time(st, stuck, HybridPoint::bulk(Side::Low, 0.1), 50).censored);
    CHECK_THROWS_AS(sample_return_time(st, stuck, HybridPoint::tail(Side::Low, 0.0), 50), DomainError);
}

TEST_CASE("property: return time from x+ equals the walk stopping time") {
    for_all(2000, 54, [](Gen& g) {
        const AMSystem s(g.uniform(0.01, 0.5), g.uniform(1.05, 3.0), 0.5);
        const OrbitStepper st(s);
        // Full-map run: first symbol forced to −, then the stream.
        const std::uint64_t seed = g.raw();
        SymbolStream for_map(RngStream(seed, 0), 0.5);
        SymbolStream for_walk(RngStream(seed, 0), 0.5);
        struct Prefixed {
            SymbolStream* rest;
            bool first = true;
            Symbol next() {
                if (first) {
                    first = false;
                    return Symbol::Minus;
                }
                return rest->next();
            }
        } map_symbols{&for_map};
        const ReturnOutcome r = sample_return_time(st, map_symbols, HybridPoint::bulk(Side::Low, s.x_plus()), 3000);
        const WalkOutcome w = sample_walk(s.gamma(), for_walk, 3000);
        CHECK(r.censored == w.censored);
        if (!w.censored) CHECK(r.n_return == w.n);
    });
}

TEST_CASE("property: starts in L return no later than x+") {
    for_all(1000, 55, [](Gen& g) {
        const AMSystem s(g.uniform(0.01, 0.3), g.uniform(1.3, 2.5), 0.5);
        const OrbitStepper st(s);
        const double d = g.uniform(s.x_plus(), s.partition().l_end);
        const std::uint64_t seed = g.raw();
        struct Forced {
            SymbolStream rest;
            bool first = true;
            Symbol next() {
                if (first) {
                    first = false;
                    return Symbol::Minus;
                }
                return rest.next();
            }
        };
        Forced from_l{SymbolStream(RngStream(seed, 0), 0.5)};
        Forced from_xp{SymbolStream(RngStream(seed, 0), 0.5)};
        const ReturnOutcome a = sample_return_time(st, from_l, HybridPoint::bulk(Side::Low, d), 5000);
        const ReturnOutcome b = sample_return_time(st, from_xp, HybridPoint::bulk(Side::Low, s.x_plus()), 5000);
        if (a.censored || b.censored) return;
        CHECK(a.n_return <= b.n_return);
    });
}
