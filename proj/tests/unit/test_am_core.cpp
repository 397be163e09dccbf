#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "amdim/am_core.hpp"
#include "../support/property.hpp"

#include <cmath>

using namespace amdim;
using amdim::testing::for_all;
using amdim::testing::Gen;

namespace {

bool close_rel(double x, double y, double rel) { return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y)); }

// Parameters drawn from the whole domain, including very small a.
AMSystem random_system(Gen& g) {
    const double a = g.coin() ? g.uniform(0.01, 0.99) : g.log_uniform(1e-30, 0.01);
    const double gamma = g.uniform(1.001, 3.0);
    const double p = g.uniform(0.05, 0.95);
    return AMSystem(a, gamma, p);
}

}  // namespace

TEST_CASE("construction rejects parameters outside the domain") {
    CHECK_THROWS_AS(AMSystem(0.0, 1.2, 0.5), DomainError);
    CHECK_THROWS_AS(AMSystem(1.0, 1.2, 0.5), DomainError);
    CHECK_THROWS_AS(AMSystem(0.5, 1.0, 0.5), DomainError);
    CHECK_THROWS_AS(AMSystem(0.5, 0.9, 0.5), DomainError);
    CHECK_THROWS_AS(AMSystem(0.5, 1.2, 0.0), DomainError);
    CHECK_THROWS_AS(AMSystem(0.5, 1.2, 1.0), DomainError);
    CHECK_THROWS_AS(AMSystem(std::nan(""), 1.2, 0.5), DomainError);
    // b = a^-γ overflows.
    CHECK_THROWS_AS(AMSystem(1e-300, 2.0, 0.5), DomainError);
}

TEST_CASE("probability vector and entropy") {
    const ProbVector pv = ProbVector::make(0.3);
    CHECK(pv.p_plus == doctest::Approx(0.7));
    CHECK(pv.p == doctest::Approx(0.7));
    CHECK(pv.entropy == doctest::Approx(-(0.3 * std::log(0.3) + 0.7 * std::log(0.7))));
    CHECK(bernoulli_entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("breakpoints against high-precision values") {
    const AMSystem s(0.1, 1.2, 0.5);
    CHECK(close_rel(s.x_minus(), 0.94285326749088590, 1e-15));
    CHECK(close_rel(s.x_plus(), 0.05714673250911410, 1e-14));

    const AMSystem t(0.25, 1.25, 0.5);
    CHECK(close_rel(t.b(), 5.656854249492380, 1e-15));
    CHECK(close_rel(t.apply(Symbol::Minus, t.x_minus()), 0.21532179501276489, 1e-14));
    CHECK(close_rel(t.apply(Symbol::Plus, t.x_plus()), 0.78467820498723511, 1e-14));
}

TEST_CASE("L and R at a = 0.1, gamma = 1.3") {
    const AMSystem s(0.1, 1.3, 0.5);
    CHECK(close_rel(s.x_plus(), 0.045334059545380941, 1e-14));
    CHECK(close_rel(s.partition().r_start, 0.5466594045461906, 1e-14));
    CHECK(s.partition().r_start > s.x_plus());
    CHECK(s.partition().lr_separated);
    // f₋(1/2) = 0.05 is above x₊, so it stays in M (inside L).
    const double y = s.apply(Symbol::Minus, 0.5);
    CHECK(y == doctest::Approx(0.05));
    CHECK(s.partition().M().contains(y));
    CHECK(s.partition().L().contains(y));
}

TEST_CASE("tiny contraction keeps the partition usable") {
    const AMSystem s(std::ldexp(1.0, -128), 1.25, 0.5);
    CHECK(s.x_plus() > 0.0);
    CHECK(s.x_plus() < 1e-40);
    CHECK(s.partition().lr_separated);
    CHECK(s.partition().l_end == doctest::Approx(s.x_plus() / s.a()));
    CHECK(s.partition().r_start == 1.0 - s.partition().l_end);
    CHECK(s.lr_separated(LRCriterion::Midpoint));
    CHECK(s.lr_separated(LRCriterion::Analytic));
}

TEST_CASE("LR threshold and disjoint type") {
    CHECK(close_rel(lr_gamma_threshold(0.1), 1.2576785748691845, 1e-14));
    CHECK(AMSystem(0.99, 1.01, 0.5).is_disjoint_type());
    CHECK(AMSystem(0.1, 1.3, 0.5).is_disjoint_type());
}

TEST_CASE("log derivative takes the left branch at the breakpoints") {
    const AMSystem s(0.2, 1.4, 0.5);
    const double la = std::log(0.2);
    const double lb = -1.4 * la;
    CHECK(s.log_derivative(Symbol::Minus, s.x_minus()) == la);
    CHECK(s.log_derivative(Symbol::Plus, s.x_plus()) == lb);
    CHECK(s.log_derivative(Symbol::Minus, 0.999) == lb);
    CHECK(s.log_derivative(Symbol::Plus, 0.5) == la);
}

TEST_CASE("map and inverse domain errors") {
    const AMSystem s(0.2, 1.4, 0.5);
    CHECK_THROWS_AS(s.apply(Symbol::Minus, -0.1), DomainError);
    CHECK_THROWS_AS(s.apply(Symbol::Plus, 1.1), DomainError);
    CHECK_THROWS_AS(s.apply_inverse(Symbol::Plus, 2.0), DomainError);
    CHECK(s.apply(Symbol::Minus, 0.0) == 0.0);
    CHECK(s.apply(Symbol::Plus, 1.0) == 1.0);
}

TEST_CASE("property: maps are increasing homeomorphisms with f- < id < f+") {
    for_all(400, 11, [](Gen& g) {
        const AMSystem s = random_system(g);
        const double x = g.uniform(1e-6, 1.0 - 1e-6);
        const double y = std::min(1.0 - 1e-9, x + g.uniform(1e-9, 0.1));
        CHECK(s.apply(Symbol::Minus, x) < x);
        CHECK(s.apply(Symbol::Plus, x) > x);
        CHECK(s.apply(Symbol::Minus, x) <= s.apply(Symbol::Minus, y));
        CHECK(s.apply(Symbol::Plus, x) <= s.apply(Symbol::Plus, y));
    });
}

TEST_CASE("property: f+ is the mirror conjugate of f-") {
    for_all(400, 12, [](Gen& g) {
        const AMSystem s = random_system(g);
        const double x = g.unit();
        CHECK(std::abs(s.apply(Symbol::Plus, x) - (1.0 - s.apply(Symbol::Minus, 1.0 - x))) <= 4e-16 * s.b());
        CHECK(std::abs(s.x_plus() + s.x_minus() - 1.0) <= 0x1.0p-52);
    });
}

TEST_CASE("property: inverse undoes the map up to the forward slope") {
    // In raw doubles the round trip loses what the forward slope amplifies:
    // one rounding of x costs up to slope·ulp(x).
    for_all(400, 13, [](Gen& g) {
        const AMSystem s(g.uniform(0.01, 0.99), g.uniform(1.001, 3.0), g.uniform(0.05, 0.95));
        const Symbol sym = g.coin() ? Symbol::Minus : Symbol::Plus;
        const double y = g.unit();
        const double x = s.apply_inverse(sym, y);
        const double back = s.apply(sym, x);
        CHECK(std::abs(back - y) <= 1e-15 + 4.0 * s.branch(sym, x).slope * 0x1.0p-53);
    });
}

TEST_CASE("property: inverse on the contracting branch is exact for tiny a") {
    for_all(200, 17, [](Gen& g) {
        const AMSystem s(g.log_uniform(1e-30, 1e-3), g.uniform(1.001, 3.0), 0.5);
        const double y = s.a() * s.x_minus() * g.unit();
        const double x = s.apply_inverse(Symbol::Minus, y);
        CHECK(close_rel(s.apply(Symbol::Minus, x), y, 4e-16));
    });
}

TEST_CASE("property: affine pieces agree at the breakpoint") {
    for_all(300, 14, [](Gen& g) {
        const AMSystem s(g.uniform(0.01, 0.99), g.uniform(1.001, 3.0), 0.5);
        const double xm = s.x_minus();
        CHECK(std::abs(s.a() * xm - (1.0 - s.b() * (1.0 - xm))) < 1e-14 * std::max(1.0, s.b()));
        const double xp = s.x_plus();
        CHECK(std::abs(s.b() * xp - (1.0 - s.a() * (1.0 - xp))) < 1e-14 * std::max(1.0, s.b()));
        for (Symbol sym : {Symbol::Minus, Symbol::Plus}) {
            const double x = g.unit();
            const Branch br = s.branch(sym, x);
            CHECK((br.slope == s.a() || br.slope == s.b()));
            CHECK(std::abs(br.slope * x + br.offset - s.apply(sym, x)) < 1e-14 * std::max(1.0, s.b()));
        }
    });
}

TEST_CASE("property: the three LR-separation criteria agree") {
    int checked = 0;
    for_all(2000, 15, [&](Gen& g) {
        const double a = g.uniform(0.001, 0.95);
        const double gamma = g.uniform(1.0005, 1.6);
        if (std::abs(gamma - lr_gamma_threshold(a)) < 1e-9) return;
        const AMSystem s(a, gamma, 0.5);
        const bool interval = s.lr_separated(LRCriterion::Interval);
        CHECK(interval == s.lr_separated(LRCriterion::Midpoint));
        CHECK(interval == s.lr_separated(LRCriterion::Analytic));
        ++checked;
    });
    CHECK(checked > 1900);
}

TEST_CASE("property: interval predicates honour open ends") {
    for_all(200, 16, [](Gen& g) {
        const AMSystem s(g.uniform(0.01, 0.3), g.uniform(1.3, 2.0), 0.5);
        const auto& part = s.partition();
        CHECK(part.L().contains(part.x_plus));
        CHECK_FALSE(part.L().contains(part.l_end));
        CHECK(part.R().contains(part.x_minus));
        CHECK_FALSE(part.R().contains(part.r_start));
        CHECK(part.M().contains(part.x_plus));
        CHECK(part.M().contains(part.x_minus));
    });
}
