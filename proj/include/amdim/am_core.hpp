#pragma once

// Symmetric Alsedà–Misiurewicz systems: two piecewise-affine increasing
// homeomorphisms f₋, f₊ of [0,1] with f₊ = I ∘ f₋ ∘ I, I(x) = 1 − x.
//
//   f₋(x) = a·x             on [0, x₋],    1 − b·(1 − x)  on (x₋, 1]
//   f₊(x) = b·x             on [0, x₊],    1 − a·(1 − x)  on (x₊, 1]
//
// with b = a^(−γ), 0 < a < 1, γ > 1.

#include "amdim/errors.hpp"

namespace amdim {

enum class Symbol : unsigned char { Minus = 0, Plus = 1 };

constexpr Symbol opposite(Symbol s) noexcept {
    return s == Symbol::Minus ? Symbol::Plus : Symbol::Minus;
}

constexpr char to_char(Symbol s) noexcept { return s == Symbol::Minus ? '-' : '+'; }

struct AMParams {
    double a = 0.0;      // contraction slope
    double gamma = 0.0;  // b = a^(−γ)
    double b = 0.0;
    double log_a = 0.0;  // cached ln a (< 0)

    static AMParams make(double a, double gamma);
};

struct ProbVector {
    double p_minus = 0.5;
    double p_plus = 0.5;  // always 1 − p_minus
    double p = 0.5;       // max(p_minus, p_plus)
    double entropy = 0.0; // nats

    static ProbVector make(double p_minus);
};

/// Entropy of the Bernoulli vector (p, 1 − p), nats.
double bernoulli_entropy(double p);

/// Closed real interval; `lo_open`/`hi_open` mark half-open ends.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;
    bool hi_open = false;

    bool contains(double x) const noexcept {
        const bool above = lo_open ? x > lo : x >= lo;
        const bool below = hi_open ? x < hi : x <= hi;
        return above && below;
    }
    bool empty() const noexcept { return hi < lo || (hi == lo && (lo_open || hi_open)); }
};

struct IntervalPartition {
    double x_minus = 0.0;  // breakpoint of f₋
    double x_plus = 0.0;   // breakpoint of f₊, == 1 − x_minus up to rounding of x_minus
    double l_end = 0.0;    // f₋⁻¹(x₊): L = [x₊, l_end)
    double r_start = 0.0;  // f₊⁻¹(x₋): R = (r_start, x₋]
    bool lr_separated = false;

    Interval M() const noexcept { return {x_plus, x_minus, false, false}; }
    Interval L() const noexcept { return {x_plus, l_end, false, true}; }
    Interval R() const noexcept { return {r_start, x_minus, true, false}; }
    /// Only meaningful when lr_separated.
    Interval C() const noexcept { return {l_end, r_start, false, false}; }
};

enum class BranchTag : unsigned char { LeftOfBreakpoint, RightOfBreakpoint };

struct Branch {
    BranchTag tag;
    double slope;
    double offset;  // f(x) = slope·x + offset on this branch
};

enum class LRCriterion { Interval, Midpoint, Analytic };

/// A validated symmetric AM-system with its probability vector and partition.
/// Immutable after construction.
class AMSystem {
public:
    AMSystem(double a, double gamma, double p_minus);

    const AMParams& params() const noexcept { return params_; }
    const ProbVector& probs() const noexcept { return probs_; }
    const IntervalPartition& partition() const noexcept { return partition_; }

    double a() const noexcept { return params_.a; }
    double gamma() const noexcept { return params_.gamma; }
    double b() const noexcept { return params_.b; }
    double x_plus() const noexcept { return partition_.x_plus; }
    double x_minus() const noexcept { return partition_.x_minus; }

    double apply(Symbol s, double x) const;
    double apply_inverse(Symbol s, double y) const;
    double log_derivative(Symbol s, double x) const noexcept;
    Branch branch(Symbol s, double x) const noexcept;

    bool is_disjoint_type() const noexcept;
    bool lr_separated(LRCriterion criterion) const noexcept;

private:
    AMParams params_;
    ProbVector probs_;
    IntervalPartition partition_;
};

/// Breakpoints for (a, γ), accurate to a few ulps even when x₊ is tiny.
IntervalPartition make_partition(const AMParams& params);

/// LR-separation holds iff γ > 1 − ln(a² − 2a + 2)/ln a.
double lr_gamma_threshold(double a);

}  // namespace amdim
