#include "amdim/am_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace amdim {

namespace {

std::string describe(const char* what, double value) {
    std::ostringstream os;
    os.precision(17);
    os << what << " = " << value;
    return os.str();
}

}  // namespace

AMParams AMParams::make(double a, double gamma) {
    if (!(a > 0.0 && a < 1.0)) {
        throw DomainError(describe("contraction slope a must lie in (0,1), got a", a));
    }
    if (!(gamma > 1.0) || !std::isfinite(gamma)) {
        throw DomainError(describe("exponent gamma must exceed 1, got gamma", gamma));
    }
    AMParams out;
    out.a = a;
    out.gamma = gamma;
    out.log_a = std::log(a);
    out.b = std::exp(-gamma * out.log_a);
    if (!std::isfinite(out.b)) {
        throw DomainError(describe("expansion slope a^(-gamma) overflows for gamma", gamma));
    }
    return out;
}

double bernoulli_entropy(double p) {
    const auto term = [](double q) { return q > 0.0 ? -q * std::log(q) : 0.0; };
    return term(p) + term(1.0 - p);
}

ProbVector ProbVector::make(double p_minus) {
    if (!(p_minus > 0.0 && p_minus < 1.0)) {
        throw DomainError(describe("probability p_minus must lie in (0,1), got p_minus", p_minus));
    }
    ProbVector out;
    out.p_minus = p_minus;
    out.p_plus = 1.0 - p_minus;
    out.p = std::max(out.p_minus, out.p_plus);
    out.entropy = bernoulli_entropy(out.p);
    return out;
}

IntervalPartition make_partition(const AMParams& params) {
    const double a = params.a;
    const double b = params.b;
    IntervalPartition part;
    // (1 − a)/(b − a) keeps full relative precision when x₊ is tiny; x₋ = 1 − x₊.
    part.x_plus = (1.0 - a) / (b - a);
    part.x_minus = 1.0 - part.x_plus;

    const double f_minus_at_break = a * part.x_minus;
    part.l_end = part.x_plus <= f_minus_at_break ? part.x_plus / a
                                                 : 1.0 - (1.0 - part.x_plus) / b;
    // R = I(L). Evaluating f₊⁻¹(x₋) directly would branch on x₋, which rounds
    // to 1 once x₊ < 2⁻⁵³.
    part.r_start = 1.0 - part.l_end;
    part.lr_separated = part.l_end < part.r_start;
    return part;
}

double lr_gamma_threshold(double a) {
    return 1.0 - std::log(a * a - 2.0 * a + 2.0) / std::log(a);
}

AMSystem::AMSystem(double a, double gamma, double p_minus)
    : params_(AMParams::make(a, gamma)),
      probs_(ProbVector::make(p_minus)),
      partition_(make_partition(params_)) {}

Branch AMSystem::branch(Symbol s, double x) const noexcept {
    const double a = params_.a;
    const double b = params_.b;
    if (s == Symbol::Minus) {
        if (x <= partition_.x_minus) return {BranchTag::LeftOfBreakpoint, a, 0.0};
        return {BranchTag::RightOfBreakpoint, b, 1.0 - b};
    }
    if (x <= partition_.x_plus) return {BranchTag::LeftOfBreakpoint, b, 0.0};
    return {BranchTag::RightOfBreakpoint, a, 1.0 - a};
}

double AMSystem::apply(Symbol s, double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError(describe("map argument outside [0,1]: x", x));
    const double a = params_.a;
    const double b = params_.b;
    if (s == Symbol::Minus) {
        return x <= partition_.x_minus ? a * x : 1.0 - b * (1.0 - x);
    }
    return x <= partition_.x_plus ? b * x : 1.0 - a * (1.0 - x);
}

double AMSystem::apply_inverse(Symbol s, double y) const {
    if (!(y >= 0.0 && y <= 1.0)) {
        throw DomainError(describe("inverse argument outside [0,1]: y", y));
    }
    const double a = params_.a;
    const double b = params_.b;
    if (s == Symbol::Minus) {
        const double image_of_break = a * partition_.x_minus;
        return y <= image_of_break ? y / a : 1.0 - (1.0 - y) / b;
    }
    const double image_of_break = b * partition_.x_plus;
    return y <= image_of_break ? y / b : 1.0 - (1.0 - y) / a;
}

// At the breakpoint itself the left-branch slope is returned.
double AMSystem::log_derivative(Symbol s, double x) const noexcept {
    const double log_a = params_.log_a;
    const double log_b = -params_.gamma * log_a;
    if (s == Symbol::Minus) return x <= partition_.x_minus ? log_a : log_b;
    return x <= partition_.x_plus ? log_b : log_a;
}

bool AMSystem::is_disjoint_type() const noexcept {
    return params_.a * partition_.x_minus < params_.b * partition_.x_plus;
}

bool AMSystem::lr_separated(LRCriterion criterion) const noexcept {
    switch (criterion) {
        case LRCriterion::Interval:
            return partition_.l_end < partition_.r_start;
        case LRCriterion::Midpoint:
            // 1/2 < x₋ always, so f₋(1/2) = a/2.
            return partition_.x_plus < 0.5 * params_.a;
        case LRCriterion::Analytic:
            return params_.gamma > lr_gamma_threshold(params_.a);
    }
    return false;
}

}  // namespace amdim
