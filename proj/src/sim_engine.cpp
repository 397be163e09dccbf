#include "amdim/sim_engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace amdim {

HybridPoint HybridPoint::from_value(const AMSystem& sys, double x) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("orbit point must lie strictly inside (0,1)");
    const Side side = x <= 0.5 ? Side::Low : Side::High;
    const double d = side == Side::Low ? x : 1.0 - x;
    if (d >= sys.x_plus()) return bulk(side, d);
    const double level = std::log(d / sys.x_plus()) / sys.params().log_a - 1.0;
    return tail(side, level);
}

double HybridPoint::endpoint_distance(const AMSystem& sys) const noexcept {
    if (!tail_) return coord_;
    return sys.x_plus() * std::exp((coord_ + 1.0) * sys.params().log_a);
}

double HybridPoint::tail_t(const AMSystem& sys) const noexcept {
    const double t_break = std::log(sys.x_plus()) / sys.params().log_a;
    return t_break + 1.0 + coord_;
}

double HybridPoint::value(const AMSystem& sys) const noexcept {
    const double d = endpoint_distance(sys);
    return side_ == Side::Low ? d : 1.0 - d;
}

OrbitStepper::OrbitStepper(const AMSystem& sys)
    : sys_(&sys),
      a_(sys.a()),
      b_(sys.b()),
      gamma_(sys.gamma()),
      log_a_(sys.params().log_a),
      inv_log_a_(1.0 / sys.params().log_a),
      x_plus_(sys.x_plus()),
      a_x_minus_(sys.a() * sys.x_minus()) {}

HybridPoint OrbitStepper::step(const HybridPoint& point, Symbol symbol) const noexcept {
    return point.in_tail() ? step_tail(point.side(), point.level(), symbol)
                           : step_bulk(point.side(), point.distance(), symbol);
}

HybridPoint OrbitStepper::step_bulk(Side side, double d, Symbol symbol) const noexcept {
    assert(d >= x_plus_ && d <= 0.5);
    if (symbol == toward(side)) {
        // Left branch of the contracting map: d ↦ a·d.
        const double next = a_ * d;
        if (next >= x_plus_) return HybridPoint::bulk(side, next);
        const double level = std::log(d / x_plus_) * inv_log_a_;
        if (level > -1.0) return HybridPoint::tail(side, level);
        return HybridPoint::bulk(side, x_plus_);
    }

    // Expanding map near this endpoint: slope b on [0, x₊], then 1 − a(1 − ·).
    if (d <= x_plus_) {
        const double next = b_ * d;
        if (next <= 0.5) return HybridPoint::bulk(side, next);
        return HybridPoint::bulk(opposite(side), a_x_minus_);  // 1 − b·x₊ = a·x₋
    }
    const double far = 1.0 - d;  // distance from the opposite endpoint, ≥ 1/2
    const double next_far = a_ * far;
    if (next_far > 0.5) return HybridPoint::bulk(side, (1.0 - a_) + a_ * d);
    if (next_far >= x_plus_) return HybridPoint::bulk(opposite(side), next_far);
    const double level = std::log(far / x_plus_) * inv_log_a_;
    if (level > -1.0) return HybridPoint::tail(opposite(side), level);
    return HybridPoint::bulk(opposite(side), x_plus_);
}

HybridPoint OrbitStepper::step_tail(Side side, double level, Symbol symbol) const noexcept {
    assert(level > -1.0);
    if (symbol == toward(side)) return HybridPoint::tail(side, level + 1.0);

    const double next_level = level - gamma_;
    if (!level_exits(next_level)) return HybridPoint::tail(side, next_level);

    // Exit through x₊: the new distance is b·x₊·a^(level+1) ≥ x₊.
    const double next = x_plus_ * std::exp((next_level + 1.0) * log_a_);
    if (next <= 0.5) return HybridPoint::bulk(side, std::max(next, x_plus_));
    // 1 − b·x₊·a^τ = (1 − a^τ) + a·x₋·a^τ with τ = level + 1.
    const double tau = level + 1.0;
    const double far = -std::expm1(tau * log_a_) + a_x_minus_ * std::exp(tau * log_a_);
    return HybridPoint::bulk(opposite(side), far);
}

HybridPoint step(const AMSystem& sys, const HybridPoint& point, Symbol symbol) {
    return OrbitStepper(sys).step(point, symbol);
}

}  // namespace amdim
