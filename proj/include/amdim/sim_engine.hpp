#pragma once

// Orbit iteration of the step skew product (i, x) ↦ (σi, f_{i₁}(x)).
//
// Outside M = [x₊, x₋] both maps are linear through the nearby fixed
// endpoint, so a point at distance d < x₊ from its endpoint is stored by its
// log-level ℓ = log_a(d / (a·x₊)): the contracting map adds 1, the expanding
// map subtracts γ, and the point re-enters M exactly when ℓ ≤ −1. Inside M
// the point is stored as its distance to the nearer endpoint, so values
// within 2⁻⁵³ of 1 keep full relative precision.

#include "amdim/am_core.hpp"
#include "amdim/rng.hpp"

#include <cstdint>

namespace amdim {

enum class Region : unsigned char { LeftTail, Bulk, RightTail };
enum class Side : unsigned char { Low, High };  // nearer endpoint: 0 or 1

constexpr Side opposite(Side s) noexcept { return s == Side::Low ? Side::High : Side::Low; }

/// The symbol whose map contracts towards the endpoint on `side`.
constexpr Symbol toward(Side s) noexcept { return s == Side::Low ? Symbol::Minus : Symbol::Plus; }

/// Levels are sums j − γk accumulated one step at a time, so an exact tie
/// with −1 (rational γ) can land a few ulps either side. Treat those as exits.
inline constexpr double kLevelTieTolerance = 1e-8;
constexpr bool level_exits(double level) noexcept { return level <= -1.0 + kLevelTieTolerance; }

class HybridPoint {
public:
    /// Bulk point at distance `distance` ∈ [x₊, 1/2] from the endpoint on `side`.
    static HybridPoint bulk(Side side, double distance) noexcept { return {side, false, distance}; }
    /// Tail point with log-level `level` > −1.
    static HybridPoint tail(Side side, double level) noexcept { return {side, true, level}; }
    /// Classifies x ∈ (0,1). Throws DomainError at the fixed endpoints.
    static HybridPoint from_value(const AMSystem& sys, double x);

    Region region() const noexcept {
        if (!tail_) return Region::Bulk;
        return side_ == Side::Low ? Region::LeftTail : Region::RightTail;
    }
    bool in_bulk() const noexcept { return !tail_; }
    bool in_tail() const noexcept { return tail_; }
    Side side() const noexcept { return side_; }
    /// Bulk only: distance to the nearer endpoint.
    double distance() const noexcept { return coord_; }
    /// Tail only: ℓ = log_a(d / (a·x₊)).
    double level() const noexcept { return coord_; }

    /// t = log_a(d), the log-coordinate of a tail point.
    double tail_t(const AMSystem& sys) const noexcept;
    /// Distance to the nearer endpoint; may underflow to 0 deep in a tail.
    double endpoint_distance(const AMSystem& sys) const noexcept;
    /// The represented x, rounded to double.
    double value(const AMSystem& sys) const noexcept;

    friend bool operator==(const HybridPoint&, const HybridPoint&) = default;

private:
    HybridPoint(Side side, bool tail, double coord) noexcept : side_(side), tail_(tail), coord_(coord) {}

    Side side_;
    bool tail_;
    double coord_;
};

/// Precomputed constants for fast stepping; cheap to copy.
class OrbitStepper {
public:
    explicit OrbitStepper(const AMSystem& sys);

    const AMSystem& system() const noexcept { return *sys_; }
    HybridPoint step(const HybridPoint& point, Symbol symbol) const noexcept;

private:
    HybridPoint step_bulk(Side side, double d, Symbol symbol) const noexcept;
    HybridPoint step_tail(Side side, double level, Symbol symbol) const noexcept;

    const AMSystem* sys_;
    double a_;
    double b_;
    double gamma_;
    double log_a_;
    double inv_log_a_;
    double x_plus_;
    double a_x_minus_;  // a·x₋ = 1 − f₊(x₊)
};

/// One application of f_symbol.
HybridPoint step(const AMSystem& sys, const HybridPoint& point, Symbol symbol);

/// Draws the next symbol of a stream.
inline Symbol next_symbol(SymbolStream& stream) noexcept { return stream.next(); }

struct OrbitConfig {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t burn_in = 10'000;
    std::uint64_t length = 10'000'000;
};

/// Starting point of every orbit: x₀ = 1/2.
inline HybridPoint orbit_start() noexcept { return HybridPoint::bulk(Side::Low, 0.5); }

/// Iterates from x₀ = 1/2, discards `burn_in` steps, then calls
/// `obs.observe(point, symbol)` on every observer for each of `length` steps,
/// where `symbol` is the one applied next.
template <typename... Observers>
void run_orbit(const AMSystem& sys, const OrbitConfig& config, Observers&... observers) {
    if (config.length == 0) throw DomainError("orbit length after burn-in must be >= 1");
    const OrbitStepper stepper(sys);
    SymbolStream symbols(RngStream(config.seed, config.stream_id), sys.probs().p_minus);
    HybridPoint point = orbit_start();
    for (std::uint64_t i = 0; i < config.burn_in; ++i) point = stepper.step(point, symbols.next());
    for (std::uint64_t i = 0; i < config.length; ++i) {
        const Symbol s = symbols.next();
        (observers.observe(point, s), ...);
        point = stepper.step(point, s);
    }
}

}  // namespace amdim
