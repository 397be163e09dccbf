#pragma once

// Orbit-based estimates of the stationary measure μ and its Lyapunov
// exponent, plus the closed-form bounds they are compared against.

#include "amdim/am_core.hpp"
#include "amdim/batch_means.hpp"
#include "amdim/sim_engine.hpp"

#include <cstdint>
#include <vector>

namespace amdim {

inline constexpr std::size_t kDefaultBins = 4096;
inline constexpr std::uint32_t kTailBinsPerLevel = 1024;

/// Integer counts from one or more orbits. Bulk samples go to `bins` (a uniform
/// partition of [0,1]); tail samples go to per-side histograms over the depth
/// u = log_a(d/x₊) ∈ (0, ∞), d the distance to the endpoint, with
/// `tail_resolution` buckets per unit of u.
struct EmpiricalMeasure {
    std::vector<std::uint64_t> bins;
    std::uint64_t mass_left = 0;   // [0, x₊)
    std::uint64_t mass_M = 0;      // [x₊, x₋]
    std::uint64_t mass_right = 0;  // (x₋, 1]
    std::uint64_t mass_L = 0;
    std::uint64_t mass_C = 0;      // M \ (L ∪ R)
    std::uint64_t mass_R = 0;
    std::uint64_t total = 0;
    std::uint32_t tail_resolution = kTailBinsPerLevel;  // index k holds u ∈ [k, k+1)/resolution
    std::vector<std::uint64_t> tail_left;
    std::vector<std::uint64_t> tail_right;
    bool lr_separated = false;

    static EmpiricalMeasure empty(const AMSystem& sys, std::size_t bin_count = kDefaultBins);

    void add(const AMSystem& sys, const HybridPoint& point);
    /// Element-wise count addition; both operands must come from the same system and binning.
    void merge(const EmpiricalMeasure& other);

    /// μ̂([0, x)), using log-linear interpolation in the tails and linear
    /// interpolation inside a bulk bin.
    double cdf(const AMSystem& sys, double x) const;
    double mass(const AMSystem& sys, double lo, double hi) const { return cdf(sys, hi) - cdf(sys, lo); }
};

/// L/R membership of a bulk point, honouring the half-open ends of L and R.
bool in_L(const AMSystem& sys, const HybridPoint& point) noexcept;
bool in_R(const AMSystem& sys, const HybridPoint& point) noexcept;

struct ReturnTimeStats {
    std::uint64_t visits = 0;           // samples in M
    std::uint64_t returns = 0;          // completed returns to M
    std::uint64_t return_time_sum = 0;  // Σ n_M over completed returns
    std::uint64_t exits_left = 0;       // symbol − from L
    std::uint64_t exits_right = 0;      // symbol + from R
    std::uint64_t exit_mismatches = 0;  // observed exits that disagree with the L/R rule

    double mean_return_time() const noexcept {
        return returns > 0 ? static_cast<double>(return_time_sum) / static_cast<double>(returns) : 0.0;
    }
};

enum class LyapunovMethod { Pointwise, IntervalForm };

struct OrbitReport {
    EmpiricalMeasure measure;
    EstimateWithError mu_M;
    EstimateWithError mu_left;
    EstimateWithError mu_right;
    EstimateWithError chi_pointwise;
    EstimateWithError chi_interval;
    ReturnTimeStats returns;
};

/// One long orbit from x₀ = 1/2 feeding every estimator. Requires positive
/// endpoint exponents (PreconditionError otherwise).
OrbitReport analyze_orbit(const AMSystem& sys, const OrbitConfig& config,
                          std::size_t bin_count = kDefaultBins);

EmpiricalMeasure estimate_measure(const AMSystem& sys, const OrbitConfig& config,
                                  std::size_t bin_count = kDefaultBins);

/// max over bins A of |μ̂(A) − p₋μ̂(f₋⁻¹A) − p₊μ̂(f₊⁻¹A)|.
double stationarity_residual(const EmpiricalMeasure& measure, const AMSystem& sys);

EstimateWithError lyapunov_exponent(const OrbitReport& report, LyapunovMethod method);

/// (μ̂(M) + (p₋ − γp₊)μ̂([0,x₊)) + (p₊ − γp₋)μ̂((x₋,1]))·ln a from raw counts.
double lyapunov_interval_form(const EmpiricalMeasure& measure, const AMSystem& sys);

/// −H/χ with first-order error propagation. Throws InconclusiveError when
/// χ + 3·SE ≥ 0.
EstimateWithError dimension_bound_entropy_lyap(const ProbVector& probs, const EstimateWithError& chi);

/// (γ(1−p) − p)/(γ − p(1−p)).
double mu_M_lower_bound(double p, double gamma);

/// K with χ ≤ K·ln a: 1 − (1+γ)p²(p+γ)/(γ − p(1−p)).
double lyapunov_upper_bound(double p, double gamma);

/// Root η ∈ (1/2, 1) of η^(k+1) − 2η + 1 = 0.
double resonant_eta(int k);
/// ln η / ln a for the resonant case γ = k.
double resonant_dimension(int k, double a);

/// |mean(n_M)·μ̂(M) − 1| from a finished orbit.
double kac_residual(const OrbitReport& report);
double kac_residual(const AMSystem& sys, std::uint64_t seed, std::uint64_t orbit_length,
                    std::uint64_t burn_in = 10'000);

}  // namespace amdim
