#pragma once

// Parameter inequalities behind the dim_H μ < 1 region for symmetric
// AM-systems with p = max(p₋, p₊).
//
//   exponents positive   γ > p/(1 − p)
//   contraction          (1+γ)p²(p+γ)/(γ − p(1−p)) < 1
//   LR separation        γ > 1 − ln(a² − 2a + 2)/ln a
//   dimension < 1        p ln p + (1−p) ln(1−p) > K·ln a,  K = 1 − (contraction lhs)

#include "amdim/am_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace amdim {

inline constexpr double kDefaultBisectionTol = 1e-10;

struct ExponentPair {
    double lambda0 = 0.0;  // Λ(0) = (p₋ − γp₊)·ln a
    double lambda1 = 0.0;  // Λ(1) = (p₊ − γp₋)·ln a
    bool positive = false;
};

ExponentPair endpoint_exponents(const AMParams& params, const ProbVector& probs);

struct ContractionResult {
    bool satisfied = false;
    double residual = 0.0;  // lhs − 1
};

ContractionResult contraction_condition(double p, double gamma);

/// Coefficient K of ln a in the Lyapunov upper bound χ ≤ K·ln a.
double lyapunov_bound_coefficient(double p, double gamma);

struct OpenInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// J_p: γ-values in (p/(1−p), 3/2] satisfying both exponent positivity and
/// the contraction inequality. Empty optional when no γ qualifies.
std::optional<OpenInterval> gamma_interval(double p, double tol = kDefaultBisectionTol);

/// Sextic whose smaller real root bounds the admissible p range.
double critical_p_polynomial(double p);
double critical_p(double tol = kDefaultBisectionTol);

/// Supremum of a for which the dimension bound is < 1.
double a_max_dim(double p, double gamma);
double log_a_max_dim(double p, double gamma);

/// Supremum of a such that LR separation holds on all of (0, a].
double a_max_lr(double gamma, double tol = kDefaultBisectionTol);
double log_a_max_lr(double gamma, double tol = kDefaultBisectionTol);

struct RegionVerdict {
    bool valid = false;
    bool exponents_positive = false;
    bool contraction_ok = false;
    bool lr_ok = false;
    bool dim_lt_one = false;
    std::optional<double> a_max_dim;
    std::optional<double> a_max_lr;
    std::optional<OpenInterval> gamma_interval;
    std::string error;  // set when !valid
};

/// Verdict for (p, γ) with "sufficiently small a".
RegionVerdict region_verdict(double p, double gamma, double tol = kDefaultBisectionTol);

struct RegionGrid {
    double p_min = 0.0, p_max = 0.0;
    double gamma_min = 0.0, gamma_max = 0.0;
    std::size_t nx = 0;  // p direction
    std::size_t ny = 0;  // γ direction
    std::vector<double> p_values;
    std::vector<double> gamma_values;
    std::vector<RegionVerdict> cells;  // row-major: cells[iy * nx + ix]

    const RegionVerdict& at(std::size_t ix, std::size_t iy) const { return cells[iy * nx + ix]; }
};

/// Evaluates every grid node (endpoints included). Cells are independent;
/// `threads` does not affect the result.
RegionGrid rasterize_region(double p_min, double p_max, double gamma_min, double gamma_max,
                            std::size_t nx, std::size_t ny, unsigned threads = 1,
                            double tol = kDefaultBisectionTol);

/// Names of the conditions that fail at (p, γ, a); empty when the closed-form bound applies.
std::vector<std::string> closed_form_failures(double p, double gamma, double a);

/// (p ln p + (1−p) ln(1−p)) / (K·ln a), checked.
double dimension_bound_closed_form(double p, double gamma, double a);

/// Same ratio without precondition checks.
double dimension_bound_formula(double p, double gamma, double a);

/// (1 − 4γ) ln 2 / ((γ − 1)(3/2 − γ) ln a), the p = 1/2 specialisation.
double dimension_bound_half(double gamma, double a);

}  // namespace amdim
