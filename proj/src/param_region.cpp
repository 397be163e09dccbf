#include "amdim/param_region.hpp"

#include "amdim/parallel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace amdim {

namespace {

// Bisection for a sign change of f on [lo, hi]; f(lo) and f(hi) must differ in sign.
template <typename F>
double bisect(F&& f, double lo, double hi, double tol) {
    const bool lo_negative = f(lo) < 0.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if ((f(mid) < 0.0) == lo_negative) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// g(γ) = (1+γ)p²(p+γ) − γ + p(1−p); the contraction inequality is g < 0.
double contraction_numerator(double p, double gamma) {
    return (1.0 + gamma) * p * p * (p + gamma) - gamma + p * (1.0 - p);
}

double contraction_denominator(double p, double gamma) { return gamma - p * (1.0 - p); }

void require_p(double p) {
    if (!(p >= 0.5 && p < 1.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "p = max(p_minus, p_plus) must lie in [1/2, 1), got " << p;
        throw DomainError(os.str());
    }
}

struct LrPeak {
    double log_a;
    double threshold;
};

// The LR threshold h(a) = 1 − ln(a² − 2a + 2)/ln a tends to 1 at both ends of
// (0,1) and has a single interior maximum.
const LrPeak& lr_peak() {
    static const LrPeak peak = [] {
        const auto h = [](double u) { return lr_gamma_threshold(std::exp(u)); };
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = -20.0;
        double hi = -1e-6;
        double x1 = hi - inv_phi * (hi - lo);
        double x2 = lo + inv_phi * (hi - lo);
        double h1 = h(x1);
        double h2 = h(x2);
        while (hi - lo > 1e-13) {
            if (h1 < h2) {
                lo = x1;
                x1 = x2;
                h1 = h2;
                x2 = lo + inv_phi * (hi - lo);
                h2 = h(x2);
            } else {
                hi = x2;
                x2 = x1;
                h2 = h1;
                x1 = hi - inv_phi * (hi - lo);
                h1 = h(x1);
            }
        }
        const double u = 0.5 * (lo + hi);
        return LrPeak{u, h(u)};
    }();
    return peak;
}

}  // namespace

ExponentPair endpoint_exponents(const AMParams& params, const ProbVector& probs) {
    ExponentPair out;
    out.lambda0 = (probs.p_minus - params.gamma * probs.p_plus) * params.log_a;
    out.lambda1 = (probs.p_plus - params.gamma * probs.p_minus) * params.log_a;
    out.positive = params.gamma > std::max(probs.p_minus / probs.p_plus,
                                           probs.p_plus / probs.p_minus);
    return out;
}

ContractionResult contraction_condition(double p, double gamma) {
    const double den = contraction_denominator(p, gamma);
    if (!(den > 0.0)) throw DomainError("contraction condition undefined: gamma <= p(1-p)");
    const double lhs = (1.0 + gamma) * p * p * (p + gamma) / den;
    return {lhs < 1.0, lhs - 1.0};
}

double lyapunov_bound_coefficient(double p, double gamma) {
    const double den = contraction_denominator(p, gamma);
    if (!(den > 0.0)) throw DomainError("Lyapunov bound undefined: gamma <= p(1-p)");
    return -contraction_numerator(p, gamma) / den;
}

std::optional<OpenInterval> gamma_interval(double p, double tol) {
    require_p(p);
    if (!(tol > 0.0)) throw DomainError("bisection tolerance must be positive");
    const auto g = [p](double gamma) { return contraction_numerator(p, gamma); };

    // g is a quadratic in γ with leading coefficient p² > 0: negative exactly
    // between its two roots, which straddle the vertex.
    const double c2 = p * p;
    const double c1 = p * p * (1.0 + p) - 1.0;
    const double vertex = -c1 / (2.0 * c2);
    if (!(vertex > 0.0) || !(g(vertex) < 0.0)) return std::nullopt;

    const double lower_root = bisect(g, 0.0, vertex, tol);  // g(0) = p³ + p(1−p) > 0
    double hi = vertex + 1.0;
    while (!(g(hi) > 0.0)) hi = vertex + 2.0 * (hi - vertex);
    const double upper_root = bisect(g, vertex, hi, tol);

    const double lo_end = std::max(lower_root, p / (1.0 - p));
    const double hi_end = std::min(upper_root, 1.5);
    if (!(lo_end < hi_end)) return std::nullopt;
    return OpenInterval{lo_end, hi_end};
}

double critical_p_polynomial(double p) {
    return ((((((p - 2.0) * p + 5.0) * p - 6.0) * p - 2.0) * p) * p) + 1.0;
}

double critical_p(double tol) {
    if (!(tol > 0.0)) throw DomainError("bisection tolerance must be positive");
    // P(0.5) = 1/64 > 0 and P(0.6) < 0. Keep halving past `tol` until the
    // residual is below 1e-12, or the bracket can no longer shrink.
    double lo = 0.5;
    double hi = 0.6;
    for (;;) {
        const double mid = 0.5 * (lo + hi);
        const double value = critical_p_polynomial(mid);
        if ((hi - lo <= tol && std::abs(value) < 1e-12) || mid <= lo || mid >= hi) return mid;
        if (value > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

double log_a_max_dim(double p, double gamma) {
    require_p(p);
    const double k = lyapunov_bound_coefficient(p, gamma);
    if (!(k > 0.0)) {
        throw DomainError("dimension threshold undefined: contraction condition fails");
    }
    return -bernoulli_entropy(p) / k;
}

double a_max_dim(double p, double gamma) { return std::exp(log_a_max_dim(p, gamma)); }

double log_a_max_lr(double gamma, double tol) {
    if (!(gamma > 1.0)) throw DomainError("LR threshold requires gamma > 1");
    if (!(tol > 0.0)) throw DomainError("bisection tolerance must be positive");
    const LrPeak& peak = lr_peak();
    if (gamma > peak.threshold) return 0.0;  // separated for every a in (0,1)

    // For u = ln a → −∞, h − 1 ≈ ln 2/|u|; pick u_lo with h(u_lo) < γ.
    double u_lo = -2.0 * std::numbers::ln2 / (gamma - 1.0) - 1.0;
    const auto f = [gamma](double u) { return lr_gamma_threshold(std::exp(u)) - gamma; };
    while (!(f(u_lo) < 0.0)) u_lo *= 2.0;
    return bisect(f, u_lo, peak.log_a, tol);
}

double a_max_lr(double gamma, double tol) { return std::exp(log_a_max_lr(gamma, tol)); }

RegionVerdict region_verdict(double p, double gamma, double tol) {
    RegionVerdict v;
    if (!(p >= 0.5 && p < 1.0)) {
        v.error = "p outside [1/2, 1)";
        return v;
    }
    if (!(gamma > 1.0) || !std::isfinite(gamma)) {
        v.error = "gamma must exceed 1";
        return v;
    }
    v.valid = true;
    v.exponents_positive = gamma > p / (1.0 - p);
    const double k = lyapunov_bound_coefficient(p, gamma);
    v.contraction_ok = k > 0.0;
    // Separation holds for every a below a_max_lr(γ) > 0 whenever γ > 1.
    v.lr_ok = true;
    v.a_max_lr = a_max_lr(gamma, tol);
    if (v.contraction_ok) v.a_max_dim = a_max_dim(p, gamma);
    v.dim_lt_one = v.exponents_positive && v.contraction_ok && v.lr_ok;
    v.gamma_interval = gamma_interval(p, tol);
    return v;
}

RegionGrid rasterize_region(double p_min, double p_max, double gamma_min, double gamma_max,
                            std::size_t nx, std::size_t ny, unsigned threads, double tol) {
    if (nx < 2 || ny < 2) throw DomainError("region grid needs at least 2 nodes per axis");
    if (!(p_min <= p_max) || !(gamma_min <= gamma_max)) {
        throw DomainError("region ranges must satisfy min <= max");
    }
    RegionGrid grid;
    grid.p_min = p_min;
    grid.p_max = p_max;
    grid.gamma_min = gamma_min;
    grid.gamma_max = gamma_max;
    grid.nx = nx;
    grid.ny = ny;
    grid.p_values.resize(nx);
    grid.gamma_values.resize(ny);
    for (std::size_t i = 0; i < nx; ++i) {
        grid.p_values[i] = p_min + (p_max - p_min) * static_cast<double>(i) / static_cast<double>(nx - 1);
    }
    for (std::size_t j = 0; j < ny; ++j) {
        grid.gamma_values[j] =
            gamma_min + (gamma_max - gamma_min) * static_cast<double>(j) / static_cast<double>(ny - 1);
    }

    std::vector<std::optional<OpenInterval>> intervals(nx);
    parallel_for(nx, threads, [&](std::size_t i) {
        const double p = grid.p_values[i];
        if (p >= 0.5 && p < 1.0) intervals[i] = gamma_interval(p, tol);
    });
    std::vector<std::optional<double>> lr_thresholds(ny);
    parallel_for(ny, threads, [&](std::size_t j) {
        const double gamma = grid.gamma_values[j];
        if (gamma > 1.0 && std::isfinite(gamma)) lr_thresholds[j] = a_max_lr(gamma, tol);
    });

    grid.cells.resize(nx * ny);
    parallel_for(ny, threads, [&](std::size_t j) {
        const double gamma = grid.gamma_values[j];
        for (std::size_t i = 0; i < nx; ++i) {
            const double p = grid.p_values[i];
            RegionVerdict& v = grid.cells[j * nx + i];
            if (!(p >= 0.5 && p < 1.0)) {
                v.error = "p outside [1/2, 1)";
                continue;
            }
            if (!lr_thresholds[j]) {
                v.error = "gamma must exceed 1";
                continue;
            }
            v.valid = true;
            v.exponents_positive = gamma > p / (1.0 - p);
            v.contraction_ok = lyapunov_bound_coefficient(p, gamma) > 0.0;
            v.lr_ok = true;
            v.a_max_lr = lr_thresholds[j];
            if (v.contraction_ok) v.a_max_dim = a_max_dim(p, gamma);
            v.dim_lt_one = v.exponents_positive && v.contraction_ok && v.lr_ok;
            v.gamma_interval = intervals[i];
        }
    });
    return grid;
}

std::vector<std::string> closed_form_failures(double p, double gamma, double a) {
    std::vector<std::string> failed;
    if (!(p >= 0.5 && p < 1.0)) failed.emplace_back("p in [1/2, 1)");
    if (!(a > 0.0 && a < 1.0)) failed.emplace_back("a in (0, 1)");
    if (!(gamma > 1.0)) failed.emplace_back("gamma > 1");
    if (!failed.empty()) return failed;

    if (!(gamma > p / (1.0 - p))) failed.emplace_back("exponents_positive: gamma > p/(1-p)");
    const double k = lyapunov_bound_coefficient(p, gamma);
    if (!(k > 0.0)) failed.emplace_back("contraction: (1+gamma)p^2(p+gamma)/(gamma-p(1-p)) < 1");
    if (!(gamma > lr_gamma_threshold(a))) {
        failed.emplace_back("lr_separation: gamma > 1 - ln(a^2-2a+2)/ln a");
    }
    if (k > 0.0 && !(std::log(a) < log_a_max_dim(p, gamma))) {
        failed.emplace_back("dimension_lt_one: a < a_max_dim(p, gamma)");
    }
    return failed;
}

double dimension_bound_formula(double p, double gamma, double a) {
    return -bernoulli_entropy(p) / (lyapunov_bound_coefficient(p, gamma) * std::log(a));
}

double dimension_bound_half(double gamma, double a) {
    return (1.0 - 4.0 * gamma) * std::numbers::ln2 / ((gamma - 1.0) * (1.5 - gamma) * std::log(a));
}

double dimension_bound_closed_form(double p, double gamma, double a) {
    auto failed = closed_form_failures(p, gamma, a);
    if (!failed.empty()) {
        std::string message = "closed-form dimension bound preconditions failed:";
        for (const auto& f : failed) message += " [" + f + "]";
        throw PreconditionError(std::move(message), std::move(failed));
    }
    return dimension_bound_formula(p, gamma, a);
}

}  // namespace amdim
