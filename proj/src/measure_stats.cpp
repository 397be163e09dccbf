#include "amdim/measure_stats.hpp"

#include "amdim/param_region.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace amdim {

namespace {

// Tail depth u = 1 + level > 0 into its bucket.
void bump(std::vector<std::uint64_t>& hist, double depth, std::uint32_t resolution) {
    const double scaled = depth * static_cast<double>(resolution);
    const auto k = scaled > 0.0 ? static_cast<std::size_t>(scaled) : std::size_t{0};
    if (k >= hist.size()) hist.resize(k + 1, 0);
    ++hist[k];
}

std::size_t bin_of(double x, std::size_t bins) {
    const double scaled = x * static_cast<double>(bins);
    if (!(scaled > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(scaled), bins - 1);
}

// Cumulative view of an EmpiricalMeasure; all masses normalised by `total`.
class MeasureCdf {
public:
    MeasureCdf(const EmpiricalMeasure& m, const AMSystem& sys)
        : m_(m),
          x_plus_(sys.x_plus()),
          x_minus_(sys.x_minus()),
          log_a_(sys.params().log_a),
          log_x_plus_(std::log(sys.x_plus())),
          inv_total_(m.total > 0 ? 1.0 / static_cast<double>(m.total) : 0.0),
          prefix_(m.bins.size() + 1, 0.0),
          left_suffix_(suffix_sums(m.tail_left)),
          right_suffix_(suffix_sums(m.tail_right)) {
        for (std::size_t j = 0; j < m.bins.size(); ++j) {
            prefix_[j + 1] = prefix_[j] + static_cast<double>(m.bins[j]);
        }
    }

    double operator()(double x) const {
        if (m_.total == 0 || !(x > 0.0)) return 0.0;
        if (x >= 1.0) return 1.0;
        const double left = static_cast<double>(m_.mass_left);
        if (x < x_plus_) return tail_above(m_.tail_left, left_suffix_, (std::log(x) - log_x_plus_) / log_a_) * inv_total_;
        if (x <= x_minus_) return (left + bulk_below(x)) * inv_total_;
        const double above = tail_above(m_.tail_right, right_suffix_, (std::log1p(-x) - log_x_plus_) / log_a_);
        return (static_cast<double>(m_.total) - above) * inv_total_;
    }

private:
    // Tail mass deeper than u, linear in u within a bucket.
    double tail_above(const std::vector<std::uint64_t>& hist, const std::vector<double>& suffix, double u) const {
        const double scaled = u * static_cast<double>(m_.tail_resolution);
        if (!(scaled > 0.0)) return suffix[0];
        if (scaled >= static_cast<double>(hist.size())) return 0.0;
        const auto k = static_cast<std::size_t>(scaled);
        const double frac = static_cast<double>(k + 1) - scaled;
        return suffix[k + 1] + frac * static_cast<double>(hist[k]);
    }

    static std::vector<double> suffix_sums(const std::vector<std::uint64_t>& hist) {
        std::vector<double> out(hist.size() + 1, 0.0);
        for (std::size_t k = hist.size(); k-- > 0;) out[k] = out[k + 1] + static_cast<double>(hist[k]);
        return out;
    }

    double bulk_below(double x) const {
        const std::size_t bins = m_.bins.size();
        const std::size_t j = bin_of(x, bins);
        const double width = 1.0 / static_cast<double>(bins);
        const double lo = std::max(static_cast<double>(j) * width, x_plus_);
        const double hi = std::min(static_cast<double>(j + 1) * width, x_minus_);
        double frac = hi > lo ? (x - lo) / (hi - lo) : 1.0;
        frac = std::clamp(frac, 0.0, 1.0);
        return prefix_[j] + frac * static_cast<double>(m_.bins[j]);
    }

    const EmpiricalMeasure& m_;
    double x_plus_;
    double x_minus_;
    double log_a_;
    double log_x_plus_;
    double inv_total_;
    std::vector<double> prefix_;
    std::vector<double> left_suffix_;
    std::vector<double> right_suffix_;
};

// Hot-path version of EmpiricalMeasure::add with cached constants.
class MeasureAccumulator {
public:
    MeasureAccumulator(const AMSystem& sys, std::size_t bins)
        : sys_(sys), m_(EmpiricalMeasure::empty(sys, bins)) {}

    // Returns the bulk/L/R classification for reuse by the caller.
    void add(const HybridPoint& p, bool& is_l, bool& is_r) {
        ++m_.total;
        is_l = is_r = false;
        if (p.in_tail()) {
            if (p.side() == Side::Low) {
                ++m_.mass_left;
                bump(m_.tail_left, 1.0 + p.level(), m_.tail_resolution);
            } else {
                ++m_.mass_right;
                bump(m_.tail_right, 1.0 + p.level(), m_.tail_resolution);
            }
            return;
        }
        ++m_.mass_M;
        ++m_.bins[bin_of(p.value(sys_), m_.bins.size())];
        is_l = in_L(sys_, p);
        is_r = in_R(sys_, p);
        if (is_l) ++m_.mass_L;
        if (is_r) ++m_.mass_R;
        if (!is_l && !is_r) ++m_.mass_C;
    }

    EmpiricalMeasure take() { return std::move(m_); }

private:
    const AMSystem& sys_;
    EmpiricalMeasure m_;
};

class OrbitAnalyzer {
public:
    OrbitAnalyzer(const AMSystem& sys, std::uint64_t length, std::size_t bins)
        : sys_(sys),
          measure_(sys, bins),
          mu_M_(length),
          mu_left_(length),
          mu_right_(length),
          chi_(length) {
        const ProbVector& pr = sys.probs();
        const double log_a = sys.params().log_a;
        const double log_b = -sys.gamma() * log_a;
        chi_left_tail_ = pr.p_minus * log_a + pr.p_plus * log_b;
        chi_right_tail_ = pr.p_minus * log_b + pr.p_plus * log_a;
    }

    void observe(const HybridPoint& p, Symbol s) {
        bool is_l = false;
        bool is_r = false;
        measure_.add(p, is_l, is_r);
        const bool bulk = p.in_bulk();
        mu_M_.add(bulk ? 1.0 : 0.0);
        mu_left_.add(p.region() == Region::LeftTail ? 1.0 : 0.0);
        mu_right_.add(p.region() == Region::RightTail ? 1.0 : 0.0);
        chi_.add(pointwise_integrand(p));

        if (pending_) {
            if (expected_exit_ == bulk) ++returns_.exit_mismatches;
            pending_ = false;
        }
        if (bulk) {
            ++returns_.visits;
            if (has_prev_) {
                ++returns_.returns;
                returns_.return_time_sum += time_ - prev_visit_;
            }
            has_prev_ = true;
            prev_visit_ = time_;
            const bool exit_left = s == Symbol::Minus && is_l;
            const bool exit_right = s == Symbol::Plus && is_r;
            returns_.exits_left += exit_left ? 1 : 0;
            returns_.exits_right += exit_right ? 1 : 0;
            expected_exit_ = exit_left || exit_right;
            pending_ = true;
        }
        ++time_;
    }

    OrbitReport finish() {
        OrbitReport out;
        out.mu_M = mu_M_.finish();
        out.mu_left = mu_left_.finish();
        out.mu_right = mu_right_.finish();
        out.chi_pointwise = chi_.finish();
        out.returns = returns_;
        out.measure = measure_.take();

        const ProbVector& pr = sys_.probs();
        const double g = sys_.gamma();
        const double log_a = sys_.params().log_a;
        const auto interval_form = [&](double m, double left, double right) {
            return (m + (pr.p_minus - g * pr.p_plus) * left + (pr.p_plus - g * pr.p_minus) * right) * log_a;
        };
        const auto& bm = mu_M_.batch_means();
        const auto& bl = mu_left_.batch_means();
        const auto& br = mu_right_.batch_means();
        std::vector<double> batch_chi(bm.size());
        for (std::size_t i = 0; i < bm.size(); ++i) batch_chi[i] = interval_form(bm[i], bl[i], br[i]);
        out.chi_interval.value = lyapunov_interval_form(out.measure, sys_);
        out.chi_interval.std_error = batch_standard_error(batch_chi);
        out.chi_interval.n = out.measure.total;
        return out;
    }

private:
    double pointwise_integrand(const HybridPoint& p) const {
        if (p.region() == Region::LeftTail) return chi_left_tail_;
        if (p.region() == Region::RightTail) return chi_right_tail_;
        // A bulk point sits in M, so at x₊ itself the slope of f₊ is taken
        // from the M side. Tail exits land on x₊ exactly whenever the level
        // hits −1, which for rational γ happens with positive frequency.
        const double x = p.value(sys_);
        const ProbVector& pr = sys_.probs();
        const double plus_slope = p.side() == Side::Low && p.distance() == sys_.x_plus()
                                      ? sys_.params().log_a
                                      : sys_.log_derivative(Symbol::Plus, x);
        return pr.p_minus * sys_.log_derivative(Symbol::Minus, x) + pr.p_plus * plus_slope;
    }

    const AMSystem& sys_;
    MeasureAccumulator measure_;
    BatchMeans mu_M_;
    BatchMeans mu_left_;
    BatchMeans mu_right_;
    BatchMeans chi_;
    double chi_left_tail_ = 0.0;
    double chi_right_tail_ = 0.0;
    ReturnTimeStats returns_;
    std::uint64_t time_ = 0;
    std::uint64_t prev_visit_ = 0;
    bool has_prev_ = false;
    bool pending_ = false;
    bool expected_exit_ = false;
};

}  // namespace

EmpiricalMeasure EmpiricalMeasure::empty(const AMSystem& sys, std::size_t bin_count) {
    if (bin_count == 0) throw DomainError("histogram needs at least one bin");
    EmpiricalMeasure m;
    m.bins.assign(bin_count, 0);
    m.lr_separated = sys.partition().lr_separated;
    return m;
}

void EmpiricalMeasure::add(const AMSystem& sys, const HybridPoint& point) {
    ++total;
    if (point.in_tail()) {
        if (point.side() == Side::Low) {
            ++mass_left;
            bump(tail_left, 1.0 + point.level(), tail_resolution);
        } else {
            ++mass_right;
            bump(tail_right, 1.0 + point.level(), tail_resolution);
        }
        return;
    }
    ++mass_M;
    ++bins[bin_of(point.value(sys), bins.size())];
    const bool l = in_L(sys, point);
    const bool r = in_R(sys, point);
    if (l) ++mass_L;
    if (r) ++mass_R;
    if (!l && !r) ++mass_C;
}

void EmpiricalMeasure::merge(const EmpiricalMeasure& other) {
    if (other.bins.size() != bins.size() || other.tail_resolution != tail_resolution) {
        throw DomainError("cannot merge measures with different binning");
    }
    for (std::size_t j = 0; j < bins.size(); ++j) bins[j] += other.bins[j];
    const auto merge_hist = [](std::vector<std::uint64_t>& into, const std::vector<std::uint64_t>& from) {
        if (from.size() > into.size()) into.resize(from.size(), 0);
        for (std::size_t k = 0; k < from.size(); ++k) into[k] += from[k];
    };
    merge_hist(tail_left, other.tail_left);
    merge_hist(tail_right, other.tail_right);
    mass_left += other.mass_left;
    mass_M += other.mass_M;
    mass_right += other.mass_right;
    mass_L += other.mass_L;
    mass_C += other.mass_C;
    mass_R += other.mass_R;
    total += other.total;
}

double EmpiricalMeasure::cdf(const AMSystem& sys, double x) const { return MeasureCdf(*this, sys)(x); }

bool in_L(const AMSystem& sys, const HybridPoint& point) noexcept {
    if (!point.in_bulk()) return false;
    const double l_end = sys.partition().l_end;
    const double d = point.distance();
    if (point.side() == Side::Low) return d < l_end;
    return l_end > 0.5 && 1.0 - d < l_end;
}

// R = I(L): the mirror image of in_L, using the same l_end for exact symmetry.
bool in_R(const AMSystem& sys, const HybridPoint& point) noexcept {
    if (!point.in_bulk()) return false;
    const double l_end = sys.partition().l_end;
    const double d = point.distance();
    if (point.side() == Side::High) return d < l_end;
    return l_end > 0.5 && 1.0 - d < l_end;
}

OrbitReport analyze_orbit(const AMSystem& sys, const OrbitConfig& config, std::size_t bin_count) {
    const ProbVector& pr = sys.probs();
    const ExponentPair exps = endpoint_exponents(sys.params(), pr);
    if (!exps.positive) {
        throw PreconditionError("stationary measure estimation needs positive endpoint exponents",
                                {"exponents_positive: gamma > max(p-/p+, p+/p-)"});
    }
    OrbitAnalyzer analyzer(sys, config.length, bin_count);
    run_orbit(sys, config, analyzer);
    return analyzer.finish();
}

EmpiricalMeasure estimate_measure(const AMSystem& sys, const OrbitConfig& config, std::size_t bin_count) {
    return analyze_orbit(sys, config, bin_count).measure;
}

double stationarity_residual(const EmpiricalMeasure& measure, const AMSystem& sys) {
    const MeasureCdf F(measure, sys);
    const ProbVector& pr = sys.probs();
    const std::size_t bins = measure.bins.size();
    double worst = 0.0;
    for (std::size_t j = 0; j < bins; ++j) {
        const double lo = static_cast<double>(j) / static_cast<double>(bins);
        const double hi = j + 1 == bins ? 1.0 : static_cast<double>(j + 1) / static_cast<double>(bins);
        const double direct = F(hi) - F(lo);
        const double via_minus = F(sys.apply_inverse(Symbol::Minus, hi)) - F(sys.apply_inverse(Symbol::Minus, lo));
        const double via_plus = F(sys.apply_inverse(Symbol::Plus, hi)) - F(sys.apply_inverse(Symbol::Plus, lo));
        worst = std::max(worst, std::abs(direct - pr.p_minus * via_minus - pr.p_plus * via_plus));
    }
    return worst;
}

EstimateWithError lyapunov_exponent(const OrbitReport& report, LyapunovMethod method) {
    return method == LyapunovMethod::Pointwise ? report.chi_pointwise : report.chi_interval;
}

double lyapunov_interval_form(const EmpiricalMeasure& m, const AMSystem& sys) {
    if (m.total == 0) return 0.0;
    const ProbVector& pr = sys.probs();
    const double g = sys.gamma();
    const double n = static_cast<double>(m.total);
    const double mu_m = static_cast<double>(m.mass_M) / n;
    const double mu_left = static_cast<double>(m.mass_left) / n;
    const double mu_right = static_cast<double>(m.mass_right) / n;
    return (mu_m + (pr.p_minus - g * pr.p_plus) * mu_left + (pr.p_plus - g * pr.p_minus) * mu_right) *
           sys.params().log_a;
}

EstimateWithError dimension_bound_entropy_lyap(const ProbVector& probs, const EstimateWithError& chi) {
    if (chi.value + 3.0 * chi.std_error >= 0.0) {
        throw InconclusiveError("entropy/Lyapunov bound needs chi + 3 SE < 0");
    }
    EstimateWithError out;
    out.value = -probs.entropy / chi.value;
    out.std_error = probs.entropy * chi.std_error / (chi.value * chi.value);
    out.n = chi.n;
    return out;
}

double mu_M_lower_bound(double p, double gamma) {
    if (!(gamma * (1.0 - p) > p)) throw DomainError("mu(M) lower bound needs gamma(1-p) > p");
    return (gamma * (1.0 - p) - p) / (gamma - p * (1.0 - p));
}

double lyapunov_upper_bound(double p, double gamma) { return lyapunov_bound_coefficient(p, gamma); }

double resonant_eta(int k) {
    if (k < 2) throw DomainError("resonant dimension needs integer gamma k >= 2");
    const auto q = [k](double eta) { return std::pow(eta, k + 1) - 2.0 * eta + 1.0; };
    // q(1/2) = 2^-(k+1) > 0 and q(3/4) < 0 for every k >= 2.
    double lo = 0.5;
    double hi = 0.75;
    for (;;) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return mid;
        if (q(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

double resonant_dimension(int k, double a) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("resonant dimension needs a in (0,1)");
    return std::log(resonant_eta(k)) / std::log(a);
}

double kac_residual(const OrbitReport& report) {
    const double mu_m = report.measure.total > 0
                            ? static_cast<double>(report.measure.mass_M) / static_cast<double>(report.measure.total)
                            : 0.0;
    return std::abs(report.returns.mean_return_time() * mu_m - 1.0);
}

double kac_residual(const AMSystem& sys, std::uint64_t seed, std::uint64_t orbit_length, std::uint64_t burn_in) {
    OrbitConfig config;
    config.seed = seed;
    config.burn_in = burn_in;
    config.length = orbit_length;
    return kac_residual(analyze_orbit(sys, config));
}

}  // namespace amdim
