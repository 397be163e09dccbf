#include "amdim/cli.hpp"

#include "amdim/measure_stats.hpp"
#include "amdim/param_region.hpp"
#include "amdim/walk_stats.hpp"
#include "output.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <regex>

namespace amdim::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t parse_count(const std::string& flag, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw UsageError(flag + ": expected a count, got '" + text + "'");
    }
    if (used != text.size() || !(v >= 0.0) || v != std::floor(v) || v > 9.0e18) {
        throw UsageError(flag + ": expected a non-negative integer count, got '" + text + "'");
    }
    return static_cast<std::uint64_t>(v);
}

Json estimate_json(const EstimateWithError& e) {
    return Json{{"value", e.value}, {"std_error", e.std_error}, {"n", e.n}};
}

struct Globals {
    std::uint64_t seed = 0;
    std::string seed_source = "default";
    unsigned threads = 0;
    std::string out_dir = "amdim_out";
    std::vector<std::string> formats;

    bool wants(const std::string& f) const {
        return formats.empty() || std::find(formats.begin(), formats.end(), f) != formats.end();
    }
};

/// Everything a command records about itself; becomes manifest.json.
struct RunRecord {
    std::string subcommand;
    Json parameters = Json::object();
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
    Json checks = Json::array();
    bool failed = false;

    void check(const std::string& name, bool pass, Json detail = Json::object()) {
        Json c = {{"name", name}, {"pass", pass}};
        for (auto& [k, v] : detail.items()) c[k] = v;
        checks.push_back(std::move(c));
        if (!pass) failed = true;
    }
};

class Context {
public:
    Context(const Globals& g, RunRecord& rec, std::ostream& out) : g_(g), rec_(rec), out_(out) {}

    const Globals& globals() const { return g_; }
    RunRecord& record() { return rec_; }
    std::ostream& log() { return out_; }

    void emit_text(const std::string& name, const std::string& text) {
        write_text(fs::path(g_.out_dir) / name, text);
        rec_.outputs.push_back(name);
    }
    void emit_json(const std::string& name, const Json& doc) {
        write_json(fs::path(g_.out_dir) / name, doc);
        rec_.outputs.push_back(name);
    }

private:
    const Globals& g_;
    RunRecord& rec_;
    std::ostream& out_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
}

void require_system(double a, double gamma, double p_minus) {
    require(a > 0.0 && a < 1.0, "--a must lie in (0,1)");
    require(gamma > 1.0 && std::isfinite(gamma), "--gamma must be > 1");
    require(p_minus >= 0.0 && p_minus <= 1.0, "--p must lie in [0,1]");
}

std::optional<int> resonant_k(double gamma, double p_minus) {
    if (p_minus != 0.5 || gamma != std::floor(gamma) || gamma < 2.0 || gamma > 64.0) return std::nullopt;
    return static_cast<int>(gamma);
}

// ---------------------------------------------------------------- region

struct RegionOpts {
    double p_min = 0.5;
    double p_max = 0.51;
    double gamma_min = 1.0;
    double gamma_max = 1.6;
    std::string grid = "200x200";
};

int cmd_region(Context& ctx, const RegionOpts& o) {
    static const std::regex grid_re(R"(^([0-9]+)x([0-9]+)$)");
    std::smatch m;
    require(std::regex_match(o.grid, m, grid_re), "--grid must look like NxM, e.g. 400x400");
    const std::size_t nx = std::stoul(m[1]);
    const std::size_t ny = std::stoul(m[2]);
    require(nx >= 2 && ny >= 2 && nx * ny <= 25'000'000, "--grid needs at least 2 nodes per axis and at most 25e6 cells");
    require(o.p_min >= 0.5 && o.p_max < 1.0 && o.p_min <= o.p_max, "need 0.5 <= p-min <= p-max < 1");
    require(o.gamma_min <= o.gamma_max && std::isfinite(o.gamma_max), "need gamma-min <= gamma-max");

    auto& rec = ctx.record();
    rec.parameters = {{"p_min", o.p_min}, {"p_max", o.p_max}, {"gamma_min", o.gamma_min},
                      {"gamma_max", o.gamma_max}, {"grid", o.grid}};

    const RegionGrid grid =
        rasterize_region(o.p_min, o.p_max, o.gamma_min, o.gamma_max, nx, ny, ctx.globals().threads);
    const auto admissible = [](const RegionVerdict& v) { return v.valid && v.exponents_positive && v.contraction_ok; };

    std::size_t count = 0;
    for (const auto& c : grid.cells) count += admissible(c) ? 1 : 0;
    ctx.log() << "region: " << count << " of " << grid.cells.size() << " cells admissible\n";

    if (ctx.globals().wants("csv")) {
        CsvTable t({"p", "gamma", "exponents_positive", "contraction_ok", "lr_ok", "a_max_dim", "a_max_lr"});
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const RegionVerdict& v = grid.at(ix, iy);
                t.row({fmt17(grid.p_values[ix]), fmt17(grid.gamma_values[iy]), v.exponents_positive ? "1" : "0",
                       v.contraction_ok ? "1" : "0", v.lr_ok ? "1" : "0", v.a_max_dim ? fmt17(*v.a_max_dim) : "",
                       v.a_max_lr ? fmt17(*v.a_max_lr) : ""});
            }
        }
        ctx.emit_text("region.csv", t.str());
    }
    if (ctx.globals().wants("json")) {
        ctx.emit_json("region.json", Json{{"nx", nx},
                                          {"ny", ny},
                                          {"admissible_cells", count},
                                          {"total_cells", grid.cells.size()},
                                          {"critical_p", critical_p(1e-12)}});
    }
    if (ctx.globals().wants("svg")) {
        const double dx = nx > 1 ? (o.p_max - o.p_min) / static_cast<double>(nx - 1) : 1e-3;
        const double dy = ny > 1 ? (o.gamma_max - o.gamma_min) / static_cast<double>(ny - 1) : 1e-3;
        SvgPlot plot("Admissible (p, gamma) for small a", "p", "gamma",
                     {o.p_min - dx / 2, o.p_max + dx / 2}, {o.gamma_min - dy / 2, o.gamma_max + dy / 2});
        for (std::size_t iy = 0; iy < ny; ++iy) {
            std::size_t ix = 0;
            while (ix < nx) {
                if (!admissible(grid.at(ix, iy))) {
                    ++ix;
                    continue;
                }
                std::size_t end = ix;
                while (end + 1 < nx && admissible(grid.at(end + 1, iy))) ++end;
                plot.cell(grid.p_values[ix] - dx / 2, grid.p_values[end] + dx / 2, grid.gamma_values[iy] - dy / 2,
                          grid.gamma_values[iy] + dy / 2, "#3b6fb6");
                ix = end + 1;
            }
        }
        plot.note(std::to_string(count) + " admissible cells");
        ctx.emit_text("region.svg", plot.str());
    }
    return kExitOk;
}

// ------------------------------------------------------------ orbit based

struct OrbitOpts {
    double a = 0.1;
    double gamma = 1.3;
    double p = 0.5;
    std::string len = "1e7";
    std::string burn_in = "1e4";
    std::string bins = "4096";
};

struct ResolvedOrbit {
    OrbitConfig config;
    std::size_t bins = kDefaultBins;
};

ResolvedOrbit resolve_orbit(Context& ctx, const OrbitOpts& o) {
    require_system(o.a, o.gamma, o.p);
    ResolvedOrbit r;
    r.config.seed = ctx.globals().seed;
    r.config.length = parse_count("--len", o.len);
    r.config.burn_in = parse_count("--burn-in", o.burn_in);
    r.bins = parse_count("--bins", o.bins);
    require(r.config.length >= 1, "--len must be >= 1");
    require(r.bins >= 1 && r.bins <= (1u << 24), "--bins must lie in [1, 2^24]");
    ctx.record().parameters = {{"a", o.a},
                               {"gamma", o.gamma},
                               {"p_minus", o.p},
                               {"len", r.config.length},
                               {"burn_in", r.config.burn_in},
                               {"bins", r.bins}};
    return r;
}

Json system_json(const AMSystem& sys) {
    return Json{{"a", sys.a()},
                {"gamma", sys.gamma()},
                {"b", sys.b()},
                {"p_minus", sys.probs().p_minus},
                {"x_plus", sys.x_plus()},
                {"x_minus", sys.x_minus()},
                {"l_end", sys.partition().l_end},
                {"r_start", sys.partition().r_start},
                {"lr_separated", sys.partition().lr_separated},
                {"disjoint_type", sys.is_disjoint_type()}};
}

std::optional<OrbitReport> run_orbit_report(Context& ctx, const AMSystem& sys, const ResolvedOrbit& r, Json& doc) {
    try {
        return analyze_orbit(sys, r.config, r.bins);
    } catch (const PreconditionError& e) {
        doc["empirical"] = {{"error", e.what()}, {"failed", e.failed()}};
        ctx.record().warnings.push_back(e.what());
        return std::nullopt;
    }
}

// μ̂(M) against the lower bound, when the bound is defined and the partition is separated.
void mu_M_floor_check(RunRecord& rec, Json& doc, const AMSystem& sys, const OrbitReport& rep) {
    const double p = sys.probs().p;
    const double g = sys.gamma();
    if (!(g * (1.0 - p) > p) || !sys.partition().lr_separated) {
        doc["mu_M_lower_bound"] = nullptr;
        return;
    }
    const double bound = mu_M_lower_bound(p, g);
    doc["mu_M_lower_bound"] = bound;
    rec.check("mu_M >= lower bound - 3 SE", rep.mu_M.value >= bound - 3.0 * rep.mu_M.std_error,
              {{"mu_M", rep.mu_M.value}, {"std_error", rep.mu_M.std_error}, {"bound", bound}});
}

int cmd_dimension(Context& ctx, const OrbitOpts& o) {
    const ResolvedOrbit r = resolve_orbit(ctx, o);
    const AMSystem sys(o.a, o.gamma, o.p);
    auto& rec = ctx.record();
    const ProbVector& pr = sys.probs();
    Json doc = {{"system", system_json(sys)}, {"entropy", pr.entropy}};

    const ExponentPair ex = endpoint_exponents(sys.params(), pr);
    const auto failures = closed_form_failures(pr.p, o.gamma, o.a);
    Json closed = {{"applies", failures.empty()}, {"failed", failures}};
    closed["bound"] = failures.empty() ? Json(dimension_bound_closed_form(pr.p, o.gamma, o.a)) : Json(nullptr);
    doc["closed_form"] = closed;
    doc["verdict"] = {{"exponents_positive", ex.positive},
                      {"lambda0", ex.lambda0},
                      {"lambda1", ex.lambda1},
                      {"contraction_ok", contraction_condition(pr.p, o.gamma).satisfied},
                      {"lr_separated", sys.partition().lr_separated},
                      {"closed_form_lt_one", failures.empty()}};

    const auto k = resonant_k(o.gamma, o.p);
    if (k) {
        doc["resonant"] = {{"k", *k}, {"eta", resonant_eta(*k)}, {"dimension", resonant_dimension(*k, o.a)}};
    }

    if (const auto rep = run_orbit_report(ctx, sys, r, doc)) {
        Json emp = {{"mu_M", estimate_json(rep->mu_M)},
                    {"chi_pointwise", estimate_json(rep->chi_pointwise)},
                    {"chi_interval", estimate_json(rep->chi_interval)}};
        try {
            emp["dimension_bound"] = estimate_json(dimension_bound_entropy_lyap(pr, rep->chi_pointwise));
        } catch (const InconclusiveError& e) {
            emp["dimension_bound"] = {{"inconclusive", e.what()}};
        }
        doc["empirical"] = emp;
        mu_M_floor_check(rec, doc, sys, *rep);

        const double log_a = sys.params().log_a;
        const auto& chi = rep->chi_pointwise;
        if (doc["mu_M_lower_bound"].is_number()) {
            const double upper = lyapunov_upper_bound(pr.p, o.gamma) * log_a;
            doc["lyapunov_upper_bound"] = upper;
            rec.check("chi <= K ln a + 3 SE", chi.value <= upper + 3.0 * chi.std_error,
                      {{"chi", chi.value}, {"std_error", chi.std_error}, {"bound", upper}});
        }
        if (k) {
            rec.check("chi >= ln a - 3 SE", chi.value >= log_a - 3.0 * chi.std_error,
                      {{"chi", chi.value}, {"std_error", chi.std_error}, {"ln_a", log_a}});
            const double exact = resonant_dimension(*k, o.a);
            if (emp["dimension_bound"].contains("value")) {
                const double v = emp["dimension_bound"]["value"];
                const double se = emp["dimension_bound"]["std_error"];
                rec.check("-H/chi >= exact resonant dimension - 3 SE", v >= exact - 3.0 * se,
                          {{"bound", v}, {"std_error", se}, {"exact", exact}});
            } else {
                rec.check("-H/chi >= exact resonant dimension - 3 SE", false, {{"reason", "bound inconclusive"}});
            }
        }
    }
    doc["checks"] = rec.checks;
    if (ctx.globals().wants("json")) ctx.emit_json("dimension.json", doc);
    return rec.failed ? kExitToleranceFailure : kExitOk;
}

int cmd_kac(Context& ctx, const OrbitOpts& o, double tol) {
    const ResolvedOrbit r = resolve_orbit(ctx, o);
    require(tol > 0.0, "--tol must be positive");
    ctx.record().parameters["tol"] = tol;
    const AMSystem sys(o.a, o.gamma, o.p);
    auto& rec = ctx.record();
    Json doc = {{"system", system_json(sys)}};
    if (const auto rep = run_orbit_report(ctx, sys, r, doc)) {
        const double residual = kac_residual(*rep);
        doc["mean_return_time"] = rep->returns.mean_return_time();
        doc["visits"] = rep->returns.visits;
        doc["mu_M"] = estimate_json(rep->mu_M);
        doc["kac_residual"] = residual;
        doc["exit_mismatches"] = rep->returns.exit_mismatches;
        rec.check("kac residual < tol", residual < tol, {{"residual", residual}, {"tol", tol}});
        rec.check("one-step exits follow the L/R rule", rep->returns.exit_mismatches == 0);
        mu_M_floor_check(rec, doc, sys, *rep);
    } else {
        rec.failed = true;
    }
    doc["checks"] = rec.checks;
    if (ctx.globals().wants("json")) ctx.emit_json("kac.json", doc);
    return rec.failed ? kExitToleranceFailure : kExitOk;
}

int cmd_measure(Context& ctx, const OrbitOpts& o, double tol) {
    const ResolvedOrbit r = resolve_orbit(ctx, o);
    require(tol > 0.0, "--tol must be positive");
    ctx.record().parameters["tol"] = tol;
    const AMSystem sys(o.a, o.gamma, o.p);
    auto& rec = ctx.record();
    Json doc = {{"system", system_json(sys)}};
    const auto rep = run_orbit_report(ctx, sys, r, doc);
    if (!rep) {
        rec.failed = true;
        if (ctx.globals().wants("json")) ctx.emit_json("measure.json", doc);
        return kExitToleranceFailure;
    }
    const EmpiricalMeasure& m = rep->measure;
    const double n = static_cast<double>(m.total);
    const double residual = stationarity_residual(m, sys);
    doc["masses"] = {{"left_tail", m.mass_left / n}, {"M", m.mass_M / n},    {"right_tail", m.mass_right / n},
                     {"L", m.mass_L / n},            {"C", m.mass_C / n},    {"R", m.mass_R / n}};
    doc["mu_M"] = estimate_json(rep->mu_M);
    doc["stationarity_residual"] = residual;
    rec.check("stationarity residual <= tol", residual <= tol, {{"residual", residual}, {"tol", tol}});
    mu_M_floor_check(rec, doc, sys, *rep);
    doc["checks"] = rec.checks;

    const std::size_t bins = m.bins.size();
    if (ctx.globals().wants("csv")) {
        CsvTable t({"x_lo", "x_hi", "mass"});
        for (std::size_t j = 0; j < bins; ++j) {
            const double lo = static_cast<double>(j) / static_cast<double>(bins);
            const double hi = j + 1 == bins ? 1.0 : static_cast<double>(j + 1) / static_cast<double>(bins);
            t.row({fmt17(lo), fmt17(hi), fmt17(m.mass(sys, lo, hi))});
        }
        ctx.emit_text("measure.csv", t.str());
    }
    if (ctx.globals().wants("json")) ctx.emit_json("measure.json", doc);
    if (ctx.globals().wants("svg")) {
        SvgPlot plot("Empirical distribution function of the stationary measure", "x", "mu([0,x))", {0, 1}, {0, 1});
        std::vector<std::pair<double, double>> pts;
        const std::size_t samples = std::min<std::size_t>(bins, 1024);
        for (std::size_t j = 0; j <= samples; ++j) {
            const double x = static_cast<double>(j) / static_cast<double>(samples);
            pts.emplace_back(x, m.cdf(sys, x));
        }
        plot.polyline(pts, "#3b6fb6");
        ctx.emit_text("measure.svg", plot.str());
    }
    return rec.failed ? kExitToleranceFailure : kExitOk;
}

// ------------------------------------------------------------ walk based

struct WalkOpts {
    double gamma = 1.2;
    double p = 0.5;
    std::string trials = "1e5";
    std::string cap = "3000";
};

int cmd_wald(Context& ctx, const WalkOpts& o) {
    require(o.gamma > 1.0 && std::isfinite(o.gamma), "--gamma must be > 1");
    require(o.p >= 0.0 && o.p <= 1.0, "--p must lie in [0,1]");
    const std::uint64_t trials = parse_count("--trials", o.trials);
    const std::uint64_t cap = parse_count("--cap", o.cap);
    require(trials >= 1, "--trials must be >= 1");
    require(cap >= 2, "--cap must be >= 2");
    auto& rec = ctx.record();
    rec.parameters = {{"gamma", o.gamma}, {"p_minus", o.p}, {"trials", trials}, {"cap", cap}};

    WalkOptions wo;
    wo.threads = ctx.globals().threads;
    wo.keep_stop_counts = true;
    const WalkSummary s = walk_summary(o.p, o.gamma, ctx.globals().seed, trials, cap, wo);
    const double residual = wald_residual(s, o.p, o.gamma);
    const double se = wald_propagated_se(s, o.p, o.gamma);
    if (s.warning) rec.warnings.push_back("censored fraction " + fmt17(s.censored_fraction) + " exceeds 1e-3");

    Json doc = {{"mean_n", estimate_json(s.mean_n)},
                {"mean_s", estimate_json(s.mean_s)},
                {"censored_fraction", s.censored_fraction},
                {"drift", walk_drift(o.p, o.gamma)},
                {"wald_residual", residual},
                {"propagated_se", se}};
    rec.check("wald residual <= 3 SE", residual <= 3.0 * se, {{"residual", residual}, {"std_error", se}});
    rec.check("censored fraction < 1e-3", s.censored_fraction < kCensorWarning,
              {{"censored_fraction", s.censored_fraction}});

    CsvTable tail({"n", "empirical_survival", "binomial_se", "hoeffding_bound"});
    Json tail_json = Json::array();
    bool tail_ok = true;
    for (std::uint64_t n : {5u, 10u, 20u, 50u, 100u, 200u, 500u, 1000u, 2000u}) {
        if (n + 1 >= cap) break;
        const double emp = empirical_survival(s, n);
        const double bse = std::sqrt(emp * (1.0 - emp) / static_cast<double>(s.trials));
        const double bound = hoeffding_tail(o.p, o.gamma, n);
        tail_ok = tail_ok && emp <= bound + 3.0 * bse;
        tail.row({std::to_string(n), fmt17(emp), fmt17(bse), fmt17(bound)});
        tail_json.push_back({{"n", n}, {"empirical", emp}, {"binomial_se", bse}, {"hoeffding", bound}});
    }
    doc["survival"] = tail_json;
    rec.check("empirical P(N > n+1) <= Hoeffding bound + 3 SE", tail_ok);
    doc["checks"] = rec.checks;
    if (ctx.globals().wants("csv")) ctx.emit_text("wald.csv", tail.str());
    if (ctx.globals().wants("json")) ctx.emit_json("wald.json", doc);
    return rec.failed ? kExitToleranceFailure : kExitOk;
}

struct WalkExactOpts {
    double gamma = 1.25;
    double p = 0.5;
    std::string depth = "400";
    std::string trials = "4e4";
    std::string cap = "3000";
    double trunc_tol = 1e-10;
};

int cmd_walk_exact(Context& ctx, const WalkExactOpts& o) {
    require(o.gamma > 1.0 && std::isfinite(o.gamma), "--gamma must be > 1");
    require(o.p >= 0.0 && o.p < 1.0, "--p must lie in [0,1)");
    require(walk_drift(o.p, o.gamma) < 0.0, "the minus walk needs negative drift: gamma > p/(1-p)");
    const std::uint64_t depth = parse_count("--depth", o.depth);
    const std::uint64_t trials = parse_count("--trials", o.trials);
    const std::uint64_t cap = parse_count("--cap", o.cap);
    require(depth >= 2 && depth <= 200'000, "--depth must lie in [2, 200000]");
    require(cap >= 2, "--cap must be >= 2");
    auto& rec = ctx.record();
    rec.parameters = {{"gamma", o.gamma}, {"p_minus", o.p},  {"depth", depth},
                      {"trials", trials}, {"cap", cap},      {"trunc_tol", o.trunc_tol}};

    const ExactWalkStats ex = exact_walk_stats(o.p, o.gamma, depth);
    const double drift = walk_drift(o.p, o.gamma);
    Json doc = {{"e_n", ex.e_n},
                {"e_s", ex.e_s},
                {"truncation_bound", ex.truncation_bound},
                {"alive_mass", ex.alive_mass},
                {"wald_gap", std::abs(ex.e_s - drift * (ex.e_n - 1.0))}};
    if (o.p > 0.0) doc["e_n_upper_bound"] = 1.0 + (o.p + o.gamma) / (o.gamma * (1.0 - o.p) - o.p);
    rec.check("truncation bound < tol", ex.truncation_bound < o.trunc_tol,
              {{"truncation_bound", ex.truncation_bound}, {"tol", o.trunc_tol}});

    if (trials > 0) {
        WalkOptions wo;
        wo.threads = ctx.globals().threads;
        const WalkSummary s = walk_summary(o.p, o.gamma, ctx.globals().seed, trials, cap, wo);
        const double dn = std::abs(s.mean_n.value - ex.e_n);
        const double ds = std::abs(s.mean_s.value - ex.e_s);
        doc["monte_carlo"] = {{"mean_n", estimate_json(s.mean_n)},
                              {"mean_s", estimate_json(s.mean_s)},
                              {"censored_fraction", s.censored_fraction}};
        rec.check("|mean_n - e_n| <= 3 SE + truncation", dn <= 3.0 * s.mean_n.std_error + ex.truncation_bound,
                  {{"difference", dn}, {"std_error", s.mean_n.std_error}});
        rec.check("|mean_s - e_s| <= 3 SE + truncation", ds <= 3.0 * s.mean_s.std_error + ex.truncation_bound,
                  {{"difference", ds}, {"std_error", s.mean_s.std_error}});
    }
    doc["checks"] = rec.checks;
    if (ctx.globals().wants("json")) ctx.emit_json("walk-exact.json", doc);
    return rec.failed ? kExitToleranceFailure : kExitOk;
}

struct EsnOpts {
    double p = 0.5;
    double gamma_min = 1.0;
    double gamma_max = 3.0;
    std::string points = "50";
    std::string trials = "2000";
    std::string cap = "3000";
    bool full = false;
};

int cmd_esn_sweep(Context& ctx, const EsnOpts& o) {
    require(o.p > 0.0 && o.p < 1.0, "--p must lie in (0,1)");
    require(o.gamma_min < o.gamma_max && std::isfinite(o.gamma_max), "need gamma-min < gamma-max");
    std::uint64_t points = parse_count("--points", o.points);
    std::uint64_t trials = parse_count("--trials", o.trials);
    std::uint64_t cap = parse_count("--cap", o.cap);
    if (o.full) {
        points = 4000;
        trials = kDefaultTrials;
        cap = kDefaultCap;
    }
    require(points >= 1 && trials >= 1 && cap >= 2, "--points, --trials >= 1 and --cap >= 2 required");
    auto& rec = ctx.record();
    rec.parameters = {{"p_minus", o.p}, {"gamma_min", o.gamma_min}, {"gamma_max", o.gamma_max},
                      {"points", points}, {"trials", trials},      {"cap", cap}};

    const auto rows = esn_sweep(o.p, o.gamma_min, o.gamma_max, points, ctx.globals().seed, trials, cap,
                                ctx.globals().threads);
    for (const auto& r : rows) {
        if (r.summary.warning) {
            rec.warnings.push_back("gamma=" + fmt17(r.gamma) + ": censored fraction " +
                                   fmt17(r.summary.censored_fraction));
        }
    }

    Json doc = Json::object();
    if (o.p == 0.5) {
        bool above_minus_two = true;
        bool bracket = true;
        std::size_t tested = 0;
        for (const auto& r : rows) {
            if (!(r.gamma > 1.0 && r.gamma < 1.5)) continue;
            ++tested;
            const auto& e = r.summary.mean_s;
            above_minus_two = above_minus_two && e.value > -2.0 - 3.0 * e.std_error;
            bracket = bracket && e.value >= -0.5 - r.gamma - 3.0 * e.std_error &&
                      e.value <= -(1.0 + r.gamma) / 2.0 + 3.0 * e.std_error;
        }
        if (tested > 0) {
            rec.check("mean_s > -2 - 3 SE on (1, 1.5)", above_minus_two, {{"points", tested}});
            rec.check("-1/2 - gamma <= mean_s <= -(1+gamma)/2 within 3 SE on (1, 1.5)", bracket,
                      {{"points", tested}});
        }
        const ExactWalkStats at3 = exact_walk_stats(0.5, 3.0, kDefaultDepth);
        doc["exact_e_s_at_gamma_3"] = at3.e_s;
        rec.check("exact e_s <= -2 at gamma = 3", at3.e_s <= -2.0, {{"e_s", at3.e_s}});
    }

    if (ctx.globals().wants("csv")) {
        CsvTable t({"gamma", "mean_s", "se_s", "mean_n", "se_n", "censored_fraction"});
        for (const auto& r : rows) {
            const auto& s = r.summary;
            t.row({fmt17(r.gamma), fmt17(s.mean_s.value), fmt17(s.mean_s.std_error), fmt17(s.mean_n.value),
                   fmt17(s.mean_n.std_error), fmt17(s.censored_fraction)});
        }
        ctx.emit_text("esn.csv", t.str());
    }
    if (ctx.globals().wants("json")) {
        Json arr = Json::array();
        for (const auto& r : rows) {
            arr.push_back({{"gamma", r.gamma},
                           {"mean_s", estimate_json(r.summary.mean_s)},
                           {"mean_n", estimate_json(r.summary.mean_n)},
                           {"censored_fraction", r.summary.censored_fraction}});
        }
        doc["rows"] = arr;
        doc["checks"] = rec.checks;
        ctx.emit_json("esn.json", doc);
    }
    if (ctx.globals().wants("svg")) {
        double lo = -2.5;
        double hi = -1.0;
        std::vector<std::pair<double, double>> pts;
        std::vector<double> bars;
        for (const auto& r : rows) {
            pts.emplace_back(r.gamma, r.summary.mean_s.value);
            bars.push_back(3.0 * r.summary.mean_s.std_error);
            if (std::isfinite(r.summary.mean_s.value)) {
                lo = std::min(lo, r.summary.mean_s.value - 0.1);
                hi = std::max(hi, r.summary.mean_s.value + 0.1);
            }
        }
        SvgPlot plot("Expected stopped sum of the minus walk", "gamma", "E S_N", {o.gamma_min, o.gamma_max},
                     {lo, hi});
        plot.hline(-2.0, "#c0392b", "-2");
        plot.error_bars(pts, bars, "#7f8c8d");
        plot.polyline(pts, "#3b6fb6");
        plot.markers(pts, "#3b6fb6");
        plot.note("bars: 3 standard errors; " + std::to_string(trials) + " trials per point");
        ctx.emit_text("esn.svg", plot.str());
    }
    return rec.failed ? kExitToleranceFailure : kExitOk;
}

Json manifest_json(const RunRecord& rec, const Globals& g, int status) {
    return Json{{"tool", "amdim"},
                {"version", kVersion},
                {"subcommand", rec.subcommand},
                {"seed", g.seed},
                {"seed_source", g.seed_source},
                {"parameters", rec.parameters},
                {"formats", g.formats.empty() ? std::vector<std::string>{"csv", "json", "svg"} : g.formats},
                {"outputs", rec.outputs},
                {"warnings", rec.warnings},
                {"checks", rec.checks},
                {"exit_status", status}};
}

void add_count(CLI::App* app, const std::string& flag, std::string& target, const std::string& help) {
    app->add_option(flag, target, help + " (integer; scientific notation like 1e7 accepted)")->capture_default_str();
}

void add_orbit_options(CLI::App* app, OrbitOpts& o) {
    app->add_option("--a", o.a, "contraction slope a in (0,1)")->capture_default_str();
    app->add_option("--gamma", o.gamma, "exponent gamma > 1, b = a^-gamma")->capture_default_str();
    app->add_option("--p", o.p, "probability p- of the symbol -")->capture_default_str();
    add_count(app, "--len", o.len, "orbit length after burn-in");
    add_count(app, "--burn-in", o.burn_in, "discarded initial steps");
    add_count(app, "--bins", o.bins, "histogram bins on [0,1]");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stationary measures of symmetric AM-systems: parameter regions, dimension bounds, "
                 "Kac and Wald diagnostics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Globals g;
    std::uint64_t seed_flag = 0;
    app.add_option("--seed", seed_flag, "64-bit seed (AMDIM_SEED overrides)")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads; 0 = all cores")->capture_default_str();
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--format", g.formats, "output format, repeatable (default: all)")
        ->check(CLI::IsMember({"csv", "json", "svg"}))
        ->take_all();

    RegionOpts region;
    auto* c_region = app.add_subcommand("region", "rasterise the admissible (p, gamma) set");
    c_region->add_option("--p-min", region.p_min)->capture_default_str();
    c_region->add_option("--p-max", region.p_max)->capture_default_str();
    c_region->add_option("--gamma-min", region.gamma_min)->capture_default_str();
    c_region->add_option("--gamma-max", region.gamma_max)->capture_default_str();
    c_region->add_option("--grid", region.grid, "NxM nodes (p x gamma)")->capture_default_str();

    OrbitOpts dim_opts;
    dim_opts.a = std::ldexp(1.0, -128);
    dim_opts.gamma = 1.25;
    auto* c_dim = app.add_subcommand("dimension", "closed-form and empirical dimension bounds");
    add_orbit_options(c_dim, dim_opts);

    OrbitOpts kac_opts;
    double kac_tol = 0.02;
    auto* c_kac = app.add_subcommand("kac", "return-time identity check on one long orbit");
    add_orbit_options(c_kac, kac_opts);
    c_kac->add_option("--tol", kac_tol, "allowed |mean(n_M) mu(M) - 1|")->capture_default_str();

    OrbitOpts measure_opts;
    double measure_tol = 0.005;
    auto* c_measure = app.add_subcommand("measure", "empirical stationary measure and stationarity residual");
    add_orbit_options(c_measure, measure_opts);
    c_measure->add_option("--tol", measure_tol, "allowed stationarity residual")->capture_default_str();

    WalkOpts wald;
    auto* c_wald = app.add_subcommand("wald", "Wald identity and Hoeffding tail for the stopping-time walk");
    c_wald->add_option("--gamma", wald.gamma)->capture_default_str();
    c_wald->add_option("--p", wald.p, "probability p- of the up-step")->capture_default_str();
    add_count(c_wald, "--trials", wald.trials, "number of walks");
    add_count(c_wald, "--cap", wald.cap, "censoring cap on N");

    WalkExactOpts wexact;
    auto* c_wexact = app.add_subcommand("walk-exact", "exact walk expectations, optionally against Monte Carlo");
    c_wexact->add_option("--gamma", wexact.gamma)->capture_default_str();
    c_wexact->add_option("--p", wexact.p)->capture_default_str();
    add_count(c_wexact, "--depth", wexact.depth, "largest stopping index propagated");
    add_count(c_wexact, "--trials", wexact.trials, "Monte Carlo walks for comparison, 0 to skip");
    add_count(c_wexact, "--cap", wexact.cap, "censoring cap for the Monte Carlo walks");
    c_wexact->add_option("--trunc-tol", wexact.trunc_tol, "required truncation bound")->capture_default_str();

    EsnOpts esn;
    auto* c_esn = app.add_subcommand("esn-sweep", "expected stopped sum over a gamma grid");
    c_esn->add_option("--p", esn.p)->capture_default_str();
    c_esn->add_option("--gamma-min", esn.gamma_min)->capture_default_str();
    c_esn->add_option("--gamma-max", esn.gamma_max)->capture_default_str();
    add_count(c_esn, "--points", esn.points, "grid points, open interval");
    add_count(c_esn, "--trials", esn.trials, "walks per point");
    add_count(c_esn, "--cap", esn.cap, "censoring cap on N");
    c_esn->add_flag("--full", esn.full, "full protocol: 4000 points, 40000 trials, cap 3000");

    std::vector<const char*> argv{"amdim"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    RunRecord rec;
    int status = kExitOk;
    try {
        g.seed = seed_flag;
        if (app.get_option("--seed")->count() > 0) g.seed_source = "flag";
        if (const char* env = std::getenv("AMDIM_SEED"); env != nullptr && *env != '\0') {
            try {
                std::size_t used = 0;
                g.seed = std::stoull(env, &used, 0);
                require(used == std::string(env).size(), "");
            } catch (const std::exception&) {
                throw UsageError(std::string("AMDIM_SEED is not a 64-bit integer: '") + env + "'");
            }
            g.seed_source = "AMDIM_SEED";
        }
        fs::create_directories(g.out_dir);
        Context ctx(g, rec, out);

        using Runner = std::function<int()>;
        const std::vector<std::pair<CLI::App*, Runner>> table = {
            {c_region, [&] { return cmd_region(ctx, region); }},
            {c_dim, [&] { return cmd_dimension(ctx, dim_opts); }},
            {c_kac, [&] { return cmd_kac(ctx, kac_opts, kac_tol); }},
            {c_measure, [&] { return cmd_measure(ctx, measure_opts, measure_tol); }},
            {c_wald, [&] { return cmd_wald(ctx, wald); }},
            {c_wexact, [&] { return cmd_walk_exact(ctx, wexact); }},
            {c_esn, [&] { return cmd_esn_sweep(ctx, esn); }},
        };
        for (const auto& [cmd, run] : table) {
            if (cmd->parsed()) {
                rec.subcommand = cmd->get_name();
                status = run();
            }
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    for (const auto& w : rec.warnings) err << "warning: " << w << '\n';
    for (const auto& c : rec.checks) {
        out << (c["pass"].get<bool>() ? "ok    " : "FAIL  ") << c["name"].get<std::string>() << '\n';
    }
    try {
        write_json(fs::path(g.out_dir) / "manifest.json", manifest_json(rec, g, status));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return status;
}

}  // namespace amdim::cli
