#ifndef INFODENS_CLI_HPP
#define INFODENS_CLI_HPP

// Command-line front end. run() takes argv and two streams so the test suite
// can drive it in-process. Exit codes: 0 success, 2 invalid input, 3 numerical
// failure (including a failed validation check).

#include "infodens/cca.hpp"
#include "infodens/csv.hpp"
#include "infodens/errors.hpp"
#include "infodens/fasteval.hpp"
#include "infodens/oracle.hpp"
#include "infodens/parallel.hpp"
#include "infodens/series.hpp"
#include "infodens/spectrum.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace infodens::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

// ---- input parsing ------------------------------------------------------------

inline std::vector<std::string> split(const std::string& text, char sep = ',')
{
    std::vector<std::string> parts;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, sep)) {
        parts.push_back(item);
    }
    if (!text.empty() && text.back() == sep) {
        parts.emplace_back();
    }
    return parts;
}

inline double parse_double(const std::string& s, const std::string& what)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw InputError(what + ": not a number: '" + s + "'");
    }
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
        ++pos;
    }
    if (pos != s.size() || !std::isfinite(v)) {
        throw InputError(what + ": not a finite number: '" + s + "'");
    }
    return v;
}

inline long parse_long(const std::string& s, const std::string& what)
{
    const double v = parse_double(s, what);
    if (v != std::floor(v) || std::fabs(v) > 9.0e15) {
        throw InputError(what + ": not an integer: '" + s + "'");
    }
    return static_cast<long>(v);
}

// "0.3,0.9" -> spectrum [0.9, 0.3]. An empty string is the rank-0 spectrum.
inline CanonicalSpectrum parse_rho_list(const std::string& text)
{
    std::vector<double> rho;
    if (!text.empty()) {
        for (const auto& part : split(text)) {
            rho.push_back(parse_double(part, "--rho"));
        }
    }
    return CanonicalSpectrum::from_correlations(std::move(rho));
}

inline cca::Matrix json_matrix(const nlohmann::json& j, const char* key, long rows, long cols)
{
    if (!j.contains(key)) {
        throw InputError(std::string("covariance JSON: missing key '") + key + "'");
    }
    const auto& m = j.at(key);
    if (!m.is_array() || static_cast<long>(m.size()) != rows) {
        throw InputError(std::string("covariance JSON: '") + key + "' must have " + std::to_string(rows) + " rows");
    }
    cca::Matrix out(rows, cols);
    for (long i = 0; i < rows; ++i) {
        const auto& row = m[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<long>(row.size()) != cols) {
            throw InputError(std::string("covariance JSON: '") + key + "' rows must have " + std::to_string(cols) +
                             " entries");
        }
        for (long c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                throw InputError(std::string("covariance JSON: '") + key + "' has a non-numeric entry");
            }
            out(i, c) = v.get<double>();
        }
    }
    return out;
}

// {"p": int, "q": int, "r_x": [[...]], "r_y": [[...]], "r_xy": [[...]]}; optional
// "mean_x"/"mean_y" are accepted and ignored.
inline cca::CovarianceModel parse_covariance_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("covariance JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw InputError("covariance JSON: top level must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "p" && key != "q" && key != "r_x" && key != "r_y" && key != "r_xy" && key != "mean_x" &&
            key != "mean_y") {
            throw InputError("covariance JSON: unknown key '" + key + "'");
        }
    }
    for (const char* key : {"p", "q"}) {
        if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long>() < 1) {
            throw InputError(std::string("covariance JSON: '") + key + "' must be a positive integer");
        }
    }
    const long p = j.at("p").get<long>();
    const long q = j.at("q").get<long>();
    return {json_matrix(j, "r_x", p, p), json_matrix(j, "r_y", q, q), json_matrix(j, "r_xy", p, q)};
}

inline cca::CovarianceModel read_covariance_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open covariance file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_covariance_json(ss.str());
}

// Tokens "T=1" "r=5" or positional "1" "5".
struct AwgnArgs {
    double T = 1.0;
    std::optional<long> r;
};

inline AwgnArgs parse_awgn(const std::vector<std::string>& tokens)
{
    AwgnArgs a;
    bool have_t = false;
    std::size_t positional = 0;
    for (const auto& tok : tokens) {
        const auto eq = tok.find('=');
        std::string key;
        std::string val = tok;
        if (eq != std::string::npos) {
            key = tok.substr(0, eq);
            val = tok.substr(eq + 1);
        } else {
            key = positional == 0 ? "T" : positional == 1 ? "r" : "?";
            ++positional;
        }
        if (key == "T") {
            a.T = parse_double(val, "--awgn-brownian T");
            have_t = true;
        } else if (key == "r") {
            a.r = parse_long(val, "--awgn-brownian r");
        } else {
            throw InputError("--awgn-brownian: unexpected token '" + tok + "'");
        }
    }
    if (!have_t) {
        throw InputError("--awgn-brownian needs T");
    }
    return a;
}

struct InputOptions {
    std::string rho;
    std::string cov;
    std::vector<std::string> awgn;
    std::vector<std::string> equal;
    std::vector<std::string> kms;
    std::optional<double> rank_tol;
};

struct ResolvedInput {
    CanonicalSpectrum spectrum;
    std::optional<cca::CcaResult> cca; // set when a covariance model was given
};

inline void add_input_options(CLI::App* sub, InputOptions& in)
{
    auto* grp = sub->add_option_group("input", "exactly one spectrum or covariance source");
    grp->add_option("--rho", in.rho, "comma-separated canonical correlations");
    grp->add_option("--cov", in.cov, "covariance JSON file");
    grp->add_option("--awgn-brownian", in.awgn, "continuous-time AWGN/Brownian spectrum: T=.. r=..")
        ->expected(1, 2);
    grp->add_option("--equal", in.equal, "equal correlations: RHO R")->expected(2);
    grp->add_option("--kms", in.kms, "Kac-Murdock-Szego covariance: RHO P Q")->expected(3);
    grp->require_option(1);
    sub->add_option("--rank-tol", in.rank_tol, "singular values at or below this are dropped");
}

inline ResolvedInput resolve(const InputOptions& in, std::optional<long> awgn_r = std::nullopt)
{
    ResolvedInput out;
    if (!in.cov.empty() || !in.kms.empty()) {
        cca::CovarianceModel model;
        if (!in.cov.empty()) {
            model = read_covariance_file(in.cov);
        } else {
            const double rho = parse_double(in.kms[0], "--kms RHO");
            const long p = parse_long(in.kms[1], "--kms P");
            const long q = parse_long(in.kms[2], "--kms Q");
            model = cca::kms_model(rho, p, q);
        }
        out.cca = cca::canonical_spectrum(model, in.rank_tol);
        out.spectrum = out.cca->spectrum;
    } else if (!in.awgn.empty()) {
        const auto a = parse_awgn(in.awgn);
        const auto r = awgn_r ? awgn_r : a.r;
        if (!r) {
            throw InputError("--awgn-brownian needs r");
        }
        if (*r < 1) {
            throw InputError("--awgn-brownian r must be >= 1");
        }
        out.spectrum = awgn_brownian_spectrum(a.T, static_cast<std::size_t>(*r));
    } else if (!in.equal.empty()) {
        const double rho = parse_double(in.equal[0], "--equal RHO");
        const long r = parse_long(in.equal[1], "--equal R");
        if (r < 1) {
            throw InputError("--equal R must be >= 1");
        }
        out.spectrum = equal_spectrum(rho, static_cast<std::size_t>(r));
    } else {
        out.spectrum = parse_rho_list(in.rho);
    }
    return out;
}

struct Grid {
    double lo = -3.0;
    double hi = 3.0;
    long count = 121;
};

inline Grid parse_grid(const std::string& text)
{
    const auto parts = split(text);
    if (parts.size() != 3) {
        throw InputError("--grid expects MIN,MAX,COUNT");
    }
    Grid g{parse_double(parts[0], "--grid MIN"), parse_double(parts[1], "--grid MAX"),
           parse_long(parts[2], "--grid COUNT")};
    if (g.count < 2) {
        throw InputError("--grid COUNT must be >= 2");
    }
    if (!(g.hi > g.lo)) {
        throw InputError("--grid needs MIN < MAX");
    }
    return g;
}

inline std::vector<double> grid_points(const Grid& g)
{
    std::vector<double> xs(static_cast<std::size_t>(g.count));
    for (long i = 0; i < g.count; ++i) {
        xs[static_cast<std::size_t>(i)] =
            i == g.count - 1 ? g.hi : g.lo + (g.hi - g.lo) * static_cast<double>(i) / static_cast<double>(g.count - 1);
    }
    return xs;
}

// Output stream: stdout or --out PATH.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw InputError("cannot write '" + path + "'");
            }
            os_ = file_.get();
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

inline series::Kind parse_kind(const std::string& k)
{
    if (k == "pdf") {
        return series::Kind::pdf;
    }
    if (k == "cdf") {
        return series::Kind::cdf;
    }
    throw InputError("kind must be pdf or cdf");
}

inline const char* kind_name(series::Kind k) { return k == series::Kind::pdf ? "pdf" : "cdf"; }

inline void require_density(const CanonicalSpectrum& s)
{
    if (s.rank() == 0) {
        throw InputError("rank 0: the information density is identically zero and has no density");
    }
}

// ---- commands ----------------------------------------------------------------------

inline void cmd_cca(const ResolvedInput& in, std::ostream& os)
{
    csv::Writer w(os, {"quantity", "value"});
    w.row({std::string("r"), static_cast<long long>(in.spectrum.rank())});
    w.row({std::string("mutual_information"), in.spectrum.mutual_information()});
    for (std::size_t i = 0; i < in.spectrum.rank(); ++i) {
        w.row({"rho_" + std::to_string(i + 1), in.spectrum[i]});
    }
}

struct GridOptions {
    std::string grid = "-3,3,121";
    bool absolute = false;
    double target = fasteval::kDefaultTarget;
    long max_terms = fasteval::kDefaultMaxTerms;
    std::string method = "fast";
    unsigned threads = 0;
};

// One grid point. The single-correlation pole at x = I is reported as +inf.
inline ApproxValue eval_point(series::Kind kind, const CanonicalSpectrum& s, double x,
                              const fasteval::FastEvaluator* fast, const std::vector<long>* caps)
{
    try {
        if (fast) {
            return fast->evaluate(kind, x);
        }
        return kind == series::Kind::pdf ? series::pdf_direct(s, x, *caps) : series::cdf_direct(s, x, *caps);
    } catch (const PoleError&) {
        ApproxValue v;
        v.value = std::numeric_limits<double>::infinity();
        return v;
    }
}

inline void cmd_grid(series::Kind kind, const ResolvedInput& in, const GridOptions& opt, std::ostream& os)
{
    const auto& s = in.spectrum;
    require_density(s);
    if (!(opt.target > 0.0)) {
        throw InputError("--target must be positive");
    }
    const Grid g = parse_grid(opt.grid);
    const auto pts = grid_points(g);
    const double shift = opt.absolute ? 0.0 : s.mutual_information();

    std::optional<fasteval::FastEvaluator> fast;
    std::vector<long> caps;
    if (opt.method == "fast") {
        fast.emplace(s, opt.target, opt.max_terms);
    } else if (opt.method == "direct") {
        caps = series::caps_for_target(s, opt.target, kind);
    } else {
        throw InputError("--method must be fast or direct");
    }
    std::vector<ApproxValue> vals(pts.size());
    parallel::parallel_for(pts.size(), opt.threads, [&](std::size_t i) {
        vals[i] = eval_point(kind, s, pts[i] + shift, fast ? &*fast : nullptr, &caps);
    });
    csv::Writer w(os, {"x", "value", "error_bound", "n_terms"});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        w.row({pts[i], vals[i].value, vals[i].error_bound, static_cast<long long>(vals[i].n_terms)});
    }
}

inline void cmd_moments(const ResolvedInput& in, const std::string& ms, std::ostream& os)
{
    std::vector<int> orders;
    for (const auto& part : split(ms)) {
        const long m = parse_long(part, "--m");
        if (m < 1 || m > series::kMaxMomentOrder) {
            throw InputError("--m entries must lie in [1, " + std::to_string(series::kMaxMomentOrder) + "]");
        }
        orders.push_back(static_cast<int>(m));
    }
    csv::Writer w(os, {"m", "value"});
    for (int m : orders) {
        w.row({static_cast<long long>(m), series::central_moment(in.spectrum, m)});
    }
}

inline void cmd_sample(const ResolvedInput& in, long n, std::uint64_t seed, const std::string& construction,
                       unsigned threads, std::ostream& os)
{
    if (n < 1) {
        throw InputError("--n must be >= 1");
    }
    oracle::SampleBatch batch;
    if (construction == "sum") {
        batch = oracle::sample_sum_representation(in.spectrum, static_cast<std::size_t>(n), seed, threads);
    } else if (construction == "joint") {
        batch = oracle::sample_joint_gaussian(in.spectrum, static_cast<std::size_t>(n), seed, threads);
    } else {
        throw InputError("--construction must be sum or joint");
    }
    csv::Writer w(os, {"value"});
    for (double v : batch.values) {
        w.row({v});
    }
}

struct CheckRow {
    std::string name;
    double statistic;
    double threshold;
    std::string result;
};

// Oracle suite on one spectrum. Returns true when no check failed.
inline bool cmd_validate(const ResolvedInput& in, long n, std::uint64_t seed, double target, unsigned threads,
                         std::ostream& os)
{
    const auto& s = in.spectrum;
    require_density(s);
    if (n < 10) {
        throw InputError("--n must be >= 10");
    }
    const auto size = static_cast<std::size_t>(n);
    const fasteval::FastEvaluator fe(s, target);
    std::vector<CheckRow> rows;
    auto add = [&](std::string name, double stat, double thr) {
        rows.push_back({std::move(name), stat, thr, stat <= thr ? "pass" : "fail"});
    };

    auto sum_batch = oracle::sample_sum_representation(s, size, seed, threads);
    auto joint_batch = oracle::sample_joint_gaussian(s, size, seed, threads);

    std::vector<double> sorted = sum_batch.values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> model(sorted.size());
    parallel::parallel_for(sorted.size(), threads, [&](std::size_t i) { model[i] = fe.cdf(sorted[i]).value; });
    const double nd = static_cast<double>(n);
    add("ks_sum_vs_cdf", oracle::ks_statistic_sorted(sorted, model), oracle::ks_critical(1e-3, nd));
    add("ks_sum_vs_joint", oracle::two_sample_ks(sum_batch.values, joint_batch.values),
        oracle::ks_critical(1e-3, nd, nd));

    double mean = 0.0;
    for (double v : sum_batch.values) {
        mean += v;
    }
    mean /= nd;
    double var = 0.0;
    for (double v : sum_batch.values) {
        var += (v - mean) * (v - mean);
    }
    var /= nd - 1.0;
    const double sigma2 = s.variance();
    add("mean", std::fabs(mean - s.mutual_information()), 4.0 * std::sqrt(sigma2 / nd));
    const double mu4 = series::central_moment(s, 4);
    add("variance", std::fabs(var - sigma2), 5.0 * std::sqrt((mu4 - sigma2 * sigma2) / nd));

    const double rho1 = s.largest();
    double sym = 0.0;
    double sym_thr = 0.0;
    for (double z : {0.0, 0.1, 1.0, 5.0}) {
        const auto lo = fe.cdf(s.mutual_information() - z);
        const auto hi = fe.cdf(s.mutual_information() + z);
        sym = std::max(sym, std::fabs(lo.value + hi.value - 1.0));
        sym_thr = std::max(sym_thr, lo.error_bound + hi.error_bound + 1e-14);
    }
    add("cdf_symmetry", sym, sym_thr);

    if (s.rank() >= 2) {
        double worst = 0.0;
        double thr = 0.0;
        for (int i = 0; i <= 10; ++i) {
            const double x = s.mutual_information() + rho1 * (-5.0 + i);
            const auto f = fe.pdf(x);
            const auto q = oracle::pdf_quadrature(s, x);
            worst = std::max(worst, std::fabs(f.value - q.value));
            thr = std::max(thr, f.error_bound + 2e-8);
        }
        add("pdf_vs_quadrature", worst, thr);
    } else {
        rows.push_back({"pdf_vs_quadrature", 0.0, 0.0, "skip"});
    }

    csv::Writer w(os, {"check", "statistic", "threshold", "result"});
    bool ok = true;
    for (const auto& r : rows) {
        w.row({r.name, r.statistic, r.threshold, r.result});
        ok = ok && r.result != "fail";
    }
    return ok;
}

inline void cmd_required_terms(const InputOptions& in, const std::string& r_list, const std::string& kind,
                               double target, long max_terms, std::ostream& os)
{
    std::vector<series::Kind> kinds;
    if (kind == "both") {
        kinds = {series::Kind::pdf, series::Kind::cdf};
    } else {
        kinds = {parse_kind(kind)};
    }
    std::vector<CanonicalSpectrum> spectra;
    if (!r_list.empty()) {
        if (in.awgn.empty()) {
            throw InputError("--r applies to --awgn-brownian only");
        }
        for (const auto& part : split(r_list)) {
            spectra.push_back(resolve(in, parse_long(part, "--r")).spectrum);
        }
    } else {
        spectra.push_back(resolve(in).spectrum);
    }
    csv::Writer w(os, {"r", "kind", "n"});
    for (const auto& s : spectra) {
        fasteval::require_distinct(s);
        fasteval::CoefficientTable table(s);
        for (auto k : kinds) {
            const long n = fasteval::required_terms(table, target, k, max_terms);
            w.row({static_cast<long long>(s.rank()), std::string(kind_name(k)), static_cast<long long>(n)});
        }
    }
}

struct BenchResult {
    double direct_seconds = 0.0;
    double fast_seconds = 0.0;
    long direct_terms = 0;
    long fast_terms = 0;
    double max_abs_diff = 0.0;
    bool direct_estimated = false;
};

// Times the box sum and the recurrence path over the same grid. If the box for
// the target holds more than box_budget multi-indices per point, the direct
// time is extrapolated from a smaller box at the same per-index proportions.
inline BenchResult bench(const CanonicalSpectrum& s, series::Kind kind, const std::vector<double>& xs, double target,
                         double box_budget, unsigned threads = 1)
{
    using clock = std::chrono::steady_clock;
    BenchResult res;
    auto t0 = clock::now();
    const fasteval::FastEvaluator fe(s, target);
    const auto fast_vals = fe.evaluate_grid(kind, xs, threads);
    res.fast_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    res.fast_terms = fe.terms(kind);

    auto caps = series::caps_for_target(s, target, kind);
    double box = 1.0;
    for (long c : caps) {
        box *= static_cast<double>(c + 1);
    }
    res.direct_terms = box > 9.0e18 ? std::numeric_limits<long>::max() : static_cast<long>(box);
    double scale = 1.0;
    if (box > box_budget) {
        // shrink every cap by the same factor so the box fits the budget
        const double f = std::pow(box_budget / box, 1.0 / static_cast<double>(caps.size()));
        double shrunk = 1.0;
        for (long& c : caps) {
            c = std::max<long>(0, static_cast<long>(std::floor(static_cast<double>(c + 1) * f)) - 1);
            shrunk *= static_cast<double>(c + 1);
        }
        scale = box / shrunk;
        res.direct_estimated = true;
    }
    t0 = clock::now();
    std::vector<ApproxValue> direct_vals(xs.size());
    parallel::parallel_for(xs.size(), threads, [&](std::size_t i) {
        direct_vals[i] = kind == series::Kind::pdf ? series::pdf_direct(s, xs[i], caps) : series::cdf_direct(s, xs[i], caps);
    });
    res.direct_seconds = std::chrono::duration<double>(clock::now() - t0).count() * scale;
    if (!res.direct_estimated) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            res.max_abs_diff = std::max(res.max_abs_diff, std::fabs(direct_vals[i].value - fast_vals[i].value));
        }
    } else {
        res.max_abs_diff = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

inline void cmd_bench(const ResolvedInput& in, const GridOptions& opt, const std::string& kind, double box_budget,
                      std::ostream& os)
{
    const auto& s = in.spectrum;
    fasteval::require_distinct(s);
    const Grid g = parse_grid(opt.grid);
    auto xs = grid_points(g);
    if (!opt.absolute) {
        for (double& x : xs) {
            x += s.mutual_information();
        }
    }
    const auto r = bench(s, parse_kind(kind), xs, opt.target, box_budget, opt.threads == 0 ? 1 : opt.threads);
    csv::Writer w(os, {"method", "points", "seconds", "terms", "max_abs_diff", "speedup", "estimated"});
    const auto pts = static_cast<long long>(xs.size());
    w.row({std::string("direct"), pts, r.direct_seconds, static_cast<long long>(r.direct_terms), r.max_abs_diff, 1.0,
           static_cast<long long>(r.direct_estimated)});
    w.row({std::string("fast"), pts, r.fast_seconds, static_cast<long long>(r.fast_terms), r.max_abs_diff,
           r.direct_seconds / r.fast_seconds, 0LL});
}

// ---- entry point -----------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Distribution of the information density of jointly Gaussian vectors"};
    app.name("infodens");
    app.require_subcommand(1);

    InputOptions in;
    GridOptions grid;
    std::string out_path;
    std::string m_list = "2,4";
    long n_samples = 1000;
    std::uint64_t seed = 0;
    std::string construction = "sum";
    std::string r_list;
    std::string kind = "pdf";
    double box_budget = 2e6;

    auto* c_cca = app.add_subcommand("cca", "canonical correlations and mutual information");
    auto* c_pdf = app.add_subcommand("pdf", "density on a grid");
    auto* c_cdf = app.add_subcommand("cdf", "distribution function on a grid");
    auto* c_mom = app.add_subcommand("moments", "central moments");
    auto* c_smp = app.add_subcommand("sample", "Monte-Carlo draws");
    auto* c_val = app.add_subcommand("validate", "oracle checks");
    auto* c_req = app.add_subcommand("required-terms", "series length needed for a target bound");
    auto* c_bch = app.add_subcommand("bench", "direct box sum vs recurrence timing");

    for (auto* sub : {c_cca, c_pdf, c_cdf, c_mom, c_smp, c_val, c_req, c_bch}) {
        add_input_options(sub, in);
        sub->add_option("--out", out_path, "output file (default stdout)");
    }
    for (auto* sub : {c_pdf, c_cdf, c_bch}) {
        sub->add_option("--grid", grid.grid, "MIN,MAX,COUNT (centered at I unless --absolute)");
        sub->add_flag("--absolute", grid.absolute, "grid in raw x");
        sub->add_option("--threads", grid.threads, "worker threads (0 = all cores)");
    }
    for (auto* sub : {c_pdf, c_cdf, c_val, c_req, c_bch}) {
        sub->add_option("--target", grid.target, "truncation error target");
    }
    for (auto* sub : {c_pdf, c_cdf, c_req}) {
        sub->add_option("--max-terms", grid.max_terms, "term budget");
    }
    for (auto* sub : {c_pdf, c_cdf}) {
        sub->add_option("--method", grid.method, "fast or direct");
    }
    c_mom->add_option("--m", m_list, "comma-separated moment orders");
    for (auto* sub : {c_smp, c_val}) {
        sub->add_option("--n", n_samples, "number of draws");
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--threads", grid.threads, "worker threads (0 = all cores)");
    }
    c_smp->add_option("--construction", construction, "sum or joint");
    c_req->add_option("--r", r_list, "comma-separated ranks for --awgn-brownian");
    c_req->add_option("--kind", kind, "pdf, cdf or both");
    c_bch->add_option("--kind", kind, "pdf or cdf");
    c_bch->add_option("--box-budget", box_budget, "largest box timed in full; larger boxes are extrapolated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        Sink sink(out_path, out);
        std::ostream& os = sink.stream();
        if (c_req->parsed()) {
            cmd_required_terms(in, r_list, kind, grid.target, grid.max_terms, os);
            return kExitOk;
        }
        const auto resolved = resolve(in);
        if (c_cca->parsed()) {
            cmd_cca(resolved, os);
        } else if (c_pdf->parsed()) {
            cmd_grid(series::Kind::pdf, resolved, grid, os);
        } else if (c_cdf->parsed()) {
            cmd_grid(series::Kind::cdf, resolved, grid, os);
        } else if (c_mom->parsed()) {
            cmd_moments(resolved, m_list, os);
        } else if (c_smp->parsed()) {
            cmd_sample(resolved, n_samples, seed, construction, grid.threads, os);
        } else if (c_val->parsed()) {
            if (!c_val->count("--n")) {
                n_samples = 100000;
            }
            if (!cmd_validate(resolved, n_samples, seed, grid.target, grid.threads, os)) {
                err << "infodens: validation failed\n";
                return kExitNumerical;
            }
        } else if (c_bch->parsed()) {
            if (!c_bch->count("--target")) {
                grid.target = 1e-6;
            }
            cmd_bench(resolved, grid, kind, box_budget, os);
        }
        return kExitOk;
    } catch (const NumericalFailure& e) {
        err << "infodens: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        // input, domain, degenerate-model and not-applicable errors
        err << "infodens: " << e.what() << '\n';
        return kExitInput;
    }
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"infodens"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace infodens::cli

#endif // INFODENS_CLI_HPP
