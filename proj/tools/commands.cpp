#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include "pvlab/campaign.hpp"
#include "pvlab/chaos.hpp"
#include "pvlab/config.hpp"
#include "pvlab/exact2d.hpp"
#include "pvlab/report.hpp"
#include "pvlab/selftest.hpp"

namespace pvlab::cli {

using nlohmann::json;

namespace {

ExperimentConfig resolve(const CommonFlags& flags)
{
    ExperimentConfig c = flags.config.empty() ? parse_config(json::object()) : load_config(flags.config);
    if (flags.seed)
        c.seed = *flags.seed;
    if (flags.threads)
        c.threads = *flags.threads;
    if (flags.out)
        c.out = *flags.out;
    if (flags.epsilon) {
        if (!(*flags.epsilon > 0.0 && *flags.epsilon < 1.0))
            throw ConfigError("--epsilon", "must lie in (0, 1)");
        c.epsilon = *flags.epsilon;
    }
    return c;
}

std::filesystem::path prepare_out(const ExperimentConfig& c)
{
    const std::filesystem::path dir(c.out);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "config.json") << to_json(c).dump(2) << '\n';
    return dir;
}

void write_json(const std::filesystem::path& path, const json& doc)
{
    std::ofstream(path) << doc.dump(2) << '\n';
}

CampaignSettings campaign_settings(const ExperimentConfig& c)
{
    CampaignSettings s;
    s.lambdas = c.lambda;
    s.replications = c.replications;
    s.estimator = c.estimator;
    s.options.n_query = c.n_query;
    s.options.scheme = c.stratified ? QueryScheme::Jittered : QueryScheme::Uniform;
    s.options.epsilon = c.epsilon;
    s.query_factor = c.n_query_factor;
    s.seed = c.seed;
    s.threads = c.threads;
    return s;
}

CampaignResult campaign(const ExperimentConfig& c)
{
    return dispatch_dim(c.body.dim, [&](auto dim) {
        constexpr int D = decltype(dim)::value;
        return run_campaign(make_body<D>(c.body), campaign_settings(c));
    });
}

ChaosOptions chaos_options(const ExperimentConfig& c, std::size_t n_query)
{
    return {n_query, QueryScheme::Jittered, c.epsilon};
}

std::string fixed(double x, int digits = 6)
{
    std::ostringstream s;
    s.precision(digits);
    s << x;
    return s.str();
}

int campaign_command(const CommonFlags& flags, const char* summary_name,
                     const std::function<void(const CampaignResult&, json&)>& report)
{
    const ExperimentConfig c = resolve(flags);
    const auto dir = prepare_out(c);
    const CampaignResult result = campaign(c);
    std::ofstream csv(dir / "replications.csv");
    write_replication_csv(csv, result);
    json summary = summary_json(result, to_json(c));
    report(result, summary);
    write_json(dir / summary_name, summary);
    return kExitOk;
}

}  // namespace

int simulate(const CommonFlags& flags)
{
    return campaign_command(flags, "summary.json", [](const CampaignResult& r, json&) {
        for (const auto& s : r.per_lambda)
            std::cout << "lambda " << s.lambda << "  mean " << fixed(s.pv.mean) << " +- " << fixed(s.mean_se, 3)
                      << "  var " << fixed(s.var_pv) << "  degenerate " << s.n_degenerate << '\n';
    });
}

int variance_sweep(const CommonFlags& flags)
{
    return campaign_command(flags, "sweep.json", [](const CampaignResult& r, json& summary) {
        const double target = -1.0 - 1.0 / r.dim;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& s : r.per_lambda) {
            std::cout << "lambda " << s.lambda << "  var " << fixed(s.var_pv) << " +- " << fixed(s.var_se, 3)
                      << "  var*lambda^(1+1/d) " << fixed(s.normalized_var) << "  C_upper " << fixed(s.upper_ratio)
                      << "  lower " << fixed(s.lower_bound, 3) << '\n';
            lo = std::min(lo, s.upper_ratio);
            hi = std::max(hi, s.upper_ratio);
        }
        json report{{"target_slope", target},
                    {"bracket_ratio", json_number(r.bracket_ratio)},
                    {"upper_constant_ratio", json_number(lo > 0 ? hi / lo : std::nan(""))}};
        if (r.fit) {
            report["slope"] = r.fit->slope;
            report["slope_in_interval"] = std::abs(r.fit->slope - target) <= 0.15;
            std::cout << "slope " << fixed(r.fit->slope) << " +- " << fixed(r.fit->slope_se, 3) << " (target "
                      << fixed(target) << "), r2 " << fixed(r.fit->r2) << '\n';
        } else {
            std::cout << "slope unavailable: needs three intensities with positive variance\n";
        }
        std::cout << "bracket max/min " << fixed(r.bracket_ratio) << '\n';
        summary["sweep"] = report;
    });
}

int clt_test(const CommonFlags& flags)
{
    return campaign_command(flags, "clt.json", [](const CampaignResult& r, json& summary) {
        json rows = json::array();
        for (const auto& s : r.per_lambda) {
            const bool ks_ok = s.ks_self && s.ks_self->p_value > 0.01;
            const bool skew_ok = std::abs(s.pv.skewness) < 0.15;
            const bool kurt_ok = std::abs(s.pv.excess_kurtosis) < 0.3;
            rows.push_back({{"lambda", s.lambda}, {"ks_pass", ks_ok}, {"skew_pass", skew_ok}, {"kurt_pass", kurt_ok}});
            std::cout << "lambda " << s.lambda;
            if (s.ks_self)
                std::cout << "  KS D " << fixed(s.ks_self->statistic, 4) << " p " << fixed(s.ks_self->p_value, 4);
            if (s.ks_raw)
                std::cout << "  raw p " << fixed(s.ks_raw->p_value, 4);
            std::cout << "  skew " << fixed(s.pv.skewness, 4) << "  kurt " << fixed(s.pv.excess_kurtosis, 4) << '\n';
        }
        summary["clt"] = rows;
    });
}

int kernel_scan(const CommonFlags& flags)
{
    const ExperimentConfig c = resolve(flags);
    const auto dir = prepare_out(c);
    return dispatch_dim(c.body.dim, [&](auto dim) {
        constexpr int D = decltype(dim)::value;
        const ConvexBody<D> body = make_body<D>(c.body);
        const double lambda = c.lambda.front();
        const KernelScanSpec& spec = c.kernel_scan;
        Point<D> from, to;
        if (spec.from) {
            from = to_point<D>(*spec.from);
            to = to_point<D>(*spec.to);
        } else {
            const Window<D> bb = bounding_box(body);
            const double pad = 0.1 * 0.5 * bb.extent()[0];
            from = 0.5 * (bb.lower + bb.upper);
            to = from;
            from[0] = bb.lower[0] - pad;
            to[0] = bb.upper[0] + pad;
        }
        const ChaosOptions opt = chaos_options(c, spec.n_query);
        std::vector<KernelEstimate<D>> est(spec.points);
        parallel_for(spec.points, c.threads, [&](std::size_t j) {
            const double t = spec.points == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(spec.points - 1);
            const Point<D> x = from + t * (to - from);
            est[j] = estimate_f1(body, lambda, x, spec.n_outer, opt, c.seed, j * spec.n_outer);
        });

        std::ofstream csv(dir / "kernel_scan.csv");
        for (int k = 0; k < D; ++k)
            csv << 'x' << k << ',';
        csv << "f1_hat,stderr,bound_43,bound_44,inside_K\n";
        std::size_t sign_ok = 0, sep_ok = 0, depth_ok = 0;
        for (const auto& e : est) {
            const KernelEnvelope env = kernel_envelope(body, lambda, e);
            const bool inside = contains(body, e.x1);
            for (int k = 0; k < D; ++k)
                csv << format_double(e.x1[k]) << ',';
            csv << format_double(e.estimate) << ',' << format_double(e.stderr_) << ','
                << format_double(env.separation_bound) << ',' << format_double(env.depth_bound) << ','
                << (inside ? 1 : 0) << '\n';
            const double slack = 4.0 * e.stderr_;
            sign_ok += (inside ? e.estimate >= -slack : e.estimate <= slack) ? 1 : 0;
            sep_ok += std::abs(e.estimate) <= env.separation_bound + slack ? 1 : 0;
            depth_ok += std::abs(e.estimate) <= env.depth_bound + slack ? 1 : 0;
        }
        json report{{"schema", "pv-lab/1"},
                    {"config", to_json(c)},
                    {"lambda", lambda},
                    {"points", spec.points},
                    {"sign_ok", sign_ok},
                    {"separation_ok", sep_ok},
                    {"depth_ok", depth_ok}};
        std::cout << "points " << spec.points << "  sign ok " << sign_ok << "  |f1| <= 1/lambda ok " << sep_ok
                  << "  depth envelope ok " << depth_ok << '\n';
        if (spec.first_chaos_eval > 0) {
            const std::uint64_t first = spec.points * spec.n_outer;
            const FirstChaosNorm norm =
                first_chaos_norm(body, lambda, spec.first_chaos_eval, spec.n_outer, opt, c.seed, first);
            const double lower = first_chaos_lower_bound(body, lambda);
            report["first_chaos"] = {{"value", norm.value},
                                     {"stderr", norm.stderr_},
                                     {"support_radius", norm.support_radius},
                                     {"n_eval", norm.n_eval},
                                     {"n_in_support", norm.n_in_support},
                                     {"lower_bound", lower}};
            std::cout << "lambda int f1^2 " << fixed(norm.value) << " +- " << fixed(norm.stderr_, 3)
                      << "  lower bound " << fixed(lower, 3) << '\n';
        }
        write_json(dir / "kernel_scan.json", report);
        return kExitOk;
    });
}

int f2_probe(const CommonFlags& flags)
{
    const ExperimentConfig c = resolve(flags);
    const auto dir = prepare_out(c);
    return dispatch_dim(c.body.dim, [&](auto dim) {
        constexpr int D = decltype(dim)::value;
        const ConvexBody<D> body = make_body<D>(c.body);
        const double lambda = c.lambda.front();
        const F2Spec& spec = c.f2;

        std::vector<std::pair<Point<D>, Point<D>>> pairs;
        for (const auto& [a, b] : spec.pairs)
            pairs.emplace_back(to_point<D>(a), to_point<D>(b));
        if (pairs.empty())
            pairs = random_probe_pairs(body, lambda, spec.random_pairs, c.seed);

        const ChaosOptions opt = chaos_options(c, spec.n_query);
        std::vector<KernelEstimate<D>> est(pairs.size());
        parallel_for(pairs.size(), c.threads, [&](std::size_t k) {
            est[k] = estimate_f2(body, lambda, pairs[k].first, pairs[k].second, spec.n_outer, opt, c.seed,
                                 k * spec.n_outer);
        });

        std::ofstream csv(dir / "f2_probe.csv");
        for (const char* tag : {"a", "b"})
            for (int k = 0; k < D; ++k)
                csv << tag << k << ',';
        csv << "f2_hat,stderr,bound_43,bound_44,depth_applies\n";
        std::size_t sep_ok = 0, depth_ok = 0, depth_cases = 0;
        for (const auto& e : est) {
            const KernelEnvelope env = kernel_envelope(body, lambda, e);
            for (const auto* p : {&e.x1, &e.x2})
                for (int k = 0; k < D; ++k)
                    csv << format_double((*p)[k]) << ',';
            csv << format_double(e.estimate) << ',' << format_double(e.stderr_) << ','
                << format_double(env.separation_bound) << ',' << format_double(env.depth_bound) << ','
                << (env.depth_applies ? 1 : 0) << '\n';
            const double slack = 4.0 * e.stderr_;
            sep_ok += std::abs(e.estimate) <= env.separation_bound + slack ? 1 : 0;
            if (env.depth_applies) {
                ++depth_cases;
                depth_ok += std::abs(e.estimate) <= env.depth_bound + slack ? 1 : 0;
            }
        }
        write_json(dir / "f2_probe.json", {{"schema", "pv-lab/1"},
                                           {"config", to_json(c)},
                                           {"pairs", pairs.size()},
                                           {"separation_ok", sep_ok},
                                           {"depth_cases", depth_cases},
                                           {"depth_ok", depth_ok}});
        std::cout << "pairs " << pairs.size() << "  separation envelope ok " << sep_ok << "  depth envelope ok "
                  << depth_ok << " of " << depth_cases << '\n';
        return kExitOk;
    });
}

int exact2d(const CommonFlags& flags)
{
    const ExperimentConfig c = resolve(flags);
    if (c.body.dim != 2)
        throw ConfigError("dim", "exact2d requires dim 2");
    const auto dir = prepare_out(c);
    const ConvexBody<2> body = make_body<2>(c.body);
    const double lambda = c.lambda.front();
    EstimatorOptions opt;
    opt.scheme = c.stratified ? QueryScheme::Jittered : QueryScheme::Uniform;
    opt.epsilon = c.epsilon;
    opt.n_query = c.n_query > 0 ? c.n_query : default_query_count(body, lambda, c.n_query_factor);
    const Windows<2> win = estimation_windows(body, lambda, c.epsilon);

    struct Row {
        ReplicationRecord mc;
        exact2d::ExactPv exact;
    };
    std::vector<Row> rows(c.replications);
    parallel_for(c.replications, c.threads, [&](std::size_t k) {
        rows[k].mc = simulate_replication(body, lambda, opt, c.seed, k);
        const PointSample<2> sample =
            sample_poisson(win.process, lambda, derive_stream(c.seed, k, StreamRole::Process));
        rows[k].exact = exact2d::pv_exact(body, sample, win.outer);
        if (!(flags.geometry && k == 0))
            rows[k].exact.cells.clear();
    });

    std::ofstream csv(dir / "exact2d.csv");
    csv << "replication,lambda,pv_exact,pv_mc,mc_stderr,symdiff_exact,symdiff_lower,symdiff_upper,symdiff_mc,"
           "covering_rel_err,degenerate_flag\n";
    std::size_t agree = 0;
    double worst_cover = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& [mc, ex] = rows[k];
        const double cover = std::abs(ex.cell_area_sum - ex.clip_area) / ex.clip_area;
        worst_cover = std::max(worst_cover, cover);
        agree += std::abs(mc.pv - ex.pv_area) <= 4.0 * mc.mc_stderr ? 1 : 0;
        csv << k << ',' << format_double(lambda) << ',' << format_double(ex.pv_area) << ',' << format_double(mc.pv)
            << ',' << format_double(mc.mc_stderr) << ',' << format_double(ex.symdiff_area) << ','
            << format_double(ex.symdiff_lower) << ',' << format_double(ex.symdiff_upper) << ','
            << format_double(mc.symdiff) << ',' << format_double(cover) << ',' << (ex.degenerate() ? 1 : 0) << '\n';
    }
    const double frac = static_cast<double>(agree) / static_cast<double>(rows.size());
    write_json(dir / "exact2d.json", {{"schema", "pv-lab/1"},
                                      {"config", to_json(c)},
                                      {"lambda", lambda},
                                      {"replications", rows.size()},
                                      {"agree_within_4se", agree},
                                      {"agree_fraction", frac},
                                      {"max_covering_rel_err", worst_cover}});
    std::cout << "agreement within 4 mc_stderr " << agree << "/" << rows.size() << "  max covering error "
              << format_double(worst_cover) << '\n';

    if (flags.geometry && !rows.empty()) {
        const auto& ex = rows[0].exact;
        const PointSample<2> sample =
            sample_poisson(win.process, lambda, derive_stream(c.seed, 0, StreamRole::Process));
        auto poly = [](const exact2d::Polygon& p) {
            json a = json::array();
            for (const auto& v : p)
                a.push_back({v.x(), v.y()});
            return a;
        };
        json cells = json::array();
        for (const auto& cell : ex.cells) {
            if (cell.polygon.empty())
                continue;
            const auto& s = sample.points[cell.nucleus];
            cells.push_back({{"nucleus", {s.x(), s.y()}},
                             {"in_body", static_cast<bool>(ex.nucleus_in_body[cell.nucleus])},
                             {"area", cell.area},
                             {"polygon", poly(cell.polygon)}});
        }
        const bool curved = body.shape() == Shape::Ball || body.shape() == Shape::Ellipse;
        const exact2d::Polygon outline =
            curved ? exact2d::boundary_polygon(body, 256, false) : exact2d::boundary_polygon(body, 4, false);
        write_json(dir / "geometry.json", {{"schema", "pv-lab/1"},
                                           {"clip", poly(exact2d::window_polygon(win.outer))},
                                           {"body", poly(outline)},
                                           {"cells", cells}});
    }
    return kExitOk;
}

int small_body(const CommonFlags& flags)
{
    const ExperimentConfig c = resolve(flags);
    const auto dir = prepare_out(c);
    return dispatch_dim(c.body.dim, [&](auto dim) {
        constexpr int D = decltype(dim)::value;
        const ConvexBody<D> body = make_body<D>(c.body);
        EstimatorOptions opt;
        opt.n_query = c.n_query;
        opt.scheme = c.stratified ? QueryScheme::Jittered : QueryScheme::Uniform;
        opt.epsilon = c.epsilon;
        const SmallBodyResult r = small_body_experiment(body, c.small_body.scales, c.small_body.lambda,
                                                        c.small_body.replications, c.estimator, opt, c.seed,
                                                        c.threads);
        std::ofstream csv(dir / "small_body.csv");
        csv << "scale,variance,variance_se,mean,volume,surface_term,n_empty,lower_bound_regime\n";
        for (const auto& row : r.rows) {
            csv << format_double(row.scale) << ',' << format_double(row.variance) << ','
                << format_double(row.variance_se) << ',' << format_double(row.mean) << ','
                << format_double(row.volume) << ',' << format_double(row.surface_term) << ',' << row.n_empty << ','
                << (row.lower_bound_regime ? 1 : 0) << '\n';
            std::cout << "r " << row.scale << "  var " << fixed(row.variance) << " +- " << fixed(row.variance_se, 3)
                      << "  V_{d-1} " << fixed(row.surface_term) << "  empty " << row.n_empty
                      << (row.lower_bound_regime ? "" : "  (below lambda >= (2/r_K)^d)") << '\n';
        }
        const double gap = r.variance_slope - r.surface_slope;
        write_json(dir / "small_body.json", {{"schema", "pv-lab/1"},
                                             {"config", to_json(c)},
                                             {"lambda", r.lambda},
                                             {"decade_rows", r.decade_rows},
                                             {"variance_slope", json_number(r.variance_slope)},
                                             {"surface_slope", json_number(r.surface_slope)},
                                             {"gap", json_number(gap)}});
        std::cout << "smallest decade: variance slope " << fixed(r.variance_slope) << "  V_{d-1} slope "
                  << fixed(r.surface_slope) << "  gap " << fixed(gap) << '\n';
        return kExitOk;
    });
}

int selftest(const CommonFlags& flags)
{
    const ExperimentConfig c = resolve(flags);
    bool all = true;
    for (const auto& check : selftest::run_all(c.seed)) {
        std::cout << (check.pass ? "PASS " : "FAIL ") << check.name << "  " << check.detail << '\n';
        all = all && check.pass;
    }
    return all ? kExitOk : kExitSelftest;
}

}  // namespace pvlab::cli
