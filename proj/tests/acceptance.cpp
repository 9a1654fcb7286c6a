// Statistical acceptance run. One PASS/FAIL line per criterion, nonzero exit
// if any fails. Long: several minutes per core.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "pvlab/campaign.hpp"
#include "pvlab/chaos.hpp"
#include "pvlab/config.hpp"
#include "pvlab/exact2d.hpp"
#include "pvlab/report.hpp"
#include "pvlab/selftest.hpp"

#ifndef PVLAB_CLI_PATH
#define PVLAB_CLI_PATH "pvlab"
#endif

using namespace pvlab;

namespace {

constexpr std::uint64_t kSeed = 20261018;

int failures = 0;

std::string num(double x, int digits = 4)
{
    std::ostringstream s;
    s.precision(digits);
    s << x;
    return s.str();
}

void verdict(int id, const std::string& name, bool pass, const std::string& detail)
{
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << "  " << detail << std::endl;
}

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

const ConvexBody<2> disk = ConvexBody<2>::ball(Point<2>::Zero(), 1.0);

CampaignResult disk_campaign()
{
    Stopwatch t;
    CampaignSettings s;
    s.lambdas = {250, 500, 1000, 2000, 4000};
    s.replications = 1000;
    s.options.scheme = QueryScheme::Jittered;
    s.seed = kSeed;
    const CampaignResult r = run_campaign(disk, s);
    std::cout << "# d=2 campaign, 5 intensities x 1000 replications, " << num(t.seconds(), 3) << " s\n";
    for (const auto& l : r.per_lambda)
        std::cout << "#   lambda " << l.lambda << "  mean " << num(l.pv.mean, 8) << " +- " << num(l.mean_se, 3)
                  << "  var_pv " << num(l.var_pv) << " +- " << num(l.var_se, 2) << "  mc share "
                  << num(l.mc_var_mean / l.pv.variance, 2) << "  var lambda^1.5 " << num(l.normalized_var)
                  << "  skew " << num(l.pv.skewness, 3) << "  kurt " << num(l.pv.excess_kurtosis, 3) << "  KS p "
                  << num(l.ks_self->p_value, 3) << '\n';
    return r;
}

const LambdaSummary& at(const CampaignResult& r, double lambda)
{
    for (const auto& l : r.per_lambda)
        if (l.lambda == lambda)
            return l;
    throw std::logic_error("intensity not in campaign");
}

void unbiasedness(const CampaignResult& r)
{
    bool pass = true;
    std::ostringstream d;
    for (double lambda : {250.0, 1000.0, 4000.0}) {
        const auto& l = at(r, lambda);
        const double z = (l.pv.mean - std::numbers::pi) / l.mean_se;
        pass = pass && std::abs(z) <= 4.0;
        d << "lambda " << lambda << " z=" << num(z, 3) << "  ";
    }
    verdict(1, "unbiasedness", pass, d.str());
}

void variance_order_2d(const CampaignResult& r)
{
    const double slope = r.fit ? r.fit->slope : std::nan("");
    const bool pass = r.fit && slope >= -1.65 && slope <= -1.35 && r.bracket_ratio <= 2.5;
    verdict(2, "variance order d=2", pass,
            "slope " + num(slope, 5) + " +- " + num(r.fit ? r.fit->slope_se : 0.0, 2) + " (accept [-1.65, -1.35]), "
                + "max/min var lambda^1.5 " + num(r.bracket_ratio, 4) + " (accept <= 2.5)");
}

void variance_order_3d()
{
    Stopwatch t;
    CampaignSettings s;
    s.lambdas = {250, 1000, 4000};
    s.replications = 600;
    s.options.scheme = QueryScheme::Jittered;
    s.seed = kSeed + 3;
    const CampaignResult r = run_campaign(ConvexBody<3>::ball(Point<3>::Zero(), 1.0), s);
    std::cout << "# d=3 campaign, " << num(t.seconds(), 3) << " s\n";
    for (const auto& l : r.per_lambda)
        std::cout << "#   lambda " << l.lambda << "  mean " << num(l.pv.mean, 8) << " +- " << num(l.mean_se, 3)
                  << "  var_pv " << num(l.var_pv) << " +- " << num(l.var_se, 2) << "  var lambda^(4/3) "
                  << num(l.normalized_var) << '\n';
    const double slope = r.fit ? r.fit->slope : std::nan("");
    verdict(3, "variance order d=3", r.fit && slope >= -1.48 && slope <= -1.18,
            "slope " + num(slope, 5) + " +- " + num(r.fit ? r.fit->slope_se : 0.0, 2)
                + " (accept [-1.48, -1.18], target -4/3)");
}

void clt(const CampaignResult& r)
{
    const auto& hi = at(r, 4000);
    const auto& lo = at(r, 250);
    std::cout << "# contrast lambda 250: KS p " << num(lo.ks_self->p_value, 3) << "  skew "
              << num(lo.pv.skewness, 3) << "  kurt " << num(lo.pv.excess_kurtosis, 3) << '\n';
    const double p = hi.ks_self->p_value, sk = hi.pv.skewness, ku = hi.pv.excess_kurtosis;
    verdict(4, "CLT at lambda 4000", p > 0.01 && std::abs(sk) < 0.15 && std::abs(ku) < 0.3,
            "KS D " + num(hi.ks_self->statistic, 3) + " p " + num(p, 3) + " (accept > 0.01), skew " + num(sk, 3)
                + " (accept |.| < 0.15), excess kurtosis " + num(ku, 3) + " (accept |.| < 0.3)");
}

void exact_agreement()
{
    Stopwatch t;
    const double lambda = 1000;
    const std::size_t n = 200;
    const std::uint64_t seed = kSeed + 5;
    EstimatorOptions opt;
    opt.n_query = default_query_count(disk, lambda);
    const Windows<2> win = estimation_windows(disk, lambda, opt.epsilon);
    std::vector<double> gap(n), cover(n);
    parallel_for(n, 0, [&](std::size_t k) {
        const ReplicationRecord mc = simulate_replication(disk, lambda, opt, seed, k);
        const auto sample = sample_poisson(win.process, lambda, derive_stream(seed, k, StreamRole::Process));
        const auto ex = exact2d::pv_exact(disk, sample, win.outer);
        gap[k] = std::abs(mc.pv - ex.pv_area) / mc.mc_stderr;
        cover[k] = std::abs(ex.cell_area_sum - ex.clip_area) / ex.clip_area;
    });
    std::size_t agree = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        agree += gap[k] <= 4.0 ? 1 : 0;
        worst = std::max(worst, cover[k]);
    }
    std::cout << "# exact comparison, " << num(t.seconds(), 3) << " s\n";
    verdict(5, "exact oracle agreement", agree >= 190 && worst <= 1e-9,
            std::to_string(agree) + "/200 within 4 mc_stderr (accept >= 190), worst covering error "
                + num(worst, 3) + " (accept <= 1e-9)");
}

void kernel_structure()
{
    Stopwatch t;
    const double lambda = 1000;
    const std::uint64_t seed = kSeed + 6;
    const ChaosOptions opt;
    const std::size_t points = 40, n_outer = 400;
    const Point<2> from(-1.1, 0.0), to(1.1, 0.0);

    std::vector<KernelEstimate<2>> f1(points);
    parallel_for(points, 0, [&](std::size_t j) {
        const double s = static_cast<double>(j) / static_cast<double>(points - 1);
        f1[j] = estimate_f1(disk, lambda, Point<2>(from + s * (to - from)), n_outer, opt, seed, j * n_outer);
    });
    std::size_t sign_ok = 0, env_ok = 0, nonzero = 0;
    for (const auto& e : f1) {
        const auto env = kernel_envelope(disk, lambda, e);
        const double slack = 4.0 * e.stderr_;
        sign_ok += (contains(disk, e.x1) ? e.estimate >= -slack : e.estimate <= slack) ? 1 : 0;
        env_ok += (std::abs(e.estimate) <= env.separation_bound + slack
                   && std::abs(e.estimate) <= env.depth_bound + slack)
                      ? 1
                      : 0;
        nonzero += std::abs(e.estimate) > slack ? 1 : 0;
    }

    const auto pairs = random_probe_pairs(disk, lambda, 20, seed);
    std::vector<KernelEstimate<2>> f2(pairs.size());
    parallel_for(pairs.size(), 0, [&](std::size_t k) {
        f2[k] = estimate_f2(disk, lambda, pairs[k].first, pairs[k].second, n_outer, opt, seed + 1, k * n_outer);
    });
    std::size_t f2_ok = 0, f2_nonzero = 0;
    for (const auto& e : f2) {
        const auto env = kernel_envelope(disk, lambda, e);
        const double slack = 4.0 * e.stderr_;
        f2_ok += (std::abs(e.estimate) <= env.separation_bound + slack
                  && std::abs(e.estimate) <= env.depth_bound + slack)
                     ? 1
                     : 0;
        f2_nonzero += std::abs(e.estimate) > slack ? 1 : 0;
    }
    std::cout << "# kernel scan, " << num(t.seconds(), 3) << " s; f1 significantly nonzero at " << nonzero
              << " points, f2 at " << f2_nonzero << " pairs\n";
    verdict(6, "kernel structure", sign_ok == points && env_ok == points && f2_ok == pairs.size(),
            "f1 sign " + std::to_string(sign_ok) + "/40, f1 envelopes " + std::to_string(env_ok)
                + "/40, f2 envelopes " + std::to_string(f2_ok) + "/20");
}

void chaos_sandwich(const CampaignResult& r)
{
    Stopwatch t;
    const double lambda = 1000;
    const ChaosOptions opt;
    const FirstChaosNorm norm = first_chaos_norm(disk, lambda, 2000, 200, opt, kSeed + 7, 0);
    const auto& l = at(r, lambda);
    const double lower = first_chaos_lower_bound(disk, lambda);
    const double sigma = std::hypot(norm.stderr_, l.var_se);
    std::cout << "# first chaos norm, " << num(t.seconds(), 3) << " s, " << norm.n_in_support << "/" << norm.n_eval
              << " evaluations in the support; share of variance " << num(norm.value / l.var_pv, 3) << '\n';
    verdict(7, "first-chaos sandwich", norm.value <= l.var_pv + 4.0 * sigma && norm.value >= lower,
            "lambda int f1^2 " + num(norm.value) + " +- " + num(norm.stderr_, 2) + " <= var " + num(l.var_pv)
                + " +- " + num(l.var_se, 2) + " (4 sigma slack " + num(4.0 * sigma, 2) + "), lower bound "
                + num(lower, 3));
}

void small_body()
{
    Stopwatch t;
    const SmallBodySpec spec;
    const SmallBodyResult r = small_body_experiment(disk, spec.scales, spec.lambda, spec.replications,
                                                    EstimatorKind::Exact2d, EstimatorOptions{}, kSeed + 8, 0);
    std::cout << "# small body, lambda 100, " << num(t.seconds(), 3) << " s\n";
    for (const auto& row : r.rows)
        std::cout << "#   r " << row.scale << "  var " << num(row.variance) << " +- " << num(row.variance_se, 2)
                  << "  V1 " << num(row.surface_term) << "  empty " << row.n_empty
                  << (row.lower_bound_regime ? "  lower bound applies" : "") << '\n';
    const double gap = r.variance_slope - r.surface_slope;
    verdict(8, "small-body variance order", gap >= 0.5,
            "variance slope " + num(r.variance_slope, 4) + " vs V1 slope " + num(r.surface_slope, 4) + " over "
                + std::to_string(r.decade_rows) + " rows, gap " + num(gap, 3) + " (accept >= 0.5)");
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::string& command)
{
    const int status = std::system((command + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void property_suites()
{
    Stopwatch t;
    bool pass = true;
    std::ostringstream d;
    for (const auto& c : selftest::run_all(kSeed)) {
        std::cout << "#   " << (c.pass ? "ok  " : "bad ") << c.name << ": " << c.detail << '\n';
        pass = pass && c.pass;
    }

    const std::string cli = PVLAB_CLI_PATH;
    const int selftest_rc = run("\"" + cli + "\" selftest --seed 3");
    d << "selftest exit " << selftest_rc;
    pass = pass && selftest_rc == 0;

    const auto dir = std::filesystem::temp_directory_path() / ("pvlab_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "cfg.json") << R"({"shape":"ball","dim":2,"radius":1,"lambda":[200,400],"replications":20})";
    bool identical = true;
    std::string first;
    for (int k = 0; k < 2; ++k) {
        const auto out = dir / ("run" + std::to_string(k));
        const int rc = run("\"" + cli + "\" simulate --config \"" + (dir / "cfg.json").string() + "\" --seed 7 --threads "
                           + std::to_string(k + 1) + " --out \"" + out.string() + "\"");
        const std::string bytes =
            slurp(out / "config.json") + slurp(out / "replications.csv") + slurp(out / "summary.json");
        identical = identical && rc == 0 && bytes.size() > 100;
        if (k == 0)
            first = bytes;
        else
            identical = identical && bytes == first;
    }
    std::filesystem::remove_all(dir);
    d << ", simulate reruns byte-identical " << (identical ? "yes" : "no");
    pass = pass && identical;
    std::cout << "# property suites, " << num(t.seconds(), 3) << " s\n";
    verdict(9, "property suites", pass, d.str());
}

}  // namespace

int main()
{
    Stopwatch total;
    const CampaignResult r2 = disk_campaign();
    unbiasedness(r2);
    variance_order_2d(r2);
    variance_order_3d();
    clt(r2);
    exact_agreement();
    kernel_structure();
    chaos_sandwich(r2);
    small_body();
    property_suites();
    std::cout << "# total " << num(total.seconds(), 4) << " s, " << failures << " failing\n";
    return failures == 0 ? 0 : 1;
}
