#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pvlab/campaign.hpp"
#include "pvlab/config.hpp"
#include "pvlab/report.hpp"

using namespace pvlab;
using doctest::Approx;

namespace {

const ConvexBody<2> disk = ConvexBody<2>::ball(Point<2>::Zero(), 1.0);

CampaignSettings small_settings()
{
    CampaignSettings s;
    s.lambdas = {100.0};
    s.replications = 2;
    s.seed = 5;
    s.query_factor = 16.0;
    s.threads = 1;
    return s;
}

std::string csv_of(const CampaignResult& r)
{
    std::ostringstream out;
    write_replication_csv(out, r);
    return out.str();
}

}  // namespace

TEST_CASE("two replications")
{
    const CampaignResult r = run_campaign(disk, small_settings());
    REQUIRE(r.per_lambda.size() == 1);
    const auto& s = r.per_lambda[0];
    REQUIRE(s.records.size() == 2);
    const double d = s.records[0].pv - s.records[1].pv;
    CHECK(s.pv.variance == Approx(0.5 * d * d));
    CHECK(s.records[0].stream == 0);
    CHECK(s.records[1].stream == 16);
    CHECK_FALSE(r.fit.has_value());
}

TEST_CASE("campaign determinism across runs and thread counts")
{
    CampaignSettings s = small_settings();
    s.lambdas = {80.0, 160.0, 320.0};
    s.replications = 12;
    const std::string a = csv_of(run_campaign(disk, s));
    s.threads = 3;
    const std::string b = csv_of(run_campaign(disk, s));
    CHECK(a == b);
    s.seed = 6;
    CHECK(a != csv_of(run_campaign(disk, s)));

    std::istringstream lines(a);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "replication,lambda,pv,symdiff,mc_stderr,n_points,degenerate_flag,seed,stream");
}

TEST_CASE("campaign summaries")
{
    CampaignSettings s = small_settings();
    s.lambdas = {100.0, 200.0, 400.0};
    s.replications = 60;
    s.options.scheme = QueryScheme::Jittered;
    const CampaignResult r = run_campaign(disk, s);
    REQUIRE(r.fit.has_value());
    for (const auto& l : r.per_lambda) {
        CHECK(l.ks_self.has_value());
        CHECK(l.var_pv > 0.0);
        CHECK(l.var_pv <= l.pv.variance);
        CHECK(l.normalized_var == Approx(l.var_pv * std::pow(l.lambda, 1.5)));
        CHECK(l.upper_shape == Approx(std::numbers::pi * std::pow(l.lambda, -2.0)
                                      + 2.0 * std::numbers::pi * std::pow(l.lambda, -1.5)));
    }
    CHECK(r.fit->slope < 0.0);

    const auto json = summary_json(r, nlohmann::json::object());
    CHECK(json["schema"] == "pv-lab/1");
    CHECK(json["per_lambda"].size() == 3);
    CHECK(json["per_lambda"][0].contains("ks_p"));
}

TEST_CASE("exact estimator campaign")
{
    CampaignSettings s = small_settings();
    s.estimator = EstimatorKind::Exact2d;
    s.replications = 3;
    const CampaignResult r = run_campaign(disk, s);
    for (const auto& rec : r.per_lambda[0].records) {
        CHECK(rec.mc_stderr == 0.0);
        CHECK(rec.pv > 0.0);
    }
    CHECK_THROWS(run_campaign(ConvexBody<3>::ball(Point<3>::Zero(), 1.0), s));
}

TEST_CASE("small body table")
{
    const std::vector<double> scales{0.4, 0.2, 0.1, 0.05, 0.025};
    EstimatorOptions opt;
    const SmallBodyResult r = small_body_experiment(disk, scales, 50.0, 300, EstimatorKind::Exact2d, opt, 3, 1);
    REQUIRE(r.rows.size() == 5);
    CHECK(r.decade_rows == 4);
    CHECK(r.surface_slope == Approx(1.0).epsilon(1e-12));
    for (const auto& row : r.rows) {
        CHECK(row.surface_term == Approx(2.0 * std::numbers::pi * row.scale / 2.0));
        CHECK(row.lower_bound_regime == (50.0 >= std::pow(2.0 / row.scale, 2)));
    }
    CHECK(r.rows.back().n_empty > 200);

    CHECK_THROWS(small_body_experiment(disk, std::vector<double>{0.1, 0.2}, 50.0, 10, EstimatorKind::Exact2d, opt,
                                       3, 1));
}
