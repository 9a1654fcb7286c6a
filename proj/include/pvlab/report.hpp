#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "pvlab/campaign.hpp"
#include "pvlab/chaos.hpp"

namespace pvlab {

/// Shortest text that reads back to the same double.
inline std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x)
            break;
    }
    return buf;
}

inline nlohmann::json json_number(double x)
{
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline constexpr const char* kReplicationCsvHeader =
    "replication,lambda,pv,symdiff,mc_stderr,n_points,degenerate_flag,seed,stream";

inline void write_replication_csv(std::ostream& out, const CampaignResult& result)
{
    out << kReplicationCsvHeader << '\n';
    for (const auto& s : result.per_lambda)
        for (const auto& r : s.records)
            out << r.replication << ',' << format_double(r.intensity) << ',' << format_double(r.pv) << ','
                << format_double(r.symdiff) << ',' << format_double(r.mc_stderr) << ',' << r.n_points << ','
                << (r.degenerate ? 1 : 0) << ',' << r.seed << ',' << r.stream << '\n';
}

inline nlohmann::json ks_json(const std::optional<KsResult>& ks)
{
    if (!ks)
        return nullptr;
    return {{"D", json_number(ks->statistic)}, {"p", json_number(ks->p_value)}};
}

inline nlohmann::json summary_json(const CampaignResult& result, const nlohmann::json& config)
{
    nlohmann::json per = nlohmann::json::array();
    for (const auto& s : result.per_lambda) {
        per.push_back({{"lambda", s.lambda},
                       {"replications", s.records.size()},
                       {"mean", json_number(s.pv.mean)},
                       {"mean_se", json_number(s.mean_se)},
                       {"var", json_number(s.pv.variance)},
                       {"var_se", json_number(s.var_se)},
                       {"mc_var", json_number(s.mc_var_mean)},
                       {"var_pv", json_number(s.var_pv)},
                       {"skew", json_number(s.pv.skewness)},
                       {"kurt", json_number(s.pv.excess_kurtosis)},
                       {"ks_D", s.ks_self ? json_number(s.ks_self->statistic) : nlohmann::json(nullptr)},
                       {"ks_p", s.ks_self ? json_number(s.ks_self->p_value) : nlohmann::json(nullptr)},
                       {"ks_raw", ks_json(s.ks_raw)},
                       {"symdiff_mean", json_number(s.symdiff_mean)},
                       {"n_degenerate", s.n_degenerate},
                       {"upper_shape", json_number(s.upper_shape)},
                       {"upper_ratio", json_number(s.upper_ratio)},
                       {"lower_bound", json_number(s.lower_bound)},
                       {"normalized_var", json_number(s.normalized_var)}});
    }
    nlohmann::json fit = nullptr;
    if (result.fit)
        fit = {{"slope", json_number(result.fit->slope)},
               {"slope_se", json_number(result.fit->slope_se)},
               {"intercept", json_number(result.fit->intercept)},
               {"r2", json_number(result.fit->r2)}};
    return {{"schema", "pv-lab/1"},
            {"config", config},
            {"seed", result.seed},
            {"dim", result.dim},
            {"body_volume", result.body_volume},
            {"target_slope", -1.0 - 1.0 / result.dim},
            {"per_lambda", per},
            {"fit", fit},
            {"bracket_ratio", json_number(result.bracket_ratio)}};
}

}  // namespace pvlab
