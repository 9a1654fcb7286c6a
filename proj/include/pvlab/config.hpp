#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pvlab/campaign.hpp"
#include "pvlab/geometry.hpp"

namespace pvlab {

/// Schema violation; the message starts with the offending field path.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(field), reason_(what)
    {
    }
    const std::string& field() const { return field_; }
    const std::string& reason() const { return reason_; }

private:
    std::string field_;
    std::string reason_;
};

struct BodySpec {
    Shape shape = Shape::Ball;
    int dim = 2;
    std::vector<double> center;       ///< length dim, default origin
    double radius = 1.0;              ///< ball
    std::vector<double> half_widths;  ///< box
    std::array<double, 2> semi_axes{1.0, 1.0};     ///< ellipse
    std::vector<std::array<double, 2>> vertices;   ///< polygon, counterclockwise
};

struct KernelScanSpec {
    std::optional<std::vector<double>> from;  ///< default: across the body along axis 0
    std::optional<std::vector<double>> to;
    std::size_t points = 40;
    std::size_t n_outer = 400;
    std::size_t n_query = 1024;
    std::size_t first_chaos_eval = 0;  ///< 0 skips the first-chaos norm
};

struct F2Spec {
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
    std::size_t random_pairs = 20;  ///< used when pairs is empty
    std::size_t n_outer = 400;
    std::size_t n_query = 1024;
};

struct SmallBodySpec {
    // halving down to 1/256, so the smallest decade has lambda |K_r| << 1
    std::vector<double> scales{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
    double lambda = 100.0;
    std::size_t replications = 10000;
};

struct ExperimentConfig {
    BodySpec body;
    std::vector<double> lambda{1000.0};
    std::size_t replications = 100;
    std::uint64_t seed = 0;
    double epsilon = kDefaultLeakBudget;
    EstimatorKind estimator = EstimatorKind::MonteCarlo;
    double n_query_factor = kDefaultQueryFactor;
    std::size_t n_query = 0;
    bool stratified = false;
    unsigned threads = 0;
    std::string out = "out";
    KernelScanSpec kernel_scan;
    F2Spec f2;
    SmallBodySpec small_body;
};

/// Validates a JSON document and fills every default.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Resolved configuration, every field present.
nlohmann::json to_json(const ExperimentConfig& config);

std::string_view estimator_name(EstimatorKind kind);

template <int Dim>
Point<Dim> to_point(const std::vector<double>& v)
{
    if (v.size() != static_cast<std::size_t>(Dim))
        throw std::invalid_argument("coordinate vector has the wrong length");
    Point<Dim> p;
    for (int k = 0; k < Dim; ++k)
        p[k] = v[static_cast<std::size_t>(k)];
    return p;
}

template <int Dim>
ConvexBody<Dim> make_body(const BodySpec& spec)
{
    if (spec.dim != Dim)
        throw ConfigError("dim", "body dimension mismatch");
    const Point<Dim> center = spec.center.empty() ? Point<Dim>::Zero() : to_point<Dim>(spec.center);
    try {
        switch (spec.shape) {
        case Shape::Ball:
            return ConvexBody<Dim>::ball(center, spec.radius);
        case Shape::Box:
            return ConvexBody<Dim>::box(center, to_point<Dim>(spec.half_widths));
        case Shape::Ellipse:
            if constexpr (Dim == 2)
                return ConvexBody<2>::ellipse(center, spec.semi_axes[0], spec.semi_axes[1]);
            break;
        case Shape::Polygon:
            if constexpr (Dim == 2) {
                PointList<2> v;
                for (const auto& p : spec.vertices)
                    v.emplace_back(p[0], p[1]);
                return ConvexBody<2>::polygon(v);
            }
            break;
        }
    } catch (const GeometryError& e) {
        throw ConfigError(spec.shape == Shape::Polygon ? "vertices" : "shape", e.what());
    }
    throw ConfigError("shape", std::string(shape_name(spec.shape)) + " is not supported in dimension "
                                   + std::to_string(Dim));
}

/// Calls f(std::integral_constant<int, d>) for the configured dimension.
template <class F>
decltype(auto) dispatch_dim(int dim, F&& f)
{
    switch (dim) {
    case 2:
        return f(std::integral_constant<int, 2>{});
    case 3:
        return f(std::integral_constant<int, 3>{});
    case 4:
        return f(std::integral_constant<int, 4>{});
    default:
        throw ConfigError("dim", "must be 2, 3 or 4");
    }
}

}  // namespace pvlab
