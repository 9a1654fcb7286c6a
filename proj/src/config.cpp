#include "pvlab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace pvlab {

using nlohmann::json;

std::string_view shape_name(Shape shape)
{
    switch (shape) {
    case Shape::Ball:
        return "ball";
    case Shape::Box:
        return "box";
    case Shape::Ellipse:
        return "ellipse";
    case Shape::Polygon:
        return "polygon";
    }
    return "unknown";
}

std::string_view estimator_name(EstimatorKind kind)
{
    return kind == EstimatorKind::Exact2d ? "exact2d" : "mc";
}

namespace {

std::string join(const std::string& prefix, const std::string& key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object())
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
    const json& at(const std::string& key) const { return obj_.at(key); }
    std::string path(const std::string& key) const { return join(path_, key); }

    double number(const std::string& key, double fallback) const
    {
        if (!has(key))
            return fallback;
        const json& v = obj_.at(key);
        if (!v.is_number())
            throw ConfigError(path(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x))
            throw ConfigError(path(key), "must be finite");
        return x;
    }

    double positive(const std::string& key, double fallback) const
    {
        const double x = number(key, fallback);
        if (!(x > 0.0))
            throw ConfigError(path(key), "must be > 0");
        return x;
    }

    std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const
    {
        if (!has(key))
            return fallback;
        const json& v = obj_.at(key);
        if (v.is_number_unsigned())
            return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
            return static_cast<std::uint64_t>(v.get<std::int64_t>());
        throw ConfigError(path(key), "expected a nonnegative integer");
    }

    bool boolean(const std::string& key, bool fallback) const
    {
        if (!has(key))
            return fallback;
        if (!obj_.at(key).is_boolean())
            throw ConfigError(path(key), "expected true or false");
        return obj_.at(key).get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) const
    {
        if (!has(key))
            return fallback;
        if (!obj_.at(key).is_string())
            throw ConfigError(path(key), "expected a string");
        return obj_.at(key).get<std::string>();
    }

    std::vector<double> numbers(const json& v, const std::string& field) const
    {
        if (!v.is_array())
            throw ConfigError(field, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
                throw ConfigError(field + "[" + std::to_string(i) + "]", "expected a finite number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<double> numbers(const std::string& key) const { return numbers(obj_.at(key), path(key)); }

    void only(std::initializer_list<const char*> keys) const
    {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            bool known = false;
            for (const char* k : keys)
                known = known || it.key() == k;
            if (!known)
                throw ConfigError(path(it.key()), "unknown field");
        }
    }

private:
    const json& obj_;
    std::string path_;
};

BodySpec parse_body(const Reader& r)
{
    BodySpec b;
    const std::string shape = r.string("shape", "ball");
    if (shape == "ball")
        b.shape = Shape::Ball;
    else if (shape == "box")
        b.shape = Shape::Box;
    else if (shape == "ellipse")
        b.shape = Shape::Ellipse;
    else if (shape == "polygon")
        b.shape = Shape::Polygon;
    else
        throw ConfigError(r.path("shape"), "unknown shape '" + shape + "'");

    const std::uint64_t dim = r.unsigned_int("dim", 2);
    if (dim < 2 || dim > 4)
        throw ConfigError(r.path("dim"), "must be 2, 3 or 4");
    b.dim = static_cast<int>(dim);
    if ((b.shape == Shape::Ellipse || b.shape == Shape::Polygon) && b.dim != 2)
        throw ConfigError(r.path("dim"), "unsupported combination: " + shape + " requires dim 2");

    b.center.assign(static_cast<std::size_t>(b.dim), 0.0);
    if (r.has("center")) {
        b.center = r.numbers("center");
        if (b.center.size() != static_cast<std::size_t>(b.dim))
            throw ConfigError(r.path("center"), "expected " + std::to_string(b.dim) + " coordinates");
    }

    switch (b.shape) {
    case Shape::Ball:
        b.radius = r.positive("radius", 1.0);
        break;
    case Shape::Box:
        b.half_widths.assign(static_cast<std::size_t>(b.dim), 1.0);
        if (r.has("half_widths")) {
            b.half_widths = r.numbers("half_widths");
            if (b.half_widths.size() != static_cast<std::size_t>(b.dim))
                throw ConfigError(r.path("half_widths"), "expected " + std::to_string(b.dim) + " values");
            for (std::size_t i = 0; i < b.half_widths.size(); ++i)
                if (!(b.half_widths[i] > 0.0))
                    throw ConfigError(r.path("half_widths") + "[" + std::to_string(i) + "]", "must be > 0");
        }
        break;
    case Shape::Ellipse:
        if (r.has("semi_axes")) {
            const auto ax = r.numbers("semi_axes");
            if (ax.size() != 2)
                throw ConfigError(r.path("semi_axes"), "expected 2 values");
            for (std::size_t i = 0; i < 2; ++i)
                if (!(ax[i] > 0.0))
                    throw ConfigError(r.path("semi_axes") + "[" + std::to_string(i) + "]", "must be > 0");
            b.semi_axes = {ax[0], ax[1]};
        }
        break;
    case Shape::Polygon: {
        if (!r.has("vertices"))
            throw ConfigError(r.path("vertices"), "required for a polygon");
        const json& v = r.at("vertices");
        if (!v.is_array())
            throw ConfigError(r.path("vertices"), "expected an array of [x, y] pairs");
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string field = r.path("vertices") + "[" + std::to_string(i) + "]";
            const auto p = r.numbers(v[i], field);
            if (p.size() != 2)
                throw ConfigError(field, "expected [x, y]");
            b.vertices.push_back({p[0], p[1]});
        }
        break;
    }
    }
    return b;
}

std::vector<double> parse_point(const Reader& r, const json& v, const std::string& field, int dim)
{
    auto p = r.numbers(v, field);
    if (p.size() != static_cast<std::size_t>(dim))
        throw ConfigError(field, "expected " + std::to_string(dim) + " coordinates");
    return p;
}

std::size_t positive_count(const Reader& r, const std::string& key, std::size_t fallback, std::size_t minimum)
{
    const std::uint64_t n = r.unsigned_int(key, fallback);
    if (n < minimum)
        throw ConfigError(r.path(key), "must be >= " + std::to_string(minimum));
    return static_cast<std::size_t>(n);
}

}  // namespace

ExperimentConfig parse_config(const json& doc)
{
    const Reader root(doc, "");
    root.only({"body", "shape", "dim", "center", "radius", "half_widths", "semi_axes", "vertices", "lambda",
               "replications", "seed", "epsilon", "estimator", "n_query_factor", "n_query", "stratified", "threads",
               "out", "kernel_scan", "f2", "small_body", "schema"});
    ExperimentConfig c;
    if (root.has("body")) {
        for (const char* k : {"shape", "dim", "center", "radius", "half_widths", "semi_axes", "vertices"})
            if (root.has(k))
                throw ConfigError(k, "body fields belong either at top level or under body, not both");
        c.body = parse_body(Reader(root.at("body"), "body"));
    } else {
        c.body = parse_body(root);
    }
    if (c.body.shape == Shape::Polygon || c.body.shape == Shape::Ellipse) {
        try {
            make_body<2>(c.body);
        } catch (const ConfigError& e) {
            throw ConfigError(join(root.has("body") ? "body" : "", e.field()), e.reason());
        }
    }

    if (root.has("lambda")) {
        const json& v = root.at("lambda");
        c.lambda = v.is_array() ? root.numbers("lambda") : std::vector<double>{root.number("lambda", 0.0)};
        if (c.lambda.empty())
            throw ConfigError("lambda", "must hold at least one intensity");
        for (std::size_t i = 0; i < c.lambda.size(); ++i)
            if (!(c.lambda[i] > 0.0))
                throw ConfigError("lambda[" + std::to_string(i) + "]", "must be > 0");
    }
    c.replications = positive_count(root, "replications", c.replications, 2);
    c.seed = root.unsigned_int("seed", c.seed);
    c.epsilon = root.number("epsilon", c.epsilon);
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
        throw ConfigError("epsilon", "must lie in (0, 1)");
    const std::string est = root.string("estimator", "mc");
    if (est == "mc")
        c.estimator = EstimatorKind::MonteCarlo;
    else if (est == "exact2d")
        c.estimator = EstimatorKind::Exact2d;
    else
        throw ConfigError("estimator", "expected 'mc' or 'exact2d'");
    if (c.estimator == EstimatorKind::Exact2d && c.body.dim != 2)
        throw ConfigError("estimator", "unsupported combination: exact2d requires dim 2");
    c.n_query_factor = root.positive("n_query_factor", c.n_query_factor);
    c.n_query = static_cast<std::size_t>(root.unsigned_int("n_query", 0));
    c.stratified = root.boolean("stratified", c.stratified);
    const std::uint64_t threads = root.unsigned_int("threads", 0);
    if (threads > 4096)
        throw ConfigError("threads", "must be <= 4096");
    c.threads = static_cast<unsigned>(threads);
    c.out = root.string("out", c.out);

    if (root.has("kernel_scan")) {
        const Reader r(root.at("kernel_scan"), "kernel_scan");
        r.only({"from", "to", "points", "n_outer", "n_query", "first_chaos_eval"});
        if (r.has("from") != r.has("to"))
            throw ConfigError(r.path(r.has("from") ? "to" : "from"), "from and to must be given together");
        if (r.has("from")) {
            c.kernel_scan.from = parse_point(r, r.at("from"), r.path("from"), c.body.dim);
            c.kernel_scan.to = parse_point(r, r.at("to"), r.path("to"), c.body.dim);
        }
        c.kernel_scan.points = positive_count(r, "points", c.kernel_scan.points, 1);
        c.kernel_scan.n_outer = positive_count(r, "n_outer", c.kernel_scan.n_outer, 2);
        c.kernel_scan.n_query = positive_count(r, "n_query", c.kernel_scan.n_query, 1);
        c.kernel_scan.first_chaos_eval = positive_count(r, "first_chaos_eval", 0, 0);
        if (c.kernel_scan.first_chaos_eval == 1)
            throw ConfigError(r.path("first_chaos_eval"), "must be 0 or >= 2");
    }

    if (root.has("f2")) {
        const Reader r(root.at("f2"), "f2");
        r.only({"pairs", "random_pairs", "n_outer", "n_query"});
        if (r.has("pairs")) {
            const json& v = r.at("pairs");
            if (!v.is_array())
                throw ConfigError(r.path("pairs"), "expected an array of [x1, x2] pairs");
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string field = r.path("pairs") + "[" + std::to_string(i) + "]";
                if (!v[i].is_array() || v[i].size() != 2)
                    throw ConfigError(field, "expected [x1, x2]");
                auto a = parse_point(r, v[i][0], field + "[0]", c.body.dim);
                auto b = parse_point(r, v[i][1], field + "[1]", c.body.dim);
                if (a == b)
                    throw ConfigError(field, "points must differ");
                c.f2.pairs.emplace_back(std::move(a), std::move(b));
            }
        }
        c.f2.random_pairs = positive_count(r, "random_pairs", c.f2.random_pairs, 0);
        c.f2.n_outer = positive_count(r, "n_outer", c.f2.n_outer, 2);
        c.f2.n_query = positive_count(r, "n_query", c.f2.n_query, 1);
    }

    if (root.has("small_body")) {
        const Reader r(root.at("small_body"), "small_body");
        r.only({"scales", "lambda", "replications"});
        if (r.has("scales")) {
            c.small_body.scales = r.numbers("scales");
            if (c.small_body.scales.size() < 2)
                throw ConfigError(r.path("scales"), "needs at least two values");
            for (std::size_t i = 0; i < c.small_body.scales.size(); ++i) {
                const std::string field = r.path("scales") + "[" + std::to_string(i) + "]";
                if (!(c.small_body.scales[i] > 0.0))
                    throw ConfigError(field, "must be > 0");
                if (i > 0 && !(c.small_body.scales[i] < c.small_body.scales[i - 1]))
                    throw ConfigError(field, "scales must be strictly decreasing");
            }
        }
        c.small_body.lambda = r.positive("lambda", c.small_body.lambda);
        c.small_body.replications = positive_count(r, "replications", c.small_body.replications, 3);
    }
    return c;
}

ExperimentConfig parse_config_text(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("--config", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

json to_json(const ExperimentConfig& c)
{
    json body{{"shape", shape_name(c.body.shape)}, {"dim", c.body.dim}, {"center", c.body.center}};
    switch (c.body.shape) {
    case Shape::Ball:
        body["radius"] = c.body.radius;
        break;
    case Shape::Box:
        body["half_widths"] = c.body.half_widths;
        break;
    case Shape::Ellipse:
        body["semi_axes"] = c.body.semi_axes;
        break;
    case Shape::Polygon:
        body["vertices"] = c.body.vertices;
        break;
    }
    json scan{{"points", c.kernel_scan.points},
              {"n_outer", c.kernel_scan.n_outer},
              {"n_query", c.kernel_scan.n_query},
              {"first_chaos_eval", c.kernel_scan.first_chaos_eval},
              {"from", c.kernel_scan.from ? json(*c.kernel_scan.from) : json(nullptr)},
              {"to", c.kernel_scan.to ? json(*c.kernel_scan.to) : json(nullptr)}};
    json pairs = json::array();
    for (const auto& [a, b] : c.f2.pairs)
        pairs.push_back(json::array({a, b}));
    return json{{"schema", "pv-lab/1"},
                {"body", body},
                {"lambda", c.lambda},
                {"replications", c.replications},
                {"seed", c.seed},
                {"epsilon", c.epsilon},
                {"estimator", estimator_name(c.estimator)},
                {"n_query_factor", c.n_query_factor},
                {"n_query", c.n_query},
                {"stratified", c.stratified},
                {"kernel_scan", scan},
                {"f2",
                 {{"pairs", pairs},
                  {"random_pairs", c.f2.random_pairs},
                  {"n_outer", c.f2.n_outer},
                  {"n_query", c.f2.n_query}}},
                {"small_body",
                 {{"scales", c.small_body.scales},
                  {"lambda", c.small_body.lambda},
                  {"replications", c.small_body.replications}}}};
}

}  // namespace pvlab
