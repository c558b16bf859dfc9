#include "jumpvol/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "jumpvol/errors.hpp"
#include "jumpvol/io.hpp"

namespace jumpvol
{
namespace
{

using nlohmann::json;

void require_object(json const& j, std::string_view context)
{
    if (!j.is_object())
        throw ConfigError(std::string(context) + ": expected a JSON object");
}

void check_keys(json const& j, std::initializer_list<std::string_view> allowed, std::string_view context)
{
    require_object(j, context);
    for (auto const& [key, value] : j.items())
    {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
    }
}

// Numbers may also be given as strings, so "inf" is expressible.
double get_number(json const& j, std::string_view context)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_string())
        return parse_double(j.get<std::string>());
    throw ConfigError(std::string(context) + ": expected a number");
}

std::size_t get_count(json const& j, std::string_view context)
{
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw ConfigError(std::string(context) + ": expected a nonnegative integer");
    return j.get<std::size_t>();
}

Seed get_seed(json const& j)
{
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ConfigError("seed: expected a nonnegative integer");
    return j.get<Seed>();
}

template<class T, class Fn>
void read(json const& j, char const* key, T& out, Fn&& convert)
{
    if (auto it = j.find(key); it != j.end())
        out = convert(*it, key);
}

std::vector<double> get_number_list(json const& j, std::string_view context)
{
    if (!j.is_array())
        throw ConfigError(std::string(context) + ": expected an array");
    std::vector<double> out;
    for (auto const& v : j)
        out.push_back(get_number(v, context));
    return out;
}

std::vector<std::size_t> get_count_list(json const& j, std::string_view context)
{
    if (!j.is_array())
        throw ConfigError(std::string(context) + ": expected an array");
    std::vector<std::size_t> out;
    for (auto const& v : j)
        out.push_back(get_count(v, context));
    return out;
}

ThresholdRule get_threshold(json const& j, std::string_view context)
{
    if (!j.is_string())
        throw ConfigError(std::string(context) + ": expected a rule string like \"iqr:5\"");
    return ThresholdRule::parse(j.get<std::string>());
}

bool get_bool(json const& j, std::string_view context)
{
    if (!j.is_boolean())
        throw ConfigError(std::string(context) + ": expected true or false");
    return j.get<bool>();
}

auto const as_number = [](json const& j, char const* key) { return get_number(j, key); };
auto const as_count = [](json const& j, char const* key) { return get_count(j, key); };

void check_input_path(std::string const& path)
{
    if (path != "-" && !std::filesystem::exists(path))
        throw IoError("input file not found: " + path);
}

void check_output_path(std::string const& path)
{
    if (path.empty() || path == "-")
        return;
    auto const parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
        throw IoError("output directory does not exist: " + parent.string());
}

}  // namespace

DiffusionSpec parse_diffusion(json const& j)
{
    check_keys(j, {"beta", "theta_star", "horizon"}, "diffusion");
    DiffusionSpec d;
    read(j, "beta", d.beta, as_number);
    read(j, "theta_star", d.theta_star, as_number);
    read(j, "horizon", d.horizon, as_number);
    d.validate();
    return d;
}

JumpSpec parse_jumps(json const& j)
{
    check_keys(j, {"rate", "size_law"}, "jumps");
    JumpSpec spec;
    read(j, "rate", spec.rate, as_number);
    if (auto it = j.find("size_law"); it != j.end())
    {
        auto const& law = *it;
        require_object(law, "jumps.size_law");
        auto const type = law.value("type", std::string("two_point"));
        if (type == "two_point")
        {
            check_keys(law, {"type", "tau"}, "jumps.size_law");
            TwoPointLaw tp;
            read(law, "tau", tp.tau, as_number);
            spec.size_law = tp;
        }
        else if (type == "fixed")
        {
            check_keys(law, {"type", "value"}, "jumps.size_law");
            FixedLaw f;
            read(law, "value", f.value, as_number);
            spec.size_law = f;
        }
        else if (type == "finite_table")
        {
            check_keys(law, {"type", "values", "probabilities"}, "jumps.size_law");
            FiniteTableLaw t;
            if (!law.contains("values") || !law.contains("probabilities"))
                throw ConfigError("jumps.size_law: finite_table needs values and probabilities");
            t.values = get_number_list(law["values"], "values");
            t.probabilities = get_number_list(law["probabilities"], "probabilities");
            spec.size_law = t;
        }
        else
        {
            throw ConfigError("jumps.size_law: unknown type '" + type + "'");
        }
    }
    spec.validate();
    return spec;
}

InverseGammaParams parse_prior(json const& j)
{
    check_keys(j, {"shape", "rate"}, "prior");
    InverseGammaParams p;
    read(j, "shape", p.shape, as_number);
    read(j, "rate", p.rate, as_number);
    p.validate();
    return p;
}

JumpRealization parse_jump_realization(json const& j)
{
    check_keys(j, {"times", "sizes"}, "fixed_jumps");
    JumpRealization r;
    if (j.contains("times"))
        r.times = get_number_list(j["times"], "fixed_jumps.times");
    if (j.contains("sizes"))
        r.sizes = get_number_list(j["sizes"], "fixed_jumps.sizes");
    return r;
}

IoSpec parse_io(json const& j)
{
    check_keys(j, {"input", "output", "format"}, "io");
    IoSpec io;
    if (j.contains("input"))
        io.input = j["input"].get<std::string>();
    if (j.contains("output"))
        io.output = j["output"].get<std::string>();
    if (j.contains("format"))
    {
        auto const f = j["format"].get<std::string>();
        if (f == "csv")
            io.format = OutputFormat::csv;
        else if (f == "json")
            io.format = OutputFormat::json;
        else
            throw ConfigError("io.format: expected \"csv\" or \"json\"");
    }
    check_input_path(io.input);
    check_output_path(io.output);
    return io;
}

SimulateConfig parse_simulate_config(json const& j)
{
    check_keys(j, {"diffusion", "jumps", "n", "seed", "with_truth", "io"}, "simulate config");
    SimulateConfig c;
    if (j.contains("diffusion"))
        c.diffusion = parse_diffusion(j["diffusion"]);
    if (j.contains("jumps"))
        c.jumps = parse_jumps(j["jumps"]);
    read(j, "n", c.n, as_count);
    if (j.contains("seed"))
        c.seed = get_seed(j["seed"]);
    if (j.contains("with_truth"))
        c.with_truth = get_bool(j["with_truth"], "with_truth");
    if (j.contains("io"))
        c.io = parse_io(j["io"]);
    if (c.n < 2)
        throw ConfigError("simulate config: n must be at least 2");
    return c;
}

InferConfig parse_infer_config(json const& j)
{
    check_keys(j,
               {"prior", "threshold", "level", "horizon", "kappa_floor", "truncate_positive",
                "density_grid", "density_out", "io"},
               "infer config");
    InferConfig c;
    if (j.contains("prior"))
        c.options.prior = parse_prior(j["prior"]);
    if (j.contains("threshold"))
        c.options.threshold = get_threshold(j["threshold"], "threshold");
    read(j, "level", c.options.level, as_number);
    if (j.contains("horizon"))
        c.horizon = get_number(j["horizon"], "horizon");
    read(j, "kappa_floor", c.options.kappa_floor, as_number);
    if (j.contains("truncate_positive"))
        c.options.truncate_positive = get_bool(j["truncate_positive"], "truncate_positive");
    read(j, "density_grid", c.density_grid, as_count);
    if (j.contains("density_out"))
        c.density_out = j["density_out"].get<std::string>();
    if (j.contains("io"))
        c.io = parse_io(j["io"]);
    if (!(c.options.level > 0.0 && c.options.level < 1.0))
        throw ConfigError("infer config: level must be in (0, 1)");
    if (c.horizon && !(*c.horizon > 0.0))
        throw ConfigError("infer config: horizon must be positive");
    return c;
}

CoverageRunConfig parse_coverage_config(json const& j)
{
    check_keys(j,
               {"diffusion", "lambda_grid", "tau_grid", "n_grid", "reps", "level", "threshold",
                "prior", "seed", "workers", "io"},
               "coverage config");
    CoverageRunConfig c;
    auto& cov = c.coverage;
    if (j.contains("diffusion"))
        cov.diffusion = parse_diffusion(j["diffusion"]);
    if (j.contains("lambda_grid"))
        cov.lambda_grid = get_number_list(j["lambda_grid"], "lambda_grid");
    if (j.contains("tau_grid"))
        cov.tau_grid = get_number_list(j["tau_grid"], "tau_grid");
    if (j.contains("n_grid"))
        cov.n_grid = get_count_list(j["n_grid"], "n_grid");
    read(j, "reps", cov.reps, as_count);
    read(j, "level", cov.level, as_number);
    if (j.contains("threshold"))
        cov.threshold = get_threshold(j["threshold"], "threshold");
    if (j.contains("prior"))
        cov.prior = parse_prior(j["prior"]);
    if (j.contains("seed"))
        cov.base_seed = get_seed(j["seed"]);
    if (j.contains("workers"))
        c.workers = static_cast<unsigned>(get_count(j["workers"], "workers"));
    if (j.contains("io"))
        c.io = parse_io(j["io"]);
    cov.validate();
    return c;
}

DiagConfig parse_diag_config(json const& j)
{
    check_keys(j,
               {"diffusion", "jumps", "n_grid", "n", "reps", "seed", "threshold", "prior",
                "kappa_floor", "workers", "jump_qv", "fixed_jumps", "io"},
               "diag config");
    DiagConfig c;
    if (j.contains("diffusion"))
        c.diffusion = parse_diffusion(j["diffusion"]);
    if (j.contains("jumps"))
        c.jumps = parse_jumps(j["jumps"]);
    if (j.contains("n_grid"))
        c.n_grid = get_count_list(j["n_grid"], "n_grid");
    read(j, "n", c.n, as_count);
    read(j, "reps", c.reps, as_count);
    if (j.contains("seed"))
        c.seed = get_seed(j["seed"]);
    if (j.contains("threshold"))
        c.options.threshold = get_threshold(j["threshold"], "threshold");
    if (j.contains("prior"))
        c.options.prior = parse_prior(j["prior"]);
    read(j, "kappa_floor", c.options.kappa_floor, as_number);
    if (j.contains("workers"))
        c.options.workers = static_cast<unsigned>(get_count(j["workers"], "workers"));
    if (j.contains("jump_qv"))
        c.jump_qv = get_number(j["jump_qv"], "jump_qv");
    if (j.contains("fixed_jumps"))
        c.fixed_jumps = parse_jump_realization(j["fixed_jumps"]);
    if (j.contains("io"))
        c.io = parse_io(j["io"]);
    if (c.n < 2)
        throw ConfigError("diag config: n must be at least 2");
    return c;
}

json load_json_file(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file: " + path);
    try
    {
        return json::parse(in);
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
}

Seed seed_from_env(Seed seed)
{
    char const* env = std::getenv("JUMPVOL_SEED");
    if (env == nullptr || *env == '\0')
        return seed;
    char* end = nullptr;
    errno = 0;
    unsigned long long const value = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || errno == ERANGE || std::isdigit(static_cast<unsigned char>(*env)) == 0)
        throw ConfigError("JUMPVOL_SEED must be a nonnegative integer");
    return static_cast<Seed>(value);
}

namespace
{

json number_or_string(double v)
{
    if (std::isfinite(v))
        return v;
    return format_double(v);
}

}  // namespace

json to_json(QvEstimate const& qv)
{
    json flagged = json::array();
    for (auto i : qv.flagged)
        flagged.push_back(i + 1);
    return {{"eta", number_or_string(qv.eta)},
            {"jump_qv_hat", qv.jump_qv_hat},
            {"flagged", flagged}};
}

json to_json(InferenceResult const& r)
{
    auto const qv = to_json(r.qv);
    json out;
    out["theta_hat"] = r.theta_hat;
    out["jump_qv_hat"] = r.qv.jump_qv_hat;
    out["eta"] = qv["eta"];
    out["flagged"] = qv["flagged"];
    out["kappa"] = r.kappa;
    out["posterior"] = {{"shape", r.posterior.base.ig.shape},
                        {"rate", r.posterior.base.ig.rate},
                        {"shift", r.posterior.shift}};
    out["interval"] = {{"level", r.interval.level}, {"lo", r.interval.lo}, {"hi", r.interval.hi}};
    out["bvm"] = {{"mean", r.bvm.mean}, {"variance", r.bvm.variance}};
    return out;
}

}  // namespace jumpvol
