// jumpvol: simulate jump-diffusion paths, infer the volatility coefficient
// with the shifted tempered posterior, and run coverage and diagnostics.
//
// Exit codes: 0 success, 2 configuration, 3 I/O, 4 degenerate inference.

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jumpvol/config.hpp"
#include "jumpvol/diagnostics.hpp"
#include "jumpvol/errors.hpp"
#include "jumpvol/io.hpp"
#include "jumpvol/jump_thresh.hpp"
#include "jumpvol/mc_harness.hpp"
#include "jumpvol/sde_sim.hpp"
#include "jumpvol/vol_posterior.hpp"

using namespace jumpvol;
using nlohmann::json;

namespace
{

enum ExitCode : int
{
    exit_ok = 0,
    exit_internal = 1,
    exit_config = 2,
    exit_io = 3,
    exit_degenerate = 4,
};

void write_to(std::string const& path, std::function<void(std::ostream&)> const& body)
{
    if (path.empty() || path == "-")
    {
        body(std::cout);
        std::cout.flush();
        if (!std::cout)
            throw IoError("failed writing to stdout");
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open output file: " + path);
    body(out);
    out.flush();
    if (!out)
        throw IoError("failed writing output file: " + path);
}

json config_or_empty(std::string const& path)
{
    return path.empty() ? json::object() : load_json_file(path);
}

struct CommonFlags
{
    std::string config;
    std::string out;
    std::optional<Seed> seed;
    std::optional<std::string> format;
};

void add_common(CLI::App* app, CommonFlags& flags, bool with_seed = true)
{
    app->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--out", flags.out, "Output path ('-' for stdout)");
    if (with_seed)
        app->add_option("--seed", flags.seed, "RNG seed (overrides config and JUMPVOL_SEED)");
    app->add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void apply_common(CommonFlags const& flags, IoSpec& io, Seed* seed)
{
    if (!flags.out.empty())
        io.output = flags.out;
    if (flags.format)
        io.format = *flags.format == "json" ? OutputFormat::json : OutputFormat::csv;
    if (seed != nullptr)
    {
        *seed = seed_from_env(*seed);
        if (flags.seed)
            *seed = *flags.seed;
    }
}

//---------------------------------------------------------------------------//
// simulate
//---------------------------------------------------------------------------//

struct SimulateFlags
{
    CommonFlags common;
    std::optional<std::size_t> n;
    bool with_truth = false;
};

int cmd_simulate(SimulateFlags const& flags)
{
    auto cfg = parse_simulate_config(config_or_empty(flags.common.config));
    apply_common(flags.common, cfg.io, &cfg.seed);
    if (flags.n)
        cfg.n = *flags.n;
    if (flags.with_truth)
        cfg.with_truth = true;

    auto const path = simulate_path(cfg.diffusion, cfg.jumps, cfg.n, cfg.seed);
    write_to(cfg.io.output, [&](std::ostream& os) {
        if (cfg.io.format.value_or(OutputFormat::csv) == OutputFormat::csv)
        {
            write_path_csv(os, path, cfg.with_truth);
            return;
        }
        json j{{"n", path.n}, {"delta", path.delta}, {"horizon", path.horizon},
               {"increments", path.increments}};
        if (cfg.with_truth)
            j["mu"] = path.truth->mu;
        os << j.dump() << '\n';
    });
    return exit_ok;
}

//---------------------------------------------------------------------------//
// infer
//---------------------------------------------------------------------------//

struct InferFlags
{
    CommonFlags common;
    std::string input;
    std::optional<std::string> threshold;
    std::optional<double> level;
    std::optional<double> horizon;
    std::optional<double> prior_shape;
    std::optional<double> prior_rate;
    bool truncate_positive = false;
    std::optional<std::size_t> density_grid;
    std::string density_out;
};

SamplePath read_increments(std::string const& input, std::optional<double> horizon)
{
    if (input.empty() || input == "-")
        return read_path_csv(std::cin, horizon);
    std::ifstream in(input);
    if (!in)
        throw IoError("cannot open input file: " + input);
    return read_path_csv(in, horizon);
}

void write_density(std::string const& path, ModifiedPosterior const& post, std::size_t k, bool truncate)
{
    double lo_p = 0.0005, hi_p = 0.9995, norm = 1.0;
    if (truncate && post.shift > 0.0)
    {
        double const below = post.base.ig.cdf(post.shift);
        norm = 1.0 - below;
        lo_p = below + lo_p * norm;
        hi_p = below + hi_p * norm;
    }
    double const lo = post.quantile(lo_p);
    double const hi = post.quantile(hi_p);
    write_to(path, [&](std::ostream& os) {
        os << "theta,density\n";
        for (std::size_t i = 0; i < k; ++i)
        {
            double const theta
                = k == 1 ? 0.5 * (lo + hi)
                         : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
            double density = post.pdf(theta);
            if (truncate)
                density = theta > 0.0 ? density / norm : 0.0;
            os << format_double(theta) << ',' << format_double(density) << '\n';
        }
    });
}

int cmd_infer(InferFlags const& flags)
{
    auto cfg = parse_infer_config(config_or_empty(flags.common.config));
    apply_common(flags.common, cfg.io, nullptr);
    if (!flags.input.empty())
        cfg.io.input = flags.input;
    if (flags.threshold)
        cfg.options.threshold = ThresholdRule::parse(*flags.threshold);
    if (flags.level)
        cfg.options.level = *flags.level;
    if (flags.horizon)
        cfg.horizon = *flags.horizon;
    if (flags.prior_shape)
        cfg.options.prior.shape = *flags.prior_shape;
    if (flags.prior_rate)
        cfg.options.prior.rate = *flags.prior_rate;
    if (flags.truncate_positive)
        cfg.options.truncate_positive = true;
    if (flags.density_grid)
        cfg.density_grid = *flags.density_grid;
    if (!flags.density_out.empty())
        cfg.density_out = flags.density_out;
    cfg.options.prior.validate();
    if (!(cfg.options.level > 0.0 && cfg.options.level < 1.0))
        throw ConfigError("infer: level must be in (0, 1)");
    if (cfg.io.format == OutputFormat::csv)
        throw ConfigError("infer: output is JSON only");
    if (cfg.density_grid > 0 && cfg.density_out.empty())
        throw ConfigError("infer: --density-grid needs --density-out");

    auto const path = read_increments(cfg.io.input, cfg.horizon);
    InferenceResult result;
    try
    {
        result = infer_volatility(path.increments, path.horizon, cfg.options);
    }
    catch (DegenerateError const& e)
    {
        json diag{{"error", "degenerate_inference"}, {"message", e.what()}, {"n", path.n},
                  {"horizon", path.horizon}};
        double const theta_hat = compute_mle(path);
        diag["theta_hat"] = theta_hat;
        auto const qv = estimate_jump_qv(path.increments,
                                         cfg.options.threshold.realize(path.increments));
        auto const qv_json = to_json(qv);
        diag["eta"] = qv_json["eta"];
        diag["jump_qv_hat"] = qv.jump_qv_hat;
        diag["flagged_count"] = qv.flagged.size();
        write_to(cfg.io.output, [&](std::ostream& os) { os << diag.dump(2) << '\n'; });
        std::cerr << "jumpvol infer: " << e.what() << '\n';
        return exit_degenerate;
    }

    write_to(cfg.io.output, [&](std::ostream& os) { os << to_json(result).dump(2) << '\n'; });
    if (cfg.density_grid > 0)
        write_density(cfg.density_out, result.posterior, cfg.density_grid, cfg.options.truncate_positive);
    return exit_ok;
}

//---------------------------------------------------------------------------//
// coverage
//---------------------------------------------------------------------------//

struct CoverageFlags
{
    CommonFlags common;
    std::optional<unsigned> workers;
    std::optional<std::size_t> reps;
};

int cmd_coverage(CoverageFlags const& flags)
{
    auto cfg = parse_coverage_config(config_or_empty(flags.common.config));
    apply_common(flags.common, cfg.io, &cfg.coverage.base_seed);
    if (flags.workers)
        cfg.workers = *flags.workers;
    if (flags.reps)
        cfg.coverage.reps = *flags.reps;
    cfg.coverage.validate();

    auto const rows = run_coverage(cfg.coverage, cfg.workers);
    write_to(cfg.io.output, [&](std::ostream& os) {
        if (cfg.io.format.value_or(OutputFormat::csv) == OutputFormat::csv)
        {
            write_coverage_csv(os, rows);
            return;
        }
        json arr = json::array();
        for (auto const& r : rows)
        {
            arr.push_back({{"lambda", r.lambda}, {"tau", r.tau}, {"n", r.n}, {"reps", r.reps},
                           {"coverage", r.coverage}, {"mean_width", r.mean_width},
                           {"mc_stderr", r.mc_stderr}, {"degenerate_count", r.degenerate_count}});
        }
        os << arr.dump(2) << '\n';
    });
    return exit_ok;
}

//---------------------------------------------------------------------------//
// diag
//---------------------------------------------------------------------------//

// One output row; n and mc_stderr are empty for aggregate statistics.
struct DiagRow
{
    std::optional<std::size_t> n;
    std::string statistic;
    double value = 0.0;
    std::optional<double> mc_stderr;
};

void write_diag(IoSpec const& io, std::vector<DiagRow> const& rows)
{
    write_to(io.output, [&](std::ostream& os) {
        if (io.format.value_or(OutputFormat::csv) == OutputFormat::csv)
        {
            os << "n,statistic,value,mc_stderr\n";
            for (auto const& r : rows)
            {
                os << (r.n ? std::to_string(*r.n) : std::string()) << ',' << r.statistic << ','
                   << format_double(r.value) << ','
                   << (r.mc_stderr ? format_double(*r.mc_stderr) : std::string()) << '\n';
            }
            return;
        }
        json arr = json::array();
        for (auto const& r : rows)
        {
            json j{{"statistic", r.statistic}, {"value", r.value}};
            j["n"] = r.n ? json(*r.n) : json(nullptr);
            j["mc_stderr"] = r.mc_stderr ? json(*r.mc_stderr) : json(nullptr);
            arr.push_back(j);
        }
        os << arr.dump(2) << '\n';
    });
}

struct DiagFlags
{
    CommonFlags common;
    std::string which;
    std::optional<unsigned> workers;
    std::optional<std::size_t> reps;
};

// The conditioning jump path for sandwich/mse: explicit, else drawn once.
JumpRealization conditioning_jumps(DiagConfig const& cfg)
{
    if (cfg.fixed_jumps)
    {
        cfg.fixed_jumps->validate(cfg.diffusion.horizon);
        return *cfg.fixed_jumps;
    }
    return simulate_jumps(cfg.jumps, cfg.diffusion.horizon, substream(cfg.seed, 0));
}

int cmd_diag(DiagFlags const& flags)
{
    auto cfg = parse_diag_config(config_or_empty(flags.common.config));
    apply_common(flags.common, cfg.io, &cfg.seed);
    if (flags.workers)
        cfg.options.workers = *flags.workers;
    if (flags.reps)
        cfg.reps = *flags.reps;

    std::vector<DiagRow> rows;
    if (flags.which == "bvm")
    {
        auto const table = bvm_convergence_check(
            cfg.diffusion, cfg.jumps, cfg.n_grid, cfg.reps ? cfg.reps : 200, cfg.seed, cfg.options);
        for (auto const& r : table.rows)
        {
            rows.push_back({r.n, "tv_gibbs", r.tv_gibbs_mean, r.tv_gibbs_stderr});
            rows.push_back({r.n, "tv_modified", r.tv_modified_mean, r.tv_modified_stderr});
            rows.push_back({r.n, "degenerate_count", static_cast<double>(r.degenerate), std::nullopt});
        }
        rows.push_back({std::nullopt, "tv_gibbs_decreasing", table.gibbs_decreasing ? 1.0 : 0.0, std::nullopt});
        rows.push_back({std::nullopt, "tv_modified_decreasing", table.modified_decreasing ? 1.0 : 0.0,
                        std::nullopt});
    }
    else if (flags.which == "sandwich")
    {
        double jump_qv = 0.0;
        std::optional<JumpRealization> jumps;
        if (cfg.jump_qv)
        {
            jump_qv = *cfg.jump_qv;
        }
        else
        {
            jumps = conditioning_jumps(cfg);
            jump_qv = bin_jumps(*jumps, cfg.diffusion.horizon, cfg.n).jump_qv;
        }
        auto const truth = TruthSummary::make(cfg.diffusion.theta_star, jump_qv, cfg.diffusion.horizon);
        double const nn = static_cast<double>(cfg.n);
        rows.push_back({cfg.n, "jump_qv", jump_qv, std::nullopt});
        rows.push_back({cfg.n, "sandwich_variance", sandwich_variance(truth, cfg.diffusion.horizon, cfg.n),
                        std::nullopt});
        rows.push_back({cfg.n, "cramer_rao", 2.0 * truth.theta_star * truth.theta_star / nn, std::nullopt});
        if (cfg.reps > 0)
        {
            if (cfg.jump_qv)
                throw ConfigError("diag sandwich: Monte Carlo needs fixed_jumps, not jump_qv");
            auto const rep = mse_oracle(cfg.diffusion, *jumps, cfg.n, cfg.reps, cfg.seed, cfg.options.workers);
            rows.push_back({cfg.n, "empirical_variance", rep.empirical_variance, rep.variance_stderr});
        }
    }
    else if (flags.which == "mse")
    {
        auto const jumps = conditioning_jumps(cfg);
        auto const rep = mse_oracle(
            cfg.diffusion, jumps, cfg.n, cfg.reps ? cfg.reps : 4000, cfg.seed, cfg.options.workers);
        rows.push_back({cfg.n, "theta_dagger", rep.theta_dagger, std::nullopt});
        rows.push_back({cfg.n, "empirical_mse", rep.empirical_mse, rep.mse_stderr});
        rows.push_back({cfg.n, "empirical_variance", rep.empirical_variance, rep.variance_stderr});
        rows.push_back({cfg.n, "exact_mse", rep.exact_mse, std::nullopt});
        rows.push_back({cfg.n, "mse_formula", rep.mse_formula, std::nullopt});
        rows.push_back({cfg.n, "sandwich_variance", rep.sandwich, std::nullopt});
        rows.push_back({cfg.n, "mse_formula_discrepancy", rep.mse_formula_discrepancy, std::nullopt});
        rows.push_back({cfg.n, "sandwich_discrepancy", rep.sandwich_discrepancy, std::nullopt});
    }
    else if (flags.which == "qvrate")
    {
        auto const result = qv_error_rate(cfg.diffusion, cfg.jumps, cfg.n_grid, cfg.reps ? cfg.reps : 500,
                                          cfg.seed, cfg.options.threshold, cfg.options.workers);
        for (auto const& p : result.points)
            rows.push_back({p.n, "mae", p.mae, p.mae_stderr});
        if (result.slope)
            rows.push_back({std::nullopt, "slope", *result.slope, std::nullopt});
    }
    else
    {
        throw ConfigError("diag: unknown subcommand '" + flags.which + "'");
    }
    write_diag(cfg.io, rows);
    return exit_ok;
}

int run_guarded(std::function<int()> const& fn, char const* name)
{
    try
    {
        return fn();
    }
    catch (ConfigError const& e)
    {
        std::cerr << "jumpvol " << name << ": configuration error: " << e.what() << '\n';
        return exit_config;
    }
    catch (InsufficientDataError const& e)
    {
        std::cerr << "jumpvol " << name << ": configuration error: " << e.what() << '\n';
        return exit_config;
    }
    catch (IoError const& e)
    {
        std::cerr << "jumpvol " << name << ": I/O error: " << e.what() << '\n';
        return exit_io;
    }
    catch (DegenerateError const& e)
    {
        std::cerr << "jumpvol " << name << ": degenerate inference: " << e.what() << '\n';
        return exit_degenerate;
    }
    catch (std::exception const& e)
    {
        std::cerr << "jumpvol " << name << ": " << e.what() << '\n';
        return exit_internal;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Volatility inference for discretely observed jump diffusions"};
    app.require_subcommand(1);

    SimulateFlags sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a jump-diffusion path to CSV");
    add_common(sim_cmd, sim.common);
    sim_cmd->add_option("--n", sim.n, "Number of increments");
    sim_cmd->add_flag("--with-truth", sim.with_truth, "Include the mu_i jump column");

    InferFlags inf;
    auto* inf_cmd = app.add_subcommand("infer", "Posterior inference on increments from CSV");
    add_common(inf_cmd, inf.common, false);
    inf_cmd->add_option("--input", inf.input, "Increments CSV ('-' for stdin)");
    inf_cmd->add_option("--threshold", inf.threshold, "iqr:<c> or fixed:<eta> (fixed:inf disables)");
    inf_cmd->add_option("--level", inf.level, "Credible level");
    inf_cmd->add_option("--horizon", inf.horizon, "Observation horizon T (default: last t_i)");
    inf_cmd->add_option("--prior-shape", inf.prior_shape, "Inverse-gamma prior shape");
    inf_cmd->add_option("--prior-rate", inf.prior_rate, "Inverse-gamma prior rate");
    inf_cmd->add_flag("--truncate-positive", inf.truncate_positive,
                      "Restrict the shifted posterior to theta > 0 and renormalize");
    inf_cmd->add_option("--density-grid", inf.density_grid, "Number of density rows to write");
    inf_cmd->add_option("--density-out", inf.density_out, "Density CSV path");

    CoverageFlags cov;
    auto* cov_cmd = app.add_subcommand("coverage", "Monte Carlo coverage over a (lambda, tau, n) grid");
    add_common(cov_cmd, cov.common);
    cov_cmd->add_option("--workers", cov.workers, "Worker threads (0 = all cores)");
    cov_cmd->add_option("--reps", cov.reps, "Replications per cell");

    DiagFlags diag;
    auto* diag_cmd = app.add_subcommand("diag", "Asymptotic diagnostics");
    diag_cmd->add_option("which", diag.which, "bvm | sandwich | mse | qvrate")
        ->required()
        ->check(CLI::IsMember({"bvm", "sandwich", "mse", "qvrate"}));
    add_common(diag_cmd, diag.common);
    diag_cmd->add_option("--workers", diag.workers, "Worker threads (0 = all cores)");
    diag_cmd->add_option("--reps", diag.reps, "Monte Carlo replications");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    if (sim_cmd->parsed())
        return run_guarded([&] { return cmd_simulate(sim); }, "simulate");
    if (inf_cmd->parsed())
        return run_guarded([&] { return cmd_infer(inf); }, "infer");
    if (cov_cmd->parsed())
        return run_guarded([&] { return cmd_coverage(cov); }, "coverage");
    return run_guarded([&] { return cmd_diag(diag); }, "diag");
}
