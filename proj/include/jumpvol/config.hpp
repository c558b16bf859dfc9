#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jumpvol/diagnostics.hpp"
#include "jumpvol/mc_harness.hpp"
#include "jumpvol/sde_sim.hpp"
#include "jumpvol/vol_posterior.hpp"

namespace jumpvol
{

inline constexpr Seed default_seed = 20190101;

enum class OutputFormat
{
    csv,
    json
};

struct IoSpec
{
    std::string input = "-";
    std::string output = "-";
    std::optional<OutputFormat> format;
};

struct SimulateConfig
{
    DiffusionSpec diffusion;
    JumpSpec jumps;
    std::size_t n = 5000;
    Seed seed = default_seed;
    bool with_truth = false;
    IoSpec io;
};

struct InferConfig
{
    InferenceOptions options;
    std::optional<double> horizon;
    std::size_t density_grid = 0;
    std::string density_out;
    IoSpec io;
};

struct CoverageRunConfig
{
    CoverageConfig coverage;
    unsigned workers = 1;
    IoSpec io;
};

struct DiagConfig
{
    DiffusionSpec diffusion;
    JumpSpec jumps;
    std::vector<std::size_t> n_grid{1000, 4000, 16000};
    std::size_t n = 5000;
    std::size_t reps = 0;  //!< 0 picks the subcommand's default
    Seed seed = default_seed;
    DiagnosticOptions options;
    std::optional<double> jump_qv;               //!< sandwich: [J] to plug in
    std::optional<JumpRealization> fixed_jumps;  //!< mse: conditioning path
    IoSpec io;
};

// Each parser rejects unknown keys with ConfigError and fills defaults for
// missing ones.
DiffusionSpec parse_diffusion(nlohmann::json const& j);
JumpSpec parse_jumps(nlohmann::json const& j);
InverseGammaParams parse_prior(nlohmann::json const& j);
JumpRealization parse_jump_realization(nlohmann::json const& j);
IoSpec parse_io(nlohmann::json const& j);

SimulateConfig parse_simulate_config(nlohmann::json const& j);
InferConfig parse_infer_config(nlohmann::json const& j);
CoverageRunConfig parse_coverage_config(nlohmann::json const& j);
DiagConfig parse_diag_config(nlohmann::json const& j);

// Reads and parses a JSON file; IoError if unreadable, ConfigError if malformed.
nlohmann::json load_json_file(std::string const& path);

// JUMPVOL_SEED, when set, replaces \c seed.
Seed seed_from_env(Seed seed);

nlohmann::json to_json(QvEstimate const& qv);
nlohmann::json to_json(InferenceResult const& result);

}  // namespace jumpvol
