#ifndef MDCSIM_CONFIG_HPP
#define MDCSIM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdcsim/edgesim.hpp"
#include "mdcsim/geometry.hpp"
#include "mdcsim/mobility.hpp"
#include "mdcsim/placement.hpp"

namespace mdcsim {

struct SyntheticMapParams {
    double width = 3000.0;
    double height = 3000.0;
    int n_entries = 20;
    int n_areas = 12;
    int n_hospitals = 9;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything one experiment needs; a config file plus a seed reproduces
/// the whole pipeline byte for byte.
struct RunConfig {
    std::optional<std::filesystem::path> map_file;  ///< wins over synthetic
    SyntheticMapParams synthetic;

    MobilityConfig mobility;

    int grid_resolution = 40;
    double grid_window = 60.0;
    std::size_t n_aps = 30;
    std::size_t n_mdcs = 3;

    std::vector<ScenarioTag> scenarios = {ScenarioTag::C3, ScenarioTag::H1,
                                          ScenarioTag::H3, ScenarioTag::H9};
    std::vector<ServiceSpec> services = default_services();
    MdcConfig mdc;
    PowerModel power;
    SimParams sim{36000.0};  ///< full-length run matching the mobility horizon

    double warmup_s = 15000.0;
    std::filesystem::path out_dir = "out";

    void validate() const;  ///< throws ConfigError naming the bad key
};

/// Parses the JSON config file. Unknown top-level keys and malformed values
/// throw ConfigError naming the key; absent keys keep their defaults.
RunConfig load_run_config(const std::filesystem::path& path);

/// Round-trips through the same schema load_run_config reads.
std::string run_config_to_json(const RunConfig& cfg);

/// FNV-1a over a file's bytes; used for run-manifest input hashes.
std::uint64_t hash_file(const std::filesystem::path& path);

/// manifest.json: full config echo, seed, and a content hash per input
/// file — enough to detect any drift between two runs.
void write_run_manifest(const RunConfig& cfg,
                        const std::vector<std::filesystem::path>& inputs,
                        const std::filesystem::path& path);

}  // namespace mdcsim

#endif
