#ifndef BIODIFF_CORE_CONFIG_HPP
#define BIODIFF_CORE_CONFIG_HPP

#include "core/agents.hpp"
#include "core/mesh.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace biodiff {

struct SubstrateConfig {
    std::string name;
    double diffusion_coefficient = 0.0;
    double decay_rate = 0.0;
    double initial_condition = 0.0;
    std::optional<double> dirichlet_boundary_value; // clamp on all boundary voxels

    bool operator==(const SubstrateConfig&) const = default;
};

/// Inline agent source: `count` identical agents placed by a rule instead of
/// an external table. Rates are comma lists aligned with the substrate
/// declaration order; `random` placement is uniform over the domain from the
/// given seed, `center` puts every agent at the domain center.
struct InlineAgentsConfig {
    std::int64_t count = 0;
    std::string placement = "random"; // "random" | "center"
    std::uint64_t seed = 0;
    double volume = 2494.0; // microns^3
    std::vector<double> secretion_rates;
    std::vector<double> uptake_rates;
    std::vector<double> saturation_densities;

    bool operator==(const InlineAgentsConfig&) const = default;
};

/// Parsed simulation configuration. Field names follow the XML vocabulary;
/// see parse_config for the file schema.
struct SimConfig {
    double x_min = -1000.0, x_max = 1000.0;
    double y_min = -1000.0, y_max = 1000.0;
    double z_min = -1000.0, z_max = 1000.0;
    double dx = 20.0, dy = 20.0, dz = 20.0;

    double max_time = 60.0; // minutes
    double dt_diff = 0.01;
    double dt_mech = 0.1;
    double dt_cell = 6.0;

    bool parallel_backend = false;
    int num_threads = 1;

    std::vector<SubstrateConfig> substrates;

    std::optional<std::string> agent_file;
    std::optional<InlineAgentsConfig> inline_agents;

    double snapshot_interval = 60.0; // minutes; <= 0 disables snapshots
    std::string output_folder = "output";

    /// Checks every invariant (mesh constructible, unique substrate names,
    /// positive integral step ratios, worker count, agent rate lists).
    /// Throws config_error naming the offending field.
    void validate() const;

    CartesianMesh mesh() const;
    int substrate_count() const { return static_cast<int>(substrates.size()); }

    bool operator==(const SimConfig&) const = default;
};

/// Parses the XML configuration file.
///
///   <simulation>
///     <domain> x_min x_max y_min y_max z_min z_max dx dy dz </domain>
///     <overall> max_time dt_diff dt_mech dt_cell </overall>
///     <parallel> backend (serial|parallel), num_threads </parallel>
///     <microenvironment> <substrate> name diffusion_coefficient decay_rate
///          initial_condition dirichlet_boundary_value? </substrate>* </microenvironment>
///     <agents> file | count placement seed volume secretion_rates
///          uptake_rates saturation_densities </agents>
///     <save> snapshot_interval folder </save>
///   </simulation>
///
/// Every element is optional except at least one substrate; omitted values
/// take the defaults above. Unknown elements and attributes are hard errors
/// naming the element path; malformed XML reports the line number.
SimConfig parse_config(const std::string& path);

/// Same grammar, from an in-memory string (used by tests and the C API).
SimConfig parse_config_text(const std::string& xml_text);

/// Canonical XML form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& config);

void save_config(const SimConfig& config, const std::string& path);

/// Loads the delimited agent table. Header:
///   id,x,y,z,volume,S_<name>,U_<name>,target_<name>[,...per substrate]
/// Errors (duplicate id, out-of-domain position, negative rate, ragged row)
/// name the offending file line.
AgentPopulation load_agents(const std::string& path, const CartesianMesh& mesh,
                            const std::vector<SubstrateConfig>& substrates);

void save_agents(const AgentPopulation& agents,
                 const std::vector<SubstrateConfig>& substrates, const std::string& path);

/// Builds the microenvironment for a config: mesh, substrate parameters,
/// initial conditions, and boundary Dirichlet clamps.
Microenvironment build_microenvironment(const SimConfig& config);

/// Materializes the config's agent source (file or inline placement).
AgentPopulation build_agents(const SimConfig& config, const CartesianMesh& mesh);

} // namespace biodiff

#endif
