#ifndef BIODIFF_CORE_AGENTS_HPP
#define BIODIFF_CORE_AGENTS_HPP

#include "core/backend.hpp"
#include "core/mesh.hpp"

#include <cstdint>
#include <vector>

namespace biodiff {

/// A discrete cell agent acting as a per-voxel source/sink. Rates and the
/// saturation (target) densities are per-substrate vectors.
struct CellAgent {
    std::int64_t id = 0;
    std::array<double, 3> position{};    // microns
    double volume = 0.0;                 // microns^3
    std::vector<double> secretion_rates; // 1/min
    std::vector<double> uptake_rates;    // 1/min
    std::vector<double> saturation_densities;
    index_t voxel = 0;                   // cached containing voxel

    bool operator==(const CellAgent&) const = default;
};

/// Agent container plus a voxel -> agents grouping used by the reaction
/// step. Within a voxel agents are ordered by ascending id so that the
/// sequential implicit updates are reproducible; across voxels updates are
/// independent and may run in parallel.
class AgentPopulation {
public:
    AgentPopulation() = default;

    /// Validates rate signs/lengths and caches voxels. Throws on negative
    /// volume/rates, duplicate ids, mismatched vector lengths, or positions
    /// outside the mesh.
    AgentPopulation(std::vector<CellAgent> agents, const CartesianMesh& mesh, int substrates);

    std::size_t size() const { return agents_.size(); }
    bool empty() const { return agents_.empty(); }
    const std::vector<CellAgent>& agents() const { return agents_; }

    /// Agents of one voxel, ascending id. Entries are (voxel, agent indices).
    const std::vector<std::pair<index_t, std::vector<std::size_t>>>& grouping() const
    {
        return groups_;
    }

    /// Overwrite an agent's position (id must exist). The caller is expected
    /// to rebuild the voxel grouping before the next reaction step.
    void set_position(std::int64_t id, const std::array<double, 3>& position);

    /// Recomputes every cached voxel from the agent positions and rebuilds
    /// the grouping index. Throws std::domain_error if any position left
    /// the domain.
    void rebuild_voxel_grouping(const CartesianMesh& mesh);

    bool operator==(const AgentPopulation&) const = default;

private:
    void validate(const CartesianMesh& mesh, int substrates) const;

    std::vector<CellAgent> agents_;
    std::vector<std::pair<index_t, std::vector<std::size_t>>> groups_; // sorted by voxel
};

/// Applies one backward-Euler reaction update per agent to its containing
/// voxel:  rho <- (rho + dt*f*S.*rho_target) ./ (1 + dt*f*(S + U)), with
/// f = volume / voxel_volume. Agents sharing a voxel are applied
/// sequentially in ascending-id order; distinct voxels are independent and
/// are dispatched across the pool.
void cell_sources_sinks_step(DensityField& field, const AgentPopulation& agents,
                             const CartesianMesh& mesh, double dt, WorkerPool& pool);

} // namespace biodiff

#endif
