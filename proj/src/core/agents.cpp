#include "core/agents.hpp"

#include "core/errors.hpp"
#include "core/text.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace biodiff {

AgentPopulation::AgentPopulation(std::vector<CellAgent> agents, const CartesianMesh& mesh,
                                 int substrates)
    : agents_(std::move(agents))
{
    validate(mesh, substrates);
    rebuild_voxel_grouping(mesh);
}

void AgentPopulation::validate(const CartesianMesh& mesh, int substrates) const
{
    std::unordered_set<std::int64_t> ids;
    ids.reserve(agents_.size());
    for (const auto& a : agents_) {
        if (!ids.insert(a.id).second)
            throw std::invalid_argument("duplicate agent id " + format_int(a.id));
        if (!(a.volume > 0.0))
            throw std::invalid_argument("agent " + format_int(a.id) + " has non-positive volume");
        const auto S = static_cast<std::size_t>(substrates);
        if (a.secretion_rates.size() != S || a.uptake_rates.size() != S ||
            a.saturation_densities.size() != S)
            throw std::invalid_argument("agent " + format_int(a.id) +
                                        " rate vectors do not match the substrate count");
        for (std::size_t s = 0; s < S; ++s) {
            if (a.secretion_rates[s] < 0.0 || a.uptake_rates[s] < 0.0 ||
                a.saturation_densities[s] < 0.0)
                throw std::invalid_argument("agent " + format_int(a.id) +
                                            " has a negative rate or saturation density");
        }
        if (!mesh.contains(a.position))
            throw std::domain_error("agent " + format_int(a.id) + " position outside the domain");
    }
}

void AgentPopulation::set_position(std::int64_t id, const std::array<double, 3>& position)
{
    for (auto& a : agents_) {
        if (a.id == id) {
            a.position = position;
            return;
        }
    }
    throw std::invalid_argument("no agent with id " + format_int(id));
}

void AgentPopulation::rebuild_voxel_grouping(const CartesianMesh& mesh)
{
    for (auto& a : agents_) a.voxel = mesh.nearest_voxel(a.position);

    std::vector<std::size_t> order(agents_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        if (agents_[lhs].voxel != agents_[rhs].voxel) return agents_[lhs].voxel < agents_[rhs].voxel;
        return agents_[lhs].id < agents_[rhs].id;
    });

    groups_.clear();
    for (std::size_t i : order) {
        if (groups_.empty() || groups_.back().first != agents_[i].voxel)
            groups_.push_back({agents_[i].voxel, {}});
        groups_.back().second.push_back(i);
    }
}

void cell_sources_sinks_step(DensityField& field, const AgentPopulation& agents,
                             const CartesianMesh& mesh, double dt, WorkerPool& pool)
{
    if (!(dt > 0.0)) throw std::invalid_argument("reaction step size must be positive");
    if (agents.empty()) return;

    const int S = field.substrates;
    const double inv_voxel_volume = 1.0 / mesh.voxel_volume();
    const index_t voxel_count = field.voxel_count();
    const auto& groups = agents.grouping();
    const auto& all = agents.agents();
    double* values = field.values.data();

    for (const auto& [voxel, idxs] : groups) {
        (void)idxs;
        if (voxel < 0 || voxel >= voxel_count)
            throw state_error("agent voxel " + format_int(voxel) +
                              " outside the mesh; rebuild the voxel grouping");
    }

    pool.parallel_for(static_cast<std::int64_t>(groups.size()),
                      [&, values](std::int64_t lo, std::int64_t hi) {
                          for (std::int64_t g = lo; g < hi; ++g) {
                              const auto& [voxel, idxs] = groups[static_cast<std::size_t>(g)];
                              double* rho = values + static_cast<std::size_t>(voxel) * S;
                              for (std::size_t idx : idxs) {
                                  const CellAgent& a = all[idx];
                                  const double f = dt * a.volume * inv_voxel_volume;
                                  for (int s = 0; s < S; ++s) {
                                      const double sec = a.secretion_rates[s];
                                      const double upt = a.uptake_rates[s];
                                      rho[s] = (rho[s] + f * sec * a.saturation_densities[s]) /
                                               (1.0 + f * (sec + upt));
                                  }
                              }
                          }
                      });
}

} // namespace biodiff
