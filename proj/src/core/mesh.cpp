#include "core/mesh.hpp"

#include "core/errors.hpp"
#include "core/text.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace biodiff {

CartesianMesh CartesianMesh::from_bounds(double x_min, double x_max,
                                         double y_min, double y_max,
                                         double z_min, double z_max,
                                         double dx, double dy, double dz)
{
    if (!(dx > 0.0) || !(dy > 0.0) || !(dz > 0.0))
        throw config_error("mesh spacing must be positive (dx=" + format_double(dx) +
                           " dy=" + format_double(dy) + " dz=" + format_double(dz) + ")");

    auto count = [](double lo, double hi, double h, const char* axis) {
        const int n = static_cast<int>(std::llround((hi - lo) / h));
        if (n < 1)
            throw config_error(std::string("domain extent along ") + axis +
                               " is smaller than one voxel");
        return n;
    };

    CartesianMesh m;
    m.dx = dx;
    m.dy = dy;
    m.dz = dz;
    m.nx = count(x_min, x_max, dx, "x");
    m.ny = count(y_min, y_max, dy, "y");
    m.nz = count(z_min, z_max, dz, "z");
    m.x_min = x_min;
    m.y_min = y_min;
    m.z_min = z_min;
    // Snap upper bounds so voxel boxes tile the domain exactly.
    m.x_max = x_min + m.nx * dx;
    m.y_max = y_min + m.ny * dy;
    m.z_max = z_min + m.nz * dz;
    return m;
}

index_t CartesianMesh::voxel_index(int i, int j, int k) const
{
    if (i < 0 || i >= nx || j < 0 || j >= ny || k < 0 || k >= nz)
        throw std::out_of_range("voxel index (" + format_int(i) + "," + format_int(j) + "," +
                                format_int(k) + ") outside mesh " + format_int(nx) + "x" +
                                format_int(ny) + "x" + format_int(nz));
    return static_cast<index_t>(i) + static_cast<index_t>(j) * nx +
           static_cast<index_t>(k) * nx * ny;
}

std::array<int, 3> CartesianMesh::voxel_ijk(index_t n) const
{
    if (n < 0 || n >= voxel_count())
        throw std::out_of_range("flat voxel index " + format_int(n) + " outside mesh");
    const index_t plane = static_cast<index_t>(nx) * ny;
    const int k = static_cast<int>(n / plane);
    const index_t rem = n % plane;
    return {static_cast<int>(rem % nx), static_cast<int>(rem / nx), k};
}

bool CartesianMesh::contains(const std::array<double, 3>& p) const
{
    return p[0] >= x_min && p[0] <= x_max && p[1] >= y_min && p[1] <= y_max &&
           p[2] >= z_min && p[2] <= z_max;
}

index_t CartesianMesh::nearest_voxel(const std::array<double, 3>& p) const
{
    if (!contains(p))
        throw std::domain_error("position (" + format_double(p[0]) + "," + format_double(p[1]) +
                                "," + format_double(p[2]) + ") outside the simulation domain");

    auto cell = [](double v, double lo, double h, int n) {
        int i = static_cast<int>(std::floor((v - lo) / h));
        // Upper-boundary positions clamp to the last voxel.
        return std::clamp(i, 0, n - 1);
    };

    const int i = cell(p[0], x_min, dx, nx);
    const int j = cell(p[1], y_min, dy, ny);
    const int k = cell(p[2], z_min, dz, nz);
    return voxel_index(i, j, k);
}

bool CartesianMesh::is_boundary_voxel(int i, int j, int k) const
{
    return i == 0 || i == nx - 1 || j == 0 || j == ny - 1 || k == 0 || k == nz - 1;
}

bool DensityField::all_finite() const
{
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
}

DensityField translate_vector_to_array(const NestedDensity& nested)
{
    DensityField field;
    if (nested.empty()) return field;

    const std::size_t substrates = nested.front().size();
    field.substrates = static_cast<int>(substrates);
    field.values.reserve(nested.size() * substrates);
    for (std::size_t v = 0; v < nested.size(); ++v) {
        if (nested[v].size() != substrates)
            throw std::invalid_argument("ragged nested density: voxel " + format_int(v) +
                                        " holds " + format_int(nested[v].size()) +
                                        " substrates, expected " + format_int(substrates));
        field.values.insert(field.values.end(), nested[v].begin(), nested[v].end());
    }
    return field;
}

NestedDensity translate_array_to_vector(const DensityField& field)
{
    if (field.substrates <= 0) {
        if (!field.values.empty())
            throw std::invalid_argument("density field with values but no substrate count");
        return {};
    }
    if (field.values.size() % field.substrates != 0)
        throw std::invalid_argument("density array length is not a multiple of the substrate count");

    const index_t voxels = field.voxel_count();
    NestedDensity nested(static_cast<std::size_t>(voxels));
    for (index_t v = 0; v < voxels; ++v) {
        auto begin = field.values.begin() + v * field.substrates;
        nested[v].assign(begin, begin + field.substrates);
    }
    return nested;
}

void DirichletMap::add(index_t voxel, std::vector<std::uint8_t> mask,
                       std::vector<double> values, index_t voxel_count, int substrates)
{
    if (voxel < 0 || voxel >= voxel_count)
        throw std::out_of_range("Dirichlet voxel " + format_int(voxel) + " outside mesh");
    if (mask.size() != static_cast<std::size_t>(substrates) ||
        values.size() != static_cast<std::size_t>(substrates))
        throw std::invalid_argument("Dirichlet mask/value length must equal the substrate count");

    auto it = std::lower_bound(entries_.begin(), entries_.end(), voxel,
                               [](const DirichletEntry& e, index_t v) { return e.voxel < v; });
    if (it != entries_.end() && it->voxel == voxel) {
        for (int s = 0; s < substrates; ++s) {
            if (mask[s]) {
                it->mask[s] = 1;
                it->values[s] = values[s];
            }
        }
        return;
    }
    entries_.insert(it, DirichletEntry{voxel, std::move(mask), std::move(values)});
}

void DirichletMap::add_single(index_t voxel, int substrate, double value,
                              index_t voxel_count, int substrates)
{
    if (substrate < 0 || substrate >= substrates)
        throw std::invalid_argument("Dirichlet substrate index out of range");
    std::vector<std::uint8_t> mask(substrates, 0);
    std::vector<double> values(substrates, 0.0);
    mask[substrate] = 1;
    values[substrate] = value;
    add(voxel, std::move(mask), std::move(values), voxel_count, substrates);
}

Microenvironment Microenvironment::create(const CartesianMesh& mesh,
                                          std::vector<SubstrateParams> substrates)
{
    if (substrates.empty())
        throw config_error("a microenvironment needs at least one substrate");
    for (const auto& s : substrates) {
        if (s.diffusion_coefficient < 0.0)
            throw config_error("substrate '" + s.name + "' has negative diffusion coefficient");
        if (s.decay_rate < 0.0)
            throw config_error("substrate '" + s.name + "' has negative decay rate");
    }

    Microenvironment env;
    env.mesh = mesh;
    env.substrates = std::move(substrates);

    std::vector<double> per_voxel(env.substrates.size());
    for (std::size_t s = 0; s < env.substrates.size(); ++s)
        per_voxel[s] = env.substrates[s].initial_condition;
    NestedDensity nested(static_cast<std::size_t>(mesh.voxel_count()), per_voxel);
    env.field = translate_vector_to_array(nested);
    return env;
}

} // namespace biodiff
