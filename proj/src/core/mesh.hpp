#ifndef BIODIFF_CORE_MESH_HPP
#define BIODIFF_CORE_MESH_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace biodiff {

using index_t = std::int64_t;

/// Uniform Cartesian voxel mesh. Voxel (i,j,k) covers the axis-aligned box
/// [x_min + i*dx, x_min + (i+1)*dx) x ... and is addressed by the flat index
/// i + j*nx + k*nx*ny.
struct CartesianMesh {
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;
    double z_min = 0.0, z_max = 0.0;
    double dx = 0.0, dy = 0.0, dz = 0.0; // voxel spacing, microns
    int nx = 0, ny = 0, nz = 0;          // voxel counts per axis

    /// Voxel counts are rounded from the requested extent and the upper
    /// bounds snapped to x_min + nx*dx (etc.) so that the voxel boxes tile
    /// the domain exactly. Throws config_error on non-positive spacing or
    /// empty extent.
    static CartesianMesh from_bounds(double x_min, double x_max,
                                     double y_min, double y_max,
                                     double z_min, double z_max,
                                     double dx, double dy, double dz);

    index_t voxel_count() const { return static_cast<index_t>(nx) * ny * nz; }
    double voxel_volume() const { return dx * dy * dz; }

    /// Bounds-checked flat index of voxel (i,j,k); throws std::out_of_range.
    index_t voxel_index(int i, int j, int k) const;

    /// Inverse of voxel_index; throws std::out_of_range for bad flat indices.
    std::array<int, 3> voxel_ijk(index_t n) const;

    /// Flat index of the voxel whose box contains `position` (microns).
    /// Positions exactly on the upper boundary clamp to the last voxel;
    /// anything else outside the domain throws std::domain_error.
    index_t nearest_voxel(const std::array<double, 3>& position) const;

    bool contains(const std::array<double, 3>& position) const;

    /// Center coordinate of voxel index `i` along an axis (0=x, 1=y, 2=z).
    double center_x(int i) const { return x_min + (i + 0.5) * dx; }
    double center_y(int j) const { return y_min + (j + 0.5) * dy; }
    double center_z(int k) const { return z_min + (k + 0.5) * dz; }

    bool is_boundary_voxel(int i, int j, int k) const;

    bool operator==(const CartesianMesh&) const = default;
};

/// Flat substrate density state: voxel-major, the S substrate values of a
/// voxel stored contiguously. values[n*substrates + s] is substrate s in
/// flat voxel n.
struct DensityField {
    std::vector<double> values;
    int substrates = 0;

    DensityField() = default;
    DensityField(index_t voxel_count, int substrate_count, double fill = 0.0)
        : values(static_cast<std::size_t>(voxel_count) * substrate_count, fill),
          substrates(substrate_count)
    {
    }

    index_t voxel_count() const
    {
        return substrates == 0 ? 0 : static_cast<index_t>(values.size()) / substrates;
    }

    double& at(index_t voxel, int substrate)
    {
        return values[static_cast<std::size_t>(voxel) * substrates + substrate];
    }
    double at(index_t voxel, int substrate) const
    {
        return values[static_cast<std::size_t>(voxel) * substrates + substrate];
    }

    bool all_finite() const;

    bool operator==(const DensityField&) const = default;
};

/// "Vector of vectors" host layout: one per-substrate vector per voxel.
using NestedDensity = std::vector<std::vector<double>>;

/// Flatten a nested density into the voxel-major array layout.
/// Throws std::invalid_argument on ragged inner vectors.
DensityField translate_vector_to_array(const NestedDensity& nested);

/// Inverse of translate_vector_to_array.
NestedDensity translate_array_to_vector(const DensityField& field);

/// Per-substrate physical parameters of the diffusion-decay operator.
struct SubstrateParams {
    std::string name;
    double diffusion_coefficient = 0.0; // microns^2 / min
    double decay_rate = 0.0;            // 1 / min
    double initial_condition = 0.0;

    bool operator==(const SubstrateParams&) const = default;
};

/// One clamped voxel: which substrates are held fixed and at what values.
struct DirichletEntry {
    index_t voxel = 0;
    std::vector<std::uint8_t> mask; // length S, nonzero = clamped
    std::vector<double> values;     // length S

    bool operator==(const DirichletEntry&) const = default;
};

/// Set of voxels whose masked substrate values are re-imposed after every
/// diffusion step. Entries are kept sorted by voxel with no duplicates;
/// adding an existing voxel merges masks (later adds win per substrate).
class DirichletMap {
public:
    void add(index_t voxel, std::vector<std::uint8_t> mask, std::vector<double> values,
             index_t voxel_count, int substrates);

    /// Clamp one substrate in one voxel, merging into any existing entry.
    void add_single(index_t voxel, int substrate, double value,
                    index_t voxel_count, int substrates);

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    const std::vector<DirichletEntry>& entries() const { return entries_; }

    bool operator==(const DirichletMap&) const = default;

private:
    std::vector<DirichletEntry> entries_; // sorted by voxel, unique
};

/// The simulated microenvironment: mesh geometry, substrate parameters,
/// the density state, and the Dirichlet clamp set.
struct Microenvironment {
    CartesianMesh mesh;
    std::vector<SubstrateParams> substrates;
    DensityField field;
    DirichletMap dirichlet;

    int substrate_count() const { return static_cast<int>(substrates.size()); }

    /// Build with every voxel at its substrate's initial condition. The
    /// initial state is assembled as a nested density and flattened, the
    /// same translation path used when ingesting external data.
    static Microenvironment create(const CartesianMesh& mesh,
                                   std::vector<SubstrateParams> substrates);
};

} // namespace biodiff

#endif
