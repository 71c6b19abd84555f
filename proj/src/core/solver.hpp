#ifndef BIODIFF_CORE_SOLVER_HPP
#define BIODIFF_CORE_SOLVER_HPP

#include "core/backend.hpp"
#include "core/mesh.hpp"

#include <optional>
#include <span>

namespace biodiff {

enum class Axis { x = 0, y = 1, z = 2 };

/// Precomputed Thomas factorization for the backward-Euler 1-D system along
/// one axis, batched over substrates. The tridiagonal matrix per substrate is
///
///   interior row:  [-q, 1 + dt*lambda/dims + 2q, -q]     q = dt*D/h^2
///   boundary row:  [    1 + dt*lambda/dims +  q, -q]     (zero-flux)
///
/// Forward elimination depends only on the matrix, so the reciprocal pivots
/// (denom_inv) and back-substitution factors (c_back = q / denom) are
/// computed once per (axis, dt) and reused every step. Arrays are indexed
/// [i*S + s] to match the density layout.
struct SolverWorkspace {
    Axis axis = Axis::x;
    int n = 0;          // line length along the axis
    int substrates = 0;
    double dt = 0.0;
    int dims = 0;       // how many sweeps the decay rate is split across
    std::vector<double> off_diag;  // q per substrate, length S
    std::vector<double> denom_inv; // length n*S, all finite and nonzero
    std::vector<double> c_back;    // length n*S (last row zero)
};

/// Builds the workspace for one axis. dims is the number of directional
/// sweeps in the full step (the decay rate enters as lambda/dims per sweep).
/// Throws std::invalid_argument for dt <= 0 or dims < 1.
SolverWorkspace precompute_thomas_coefficients(const CartesianMesh& mesh,
                                               std::span<const SubstrateParams> substrates,
                                               double dt, Axis axis, int dims);

/// Solves the tridiagonal system in place on one line of n*S values laid out
/// like a contiguous x-line ([i*S + s]). Throws std::invalid_argument on a
/// length mismatch.
void thomas_solve(const SolverWorkspace& workspace, std::span<double> line);

/// Applies thomas_solve to every grid line parallel to the workspace axis.
/// Lines are disjoint, so the result is bitwise independent of the order in
/// which lines are processed and of the pool's worker count.
/// Throws state_error when the workspace does not match the field/mesh.
void diffusion_sweep(DensityField& field, const CartesianMesh& mesh,
                     const SolverWorkspace& workspace, WorkerPool& pool);

/// Re-imposes clamp values on every masked (voxel, substrate) pair.
void apply_dirichlet_conditions(DensityField& field, const DirichletMap& dirichlet);

/// Per-axis workspaces sharing one dt. The x-axis is always swept (a
/// length-1 x system still carries its share of the decay); y and z are
/// swept only when the mesh extends along them, and dims counts the sweeps
/// actually performed so the decay split multiplies back to the full rate.
struct SolverWorkspaces {
    std::optional<SolverWorkspace> x, y, z;
    int dims = 0;
    double dt = 0.0;

    static SolverWorkspaces build(const CartesianMesh& mesh,
                                  std::span<const SubstrateParams> substrates, double dt);
};

/// One diffusion-decay step: x sweep, y sweep, z sweep (active axes only),
/// then Dirichlet re-imposition.
void diffuse_decay_step(Microenvironment& env, const SolverWorkspaces& workspaces,
                        WorkerPool& pool);

/// y += a .* x elementwise (all three spans the same length).
void axpy(std::span<double> y, std::span<const double> a, std::span<const double> x);
/// y -= a .* x elementwise.
void naxpy(std::span<double> y, std::span<const double> a, std::span<const double> x);

} // namespace biodiff

#endif
