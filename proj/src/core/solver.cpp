#include "core/solver.hpp"

#include "core/errors.hpp"
#include "core/text.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace biodiff {

namespace {

// Per-element Thomas updates. All sweep paths and thomas_solve itself funnel
// through these, so a grid sweep is bitwise identical to gathering each line
// and solving it standalone.
inline double fwd_first(double v, double dinv) { return v * dinv; }
inline double fwd(double v, double prev, double q, double dinv) { return (v + q * prev) * dinv; }
inline double bwd(double v, double next, double cb) { return v + cb * next; }

// Voxel width of the i-chunks used to tile y/z sweeps. Small enough to give
// the pool work even on flat (nz = 1) meshes, large enough to stream rows.
constexpr std::int64_t kChunkVoxels = 64;

int axis_count(const CartesianMesh& mesh, Axis axis)
{
    switch (axis) {
        case Axis::x: return mesh.nx;
        case Axis::y: return mesh.ny;
        case Axis::z: return mesh.nz;
    }
    return 0;
}

double axis_spacing(const CartesianMesh& mesh, Axis axis)
{
    switch (axis) {
        case Axis::x: return mesh.dx;
        case Axis::y: return mesh.dy;
        case Axis::z: return mesh.dz;
    }
    return 0.0;
}

} // namespace

SolverWorkspace precompute_thomas_coefficients(const CartesianMesh& mesh,
                                               std::span<const SubstrateParams> substrates,
                                               double dt, Axis axis, int dims)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("solver step size must be positive, got " + format_double(dt));
    if (dims < 1 || dims > 3)
        throw std::invalid_argument("decay split count must be 1, 2, or 3");
    if (substrates.empty())
        throw std::invalid_argument("no substrates to precompute coefficients for");

    const int n = axis_count(mesh, axis);
    const double h = axis_spacing(mesh, axis);
    const int S = static_cast<int>(substrates.size());

    SolverWorkspace ws;
    ws.axis = axis;
    ws.n = n;
    ws.substrates = S;
    ws.dt = dt;
    ws.dims = dims;
    ws.off_diag.resize(S);
    ws.denom_inv.assign(static_cast<std::size_t>(n) * S, 0.0);
    ws.c_back.assign(static_cast<std::size_t>(n) * S, 0.0);

    for (int s = 0; s < S; ++s) {
        const double q = dt * substrates[s].diffusion_coefficient / (h * h);
        const double decay = 1.0 + dt * substrates[s].decay_rate / dims;
        ws.off_diag[s] = q;

        // Diagonal: boundary rows see one neighbor, interior rows two.
        // With n == 1 there is no diffusive coupling at all.
        auto diag = [&](int i) {
            if (n == 1) return decay;
            return (i == 0 || i == n - 1) ? decay + q : decay + 2.0 * q;
        };

        double denom = diag(0);
        assert(denom != 0.0);
        ws.denom_inv[s] = 1.0 / denom;
        ws.c_back[s] = (n > 1) ? q * ws.denom_inv[s] : 0.0;
        for (int i = 1; i < n; ++i) {
            denom = diag(i) - q * ws.c_back[(static_cast<std::size_t>(i) - 1) * S + s];
            assert(denom != 0.0); // diagonally dominant by construction
            const double dinv = 1.0 / denom;
            ws.denom_inv[static_cast<std::size_t>(i) * S + s] = dinv;
            if (i < n - 1) ws.c_back[static_cast<std::size_t>(i) * S + s] = q * dinv;
        }
    }
    return ws;
}

void thomas_solve(const SolverWorkspace& ws, std::span<double> line)
{
    const int n = ws.n;
    const int S = ws.substrates;
    if (line.size() != static_cast<std::size_t>(n) * S)
        throw std::invalid_argument("line length " + format_int(line.size()) +
                                    " does not match workspace (" + format_int(n) + " x " +
                                    format_int(S) + ")");

    const double* q = ws.off_diag.data();
    const double* dinv = ws.denom_inv.data();
    const double* cb = ws.c_back.data();
    double* v = line.data();

    for (int s = 0; s < S; ++s) v[s] = fwd_first(v[s], dinv[s]);
    for (int i = 1; i < n; ++i) {
        double* cur = v + static_cast<std::size_t>(i) * S;
        const double* prev = cur - S;
        const double* di = dinv + static_cast<std::size_t>(i) * S;
        for (int s = 0; s < S; ++s) cur[s] = fwd(cur[s], prev[s], q[s], di[s]);
    }
    for (int i = n - 2; i >= 0; --i) {
        double* cur = v + static_cast<std::size_t>(i) * S;
        const double* next = cur + S;
        const double* ci = cb + static_cast<std::size_t>(i) * S;
        for (int s = 0; s < S; ++s) cur[s] = bwd(cur[s], next[s], ci[s]);
    }
}

namespace {

void sweep_x(DensityField& field, const CartesianMesh& mesh, const SolverWorkspace& ws,
             WorkerPool& pool)
{
    const int nx = mesh.nx, S = ws.substrates;
    const std::int64_t lines = static_cast<std::int64_t>(mesh.ny) * mesh.nz;
    const std::int64_t line_stride = static_cast<std::int64_t>(nx) * S;
    double* base = field.values.data();
    const double* q = ws.off_diag.data();
    const double* dinv = ws.denom_inv.data();
    const double* cb = ws.c_back.data();

    pool.parallel_for(lines, [=](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t line = lo; line < hi; ++line) {
            double* v = base + line * line_stride; // x-lines are contiguous
            for (int s = 0; s < S; ++s) v[s] = fwd_first(v[s], dinv[s]);
            for (int i = 1; i < nx; ++i) {
                double* cur = v + static_cast<std::int64_t>(i) * S;
                const double* prev = cur - S;
                const double* di = dinv + static_cast<std::size_t>(i) * S;
                for (int s = 0; s < S; ++s) cur[s] = fwd(cur[s], prev[s], q[s], di[s]);
            }
            for (int i = nx - 2; i >= 0; --i) {
                double* cur = v + static_cast<std::int64_t>(i) * S;
                const double* next = cur + S;
                const double* ci = cb + static_cast<std::size_t>(i) * S;
                for (int s = 0; s < S; ++s) cur[s] = bwd(cur[s], next[s], ci[s]);
            }
        }
    });
}

// y and z sweeps walk whole rows of i at once so the strided lines still
// stream through memory; each task owns an (i-chunk, plane) tile and the
// per-line arithmetic is unchanged from thomas_solve.
void sweep_y(DensityField& field, const CartesianMesh& mesh, const SolverWorkspace& ws,
             WorkerPool& pool)
{
    const int nx = mesh.nx, ny = mesh.ny, S = ws.substrates;
    const std::int64_t row = static_cast<std::int64_t>(nx) * S;       // +1 in j
    const std::int64_t plane = row * ny;                              // +1 in k
    const std::int64_t n_ichunks = (nx + kChunkVoxels - 1) / kChunkVoxels;
    const std::int64_t tasks = n_ichunks * mesh.nz;
    double* base = field.values.data();
    const double* q = ws.off_diag.data();
    const double* dinv = ws.denom_inv.data();
    const double* cb = ws.c_back.data();

    pool.parallel_for(tasks, [=](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t t = lo; t < hi; ++t) {
            const std::int64_t k = t / n_ichunks;
            const std::int64_t i0 = (t % n_ichunks) * kChunkVoxels;
            const std::int64_t i1 = std::min<std::int64_t>(nx, i0 + kChunkVoxels);
            double* slab = base + k * plane;
            for (std::int64_t i = i0; i < i1; ++i)
                for (int s = 0; s < S; ++s) slab[i * S + s] = fwd_first(slab[i * S + s], dinv[s]);
            for (int j = 1; j < ny; ++j) {
                double* cur = slab + static_cast<std::int64_t>(j) * row;
                const double* prev = cur - row;
                const double* dj = dinv + static_cast<std::size_t>(j) * S;
                for (std::int64_t i = i0; i < i1; ++i)
                    for (int s = 0; s < S; ++s)
                        cur[i * S + s] = fwd(cur[i * S + s], prev[i * S + s], q[s], dj[s]);
            }
            for (int j = ny - 2; j >= 0; --j) {
                double* cur = slab + static_cast<std::int64_t>(j) * row;
                const double* next = cur + row;
                const double* cj = cb + static_cast<std::size_t>(j) * S;
                for (std::int64_t i = i0; i < i1; ++i)
                    for (int s = 0; s < S; ++s)
                        cur[i * S + s] = bwd(cur[i * S + s], next[i * S + s], cj[s]);
            }
        }
    });
}

void sweep_z(DensityField& field, const CartesianMesh& mesh, const SolverWorkspace& ws,
             WorkerPool& pool)
{
    const int nx = mesh.nx, ny = mesh.ny, nz = mesh.nz, S = ws.substrates;
    const std::int64_t row = static_cast<std::int64_t>(nx) * S;
    const std::int64_t plane = row * ny;
    const std::int64_t n_ichunks = (nx + kChunkVoxels - 1) / kChunkVoxels;
    const std::int64_t tasks = n_ichunks * ny;
    double* base = field.values.data();
    const double* q = ws.off_diag.data();
    const double* dinv = ws.denom_inv.data();
    const double* cb = ws.c_back.data();

    pool.parallel_for(tasks, [=](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t t = lo; t < hi; ++t) {
            const std::int64_t j = t / n_ichunks;
            const std::int64_t i0 = (t % n_ichunks) * kChunkVoxels;
            const std::int64_t i1 = std::min<std::int64_t>(nx, i0 + kChunkVoxels);
            double* col = base + j * row;
            for (std::int64_t i = i0; i < i1; ++i)
                for (int s = 0; s < S; ++s) col[i * S + s] = fwd_first(col[i * S + s], dinv[s]);
            for (int k = 1; k < nz; ++k) {
                double* cur = col + static_cast<std::int64_t>(k) * plane;
                const double* prev = cur - plane;
                const double* dk = dinv + static_cast<std::size_t>(k) * S;
                for (std::int64_t i = i0; i < i1; ++i)
                    for (int s = 0; s < S; ++s)
                        cur[i * S + s] = fwd(cur[i * S + s], prev[i * S + s], q[s], dk[s]);
            }
            for (int k = nz - 2; k >= 0; --k) {
                double* cur = col + static_cast<std::int64_t>(k) * plane;
                const double* next = cur + plane;
                const double* ck = cb + static_cast<std::size_t>(k) * S;
                for (std::int64_t i = i0; i < i1; ++i)
                    for (int s = 0; s < S; ++s)
                        cur[i * S + s] = bwd(cur[i * S + s], next[i * S + s], ck[s]);
            }
        }
    });
}

} // namespace

void diffusion_sweep(DensityField& field, const CartesianMesh& mesh,
                     const SolverWorkspace& ws, WorkerPool& pool)
{
    if (ws.n != axis_count(mesh, ws.axis))
        throw state_error("workspace line length " + format_int(ws.n) +
                          " does not match the mesh axis");
    if (ws.substrates != field.substrates)
        throw state_error("workspace substrate count does not match the field");
    if (field.values.size() !=
        static_cast<std::size_t>(mesh.voxel_count()) * field.substrates)
        throw state_error("density field size does not match the mesh");

    switch (ws.axis) {
        case Axis::x: sweep_x(field, mesh, ws, pool); break;
        case Axis::y: sweep_y(field, mesh, ws, pool); break;
        case Axis::z: sweep_z(field, mesh, ws, pool); break;
    }
}

void apply_dirichlet_conditions(DensityField& field, const DirichletMap& dirichlet)
{
    const int S = field.substrates;
    for (const auto& entry : dirichlet.entries()) {
        double* v = field.values.data() + static_cast<std::size_t>(entry.voxel) * S;
        for (int s = 0; s < S; ++s)
            if (entry.mask[s]) v[s] = entry.values[s];
    }
}

SolverWorkspaces SolverWorkspaces::build(const CartesianMesh& mesh,
                                         std::span<const SubstrateParams> substrates, double dt)
{
    SolverWorkspaces w;
    w.dt = dt;
    w.dims = 1 + (mesh.ny > 1 ? 1 : 0) + (mesh.nz > 1 ? 1 : 0);
    w.x = precompute_thomas_coefficients(mesh, substrates, dt, Axis::x, w.dims);
    if (mesh.ny > 1) w.y = precompute_thomas_coefficients(mesh, substrates, dt, Axis::y, w.dims);
    if (mesh.nz > 1) w.z = precompute_thomas_coefficients(mesh, substrates, dt, Axis::z, w.dims);
    return w;
}

void diffuse_decay_step(Microenvironment& env, const SolverWorkspaces& workspaces,
                        WorkerPool& pool)
{
    if (!workspaces.x)
        throw state_error("solver workspaces not built");

    diffusion_sweep(env.field, env.mesh, *workspaces.x, pool);
    if (workspaces.y) diffusion_sweep(env.field, env.mesh, *workspaces.y, pool);
    if (workspaces.z) diffusion_sweep(env.field, env.mesh, *workspaces.z, pool);
    apply_dirichlet_conditions(env.field, env.dirichlet);
}

void axpy(std::span<double> y, std::span<const double> a, std::span<const double> x)
{
    if (y.size() != a.size() || y.size() != x.size())
        throw std::invalid_argument("axpy operand lengths differ");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a[i] * x[i];
}

void naxpy(std::span<double> y, std::span<const double> a, std::span<const double> x)
{
    if (y.size() != a.size() || y.size() != x.size())
        throw std::invalid_argument("naxpy operand lengths differ");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= a[i] * x[i];
}

} // namespace biodiff
