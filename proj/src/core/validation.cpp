#include "core/validation.hpp"

#include "core/backend.hpp"
#include "core/errors.hpp"
#include "core/solver.hpp"
#include "core/text.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace biodiff {

double analytic_solution_1d(double x, double t, double diffusion, double length, int mode)
{
    const double k = mode * std::numbers::pi / length;
    return 1.0 + std::cos(k * x) * std::exp(-diffusion * k * k * t);
}

namespace {

/// One 1-D run of the production solver; returns the max |num - exact| over
/// voxel centers at t = T/4, T/2, T.
double run_problem_1d(double dt, double dx, const ConvergenceSetup& setup)
{
    const auto nx = static_cast<int>(std::llround(setup.length / dx));
    const CartesianMesh mesh =
        CartesianMesh::from_bounds(0.0, setup.length, 0.0, dx, 0.0, dx, dx, dx, dx);

    Microenvironment env = Microenvironment::create(
        mesh, {SubstrateParams{"probe", setup.diffusion, 0.0, 0.0}});
    for (int i = 0; i < nx; ++i)
        env.field.at(i, 0) = analytic_solution_1d(mesh.center_x(i), 0.0, setup.diffusion,
                                                  setup.length, setup.mode);

    const SolverWorkspaces workspaces = SolverWorkspaces::build(env.mesh, env.substrates, dt);
    WorkerPool pool(BackendKind::serial());

    const double quarter = setup.total_time / 4.0;
    const auto steps_per_quarter = static_cast<std::int64_t>(std::llround(quarter / dt));
    if (steps_per_quarter < 1 ||
        std::abs(quarter - steps_per_quarter * dt) > 1e-9 * quarter)
        throw std::invalid_argument("convergence setup: dt must divide T/4");

    double linf = 0.0;
    for (int q = 1; q <= 4; ++q) {
        for (std::int64_t s = 0; s < steps_per_quarter; ++s)
            diffuse_decay_step(env, workspaces, pool);
        if (q == 3) continue; // sample at T/4, T/2, and T
        const double t = quarter * q;
        for (int i = 0; i < nx; ++i) {
            const double exact = analytic_solution_1d(mesh.center_x(i), t, setup.diffusion,
                                                      setup.length, setup.mode);
            linf = std::max(linf, std::abs(env.field.at(i, 0) - exact));
        }
    }
    return linf;
}

} // namespace

ConvergenceReport run_convergence_test(RefineKind kind, int levels, const ConvergenceSetup& setup)
{
    if (levels < 3)
        throw std::invalid_argument("convergence study needs at least 3 refinement levels");

    ConvergenceReport report;
    report.kind = kind;
    if (kind == RefineKind::temporal) {
        report.band_low = 0.8;
        report.band_high = 1.2;
    } else {
        report.band_low = 1.7;
        report.band_high = 2.3;
    }

    for (int level = 0; level < levels; ++level) {
        const double scale = std::pow(2.0, level);
        const double dt = kind == RefineKind::temporal ? setup.base_dt / scale : setup.fine_dt;
        const double dx = kind == RefineKind::temporal ? setup.fine_dx : setup.base_dx / scale;
        const double err = run_problem_1d(dt, dx, setup);
        report.points.push_back({kind == RefineKind::temporal ? dt : dx, err});
    }

    // Least-squares slope of log2(error) against the level index; each level
    // halves the step, so -slope is the observed order.
    bool positive = true;
    for (const auto& p : report.points) positive = positive && p.linf_error > 0.0;
    if (positive) {
        const auto n = static_cast<double>(levels);
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (int level = 0; level < levels; ++level) {
            const double x = level;
            const double y = std::log2(report.points[static_cast<std::size_t>(level)].linf_error);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        report.fitted_order = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    } else {
        report.fitted_order = 0.0; // degenerate (e.g. D = 0 gives exact zeros)
    }
    report.pass = positive && report.fitted_order >= report.band_low &&
                  report.fitted_order <= report.band_high;
    return report;
}

CrossCheckReport cross_check(const DensityField& a, const DensityField& b, double abs_tol,
                             double rel_tol)
{
    if (a.substrates != b.substrates || a.values.size() != b.values.size())
        throw std::invalid_argument("cross_check fields have different shapes");
    if (abs_tol < 0.0 || rel_tol < 0.0)
        throw std::invalid_argument("cross_check tolerances must be non-negative");

    CrossCheckReport report;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double av = a.values[i];
        const double bv = b.values[i];
        const double diff = std::abs(av - bv);
        const double mag = std::max(std::abs(av), std::abs(bv));
        const double rel = (diff == 0.0 || mag == 0.0) ? 0.0 : diff / mag;
        if (diff > report.max_abs) {
            report.max_abs = diff;
            report.worst_value_index = static_cast<index_t>(i);
            report.worst_voxel = static_cast<index_t>(i) / a.substrates;
            report.worst_substrate = static_cast<int>(i % static_cast<std::size_t>(a.substrates));
        }
        report.max_rel = std::max(report.max_rel, rel);
        if (diff > abs_tol + rel_tol * mag) report.pass = false;
    }
    return report;
}

namespace {

void check_slice_args(const DensityField& field, const CartesianMesh& mesh, int substrate,
                      int z_slice)
{
    if (substrate < 0 || substrate >= field.substrates)
        throw std::invalid_argument("substrate index " + format_int(substrate) +
                                    " out of range");
    if (z_slice < 0 || z_slice >= mesh.nz)
        throw std::invalid_argument("z slice " + format_int(z_slice) + " out of range");
    if (field.values.size() != static_cast<std::size_t>(mesh.voxel_count()) * field.substrates)
        throw std::invalid_argument("field does not match the mesh");
}

} // namespace

void write_snapshot_pgm(const DensityField& field, const CartesianMesh& mesh, int substrate,
                        int z_slice, std::ostream& out)
{
    check_slice_args(field, mesh, substrate, z_slice);

    double lo = field.at(mesh.voxel_index(0, 0, z_slice), substrate);
    double hi = lo;
    for (int j = 0; j < mesh.ny; ++j)
        for (int i = 0; i < mesh.nx; ++i) {
            const double v = field.at(mesh.voxel_index(i, j, z_slice), substrate);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }

    out << "P2\n" << mesh.nx << ' ' << mesh.ny << "\n255\n";
    const double span = hi - lo;
    for (int j = 0; j < mesh.ny; ++j) {
        for (int i = 0; i < mesh.nx; ++i) {
            int pixel = 128; // constant slice renders mid-gray
            if (span > 0.0) {
                const double v = field.at(mesh.voxel_index(i, j, z_slice), substrate);
                pixel = static_cast<int>(std::lround((v - lo) / span * 255.0));
                pixel = std::clamp(pixel, 0, 255);
            }
            if (i) out << ' ';
            out << pixel;
        }
        out << '\n';
    }
}

void write_snapshot_table(const DensityField& field, const CartesianMesh& mesh, int substrate,
                          int z_slice, std::ostream& out)
{
    check_slice_args(field, mesh, substrate, z_slice);

    out << "# " << mesh.nx << ' ' << mesh.ny << ' ' << mesh.nz << ' ' << field.substrates << ' '
        << substrate << ' ' << z_slice << '\n';
    for (int j = 0; j < mesh.ny; ++j) {
        for (int i = 0; i < mesh.nx; ++i) {
            if (i) out << ',';
            out << format_double(field.at(mesh.voxel_index(i, j, z_slice), substrate));
        }
        out << '\n';
    }
}

namespace {

void save_with(const std::string& path, const auto& writer)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");
    writer(out);
    if (!out) throw io_error("failed writing " + path);
}

} // namespace

void save_snapshot_pgm(const DensityField& field, const CartesianMesh& mesh, int substrate,
                       int z_slice, const std::string& path)
{
    save_with(path, [&](std::ostream& out) {
        write_snapshot_pgm(field, mesh, substrate, z_slice, out);
    });
}

void save_snapshot_table(const DensityField& field, const CartesianMesh& mesh, int substrate,
                         int z_slice, const std::string& path)
{
    save_with(path, [&](std::ostream& out) {
        write_snapshot_table(field, mesh, substrate, z_slice, out);
    });
}

DirichletMap make_off_by_one_dirichlet(const DirichletMap& map, const CartesianMesh& mesh)
{
    DirichletMap shifted;
    for (const auto& entry : map.entries()) {
        const index_t voxel = entry.voxel + 1;
        if (voxel >= mesh.voxel_count()) continue;
        shifted.add(voxel, entry.mask, entry.values, mesh.voxel_count(),
                    static_cast<int>(entry.mask.size()));
    }
    return shifted;
}

namespace {

struct MutantScenario {
    CartesianMesh mesh = CartesianMesh::from_bounds(-160, 160, -160, 160, -160, 160, 20, 20, 20);
    double dt = 0.01;
    int steps = 100;

    DensityField run(bool mutate) const
    {
        Microenvironment env =
            Microenvironment::create(mesh, {SubstrateParams{"factor", 1000.0, 0.1, 1.0}});
        const index_t center = env.mesh.nearest_voxel({0.0, 0.0, 0.0});
        env.dirichlet.add_single(center, 0, 38.0, mesh.voxel_count(), 1);
        if (mutate) env.dirichlet = make_off_by_one_dirichlet(env.dirichlet, mesh);

        const SolverWorkspaces workspaces = SolverWorkspaces::build(env.mesh, env.substrates, dt);
        WorkerPool pool(BackendKind::serial());
        apply_dirichlet_conditions(env.field, env.dirichlet);
        for (int s = 0; s < steps; ++s) diffuse_decay_step(env, workspaces, pool);
        return env.field;
    }

    std::string table(const DensityField& field) const
    {
        std::ostringstream out;
        write_snapshot_table(field, mesh, 0, mesh.nz / 2, out);
        return out.str();
    }
};

} // namespace

MutantCheckReport run_dirichlet_mutant_check()
{
    const MutantScenario scenario;
    const DensityField clean_a = scenario.run(false);
    const DensityField clean_b = scenario.run(false);
    const DensityField mutant = scenario.run(true);

    MutantCheckReport report;
    report.clean_reproducible = cross_check(clean_a, clean_b, 0.0, 0.0).pass &&
                                scenario.table(clean_a) == scenario.table(clean_b);
    report.crosscheck_detected = !cross_check(clean_a, mutant, 0.0, 0.0).pass;
    report.table_detected = scenario.table(clean_a) != scenario.table(mutant);
    return report;
}

} // namespace biodiff
