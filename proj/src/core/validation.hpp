#ifndef BIODIFF_CORE_VALIDATION_HPP
#define BIODIFF_CORE_VALIDATION_HPP

#include "core/mesh.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace biodiff {

/// Exact solution of rho_t = D rho_xx on [0, L] with zero-flux ends and
/// initial condition 1 + cos(k pi x / L):
///   rho(x, t) = 1 + cos(k pi x / L) * exp(-D (k pi / L)^2 t)
double analytic_solution_1d(double x, double t, double diffusion, double length, int mode);

enum class RefineKind { temporal, spatial };

struct ConvergencePoint {
    double step;       // dt (temporal) or dx (spatial) at this level
    double linf_error; // max |numerical - analytic| over the sample times
};

struct ConvergenceReport {
    RefineKind kind = RefineKind::temporal;
    std::vector<ConvergencePoint> points;
    double fitted_order = 0.0; // least-squares slope of log2(error) per halving
    double band_low = 0.0, band_high = 0.0;
    bool pass = false;
};

/// Problem setup for the 1-D convergence study. The defaults resolve the
/// cosine mode well enough that each refinement isolates one error term.
struct ConvergenceSetup {
    double length = 2000.0;    // microns
    double diffusion = 1000.0; // microns^2/min
    double total_time = 10.0;  // minutes
    int mode = 4;
    double base_dt = 0.5;      // coarsest dt (temporal refinement)
    double fine_dx = 2.5;      // fixed dx while refining dt
    double base_dx = 100.0;    // coarsest dx (spatial refinement)
    double fine_dt = 0.0005;   // fixed dt while refining dx
};

/// Runs the 1-D problem at `levels` successive halvings of dt or dx and
/// fits the observed order. The numerical path is the production solver in
/// 1-D; errors are measured against analytic_solution_1d at voxel centers,
/// at times T/4, T/2, and T. Throws std::invalid_argument for levels < 3.
ConvergenceReport run_convergence_test(RefineKind kind, int levels,
                                       const ConvergenceSetup& setup = {});

struct CrossCheckReport {
    double max_abs = 0.0;
    double max_rel = 0.0;
    index_t worst_value_index = -1; // into the flat value array
    index_t worst_voxel = -1;
    int worst_substrate = -1;
    bool pass = true;
};

/// Voxel-by-voxel comparison. Passes iff every entry satisfies
/// |a - b| <= abs_tol + rel_tol * max(|a|, |b|). Symmetric in (a, b).
/// Throws std::invalid_argument on shape mismatch.
CrossCheckReport cross_check(const DensityField& a, const DensityField& b, double abs_tol,
                             double rel_tol);

/// Writes one z-slice of one substrate as a P2 (ASCII) portable graymap,
/// min-max normalized over the slice; a constant slice renders mid-gray 128.
/// Byte-deterministic for a given field.
void write_snapshot_pgm(const DensityField& field, const CartesianMesh& mesh, int substrate,
                        int z_slice, std::ostream& out);

/// Writes the same slice as a comma-delimited table of raw values, one row
/// per y index, after a header line `# nx ny nz S substrate z_slice`.
void write_snapshot_table(const DensityField& field, const CartesianMesh& mesh, int substrate,
                          int z_slice, std::ostream& out);

void save_snapshot_pgm(const DensityField& field, const CartesianMesh& mesh, int substrate,
                       int z_slice, const std::string& path);
void save_snapshot_table(const DensityField& field, const CartesianMesh& mesh, int substrate,
                         int z_slice, const std::string& path);

/// Test-only mutant: shifts every Dirichlet voxel index by +1 (entries that
/// fall off the mesh are dropped), reproducing an off-by-one indexing bug.
DirichletMap make_off_by_one_dirichlet(const DirichletMap& map, const CartesianMesh& mesh);

struct MutantCheckReport {
    bool clean_reproducible = false;  // clean rerun bitwise-identical, same bytes
    bool crosscheck_detected = false; // mutant caught by the voxel-wise comparison
    bool table_detected = false;      // mutant caught by the snapshot table diff
    bool pass() const { return clean_reproducible && crosscheck_detected && table_detected; }
};

/// Runs a small built-in scenario (center-voxel clamp on a 16^3 mesh) twice
/// clean and once with the off-by-one Dirichlet mutant, then checks that the
/// clean runs agree exactly while both detectors flag the mutant.
MutantCheckReport run_dirichlet_mutant_check();

} // namespace biodiff

#endif
