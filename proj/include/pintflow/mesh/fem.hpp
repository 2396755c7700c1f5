#pragma once

#include <array>
#include <functional>
#include <vector>

#include "pintflow/linalg/sparse.hpp"
#include "pintflow/mesh/hierarchy.hpp"

namespace pintflow {

using Vec2 = std::array<double, 2>;
/// A steady vector field w(x1, x2). An empty function means "no wind".
using VectorField = std::function<Vec2(double, double)>;
/// Time-dependent vector data g(x1, x2, t).
using SpaceTimeField = std::function<Vec2(double, double, double)>;

/// Q2-Q1 operators of one grid level after Dirichlet elimination of the
/// velocity boundary and deletion of the first pressure node.
///
/// Velocity unknowns are ordered [component 1 interior nodes, component 2
/// interior nodes]; M, K, N are the block-diagonal lifts of the scalar
/// matrices M_s, K_s, N_s. L = nu K + N discretises -nu Lap + w.grad.
struct DiscreteOperators {
    UniformGrid grid;
    double nu = 1.0;
    bool has_wind = false;

    std::size_t n_v = 0;
    std::size_t n_p = 0;

    SparseMatrix<real> M_s, K_s, N_s;
    SparseMatrix<real> M, K, N, L, Lt;
    SparseMatrix<real> B, Bt;
    SparseMatrix<real> M_p, K_p, N_p, L_p, L_pt;
    // Pressure matrices on all Q1 nodes; K_p_full has the constants as kernel.
    SparseMatrix<real> M_p_full, K_p_full, N_p_full;

    // Unreduced scalar Q2 matrices and the full divergence, for boundary lifting.
    SparseMatrix<real> M_full, L_full;
    SparseMatrix<real> B_full;  // all Q1 nodes x 2 * all Q2 nodes

    std::vector<std::size_t> interior_nodes;  // Q2 node ids kept
    std::vector<std::size_t> boundary_nodes;  // Q2 node ids eliminated
    std::vector<std::size_t> pressure_nodes;  // Q1 node ids kept (all but node 0)

    std::size_t n_vs() const { return interior_nodes.size(); }
};

/// Assembles all operators with 3x3 Gauss quadrature per cell. The
/// convection matrices use the skew-symmetric form, so N + N^T vanishes up to
/// rounding for any wind. Throws AssemblyError on a non-finite wind value.
DiscreteOperators assemble_operators(const MeshHierarchy& mesh, int level, double nu,
                                     const VectorField& wind = {});
DiscreteOperators assemble_operators(const UniformGrid& grid, double nu, const VectorField& wind = {});

/// Load vector (int f . phi_i) for every Q2 node, both components:
/// [comp 1 all nodes, comp 2 all nodes].
std::vector<double> velocity_load(const UniformGrid& grid, const std::function<Vec2(double, double)>& f);

/// Nodal interpolation of a vector field onto all Q2 nodes, same layout as velocity_load.
std::vector<double> velocity_interpolant(const UniformGrid& grid, const std::function<Vec2(double, double)>& f);

/// Nodal interpolation of a scalar onto all Q1 nodes.
std::vector<double> pressure_interpolant(const UniformGrid& grid, const std::function<double(double, double)>& f);

/// Extracts the interior (eliminated-system) entries from a full velocity vector.
std::vector<double> restrict_velocity(const DiscreteOperators& ops, std::span<const double> full);

/// Full velocity vector from interior values; boundary entries set to zero.
std::vector<double> extend_velocity(const DiscreteOperators& ops, std::span<const double> interior);

/// Applies a full scalar Q2 matrix to both components of a full velocity vector.
std::vector<double> apply_full_scalar(const SparseMatrix<real>& A_full, std::span<const double> full);

/// Dense rank-revealing checks and other diagnostics are done on these.
struct TransferOperators {
    int coarse_level = 0;
    SparseMatrix<real> q2_full;   // fine Q2 nodes x coarse Q2 nodes
    SparseMatrix<real> q1_full;   // fine Q1 nodes x coarse Q1 nodes
    SparseMatrix<real> velocity;  // fine interior x coarse interior (scalar)
    SparseMatrix<real> pressure;  // fine kept x coarse kept
};

/// Nodal interpolation from `level` to `level + 1`; restriction is the transpose.
TransferOperators build_transfer(const MeshHierarchy& mesh, int level);

}  // namespace pintflow
