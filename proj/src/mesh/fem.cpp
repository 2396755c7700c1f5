#include "pintflow/mesh/fem.hpp"

#include <cmath>
#include <string>

#include "pintflow/errors.hpp"

namespace pintflow {
namespace {

// 1D Lagrange bases on [0, 1].
double quad_basis(int k, double x) {
    switch (k) {
        case 0: return 2.0 * x * x - 3.0 * x + 1.0;
        case 1: return -4.0 * x * x + 4.0 * x;
        default: return 2.0 * x * x - x;
    }
}
double quad_deriv(int k, double x) {
    switch (k) {
        case 0: return 4.0 * x - 3.0;
        case 1: return -8.0 * x + 4.0;
        default: return 4.0 * x - 1.0;
    }
}
double lin_basis(int k, double x) { return k == 0 ? 1.0 - x : x; }
double lin_deriv(int k, double) { return k == 0 ? -1.0 : 1.0; }

struct Quadrature {
    std::array<double, 9> xi{}, eta{}, w{};
};

Quadrature gauss3x3() {
    const double g = 0.5 * std::sqrt(3.0 / 5.0);
    const std::array<double, 3> p = {0.5 - g, 0.5, 0.5 + g};
    const std::array<double, 3> wt = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    Quadrature q;
    for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) {
            q.xi[a + 3 * b] = p[a];
            q.eta[a + 3 * b] = p[b];
            q.w[a + 3 * b] = wt[a] * wt[b];
        }
    return q;
}

// Basis values and reference gradients at the 9 quadrature points.
struct ReferenceElement {
    Quadrature quad = gauss3x3();
    std::array<std::array<double, 9>, 9> q2{}, q2_dx{}, q2_dy{};  // [qp][basis]
    std::array<std::array<double, 4>, 9> q1{}, q1_dx{}, q1_dy{};

    ReferenceElement() {
        for (int qp = 0; qp < 9; ++qp) {
            const double x = quad.xi[qp], y = quad.eta[qp];
            for (int b = 0; b < 3; ++b)
                for (int a = 0; a < 3; ++a) {
                    q2[qp][a + 3 * b] = quad_basis(a, x) * quad_basis(b, y);
                    q2_dx[qp][a + 3 * b] = quad_deriv(a, x) * quad_basis(b, y);
                    q2_dy[qp][a + 3 * b] = quad_basis(a, x) * quad_deriv(b, y);
                }
            for (int b = 0; b < 2; ++b)
                for (int a = 0; a < 2; ++a) {
                    q1[qp][a + 2 * b] = lin_basis(a, x) * lin_basis(b, y);
                    q1_dx[qp][a + 2 * b] = lin_deriv(a, x) * lin_basis(b, y);
                    q1_dy[qp][a + 2 * b] = lin_basis(a, x) * lin_deriv(b, y);
                }
        }
    }
};

const ReferenceElement& reference() {
    static const ReferenceElement ref;
    return ref;
}

Vec2 eval_wind(const VectorField& wind, double x1, double x2) {
    const Vec2 w = wind(x1, x2);
    if (!std::isfinite(w[0]) || !std::isfinite(w[1])) {
        throw AssemblyError("wind is not finite at (" + std::to_string(x1) + ", " + std::to_string(x2) + ")");
    }
    return w;
}

// Element matrices of size nb x nb on a square of side h, then scattered.
template <std::size_t NB>
void scatter(std::vector<Triplet<real>>& t, const std::array<std::size_t, NB>& nodes,
             const std::array<std::array<double, NB>, NB>& e, std::size_t row_offset = 0,
             std::size_t col_offset = 0) {
    for (std::size_t i = 0; i < NB; ++i)
        for (std::size_t j = 0; j < NB; ++j) t.push_back({row_offset + nodes[i], col_offset + nodes[j], e[i][j]});
}

struct ScalarMatrices {
    SparseMatrix<real> mass, stiffness, convection;
};

ScalarMatrices assemble_q2_scalar(const UniformGrid& g, const VectorField& wind) {
    const auto& ref = reference();
    const double h = g.h;
    std::vector<Triplet<real>> tm, tk, tn;
    for (std::size_t c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.q2_cell_nodes(c);
        const auto origin = g.cell_origin(c);
        std::array<std::array<double, 9>, 9> me{}, ke{}, ne{};
        for (int qp = 0; qp < 9; ++qp) {
            const double w = ref.quad.w[qp];
            Vec2 wv{0.0, 0.0};
            if (wind) wv = eval_wind(wind, origin[0] + h * ref.quad.xi[qp], origin[1] + h * ref.quad.eta[qp]);
            for (int i = 0; i < 9; ++i)
                for (int j = 0; j < 9; ++j) {
                    me[i][j] += w * h * h * ref.q2[qp][i] * ref.q2[qp][j];
                    ke[i][j] += w * (ref.q2_dx[qp][i] * ref.q2_dx[qp][j] + ref.q2_dy[qp][i] * ref.q2_dy[qp][j]);
                    if (wind) {
                        ne[i][j] += w * h * ref.q2[qp][i] * (wv[0] * ref.q2_dx[qp][j] + wv[1] * ref.q2_dy[qp][j]);
                    }
                }
        }
        scatter(tm, nodes, me);
        scatter(tk, nodes, ke);
        if (wind) {
            std::array<std::array<double, 9>, 9> skew{};
            for (int i = 0; i < 9; ++i)
                for (int j = 0; j < 9; ++j) skew[i][j] = 0.5 * (ne[i][j] - ne[j][i]);
            scatter(tn, nodes, skew);
        }
    }
    const std::size_t n = g.num_q2_nodes();
    return {SparseMatrix<real>::from_triplets(n, n, std::move(tm)),
            SparseMatrix<real>::from_triplets(n, n, std::move(tk)),
            wind ? SparseMatrix<real>::from_triplets(n, n, std::move(tn)) : SparseMatrix<real>::zero(n, n)};
}

ScalarMatrices assemble_q1_scalar(const UniformGrid& g, const VectorField& wind) {
    const auto& ref = reference();
    const double h = g.h;
    std::vector<Triplet<real>> tm, tk, tn;
    for (std::size_t c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.q1_cell_nodes(c);
        const auto origin = g.cell_origin(c);
        std::array<std::array<double, 4>, 4> me{}, ke{}, ne{};
        for (int qp = 0; qp < 9; ++qp) {
            const double w = ref.quad.w[qp];
            Vec2 wv{0.0, 0.0};
            if (wind) wv = eval_wind(wind, origin[0] + h * ref.quad.xi[qp], origin[1] + h * ref.quad.eta[qp]);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    me[i][j] += w * h * h * ref.q1[qp][i] * ref.q1[qp][j];
                    ke[i][j] += w * (ref.q1_dx[qp][i] * ref.q1_dx[qp][j] + ref.q1_dy[qp][i] * ref.q1_dy[qp][j]);
                    if (wind) {
                        ne[i][j] += w * h * ref.q1[qp][i] * (wv[0] * ref.q1_dx[qp][j] + wv[1] * ref.q1_dy[qp][j]);
                    }
                }
        }
        scatter(tm, nodes, me);
        scatter(tk, nodes, ke);
        if (wind) {
            std::array<std::array<double, 4>, 4> skew{};
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) skew[i][j] = 0.5 * (ne[i][j] - ne[j][i]);
            scatter(tn, nodes, skew);
        }
    }
    const std::size_t n = g.num_q1_nodes();
    return {SparseMatrix<real>::from_triplets(n, n, std::move(tm)),
            SparseMatrix<real>::from_triplets(n, n, std::move(tk)),
            wind ? SparseMatrix<real>::from_triplets(n, n, std::move(tn)) : SparseMatrix<real>::zero(n, n)};
}

// B_full(q, c * nq2 + i) = -int psi_q d_c phi_i
SparseMatrix<real> assemble_divergence(const UniformGrid& g) {
    const auto& ref = reference();
    const double h = g.h;
    const std::size_t nq2 = g.num_q2_nodes();
    std::vector<Triplet<real>> t;
    for (std::size_t c = 0; c < g.num_cells(); ++c) {
        const auto vnodes = g.q2_cell_nodes(c);
        const auto pnodes = g.q1_cell_nodes(c);
        std::array<std::array<double, 9>, 4> bx{}, by{};
        for (int qp = 0; qp < 9; ++qp) {
            const double w = ref.quad.w[qp];
            for (int q = 0; q < 4; ++q)
                for (int i = 0; i < 9; ++i) {
                    bx[q][i] -= w * h * ref.q1[qp][q] * ref.q2_dx[qp][i];
                    by[q][i] -= w * h * ref.q1[qp][q] * ref.q2_dy[qp][i];
                }
        }
        for (int q = 0; q < 4; ++q)
            for (int i = 0; i < 9; ++i) {
                t.push_back({pnodes[q], vnodes[i], bx[q][i]});
                t.push_back({pnodes[q], nq2 + vnodes[i], by[q][i]});
            }
    }
    return SparseMatrix<real>::from_triplets(g.num_q1_nodes(), 2 * nq2, std::move(t));
}

}  // namespace

DiscreteOperators assemble_operators(const UniformGrid& g, double nu, const VectorField& wind) {
    if (!(nu > 0.0)) throw ConfigError("viscosity must be positive");
    DiscreteOperators ops;
    ops.grid = g;
    ops.nu = nu;
    ops.has_wind = static_cast<bool>(wind);

    for (std::size_t i = 0; i < g.num_q2_nodes(); ++i) {
        (g.q2_on_boundary(i) ? ops.boundary_nodes : ops.interior_nodes).push_back(i);
    }
    for (std::size_t i = 1; i < g.num_q1_nodes(); ++i) ops.pressure_nodes.push_back(i);

    const ScalarMatrices v = assemble_q2_scalar(g, wind);
    const ScalarMatrices p = assemble_q1_scalar(g, wind);
    ops.B_full = assemble_divergence(g);

    ops.M_full = v.mass;
    ops.L_full = linear_combination<real, real>({{nu, &v.stiffness}, {1.0, &v.convection}});

    const auto& I = ops.interior_nodes;
    ops.M_s = v.mass.submatrix(I, I);
    ops.K_s = v.stiffness.submatrix(I, I);
    ops.N_s = v.convection.submatrix(I, I);
    ops.M = block_diagonal_copies(ops.M_s, 2);
    ops.K = block_diagonal_copies(ops.K_s, 2);
    ops.N = block_diagonal_copies(ops.N_s, 2);
    ops.L = linear_combination<real, real>({{nu, &ops.K}, {1.0, &ops.N}});
    ops.Lt = ops.L.transpose();
    ops.n_v = 2 * I.size();

    std::vector<std::size_t> vel_cols;
    vel_cols.reserve(ops.n_v);
    for (auto i : I) vel_cols.push_back(i);
    for (auto i : I) vel_cols.push_back(g.num_q2_nodes() + i);
    ops.B = ops.B_full.submatrix(ops.pressure_nodes, vel_cols);
    ops.Bt = ops.B.transpose();

    const auto& P = ops.pressure_nodes;
    ops.M_p = p.mass.submatrix(P, P);
    ops.K_p = p.stiffness.submatrix(P, P);
    ops.N_p = p.convection.submatrix(P, P);
    ops.L_p = linear_combination<real, real>({{nu, &ops.K_p}, {1.0, &ops.N_p}});
    ops.L_pt = ops.L_p.transpose();
    ops.n_p = P.size();
    ops.M_p_full = p.mass;
    ops.K_p_full = p.stiffness;
    ops.N_p_full = p.convection;
    return ops;
}

DiscreteOperators assemble_operators(const MeshHierarchy& mesh, int level, double nu, const VectorField& wind) {
    return assemble_operators(mesh.grid(level), nu, wind);
}

std::vector<double> velocity_load(const UniformGrid& g, const std::function<Vec2(double, double)>& f) {
    const auto& ref = reference();
    const double h = g.h;
    const std::size_t n = g.num_q2_nodes();
    std::vector<double> out(2 * n, 0.0);
    for (std::size_t c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.q2_cell_nodes(c);
        const auto origin = g.cell_origin(c);
        for (int qp = 0; qp < 9; ++qp) {
            const Vec2 fv = f(origin[0] + h * ref.quad.xi[qp], origin[1] + h * ref.quad.eta[qp]);
            if (!std::isfinite(fv[0]) || !std::isfinite(fv[1])) throw InputError("non-finite problem data");
            const double w = ref.quad.w[qp] * h * h;
            for (int i = 0; i < 9; ++i) {
                out[nodes[i]] += w * fv[0] * ref.q2[qp][i];
                out[n + nodes[i]] += w * fv[1] * ref.q2[qp][i];
            }
        }
    }
    return out;
}

std::vector<double> velocity_interpolant(const UniformGrid& g, const std::function<Vec2(double, double)>& f) {
    const std::size_t n = g.num_q2_nodes();
    std::vector<double> out(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = g.q2_coord(i);
        const Vec2 v = f(x[0], x[1]);
        if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw InputError("non-finite problem data");
        out[i] = v[0];
        out[n + i] = v[1];
    }
    return out;
}

std::vector<double> pressure_interpolant(const UniformGrid& g, const std::function<double(double, double)>& f) {
    std::vector<double> out(g.num_q1_nodes());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto x = g.q1_coord(i);
        out[i] = f(x[0], x[1]);
    }
    return out;
}

std::vector<double> restrict_velocity(const DiscreteOperators& ops, std::span<const double> full) {
    const std::size_t n = ops.grid.num_q2_nodes();
    if (full.size() != 2 * n) throw UsageError("restrict_velocity: wrong size");
    std::vector<double> out(ops.n_v);
    const std::size_t m = ops.n_vs();
    for (std::size_t k = 0; k < m; ++k) {
        out[k] = full[ops.interior_nodes[k]];
        out[m + k] = full[n + ops.interior_nodes[k]];
    }
    return out;
}

std::vector<double> extend_velocity(const DiscreteOperators& ops, std::span<const double> interior) {
    const std::size_t n = ops.grid.num_q2_nodes();
    if (interior.size() != ops.n_v) throw UsageError("extend_velocity: wrong size");
    std::vector<double> out(2 * n, 0.0);
    const std::size_t m = ops.n_vs();
    for (std::size_t k = 0; k < m; ++k) {
        out[ops.interior_nodes[k]] = interior[k];
        out[n + ops.interior_nodes[k]] = interior[m + k];
    }
    return out;
}

std::vector<double> apply_full_scalar(const SparseMatrix<real>& A, std::span<const double> full) {
    const std::size_t n = A.rows();
    if (full.size() != 2 * n) throw UsageError("apply_full_scalar: wrong size");
    std::vector<double> out(2 * n);
    A.multiply<double, double>(full.subspan(0, n), std::span<double>(out).subspan(0, n));
    A.multiply<double, double>(full.subspan(n, n), std::span<double>(out).subspan(n, n));
    return out;
}

namespace {

// Interpolation matrix from coarse Lagrange nodes to the points of the fine grid.
template <class Eval>
SparseMatrix<real> interpolation(std::size_t fine_per_side, double fine_spacing, std::size_t coarse_cells,
                                 double coarse_h, std::size_t coarse_per_side, int order, Eval basis) {
    std::vector<Triplet<real>> t;
    for (std::size_t i2 = 0; i2 < fine_per_side; ++i2)
        for (std::size_t i1 = 0; i1 < fine_per_side; ++i1) {
            const double x = -1.0 + fine_spacing * static_cast<double>(i1);
            const double y = -1.0 + fine_spacing * static_cast<double>(i2);
            std::size_t cx = std::min(static_cast<std::size_t>((x + 1.0) / coarse_h), coarse_cells - 1);
            std::size_t cy = std::min(static_cast<std::size_t>((y + 1.0) / coarse_h), coarse_cells - 1);
            const double xi = (x + 1.0) / coarse_h - static_cast<double>(cx);
            const double eta = (y + 1.0) / coarse_h - static_cast<double>(cy);
            const std::size_t row = i2 * fine_per_side + i1;
            for (int b = 0; b <= order; ++b)
                for (int a = 0; a <= order; ++a) {
                    const double v = basis(a, xi) * basis(b, eta);
                    if (std::abs(v) < 1e-14) continue;
                    const std::size_t col = (static_cast<std::size_t>(order) * cy + static_cast<std::size_t>(b)) *
                                                coarse_per_side +
                                            static_cast<std::size_t>(order) * cx + static_cast<std::size_t>(a);
                    t.push_back({row, col, v});
                }
        }
    return SparseMatrix<real>::from_triplets(fine_per_side * fine_per_side, coarse_per_side * coarse_per_side,
                                             std::move(t));
}

}  // namespace

TransferOperators build_transfer(const MeshHierarchy& mesh, int level) {
    if (level < mesh.coarsest_level() || level >= mesh.finest_level()) {
        throw ConfigError("build_transfer: level " + std::to_string(level) + " has no finer level");
    }
    const UniformGrid& c = mesh.grid(level);
    const UniformGrid& f = mesh.grid(level + 1);
    TransferOperators t;
    t.coarse_level = level;
    t.q2_full = interpolation(f.q2_per_side(), 0.5 * f.h, c.cells_per_side, c.h, c.q2_per_side(), 2, quad_basis);
    t.q1_full = interpolation(f.q1_per_side(), f.h, c.cells_per_side, c.h, c.q1_per_side(), 1, lin_basis);

    std::vector<std::size_t> fi, ci, fp, cp;
    for (std::size_t i = 0; i < f.num_q2_nodes(); ++i)
        if (!f.q2_on_boundary(i)) fi.push_back(i);
    for (std::size_t i = 0; i < c.num_q2_nodes(); ++i)
        if (!c.q2_on_boundary(i)) ci.push_back(i);
    for (std::size_t i = 1; i < f.num_q1_nodes(); ++i) fp.push_back(i);
    for (std::size_t i = 1; i < c.num_q1_nodes(); ++i) cp.push_back(i);
    t.velocity = t.q2_full.submatrix(fi, ci);
    t.pressure = t.q1_full.submatrix(fp, cp);
    return t;
}

}  // namespace pintflow
