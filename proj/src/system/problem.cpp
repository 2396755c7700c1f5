#include "pintflow/system/problem.hpp"

#include <cmath>

namespace pintflow {

ControlProblem stokes_manufactured(double beta, const TimeGrid& grid, double nu) {
    ControlProblem p;
    p.name = "stokes_manufactured";
    p.beta = beta;
    p.nu = nu;
    p.grid = grid;
    const double T = grid.T;

    p.exact_v = [T](double x1, double x2, double t) {
        const double e = std::exp(T - t);
        return Vec2{e * 20.0 * x1 * x2 * x2 * x2, e * (5.0 * std::pow(x1, 4) - 5.0 * std::pow(x2, 4))};
    };
    p.v_d = [T, beta](double x1, double x2, double t) {
        const double e = std::exp(T - t);
        const double a1 = x1 * x1 - 1.0, a2 = x2 * x2 - 1.0;
        const double s1 = 4.0 * beta * x2 * (2.0 * (3.0 * x1 * x1 - 1.0) * a2 + 3.0 * a1 * a1);
        const double s2 = -4.0 * beta * x1 * (3.0 * a2 * a2 + 2.0 * a1 * (3.0 * x2 * x2 - 1.0));
        const double t1 =
            20.0 * x1 * x2 * x2 * x2 +
            2.0 * beta * x2 * (a1 * a1 * (x2 * x2 - 7.0) - 4.0 * (3.0 * x1 * x1 - 1.0) * a2 + 2.0);
        const double t2 = 5.0 * (std::pow(x1, 4) - std::pow(x2, 4)) -
                          2.0 * beta * x1 * (a2 * a2 * (x1 * x1 - 7.0) - 4.0 * a1 * (3.0 * x2 * x2 - 1.0) - 2.0);
        return Vec2{s1 + e * t1, s2 + e * t2};
    };
    p.f = [T](double x1, double x2, double t) {
        const double e = std::exp(T - t);
        const double a1 = x1 * x1 - 1.0, a2 = x2 * x2 - 1.0;
        const double g1 = 2.0 * x2 * a1 * a1 * a2;
        const double g2 = -2.0 * x1 * a1 * a2 * a2;
        return Vec2{e * (-20.0 * x1 * x2 * x2 * x2 - g1) + g1,
                    e * (5.0 * (std::pow(x2, 4) - std::pow(x1, 4)) - g2) + g2};
    };
    p.h = p.exact_v;
    p.v0 = [ev = p.exact_v](double x1, double x2) { return ev(x1, x2, 0.0); };

    if (nu != 1.0) {
        p.exact_v = {};
        return p;
    }
    p.exact_p = [T](double x1, double x2, double t) {
        return std::exp(T - t) * (60.0 * x1 * x1 * x2 - 20.0 * x2 * x2 * x2);
    };
    p.exact_lambda = [T, beta](double x1, double x2, double t) {
        const double c = beta * (std::exp(T - t) - 1.0);
        const double a1 = x1 * x1 - 1.0, a2 = x2 * x2 - 1.0;
        return Vec2{c * 2.0 * x2 * a1 * a1 * a2, -c * 2.0 * x1 * a1 * a2 * a2};
    };
    return p;
}

Vec2 cavity_wind(double x1, double x2) {
    const double a = 100.0 / 99.0, b = 100.0 / 49.0;
    const double c1 = 1.0 - std::hypot(b * (x1 - 0.5), a * x2);
    if (c1 >= 0.0) return {c1 * a * a * x2, -c1 * b * b * (x1 - 0.5)};
    const double c2 = 1.0 - std::hypot(b * (x1 + 0.5), a * x2);
    if (c2 >= 0.0) return {-c2 * a * a * x2, c2 * b * b * (x1 + 0.5)};
    return {0.0, 0.0};
}

ControlProblem oseen_cavity(double beta, const TimeGrid& grid, double nu) {
    ControlProblem p;
    p.name = "oseen_cavity";
    p.beta = beta;
    p.nu = nu;
    p.grid = grid;
    p.v_d = [](double x1, double x2, double) {
        const double q = (1.0 - std::pow(x1, 4)) * (1.0 - std::pow(x2, 4));
        Vec2 v{2.0 * x2 * q, -2.0 * x1 * q};
        if (x2 >= 0.8) v[0] += 5.0 * x2 - 4.0;
        return v;
    };
    p.f = [](double x1, double x2, double) {
        const double a1 = x1 * x1 - 1.0, a2 = x2 * x2 - 1.0;
        return Vec2{-20.0 * x1 * x2 * x2 * x2 - 2.0 * x2 * a1 * a1 * a2,
                    5.0 * (std::pow(x2, 4) - std::pow(x1, 4)) + 2.0 * x1 * a1 * a2 * a2};
    };
    p.v0 = [](double x1, double x2) { return (x1 > -x2 && x1 < x2) ? Vec2{1.0, 0.0} : Vec2{0.0, 0.0}; };
    p.h = [](double, double x2, double) { return x2 == 1.0 ? Vec2{1.0, 0.0} : Vec2{0.0, 0.0}; };
    p.wind = cavity_wind;
    return p;
}

namespace {

// h at time t on the boundary nodes, zero elsewhere (full Q2 layout).
std::vector<double> boundary_lift(const ControlProblem& problem, const DiscreteOperators& ops, double t) {
    std::vector<double> full = velocity_interpolant(ops.grid, [&](double x1, double x2) { return problem.h(x1, x2, t); });
    const std::size_t n = ops.grid.num_q2_nodes();
    for (auto i : ops.interior_nodes) {
        full[i] = 0.0;
        full[n + i] = 0.0;
    }
    return full;
}

}  // namespace

BlockVector<real> build_rhs(const ControlProblem& problem, const DiscreteOperators& ops) {
    problem.validate();
    const TimeGrid& grid = problem.grid;
    const double tau = grid.tau();
    const BlockLayout L{grid.blocks(), ops.n_v, ops.n_p};
    BlockVector<real> b(L);

    std::vector<double> h_prev;
    for (std::size_t j = 0; j < L.blocks; ++j) {
        const double t = grid.time(static_cast<int>(j) + 1);
        const std::vector<double> hB = boundary_lift(problem, ops, t);
        const std::vector<double> MhB = apply_full_scalar(ops.M_full, hB);
        const std::vector<double> LhB = apply_full_scalar(ops.L_full, hB);

        // adjoint (v) rows: tau M (v_d - h_B) restricted to the interior
        {
            const auto load = velocity_load(ops.grid, [&](double x1, double x2) { return problem.v_d(x1, x2, t); });
            std::vector<double> full(load.size());
            for (std::size_t i = 0; i < full.size(); ++i) full[i] = tau * (load[i] - MhB[i]);
            const auto r = restrict_velocity(ops, full);
            std::copy(r.begin(), r.end(), b.block(Field::v, j).begin());
        }
        // state (lambda) rows
        {
            const auto load = velocity_load(ops.grid, [&](double x1, double x2) { return problem.f(x1, x2, t); });
            std::vector<double> full(load.size());
            for (std::size_t i = 0; i < full.size(); ++i) full[i] = tau * load[i] - MhB[i] - tau * LhB[i];
            std::vector<double> prev;
            if (j == 0) {
                prev = apply_full_scalar(ops.M_full, velocity_interpolant(ops.grid, problem.v0));
            } else {
                prev = apply_full_scalar(ops.M_full, h_prev);
            }
            for (std::size_t i = 0; i < full.size(); ++i) full[i] += prev[i];
            const auto r = restrict_velocity(ops, full);
            std::copy(r.begin(), r.end(), b.block(Field::lambda, j).begin());
        }
        // divergence (mu) rows: -tau B h_B
        {
            const auto Bh = spmv(ops.B_full, hB);
            auto out = b.block(Field::mu, j);
            for (std::size_t k = 0; k < ops.n_p; ++k) out[k] = -tau * Bh[ops.pressure_nodes[k]];
        }
        h_prev = hB;
    }
    for (double v : b.data()) {
        if (!std::isfinite(v)) throw InputError("right-hand side is not finite");
    }
    return b;
}

std::vector<std::vector<double>> exact_velocity_blocks(const ControlProblem& problem, const DiscreteOperators& ops) {
    if (!problem.exact_v) throw UsageError(problem.name + " has no exact solution");
    std::vector<std::vector<double>> out;
    for (std::size_t j = 0; j < problem.grid.blocks(); ++j) {
        const double t = problem.grid.time(static_cast<int>(j) + 1);
        out.push_back(restrict_velocity(
            ops, velocity_interpolant(ops.grid, [&](double x1, double x2) { return problem.exact_v(x1, x2, t); })));
    }
    return out;
}

double velocity_error(const ControlProblem& problem, const DiscreteOperators& ops, const BlockVector<real>& x) {
    const auto exact = exact_velocity_blocks(problem, ops);
    double sum = 0.0;
    std::vector<double> e(ops.n_v), Me(ops.n_v);
    for (std::size_t j = 0; j < exact.size(); ++j) {
        const auto v = x.block(Field::v, j);
        for (std::size_t i = 0; i < ops.n_v; ++i) e[i] = v[i] - exact[j][i];
        ops.M.multiply<double, double>(e, Me);
        for (std::size_t i = 0; i < ops.n_v; ++i) sum += e[i] * Me[i];
    }
    return std::sqrt(problem.grid.tau() * sum);
}

}  // namespace pintflow
