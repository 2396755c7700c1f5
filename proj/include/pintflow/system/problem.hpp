#pragma once

#include <functional>
#include <optional>
#include <string>

#include "pintflow/linalg/block_vector.hpp"
#include "pintflow/mesh/fem.hpp"
#include "pintflow/time/circulant.hpp"

namespace pintflow {

using ScalarSpaceTimeField = std::function<double(double, double, double)>;

/// Distributed-control problem: track v_d with velocity v subject to
/// instationary Stokes/Oseen flow with forcing f, Dirichlet data h and
/// initial state v0; beta weighs the control cost.
struct ControlProblem {
    std::string name;
    SpaceTimeField v_d;
    SpaceTimeField f;
    SpaceTimeField h;
    VectorField v0;
    VectorField wind;  // empty for Stokes
    double beta = 1.0;
    double nu = 1.0;
    TimeGrid grid;
    // Known continuous solution, when available.
    SpaceTimeField exact_v;
    ScalarSpaceTimeField exact_p;  // defined up to a constant
    SpaceTimeField exact_lambda;

    void validate() const {
        if (!(beta > 0.0)) throw ConfigError("beta must be positive");
        if (!(nu > 0.0)) throw ConfigError("nu must be positive");
        if (!(grid.T > 0.0) || grid.n_t < 3) throw ConfigError("invalid time grid");
    }
};

/// Manufactured Stokes problem with exact solution
///   v = e^{T-t} [20 x1 x2^3, 5 x1^4 - 5 x2^4],
///   p = e^{T-t} (60 x1^2 x2 - 20 x2^3),
/// valid for nu = 1; boundary and initial data are taken from v. For other
/// viscosities the same v_d and f are used and no exact solution is attached.
ControlProblem stokes_manufactured(double beta, const TimeGrid& grid, double nu = 1.0);

/// Lid-driven cavity Oseen problem with a two-vortex wind.
ControlProblem oseen_cavity(double beta, const TimeGrid& grid, double nu = 1e-2);

/// The cavity wind on its own (divergence-free, zero outside two ellipses).
Vec2 cavity_wind(double x1, double x2);

/// Right-hand side of the all-at-once system, including boundary lifting,
/// the initial state (block 0 of the lambda-row) and homogeneous terminal
/// adjoint data. Time block j is time point t_{j+1}.
BlockVector<real> build_rhs(const ControlProblem& problem, const DiscreteOperators& ops);

/// Nodal values of the exact velocity on interior DOFs for every time block.
std::vector<std::vector<double>> exact_velocity_blocks(const ControlProblem& problem, const DiscreteOperators& ops);

/// sqrt(tau sum_j e_j^T M e_j) with e_j = v_j - exact v at t_{j+1}.
double velocity_error(const ControlProblem& problem, const DiscreteOperators& ops, const BlockVector<real>& x);

}  // namespace pintflow
