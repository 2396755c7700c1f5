#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pintflow/errors.hpp"
#include "pintflow/linalg/scalar.hpp"

namespace pintflow {

/// y = op(x); x and y never alias.
template <class T>
using LinearOperator = std::function<void(std::span<const T> x, std::span<T> y)>;

struct KrylovConfig {
    double tol = 1e-6;   // relative to ||b||
    int restart = 30;
    int max_iters = 1000;
    bool record_history = true;
    /// Measures max |V^H V - I| per cycle (costs O(N restart^2)); for probes.
    bool check_orthogonality = false;

    void validate() const {
        if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("Krylov tolerance must lie in (0, 1)");
        if (restart < 1) throw ConfigError("Krylov restart must be >= 1");
        if (max_iters < 0) throw ConfigError("Krylov max_iters must be >= 0");
    }
};

template <class T>
struct SolveResult {
    std::vector<T> x;
    int iterations = 0;
    /// Relative residuals: entry 0 is the initial one, then one per iteration.
    /// Entries at cycle boundaries are true residuals, the rest are the
    /// Givens-recurrence estimates.
    std::vector<double> residual_history;
    bool converged = false;
    bool breakdown = false;
    double final_residual = 0.0;  // true relative residual of x
    double orthogonality_error = 0.0;
    double orthogonalization_seconds = 0.0;
};

namespace detail {

/// Rotation [c s; -conj(s) c] with real c that zeroes b in (a, b).
template <class T>
void givens(const T& a, const T& b, double& c, T& s) {
    const double aa = std::abs(a), ab = std::abs(b);
    if (ab == 0.0) {
        c = 1.0;
        s = T{0};
        return;
    }
    if (aa == 0.0) {
        c = 0.0;
        s = T{1};
        return;
    }
    const double t = std::hypot(aa, ab);
    c = aa / t;
    s = (a / aa) * conj_if(b) / t;
}

template <class T>
SolveResult<T> restarted_gmres(const LinearOperator<T>& A, const LinearOperator<T>& Pinv, std::span<const T> b,
                               const KrylovConfig& cfg, bool flexible) {
    cfg.validate();
    using clock = std::chrono::steady_clock;
    const std::size_t n = b.size();
    const auto m = static_cast<std::size_t>(cfg.restart);
    SolveResult<T> res;
    res.x.assign(n, T{0});

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.converged = true;
        if (cfg.record_history) res.residual_history.push_back(0.0);
        return res;
    }

    std::vector<std::vector<T>> V(m + 1, std::vector<T>(n));
    std::vector<std::vector<T>> Z(flexible ? m : 0, std::vector<T>(n));
    std::vector<std::vector<T>> H(m + 1, std::vector<T>(m, T{0}));  // H[row][col]
    std::vector<double> cs(m);
    std::vector<T> sn(m), g(m + 1), y(m), w(n), tmp(n);

    auto true_residual = [&](std::vector<T>& r) {
        A(res.x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        return norm2(r);
    };

    std::vector<T>& r = V[0];
    double beta = true_residual(r);
    res.final_residual = beta / bnorm;
    if (cfg.record_history) res.residual_history.push_back(res.final_residual);
    if (res.final_residual <= cfg.tol) {
        res.converged = true;
        return res;
    }

    while (res.iterations < cfg.max_iters) {
        for (std::size_t i = 0; i < n; ++i) V[0][i] /= beta;
        std::fill(g.begin(), g.end(), T{0});
        g[0] = beta;
        std::size_t k = 0;
        bool cycle_done = false;
        bool broke_down = false;
        while (k < m && res.iterations < cfg.max_iters && !cycle_done) {
            std::span<T> zk = flexible ? std::span<T>(Z[k]) : std::span<T>(tmp);
            Pinv(V[k], zk);
            A(std::span<const T>(zk), std::span<T>(w));

            const auto t0 = clock::now();
            for (std::size_t i = 0; i <= k; ++i) {
                const T hik = dot<T>(V[i], w);
                H[i][k] = hik;
                axpy<T, T>(-hik, V[i], w);
            }
            // Second pass keeps V orthonormal to working precision once the
            // residual has dropped by many orders of magnitude.
            for (std::size_t i = 0; i <= k; ++i) {
                const T hik = dot<T>(V[i], w);
                H[i][k] += hik;
                axpy<T, T>(-hik, V[i], w);
            }
            const double hnext = norm2(w);
            H[k + 1][k] = hnext;
            res.orthogonalization_seconds += std::chrono::duration<double>(clock::now() - t0).count();

            for (std::size_t i = 0; i < k; ++i) {
                const T a = H[i][k], c = H[i + 1][k];
                H[i][k] = cs[i] * a + sn[i] * c;
                H[i + 1][k] = -conj_if(sn[i]) * a + cs[i] * c;
            }
            givens(H[k][k], H[k + 1][k], cs[k], sn[k]);
            H[k][k] = cs[k] * H[k][k] + sn[k] * H[k + 1][k];
            H[k + 1][k] = T{0};
            g[k + 1] = -conj_if(sn[k]) * g[k];
            g[k] = cs[k] * g[k];

            ++res.iterations;
            const double est = std::abs(g[k + 1]) / bnorm;
            ++k;
            if (est <= cfg.tol) {
                cycle_done = true;
            } else if (hnext < 1e-14 * bnorm) {
                broke_down = true;
                cycle_done = true;
            } else {
                for (std::size_t i = 0; i < n; ++i) V[k][i] = w[i] / hnext;
            }
            if (cfg.record_history && !(cycle_done || k == m || res.iterations >= cfg.max_iters)) {
                res.residual_history.push_back(est);
            }
        }

        // Back substitution on the triangularised Hessenberg matrix.
        for (std::size_t ii = k; ii-- > 0;) {
            T s = g[ii];
            for (std::size_t j = ii + 1; j < k; ++j) s -= H[ii][j] * y[j];
            y[ii] = s / H[ii][ii];
        }
        if (flexible) {
            for (std::size_t j = 0; j < k; ++j) axpy<T, T>(y[j], Z[j], res.x);
        } else {
            std::fill(w.begin(), w.end(), T{0});
            for (std::size_t j = 0; j < k; ++j) axpy<T, T>(y[j], V[j], w);
            Pinv(std::span<const T>(w), std::span<T>(tmp));
            axpy<T, T>(T{1}, std::span<const T>(tmp), std::span<T>(res.x));
        }

        if (cfg.check_orthogonality) {
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) {
                    const T v = dot<T>(V[i], V[j]) - (i == j ? T{1} : T{0});
                    res.orthogonality_error = std::max(res.orthogonality_error, std::abs(v));
                }
        }

        beta = true_residual(r);
        res.final_residual = beta / bnorm;
        if (cfg.record_history) res.residual_history.push_back(res.final_residual);
        if (res.final_residual <= cfg.tol) {
            res.converged = true;
            return res;
        }
        if (broke_down) {
            res.breakdown = true;
            return res;
        }
    }
    return res;
}

}  // namespace detail

/// Restarted right-preconditioned GMRES with two-pass modified Gram-Schmidt
/// from a zero initial guess. Pinv must be a fixed linear map: the correction is
/// formed as Pinv(V y) once per cycle, so only the Arnoldi basis is stored.
template <class T>
SolveResult<T> gmres(const LinearOperator<T>& A, const LinearOperator<T>& Pinv, std::span<const T> b,
                     const KrylovConfig& cfg) {
    return detail::restarted_gmres<T>(A, Pinv, b, cfg, false);
}

/// Flexible GMRES: stores the preconditioned vectors z_k = Pinv(v_k), so the
/// preconditioner may change between iterations.
template <class T>
SolveResult<T> fgmres(const LinearOperator<T>& A, const LinearOperator<T>& Pinv, std::span<const T> b,
                      const KrylovConfig& cfg) {
    return detail::restarted_gmres<T>(A, Pinv, b, cfg, true);
}

template <class T>
LinearOperator<T> identity_operator() {
    return [](std::span<const T> x, std::span<T> y) { std::copy(x.begin(), x.end(), y.begin()); };
}

/// CSV with header "iteration,residual".
void write_residual_csv(const std::string& path, const std::vector<double>& history);

}  // namespace pintflow
