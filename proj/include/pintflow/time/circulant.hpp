#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pintflow/errors.hpp"
#include "pintflow/linalg/block_vector.hpp"
#include "pintflow/linalg/scalar.hpp"

namespace pintflow {

/// Backward-Euler time grid on [0, T] with n_t steps. The unknowns live at the
/// interior time points 1 .. n_t - 1.
struct TimeGrid {
    int n_t = 0;
    double T = 0.0;

    TimeGrid() = default;
    TimeGrid(int n_t_, double T_) : n_t(n_t_), T(T_) {
        if (n_t < 3) throw ConfigError("n_t must be >= 3");
        if (!(T > 0.0)) throw ConfigError("final time T must be positive");
    }
    double tau() const { return T / n_t; }
    std::size_t blocks() const { return static_cast<std::size_t>(n_t - 1); }
    double time(int j) const { return tau() * j; }
};

/// Eigenvalues of the (n_t-1)x(n_t-1) circulant C with first column
/// (1, -1, 0, ..., 0): d_k = 1 - exp(-2 pi i k / n), the unnormalised DFT of
/// that column under the forward convention of block_fft_forward.
struct CirculantSpectrum {
    std::vector<complex> d;

    std::size_t size() const { return d.size(); }
    double dr(std::size_t j) const { return d[j].real(); }
    double dc(std::size_t j) const { return d[j].imag(); }
};

CirculantSpectrum circulant_spectrum(const TimeGrid& grid);
CirculantSpectrum circulant_spectrum(std::size_t blocks);

/// In-place complex DFT of a fixed length, X_k = sum_j x_j exp(-+2 pi i jk/n),
/// unnormalised. Lengths whose prime factors are all <= 7 use recursive
/// mixed-radix Cooley-Tukey; any other length goes through Bluestein's
/// chirp-z algorithm on a power-of-two grid.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    void forward(std::span<complex> data) const { transform(data, false); }
    void inverse_unscaled(std::span<complex> data) const { transform(data, true); }

private:
    void transform(std::span<complex> data, bool inverse) const;
    void mixed_radix(const complex* in, std::size_t stride, complex* out, std::size_t n, bool inverse,
                     std::vector<complex>& scratch) const;
    void bluestein(std::span<complex> data, bool inverse) const;

    std::size_t n_ = 0;
    std::vector<std::size_t> factors_;
    std::vector<complex> twiddle_;  // exp(-2 pi i k / n)
    bool use_bluestein_ = false;
    // Bluestein data
    std::size_t m_ = 0;
    std::vector<complex> chirp_;       // exp(-i pi k^2 / n)
    std::vector<complex> chirp_fft_;   // FFT of the conjugate chirp, padded to m_
    std::vector<FftPlan> inner_storage_;
};

/// Unitary DFT across the time index for every DOF of every field.
BlockVector<complex> block_fft_forward(const BlockVector<real>& x);
BlockVector<complex> block_fft_forward(const BlockVector<complex>& x);
BlockVector<complex> block_fft_inverse(const BlockVector<complex>& x);

/// Field-major (all v, all p, all lambda, all mu) to time-block-major order,
/// block j holding (v_j, lambda_j, p_j, mu_j).
template <class T>
std::vector<T> to_block_diagonal_order(const BlockVector<T>& x) {
    const BlockLayout& L = x.layout();
    const std::size_t S = L.block_system_size();
    std::vector<T> out(L.size());
    for (std::size_t j = 0; j < L.blocks; ++j) {
        T* dst = out.data() + j * S;
        for (Field f : {Field::v, Field::lambda, Field::p, Field::mu}) {
            const auto src = x.block(f, j);
            std::copy(src.begin(), src.end(), dst);
            dst += src.size();
        }
    }
    return out;
}

template <class T>
BlockVector<T> from_block_diagonal_order(const BlockLayout& L, std::span<const T> y) {
    if (y.size() != L.size()) throw UsageError("from_block_diagonal_order: size mismatch");
    const std::size_t S = L.block_system_size();
    BlockVector<T> x(L);
    for (std::size_t j = 0; j < L.blocks; ++j) {
        const T* src = y.data() + j * S;
        for (Field f : {Field::v, Field::lambda, Field::p, Field::mu}) {
            auto dst = x.block(f, j);
            std::copy(src, src + dst.size(), dst.begin());
            src += dst.size();
        }
    }
    return x;
}

/// perm[i] = field-major index of entry i of the block-diagonal ordering.
std::vector<std::size_t> block_diagonal_permutation(const BlockLayout& layout);

}  // namespace pintflow
