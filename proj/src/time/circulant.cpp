#include "pintflow/time/circulant.hpp"

#include <cmath>
#include <numbers>

namespace pintflow {

CirculantSpectrum circulant_spectrum(std::size_t n) {
    if (n < 2) throw ConfigError("circulant spectrum needs at least 2 time blocks (n_t >= 3)");
    CirculantSpectrum s;
    s.d.assign(n, complex{0.0, 0.0});
    for (std::size_t k = 1; 2 * k <= n; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        const double im = (2 * k == n) ? 0.0 : std::sin(angle);
        s.d[k] = complex{1.0 - std::cos(angle), im};
        s.d[n - k] = std::conj(s.d[k]);
    }
    return s;
}

CirculantSpectrum circulant_spectrum(const TimeGrid& grid) {
    if (grid.n_t < 3) throw ConfigError("n_t must be >= 3");
    return circulant_spectrum(grid.blocks());
}

FftPlan::FftPlan(std::size_t n) : n_(n) {
    if (n == 0) throw UsageError("FftPlan: zero length");
    twiddle_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddle_[k] = complex{std::cos(a), std::sin(a)};
    }
    std::size_t rest = n;
    for (std::size_t p : {4, 2, 3, 5, 7}) {
        while (rest % p == 0) {
            factors_.push_back(p);
            rest /= p;
        }
    }
    if (rest != 1) {
        use_bluestein_ = true;
        factors_.clear();
        m_ = 1;
        while (m_ < 2 * n - 1) m_ *= 2;
        chirp_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            // k^2 mod 2n keeps the angle argument small
            const std::size_t k2 = (k * k) % (2 * n);
            const double a = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
            chirp_[k] = complex{std::cos(a), std::sin(a)};
        }
        inner_storage_.emplace_back(m_);
        chirp_fft_.assign(m_, complex{0.0, 0.0});
        chirp_fft_[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n; ++k) {
            chirp_fft_[k] = std::conj(chirp_[k]);
            chirp_fft_[m_ - k] = std::conj(chirp_[k]);
        }
        inner_storage_[0].forward(chirp_fft_);
    }
}

void FftPlan::transform(std::span<complex> data, bool inverse) const {
    if (data.size() != n_) throw UsageError("FftPlan: length mismatch");
    if (n_ == 1) return;
    if (use_bluestein_) {
        bluestein(data, inverse);
        return;
    }
    std::vector<complex> in(data.begin(), data.end());
    std::vector<complex> scratch(n_);
    mixed_radix(in.data(), 1, data.data(), n_, inverse, scratch);
}

// Decimation in time: split into p interleaved subsequences of length n/p.
void FftPlan::mixed_radix(const complex* in, std::size_t stride, complex* out, std::size_t n, bool inverse,
                          std::vector<complex>& scratch) const {
    if (n == 1) {
        out[0] = in[0];
        return;
    }
    // factor for this depth: the factor list is consumed front to back
    std::size_t depth_prod = n_ / n;  // product of factors already used
    std::size_t idx = 0;
    for (std::size_t prod = 1; prod < depth_prod; ++idx) prod *= factors_[idx];
    const std::size_t p = factors_[idx];
    const std::size_t m = n / p;
    for (std::size_t q = 0; q < p; ++q) mixed_radix(in + q * stride, stride * p, out + q * m, m, inverse, scratch);

    const std::size_t tw_step = n_ / n;  // exp(-2 pi i / n) = twiddle_[tw_step]
    auto w = [&](std::size_t e) {
        const complex t = twiddle_[(e * tw_step) % n_];
        return inverse ? std::conj(t) : t;
    };
    complex* tmp = scratch.data();
    for (std::size_t k = 0; k < m; ++k) {
        complex sub[7];
        for (std::size_t q = 0; q < p; ++q) sub[q] = out[q * m + k] * w(q * k);
        for (std::size_t r = 0; r < p; ++r) {
            complex s{0.0, 0.0};
            for (std::size_t q = 0; q < p; ++q) s += sub[q] * w((q * r * m) % n);
            tmp[k + r * m] = s;
        }
    }
    std::copy(tmp, tmp + n, out);
}

void FftPlan::bluestein(std::span<complex> data, bool inverse) const {
    const FftPlan& inner = inner_storage_[0];
    std::vector<complex> a(m_, complex{0.0, 0.0});
    for (std::size_t k = 0; k < n_; ++k) {
        const complex c = inverse ? std::conj(chirp_[k]) : chirp_[k];
        a[k] = data[k] * c;
    }
    inner.forward(a);
    for (std::size_t k = 0; k < m_; ++k) a[k] *= inverse ? std::conj(chirp_fft_[k]) : chirp_fft_[k];
    // inverse via conjugation trick keeps a single forward kernel
    for (auto& v : a) v = std::conj(v);
    inner.forward(a);
    const double scale = 1.0 / static_cast<double>(m_);
    for (std::size_t k = 0; k < n_; ++k) {
        const complex c = inverse ? std::conj(chirp_[k]) : chirp_[k];
        data[k] = std::conj(a[k]) * scale * c;
    }
}

namespace {

template <class T>
BlockVector<complex> time_transform(const BlockVector<T>& x, bool inverse) {
    const BlockLayout& L = x.layout();
    const std::size_t n = L.blocks;
    const FftPlan plan(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    BlockVector<complex> out(L);
    std::vector<complex> series(n);
    for (Field f : kAllFields) {
        const std::size_t nd = L.dof_size(f);
        const auto src = x.field(f);
        auto dst = out.field(f);
        for (std::size_t i = 0; i < nd; ++i) {
            for (std::size_t j = 0; j < n; ++j) series[j] = complex(src[j * nd + i]);
            if (inverse) {
                plan.inverse_unscaled(series);
            } else {
                plan.forward(series);
            }
            for (std::size_t j = 0; j < n; ++j) dst[j * nd + i] = series[j] * scale;
        }
    }
    return out;
}

}  // namespace

BlockVector<complex> block_fft_forward(const BlockVector<real>& x) { return time_transform(x, false); }
BlockVector<complex> block_fft_forward(const BlockVector<complex>& x) { return time_transform(x, false); }
BlockVector<complex> block_fft_inverse(const BlockVector<complex>& x) { return time_transform(x, true); }

std::vector<std::size_t> block_diagonal_permutation(const BlockLayout& L) {
    std::vector<std::size_t> idx(L.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return to_block_diagonal_order(BlockVector<std::size_t>(L, std::move(idx)));
}

}  // namespace pintflow
