#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <type_traits>
#include <vector>

namespace pintflow {

using real = double;
using complex = std::complex<double>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <class T>
inline T conj_if(const T& x) {
    if constexpr (is_complex_v<T>) {
        return std::conj(x);
    } else {
        return x;
    }
}

template <class T>
inline double abs2(const T& x) {
    if constexpr (is_complex_v<T>) {
        return std::norm(x);
    } else {
        return x * x;
    }
}

/// Hermitian inner product x^H y.
template <class T>
T dot(std::span<const T> x, std::span<const T> y) {
    T s{};
    for (std::size_t i = 0; i < x.size(); ++i) s += conj_if(x[i]) * y[i];
    return s;
}

template <class T>
double norm2(std::span<const T> x) {
    double s = 0.0;
    for (const auto& v : x) s += abs2(v);
    return std::sqrt(s);
}

template <class T>
double norm2(const std::vector<T>& x) {
    return norm2(std::span<const T>(x));
}

template <class T>
double norm_inf(std::span<const T> x) {
    double m = 0.0;
    for (const auto& v : x) m = std::max(m, std::abs(v));
    return m;
}

/// y += a x
template <class A, class T>
void axpy(A a, std::span<const T> x, std::span<T> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

template <class T>
std::vector<complex> to_complex(std::span<const T> x) {
    return std::vector<complex>(x.begin(), x.end());
}

}  // namespace pintflow
