#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace bbpd {

template <int Dim>
using Vec = std::array<double, Dim>;

template <std::size_t Dim>
constexpr std::array<double, Dim> operator+(const std::array<double, Dim>& a, const std::array<double, Dim>& b) {
    std::array<double, Dim> r{};
    for (std::size_t p = 0; p < Dim; ++p) r[p] = a[p] + b[p];
    return r;
}

template <std::size_t Dim>
constexpr std::array<double, Dim> operator-(const std::array<double, Dim>& a, const std::array<double, Dim>& b) {
    std::array<double, Dim> r{};
    for (std::size_t p = 0; p < Dim; ++p) r[p] = a[p] - b[p];
    return r;
}

template <std::size_t Dim>
constexpr std::array<double, Dim> operator*(double s, const std::array<double, Dim>& a) {
    std::array<double, Dim> r{};
    for (std::size_t p = 0; p < Dim; ++p) r[p] = s * a[p];
    return r;
}

template <std::size_t Dim>
constexpr double dot(const std::array<double, Dim>& a, const std::array<double, Dim>& b) {
    double r = 0.0;
    for (std::size_t p = 0; p < Dim; ++p) r += a[p] * b[p];
    return r;
}

template <std::size_t Dim>
inline double norm(const std::array<double, Dim>& a) {
    return std::sqrt(dot(a, a));
}

/// Pads or truncates a 3-component coordinate to Dim components.
template <int Dim>
constexpr Vec<Dim> take(const std::array<double, 3>& a) {
    Vec<Dim> r{};
    for (int p = 0; p < Dim; ++p) r[p] = a[p];
    return r;
}

}  // namespace bbpd
