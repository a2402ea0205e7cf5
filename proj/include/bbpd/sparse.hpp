#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bbpd {

/// Square compressed-row matrix. Column indices are sorted within each row.
struct CsrMatrix {
    std::size_t rows = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    std::size_t nnz() const { return col.size(); }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += val[k] * x[col[k]];
            y[r] = acc;
        }
    }

    std::vector<double> operator*(std::span<const double> x) const {
        std::vector<double> y(rows);
        multiply(x, y);
        return y;
    }

    double at(std::size_t r, std::size_t c) const {
        const auto first = col.begin() + static_cast<long>(row_ptr[r]);
        const auto last = col.begin() + static_cast<long>(row_ptr[r + 1]);
        const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
        return (it != last && *it == c) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
    }

    void scale(double s) {
        for (double& v : val) v *= s;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : val) m = std::max(m, std::abs(v));
        return m;
    }

    /// max |A_rc - A_cr| over stored entries (missing mirror entries count as 0).
    double max_asymmetry() const {
        double m = 0.0;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
                m = std::max(m, std::abs(val[k] - at(col[k], r)));
        return m;
    }

    /// Builds a matrix from dense row-major storage, dropping exact zeros.
    static CsrMatrix from_dense(std::size_t n, std::span<const double> dense) {
        CsrMatrix a;
        a.rows = n;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                const double v = dense[r * n + c];
                if (v == 0.0) continue;
                a.col.push_back(static_cast<std::uint32_t>(c));
                a.val.push_back(v);
            }
            a.row_ptr.push_back(a.col.size());
        }
        return a;
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace bbpd
