#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bbpd/sparse.hpp"

namespace bbpd {

struct CgResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double residual = 0.0;  // ||A x - b||_2 (recurrence value)
    bool converged = false;
    bool indefinite = false;  // stopped on a direction with p^T A p <= 0
};

/// Unpreconditioned conjugate gradients from x = 0. Stops when
/// ||r|| <= tol * ||b||, on max_iter, or on non-positive curvature; in the last
/// case the iterate built so far is returned with `indefinite` set.
inline CgResult cg_solve(const CsrMatrix& a, std::span<const double> b, double tol, std::size_t max_iter) {
    const std::size_t n = b.size();
    CgResult res;
    res.x.assign(n, 0.0);
    std::vector<double> r(b.begin(), b.end());
    std::vector<double> p = r;
    std::vector<double> ap(n);

    const double bnorm = norm2(b);
    double rr = dot(r, r);
    res.residual = std::sqrt(rr);
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    const double target = tol * bnorm;
    while (res.iterations < max_iter) {
        if (res.residual <= target) break;
        a.multiply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) {
            res.indefinite = true;
            return res;
        }
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        ++res.iterations;
        res.residual = std::sqrt(rr);
    }
    res.converged = res.residual <= target;
    return res;
}

}  // namespace bbpd
