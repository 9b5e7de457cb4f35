#pragma once

#include <cmath>
#include <complex>
#include <span>

#include "cpwres/error.hpp"

namespace cpwres {

struct Circle {
    std::complex<double> center;
    double radius = 0.0;
};

/// Taubin algebraic circle fit (Newton on the characteristic polynomial, as in
/// Chernov's formulation). Exact for noiseless points.
inline Circle circle_fit(std::span<const std::complex<double>> points) {
    const std::size_t n = points.size();
    if (n < 3) throw DegenerateError("circle_fit: need at least 3 points");

    std::complex<double> mean{};
    for (const auto& z : points) mean += z;
    mean /= static_cast<double>(n);

    double mxx = 0, myy = 0, mxy = 0, mxz = 0, myz = 0, mzz = 0;
    for (const auto& p : points) {
        const double x = p.real() - mean.real();
        const double y = p.imag() - mean.imag();
        const double z = x * x + y * y;
        mxx += x * x;
        myy += y * y;
        mxy += x * y;
        mxz += x * z;
        myz += y * z;
        mzz += z * z;
    }
    const double inv = 1.0 / static_cast<double>(n);
    mxx *= inv, myy *= inv, mxy *= inv, mxz *= inv, myz *= inv, mzz *= inv;

    // collinear or coincident points leave the scatter matrix rank deficient
    const double trace = mxx + myy;
    const double det2 = mxx * myy - mxy * mxy;
    if (!(trace > 0.0) || det2 <= 1e-24 * trace * trace)
        throw DegenerateError("circle_fit: points are collinear or coincident");

    const double mz = mxx + myy;
    const double cov_xy = mxx * myy - mxy * mxy;
    const double var_z = mzz - mz * mz;
    const double a3 = 4.0 * mz;
    const double a2 = -3.0 * mz * mz - mzz;
    const double a1 = var_z * mz + 4.0 * cov_xy * mz - mxz * mxz - myz * myz;
    const double a0 = mxz * (mxz * myy - myz * mxy) + myz * (myz * mxx - mxz * mxy) - var_z * cov_xy;
    const double a22 = a2 + a2;
    const double a33 = a3 + a3 + a3;

    double x = 0.0, y = a0;
    for (int it = 0; it < 99; ++it) {
        const double dy = a1 + x * (a22 + a33 * x);
        const double xnew = x - y / dy;
        if (xnew == x || !std::isfinite(xnew)) break;
        const double ynew = a0 + xnew * (a1 + xnew * (a2 + xnew * a3));
        if (std::abs(ynew) >= std::abs(y)) break;
        x = xnew;
        y = ynew;
    }

    const double det = x * x - x * mz + cov_xy;
    if (det == 0.0 || !std::isfinite(det)) throw DegenerateError("circle_fit: singular system");
    const double xc = (mxz * (myy - x) - myz * mxy) / det / 2.0;
    const double yc = (myz * (mxx - x) - mxz * mxy) / det / 2.0;
    return {mean + std::complex<double>(xc, yc), std::sqrt(xc * xc + yc * yc + mz)};
}

/// Sum of squared geometric distances from the circle.
inline double circle_residual(std::span<const std::complex<double>> points, const Circle& c) {
    double s = 0.0;
    for (const auto& p : points) {
        const double d = std::abs(p - c.center) - c.radius;
        s += d * d;
    }
    return s;
}

}  // namespace cpwres
