#pragma once

// Behavioral model of one CTIA pixel: photocurrent integrated over a
// weight-encoded exposure on the feedback capacitor, plus the least-squares
// transfer-curve fitting used to export a drop-in replacement for the
// first-layer convolution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctia_ipc/error.hpp"

namespace ctia_ipc {

struct PixelParams {
    double v_rst = 0.8;     // V, reset level of the integration node
    double c_f = 10e-15;    // F, integration capacitance
    double i_max = 50e-12;  // A, photocurrent at full-scale pixel value
    double headroom = 0.8;  // V, largest discharge before the node clamps

    void validate() const {
        auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!finite_positive(v_rst) || !finite_positive(c_f) || !finite_positive(i_max)) {
            throw InvalidParameter("device-model", "v_rst, c_f and i_max must be finite and > 0");
        }
        if (!finite_positive(headroom) || headroom > v_rst) {
            throw InvalidParameter("device-model", "headroom must satisfy 0 < headroom <= v_rst");
        }
    }
};

/// Discharge magnitude at the integration node after integrating
/// `photocurrent` for `exposure` seconds, clamped at the pixel headroom.
[[nodiscard]] inline double integrate(const PixelParams& params, double photocurrent, double exposure) {
    if (!std::isfinite(photocurrent) || !std::isfinite(exposure)) {
        throw InvalidParameter("device-model", "integrate: non-finite photocurrent or exposure");
    }
    if (photocurrent < 0.0 || exposure < 0.0) {
        throw InvalidParameter("device-model", "integrate: photocurrent and exposure must be >= 0");
    }
    return std::min(photocurrent * exposure / params.c_f, params.headroom);
}

enum class TransferKind { IdealLinear, FittedPolynomial };

struct TransferModel {
    TransferKind kind = TransferKind::IdealLinear;
    double slope = 1.0;
    double intercept = 0.0;
    double clamp_lo = 0.0;
    double clamp_hi = 1.0;
    // Ascending powers of the normalized product; only used when kind is FittedPolynomial.
    std::vector<double> coeffs;

    void validate() const {
        if (!(clamp_lo <= intercept && intercept <= clamp_hi)) {
            throw InvalidParameter("device-model", "transfer model requires clamp_lo <= intercept <= clamp_hi");
        }
        if (kind == TransferKind::FittedPolynomial && coeffs.empty()) {
            throw InvalidParameter("device-model", "fitted-polynomial transfer model has no coefficients");
        }
    }

    static TransferModel ideal(const PixelParams& params, double volts_per_unit) {
        TransferModel m;
        m.kind = TransferKind::IdealLinear;
        m.slope = volts_per_unit;
        m.intercept = 0.0;
        m.clamp_lo = 0.0;
        m.clamp_hi = params.headroom;
        return m;
    }
};

[[nodiscard]] inline double eval_transfer(const TransferModel& model, double w_norm, double x_norm) {
    const double u = w_norm * x_norm;
    double v = 0.0;
    if (model.kind == TransferKind::IdealLinear) {
        v = model.slope * u + model.intercept;
    } else {
        for (auto it = model.coeffs.rbegin(); it != model.coeffs.rend(); ++it) {
            v = v * u + *it;
        }
    }
    return std::clamp(v, model.clamp_lo, model.clamp_hi);
}

struct TransferSample {
    double w_norm = 0.0;
    double x_norm = 0.0;
    double volts = 0.0;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double residual_rms = 0.0;
};

/// Ordinary least squares of volts against the normalized product w_norm * x_norm.
[[nodiscard]] inline FitResult fit_transfer(std::span<const TransferSample> samples) {
    if (samples.size() < 2) {
        throw DegenerateFit("device-model", "fit_transfer needs at least two samples");
    }
    const auto n = static_cast<double>(samples.size());
    double mean_u = 0.0;
    double mean_v = 0.0;
    for (const auto& s : samples) {
        mean_u += s.w_norm * s.x_norm;
        mean_v += s.volts;
    }
    mean_u /= n;
    mean_v /= n;

    double s_uu = 0.0;
    double s_uv = 0.0;
    double s_vv = 0.0;
    for (const auto& s : samples) {
        const double du = s.w_norm * s.x_norm - mean_u;
        const double dv = s.volts - mean_v;
        s_uu += du * du;
        s_uv += du * dv;
        s_vv += dv * dv;
    }
    if (s_uu == 0.0) {
        throw DegenerateFit("device-model", "all abscissae w_norm*x_norm are identical");
    }

    FitResult fit;
    fit.slope = s_uv / s_uu;
    fit.intercept = mean_v - fit.slope * mean_u;

    double ss_res = 0.0;
    for (const auto& s : samples) {
        const double r = s.volts - (fit.slope * s.w_norm * s.x_norm + fit.intercept);
        ss_res += r * r;
    }
    fit.residual_rms = std::sqrt(ss_res / n);
    fit.r_squared = s_vv > 0.0 ? std::clamp(1.0 - ss_res / s_vv, 0.0, 1.0) : 1.0;
    return fit;
}

/// Least-squares polynomial in the normalized product. Degree 1 reproduces
/// fit_transfer; higher degrees absorb curvature from externally measured curves.
[[nodiscard]] inline TransferModel fit_polynomial(std::span<const TransferSample> samples, int degree) {
    if (degree < 1) {
        throw InvalidParameter("device-model", "polynomial degree must be >= 1");
    }
    const auto rows = static_cast<Eigen::Index>(samples.size());
    const Eigen::Index cols = degree + 1;
    if (rows < cols) {
        throw DegenerateFit("device-model", "fit_polynomial needs more samples than coefficients");
    }

    Eigen::MatrixXd vander(rows, cols);
    Eigen::VectorXd rhs(rows);
    double lo = samples.front().volts;
    double hi = lo;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& s = samples[static_cast<std::size_t>(r)];
        const double u = s.w_norm * s.x_norm;
        double p = 1.0;
        for (Eigen::Index c = 0; c < cols; ++c) {
            vander(r, c) = p;
            p *= u;
        }
        rhs(r) = s.volts;
        lo = std::min(lo, s.volts);
        hi = std::max(hi, s.volts);
    }

    const auto qr = vander.colPivHouseholderQr();
    if (qr.rank() < cols) {
        throw DegenerateFit("device-model", "sample abscissae do not determine a degree-" +
                                                std::to_string(degree) + " polynomial");
    }
    const Eigen::VectorXd solution = qr.solve(rhs);

    TransferModel model;
    model.kind = TransferKind::FittedPolynomial;
    model.coeffs.assign(solution.data(), solution.data() + solution.size());
    model.intercept = model.coeffs[0];
    model.slope = model.coeffs[1];
    model.clamp_lo = std::min(lo, model.intercept);
    model.clamp_hi = std::max(hi, model.intercept);
    return model;
}

} // namespace ctia_ipc
