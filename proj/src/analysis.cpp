#include "sqzbath/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace sqzbath {

namespace {

void require_single_mode(const DensityMatrix& rho, const char* who) {
    if (rho.space().num_modes() != 1)
        throw ShapeError(std::string(who) + ": expects a single-mode state, got " + rho.space().describe());
}

// <m|D(beta)|n> for 0 <= m, n < dim, exact for the infinite-dimensional
// operator. For m >= n, k = m - n:
//   sqrt(n!/m!) beta^k e^{-|beta|^2/2} L_n^{(k)}(|beta|^2)
// and the m < n half follows from <m|D(beta)|n> = conj(<n|D(-beta)|m>).
// Laguerre values come from the forward three-term recurrence; the
// prefactor is kept in log space because both factors overflow separately.
Matrix displacement_elements(int dim, cplx beta) {
    const double ab = std::abs(beta);
    if (ab == 0.0) return Matrix::Identity(dim, dim);
    const double x = ab * ab;
    const double log_ab = std::log(ab);
    const double phase = std::arg(beta);
    std::vector<double> lg(dim);
    for (int n = 0; n < dim; ++n) lg[n] = std::lgamma(n + 1.0);

    Matrix d(dim, dim);
    for (int k = 0; k < dim; ++k) {
        const cplx lower_phase = std::polar(1.0, k * phase);
        const cplx upper_phase = (k % 2 ? -1.0 : 1.0) * std::conj(lower_phase);
        double l_prev = 0.0, l = 1.0;
        for (int n = 0; n + k < dim; ++n) {
            if (n == 1) {
                l_prev = 1.0;
                l = 1.0 + k - x;
            } else if (n > 1) {
                const double next = ((2.0 * n - 1.0 + k - x) * l - (n - 1.0 + k) * l_prev) / n;
                l_prev = l;
                l = next;
            }
            const double mag =
                l == 0.0 ? 0.0 : std::exp(0.5 * (lg[n] - lg[n + k]) + k * log_ab - 0.5 * x + std::log(std::abs(l)));
            const double v = l < 0.0 ? -mag : mag;
            d(n + k, n) = v * lower_phase;
            if (k > 0) d(n, n + k) = v * upper_phase;
        }
    }
    return d;
}

Matrix psd_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double WignerGrid::integral() const {
    if (re_alpha.size() < 2 || im_alpha.size() < 2) return 0.0;
    const double dx = re_alpha[1] - re_alpha[0];
    const double dy = im_alpha[1] - im_alpha[0];
    return values.sum() * dx * dy;
}

WignerGrid wigner(const DensityMatrix& rho, double half_width, int points) {
    require_single_mode(rho, "wigner");
    if (points < 32) throw InvalidParameter("wigner: points must be >= 32");
    if (!(half_width > 0.0)) throw InvalidParameter("wigner: half_width must be > 0");
    const int dim = static_cast<int>(rho.dim());
    WignerGrid grid;
    grid.re_alpha.resize(points);
    grid.im_alpha.resize(points);
    for (int i = 0; i < points; ++i) {
        const double x = -half_width + 2.0 * half_width * i / (points - 1);
        grid.re_alpha[i] = x;
        grid.im_alpha[i] = x;
    }
    // W = (2/pi) sum_{n,m} rho_nm (-1)^n <m|D(2 alpha)|n>
    Matrix rho_parity = rho.matrix();
    for (int n = 1; n < dim; n += 2) rho_parity.row(n) *= -1.0;
    grid.values.resize(points, points);
    for (int i = 0; i < points; ++i) {
        for (int j = 0; j < points; ++j) {
            const Matrix d = displacement_elements(dim, 2.0 * cplx(grid.re_alpha[i], grid.im_alpha[j]));
            // sum_{n,m} P(n,m) d(m,n) = sum elementwise P .* d^T
            const cplx w = rho_parity.cwiseProduct(d.transpose()).sum();
            grid.values(i, j) = 2.0 / std::numbers::pi * w.real();
        }
    }
    const double top = top_fock_population(rho, 0);
    if (top > 1e-4) {
        std::ostringstream os;
        os << "wigner: top-Fock population " << top << " exceeds 1e-4, truncation may distort W";
        grid.warnings.push_back(os.str());
    }
    return grid;
}

Eigen::Matrix2d covariance(const DensityMatrix& rho) {
    require_single_mode(rho, "covariance");
    const int dim = static_cast<int>(rho.dim());
    const Matrix x[2] = {quadrature_operator(dim, 0.0).matrix(),
                         quadrature_operator(dim, 0.5 * std::numbers::pi).matrix()};
    const Matrix& r = rho.matrix();
    double mean[2];
    for (int i = 0; i < 2; ++i) mean[i] = expectation(r, x[i]).real();
    Eigen::Matrix2d v;
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
            const Matrix anti = x[i] * x[j] + x[j] * x[i];
            v(i, j) = 0.5 * expectation(r, anti).real() - mean[i] * mean[j];
            v(j, i) = v(i, j);
        }
    return v;
}

double quadrature_variance(const DensityMatrix& rho, double phi) {
    require_single_mode(rho, "quadrature_variance");
    const Matrix x = quadrature_operator(static_cast<int>(rho.dim()), phi).matrix();
    const double m1 = expectation(rho.matrix(), x).real();
    const double m2 = expectation(rho.matrix(), Matrix(x * x)).real();
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

SqueezedThermalFit fit_squeezed_thermal(const DensityMatrix& rho) {
    const Eigen::Matrix2d v = covariance(rho);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(v);
    const double v_minus = es.eigenvalues()(0);
    const double v_plus = es.eigenvalues()(1);
    if (!(v_minus > 0.0)) {
        std::ostringstream os;
        os << "fit_squeezed_thermal: covariance eigenvalue " << v_minus << " is not positive";
        throw NumericalDegeneracy(os.str());
    }
    const Eigen::Vector2d u = es.eigenvectors().col(1);
    // Principal axis of the larger eigenvalue sits at theta_a / 2; the sign
    // ambiguity of u is absorbed by doubling the angle.
    double theta = 2.0 * std::atan2(u(1), u(0));
    theta = std::fmod(theta, 2.0 * std::numbers::pi);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;

    SqueezedThermalFit fit;
    const double r = 0.25 * std::log(v_plus / v_minus);
    fit.xi_a = std::polar(r, r > 0.0 ? theta : 0.0);
    fit.nbar_a = std::max(0.0, 0.5 * (std::sqrt(v_plus * v_minus) - 1.0));
    const DensityMatrix model = squeezed_thermal_state(static_cast<int>(rho.dim()), fit.nbar_a, fit.xi_a);
    fit.fidelity = fidelity(rho, model);
    return fit;
}

DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                        const FitWindow& window) {
    if (times.size() != values.size()) throw ShapeError("fit_decay_rate: times and values differ in length");
    std::vector<double> ts, ys;
    double start_mag = -1.0;
    double sign = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (t < window.t_start) continue;
        if (window.t_end && t > *window.t_end) break;
        const double v = values[k];
        if (start_mag < 0.0) {
            start_mag = std::abs(v);
            sign = v >= 0.0 ? 1.0 : -1.0;
        } else if (!window.t_end && std::abs(v) < window.stop_fraction * start_mag) {
            break;
        }
        if (!std::isfinite(v) || std::abs(v) < 1e-12) {
            std::ostringstream os;
            os << "fit_decay_rate: |value| below 1e-12 at t=" << t << "; shrink the window";
            throw Unfittable(os.str());
        }
        if (v * sign < 0.0) {
            std::ostringstream os;
            os << "fit_decay_rate: sign change at t=" << t << "; shrink the window";
            throw Unfittable(os.str());
        }
        ts.push_back(t);
        ys.push_back(std::log(std::abs(v)));
    }
    if (ts.size() < 2) throw Unfittable("fit_decay_rate: fewer than two samples in the window");

    const double n = static_cast<double>(ts.size());
    double mt = 0.0, my = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        mt += ts[k];
        my += ys[k];
    }
    mt /= n;
    my /= n;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        stt += (ts[k] - mt) * (ts[k] - mt);
        sty += (ts[k] - mt) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    if (stt == 0.0) throw Unfittable("fit_decay_rate: all samples at the same time");
    const double slope = sty / stt;
    DecayFit fit;
    fit.rate = -slope;
    fit.amplitude = sign * std::exp(my - slope * mt);
    fit.samples = ts.size();
    // A perfectly flat series has no variance to explain; count it as a perfect fit.
    fit.r_squared = syy > 0.0 ? std::clamp(sty * sty / (stt * syy), 0.0, 1.0) : 1.0;
    return fit;
}

DecayFit fit_decay_rate(const TimeSeries& ts, const std::string& column, const FitWindow& window) {
    const auto& c = ts.column(column);
    std::vector<double> v(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (std::abs(c[k].imag()) > 1e-8 * std::max(1.0, std::abs(c[k].real())))
            throw Unfittable("fit_decay_rate: column '" + column + "' is not real");
        v[k] = c[k].real();
    }
    return fit_decay_rate(ts.times, v, window);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.space() != b.space())
        throw ShapeError("trace_distance: " + a.space().describe() + " vs " + b.space().describe());
    // For the Hermitian difference the singular values are |eigenvalues|.
    const Matrix diff = a.matrix() - b.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    return std::clamp(0.5 * es.eigenvalues().cwiseAbs().sum(), 0.0, 1.0);
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.space() != b.space())
        throw ShapeError("fidelity: " + a.space().describe() + " vs " + b.space().describe());
    // Tr|sqrt(a) sqrt(b)| = Tr sqrt(sqrt(a) b sqrt(a))
    const Matrix sa = psd_sqrt(a.matrix());
    const Matrix m = sa * b.matrix() * sa;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return std::clamp(es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum(), 0.0, 1.0);
}

}  // namespace sqzbath
