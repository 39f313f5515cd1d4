#pragma once

// Signatures extracted from states and time series: Wigner functions,
// quadrature statistics, squeezed-thermal and decay fits, state distances.

#include <optional>
#include <string>
#include <vector>

#include "sqzbath/lindblad.hpp"
#include "sqzbath/operator_algebra.hpp"

namespace sqzbath {

struct WignerGrid {
    std::vector<double> re_alpha;
    std::vector<double> im_alpha;
    Eigen::MatrixXd values;  // values(i, j) at alpha = re_alpha[i] + i im_alpha[j]
    Warnings warnings;

    double integral() const;  // sum W dRe dIm
};

// W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^dag] on [-half_width, half_width]^2.
WignerGrid wigner(const DensityMatrix& rho, double half_width, int points);

// Covariance over (X_0, X_{pi/2}) with symmetrized second moments.
Eigen::Matrix2d covariance(const DensityMatrix& rho);

double quadrature_variance(const DensityMatrix& rho, double phi);  // standard deviation of X_phi

struct SqueezedThermalFit {
    cplx xi_a;  // r_a e^{i theta_a}
    double nbar_a = 0.0;
    double fidelity = 0.0;

    double r() const { return std::abs(xi_a); }
};

// Moment fit; throws NumericalDegeneracy for a non-positive covariance eigenvalue.
SqueezedThermalFit fit_squeezed_thermal(const DensityMatrix& rho);

struct DecayFit {
    double rate = 0.0;
    double amplitude = 0.0;
    double r_squared = 1.0;
    std::size_t samples = 0;
};

struct FitWindow {
    double t_start = 0.0;
    std::optional<double> t_end;  // default: until |value| drops to stop_fraction of its start
    double stop_fraction = 0.05;
};

// Least-squares slope of ln|value| against t. Throws Unfittable on a sign
// change or values below 1e-12 inside the window.
DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                        const FitWindow& window = {});
DecayFit fit_decay_rate(const TimeSeries& ts, const std::string& column, const FitWindow& window = {});

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
// Root fidelity Tr |sqrt(a) sqrt(b)|.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace sqzbath
