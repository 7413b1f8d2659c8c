// Copyright 2026 The abisim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <span>

#include "abisim/detectors.hpp"

namespace abisim {

enum class FitMode {
    fixed_frequency,  // Δω known (beating calibration)
    free_frequency,   // Δω refined as a fourth parameter (e.g. PZT scans)
};

struct FitOptions {
    FitMode mode = FitMode::fixed_frequency;
    /// Each sample averages the fringe over [t, t + window_s). 0 = point samples.
    double window_s = 0.0;
    /// Known additive background in sample units (dark counts per window).
    double offset = 0.0;
    /// Weight residuals by 1/model (count data) instead of uniformly.
    bool poisson_weights = false;
    int phase_grid = 8;
    int max_iterations = 200;
    double gradient_tolerance = 1e-6;
};

/// Least-squares estimate of (V, η, φ[, Δω]) in
///   y(t) = offset + (η/2)·I_in·[1 + V·cos(Δω·t + φ)].
struct FitResult {
    double v_hat = 0.0;
    double eta_hat = 0.0;
    double phi_hat = 0.0;  // wrapped to [0, 2π)
    double delta_omega_hat = 0.0;
    bool delta_omega_free = false;
    double residual_rms = 0.0;
    bool converged = false;
    int iterations = 0;
    double gradient_cosine = 0.0;  // largest |cos| between residual and a Jacobian column
    // 1σ errors from the scaled inverse normal matrix, order (V, η, φ, Δω).
    std::array<double, 4> std_error{};
    std::array<std::array<double, 4>, 4> covariance{};
};

/// Fits `values` sampled at `times`. Throws FitError(IllConditioned) when the
/// record spans less than half a fringe and FitError(NonConvergence) when the
/// gradient criterion is not met within max_iterations.
FitResult fit_fringe(std::span<const double> times, std::span<const double> values, double i_in,
                     double delta_omega, const FitOptions &options = {});

FitResult fit_fringe(const TimeSeries &series, double i_in, double delta_omega,
                     const FitOptions &options = {});

/// Count records are fitted with window averaging and Poisson weights;
/// options.window_s is taken from the series.
FitResult fit_fringe(const CountSeries &series, double i_in, double delta_omega,
                     FitOptions options = {});

/// Model value of a single sample (shared by the fitter and its tests).
double fringe_model(double t, double v, double eta, double phi, double delta_omega, double i_in,
                    double window_s = 0.0, double offset = 0.0);

}  // namespace abisim
