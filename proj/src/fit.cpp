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

#include "abisim/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "abisim/errors.hpp"

namespace abisim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kV = 0, kEta = 1, kPhi = 2, kOmega = 3;

double window_factor(double delta_omega, double window_s) {
    const double x = 0.5 * delta_omega * window_s;
    if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double window_factor_derivative(double delta_omega, double window_s) {
    const double x = 0.5 * delta_omega * window_s;
    if (std::abs(x) < 1e-6) return -0.5 * window_s * x / 3.0;
    return 0.5 * window_s * (x * std::cos(x) - std::sin(x)) / (x * x);
}

double wrap_two_pi(double phi) {
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Params = Eigen::Vector4d;

class FringeProblem {
   public:
    FringeProblem(std::span<const double> t, std::span<const double> y, double i_in,
                  const FitOptions &opt)
        : t_(t), y_(y), i_in_(i_in), opt_(opt),
          n_params_(opt.mode == FitMode::free_frequency ? 4 : 3) {}

    int n_params() const { return n_params_; }
    std::size_t size() const { return y_.size(); }

    /// Model and (optionally) Jacobian at p.
    void evaluate(const Params &p, Vec &model, Mat *jac) const {
        const std::size_t n = size();
        model.resize(static_cast<Eigen::Index>(n));
        if (jac) jac->resize(static_cast<Eigen::Index>(n), n_params_);
        const double half_w = 0.5 * opt_.window_s;
        const double s = window_factor(p[kOmega], opt_.window_s);
        const double ds = window_factor_derivative(p[kOmega], opt_.window_s);
        const double a = 0.5 * i_in_;
        for (std::size_t k = 0; k < n; ++k) {
            const double tau = t_[k] + half_w;
            const double arg = p[kOmega] * tau + p[kPhi];
            const double c = std::cos(arg);
            const auto row = static_cast<Eigen::Index>(k);
            model[row] = opt_.offset + a * p[kEta] * (1.0 + p[kV] * s * c);
            if (!jac) continue;
            const double sn = std::sin(arg);
            (*jac)(row, kV) = a * p[kEta] * s * c;
            (*jac)(row, kEta) = a * (1.0 + p[kV] * s * c);
            (*jac)(row, kPhi) = -a * p[kEta] * p[kV] * s * sn;
            if (n_params_ == 4) {
                (*jac)(row, kOmega) = a * p[kEta] * p[kV] * (ds * c - s * tau * sn);
            }
        }
    }

    Vec weights(const Vec &model) const {
        Vec w = Vec::Ones(model.size());
        if (opt_.poisson_weights) {
            for (Eigen::Index k = 0; k < model.size(); ++k) w[k] = 1.0 / std::max(model[k], 1.0);
        }
        return w;
    }

    Vec observed() const {
        Vec y(static_cast<Eigen::Index>(size()));
        for (std::size_t k = 0; k < size(); ++k) y[static_cast<Eigen::Index>(k)] = y_[k];
        return y;
    }

   private:
    std::span<const double> t_;
    std::span<const double> y_;
    double i_in_;
    const FitOptions &opt_;
    int n_params_;
};

Params project(Params p) {
    p[kV] = std::clamp(p[kV], 0.0, 1.0);
    p[kEta] = std::max(p[kEta], 0.0);
    return p;
}

struct RunOutcome {
    Params p;
    double cost = std::numeric_limits<double>::infinity();
    double gradient_cosine = 1.0;
    bool converged = false;
    int iterations = 0;
};

// Levenberg-Marquardt with bound-aware active set on V and η.
RunOutcome levenberg_marquardt(const FringeProblem &prob, Params p, const FitOptions &opt) {
    const Vec y = prob.observed();
    const int np = prob.n_params();
    const double y_scale = std::max(y.cwiseAbs().maxCoeff(), 1e-300);
    Vec model;
    Mat jac;
    double lambda = 1e-3;
    RunOutcome out;
    p = project(p);

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        out.iterations = iter + 1;
        prob.evaluate(p, model, &jac);
        const Vec sw = prob.weights(model).cwiseSqrt();
        const Vec rw = sw.cwiseProduct(y - model);
        const Mat jw = sw.asDiagonal() * jac;
        const double cost = rw.squaredNorm();
        const Vec g = jw.transpose() * rw;

        std::array<bool, 4> free{true, true, true, np == 4};
        if (p[kV] >= 1.0 && g[kV] > 0.0) free[kV] = false;
        if (p[kV] <= 0.0 && g[kV] < 0.0) free[kV] = false;
        if (p[kEta] <= 0.0 && g[kEta] < 0.0) free[kEta] = false;

        const double r_norm = std::sqrt(cost);
        double worst = 0.0;
        for (int j = 0; j < np; ++j) {
            if (!free[static_cast<std::size_t>(j)]) continue;
            const double col = jw.col(j).norm();
            if (col > 0.0 && r_norm > 0.0) worst = std::max(worst, std::abs(g[j]) / (col * r_norm));
        }
        out.p = p;
        out.cost = cost;
        out.gradient_cosine = worst;
        const double rms = std::sqrt(cost / static_cast<double>(y.size()));
        if (worst < opt.gradient_tolerance || rms <= 1e-13 * y_scale) {
            out.converged = true;
            return out;
        }

        std::vector<int> idx;
        for (int j = 0; j < np; ++j) {
            if (free[static_cast<std::size_t>(j)]) idx.push_back(j);
        }
        const auto nf = static_cast<Eigen::Index>(idx.size());
        Mat h(nf, nf);
        Vec gf(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
            gf[a] = g[idx[static_cast<std::size_t>(a)]];
            for (Eigen::Index b = 0; b < nf; ++b) {
                h(a, b) = jw.col(idx[static_cast<std::size_t>(a)])
                              .dot(jw.col(idx[static_cast<std::size_t>(b)]));
            }
        }

        bool improved = false;
        while (lambda < 1e12) {
            Mat damped = h;
            for (Eigen::Index a = 0; a < nf; ++a) {
                damped(a, a) += lambda * std::max(h(a, a), 1e-300);
            }
            const Vec step = damped.ldlt().solve(gf);
            Params cand = p;
            for (Eigen::Index a = 0; a < nf; ++a) cand[idx[static_cast<std::size_t>(a)]] += step[a];
            cand = project(cand);
            Vec cand_model;
            prob.evaluate(cand, cand_model, nullptr);
            const double cand_cost = sw.cwiseProduct(y - cand_model).squaredNorm();
            if (std::isfinite(cand_cost) && cand_cost < cost) {
                p = cand;
                lambda = std::max(lambda * 0.1, 1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) {
            // No descent step exists at machine precision: a minimum.
            out.converged = worst < std::sqrt(opt.gradient_tolerance);
            return out;
        }
    }
    prob.evaluate(p, model, nullptr);
    out.p = p;
    out.cost = prob.weights(model).cwiseProduct((y - model).cwiseAbs2()).sum();
    return out;
}

}  // namespace

double fringe_model(double t, double v, double eta, double phi, double delta_omega, double i_in,
                    double window_s, double offset) {
    const double s = window_factor(delta_omega, window_s);
    return offset +
           0.5 * eta * i_in * (1.0 + v * s * std::cos(delta_omega * (t + 0.5 * window_s) + phi));
}

FitResult fit_fringe(std::span<const double> times, std::span<const double> values, double i_in,
                     double delta_omega, const FitOptions &options) {
    if (times.size() != values.size()) throw ConfigError("fit: times and values differ in length");
    const int np = options.mode == FitMode::free_frequency ? 4 : 3;
    if (values.size() < static_cast<std::size_t>(np + 1)) {
        throw FitError(FitError::Kind::IllConditioned, "fit: too few samples");
    }
    if (!(i_in > 0.0)) throw ConfigError("fit: input intensity must be positive");
    const auto [t_lo, t_hi] = std::minmax_element(times.begin(), times.end());
    const double span = (*t_hi - *t_lo) + options.window_s;
    if (!(std::abs(delta_omega) * span >= std::numbers::pi)) {
        std::ostringstream msg;
        msg << "fit: record covers " << std::abs(delta_omega) * span / kTwoPi
            << " fringes, need at least half a fringe";
        throw FitError(FitError::Kind::IllConditioned, msg.str());
    }

    const FringeProblem prob(times, values, i_in, options);

    // Closed-form start from the extremes of the trace.
    const auto [y_lo, y_hi] = std::minmax_element(values.begin(), values.end());
    const double hi = *y_hi - options.offset, lo = *y_lo - options.offset;
    const double s = window_factor(delta_omega, options.window_s);
    double v0 = (hi + lo) > 0.0 ? (hi - lo) / (hi + lo) : 0.5;
    if (std::abs(s) > 1e-3) v0 /= s;
    v0 = std::clamp(v0, 0.05, 1.0);
    const double eta0 = std::max((hi + lo) / i_in, 1e-6);

    const int grid = std::max(1, options.phase_grid);
    RunOutcome best;
    for (int k = 0; k < grid; ++k) {
        Params start{v0, eta0, kTwoPi * k / grid, delta_omega};
        RunOutcome run = levenberg_marquardt(prob, start, options);
        const bool better = (run.converged && !best.converged) ||
                            (run.converged == best.converged && run.cost < best.cost);
        if (better) best = run;
    }

    FitResult result;
    result.v_hat = best.p[kV];
    result.eta_hat = best.p[kEta];
    result.phi_hat = wrap_two_pi(best.p[kPhi]);
    result.delta_omega_hat = best.p[kOmega];
    result.delta_omega_free = np == 4;
    result.converged = best.converged;
    result.iterations = best.iterations;
    result.gradient_cosine = best.gradient_cosine;

    Vec model;
    Mat jac;
    prob.evaluate(best.p, model, &jac);
    const Vec y = prob.observed();
    result.residual_rms = std::sqrt((y - model).squaredNorm() / static_cast<double>(y.size()));

    const Vec sw = prob.weights(model).cwiseSqrt();
    const Mat jw = sw.asDiagonal() * jac;
    const Mat normal = jw.transpose() * jw;
    const double dof = static_cast<double>(y.size()) - np;
    const double scale = sw.cwiseProduct(y - model).squaredNorm() / dof;
    Eigen::FullPivLU<Mat> lu(normal);
    for (auto &row : result.covariance) row.fill(std::numeric_limits<double>::quiet_NaN());
    result.std_error.fill(std::numeric_limits<double>::quiet_NaN());
    if (lu.isInvertible()) {
        const Mat cov = lu.inverse() * scale;
        for (int a = 0; a < np; ++a) {
            for (int b = 0; b < np; ++b) {
                result.covariance[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                    cov(a, b);
            }
            result.std_error[static_cast<std::size_t>(a)] = std::sqrt(std::max(cov(a, a), 0.0));
        }
    }

    if (!result.converged) {
        std::ostringstream msg;
        msg << "fit did not converge after " << options.max_iterations
            << " iterations (gradient cosine " << result.gradient_cosine << ")";
        throw FitError(FitError::Kind::NonConvergence, msg.str());
    }
    return result;
}

FitResult fit_fringe(const TimeSeries &series, double i_in, double delta_omega,
                     const FitOptions &options) {
    const std::vector<double> t = series.times();
    return fit_fringe(t, series.samples, i_in, delta_omega, options);
}

FitResult fit_fringe(const CountSeries &series, double i_in, double delta_omega,
                     FitOptions options) {
    std::vector<double> t(series.size()), y(series.size());
    for (std::size_t k = 0; k < series.size(); ++k) {
        t[k] = series.window_start(k);
        y[k] = static_cast<double>(series.counts[k]);
    }
    options.window_s = series.window_s;
    options.poisson_weights = true;
    return fit_fringe(t, y, i_in, delta_omega, options);
}

}  // namespace abisim
