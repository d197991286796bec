#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gibbsim/core/error.hpp"

namespace gibbsim {

/// l(s) = c + sum_i alpha_i / (1 + exp((s - beta_i) / gamma_i)), i = 1..3.
struct LogisticFitParams {
    double c = 0.0;
    std::array<double, 3> alpha{};
    std::array<double, 3> beta{};
    std::array<double, 3> gamma{1.0, 1.0, 1.0};

    double operator()(double s) const
    {
        double v = c;
        for (std::size_t i = 0; i < 3; ++i)
            if (alpha[i] != 0.0)
                v += alpha[i] * logistic((s - beta[i]) / gamma[i]);
        return v;
    }

    /// dl/ds.
    double derivative(double s) const
    {
        double v = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            if (alpha[i] == 0.0)
                continue;
            const double sg = logistic((s - beta[i]) / gamma[i]);
            v -= alpha[i] / gamma[i] * sg * (1.0 - sg);
        }
        return v;
    }

    /// 1 / (1 + e^x) without overflow.
    static double logistic(double x)
    {
        if (x >= 0.0) {
            const double e = std::exp(-x);
            return e / (1.0 + e);
        }
        return 1.0 / (1.0 + std::exp(x));
    }
};

struct LogisticFitOptions {
    int max_iterations = 400;
    /// Lower bound on |gamma| (pixels); steps are projected onto it.
    double min_width = 0.1;
    /// An extra term is kept only if the F statistic of the residual drop
    /// exceeds this (about the 0.1% level for ~100 samples and 3 extra
    /// parameters), so noise is not fitted as edge structure.
    double extra_term_f_threshold = 6.0;
    double relative_tolerance = 1e-10;
    /// Stop when ten iterations together reduce the residual by less than this fraction.
    double stall_tolerance = 1e-6;
};

struct LogisticFit {
    LogisticFitParams params;
    double rss = 0.0;
    double initial_rss = 0.0;
    int terms = 1;
    bool converged = true;
};

namespace detail {

class LogisticLevenbergMarquardt {
public:
    LogisticLevenbergMarquardt(std::span<const double> y, const LogisticFitOptions& opt)
        : y_(y), opt_(opt)
    {
    }

    // Parameter packing: [c, a1, b1, g1, a2, b2, g2, a3, b3, g3], truncated to
    // 1 + 3*terms entries.
    static Eigen::VectorXd pack(const LogisticFitParams& p, int terms)
    {
        Eigen::VectorXd v(1 + 3 * terms);
        v[0] = p.c;
        for (int i = 0; i < terms; ++i) {
            v[1 + 3 * i] = p.alpha[i];
            v[2 + 3 * i] = p.beta[i];
            v[3 + 3 * i] = p.gamma[i];
        }
        return v;
    }

    static LogisticFitParams unpack(const Eigen::VectorXd& v, LogisticFitParams base)
    {
        const int terms = static_cast<int>((v.size() - 1) / 3);
        base.c = v[0];
        for (int i = 0; i < terms; ++i) {
            base.alpha[i] = v[1 + 3 * i];
            base.beta[i] = v[2 + 3 * i];
            base.gamma[i] = v[3 + 3 * i];
        }
        return base;
    }

    double rss(const Eigen::VectorXd& v) const
    {
        const int terms = static_cast<int>((v.size() - 1) / 3);
        double acc = 0.0;
        for (std::size_t j = 0; j < y_.size(); ++j) {
            const double s = static_cast<double>(j);
            double f = v[0];
            for (int i = 0; i < terms; ++i)
                f += v[1 + 3 * i] * LogisticFitParams::logistic((s - v[2 + 3 * i]) / v[3 + 3 * i]);
            const double r = f - y_[j];
            acc += r * r;
        }
        return acc;
    }

    void jacobian(const Eigen::VectorXd& v, Eigen::MatrixXd& jac, Eigen::VectorXd& res) const
    {
        const int terms = static_cast<int>((v.size() - 1) / 3);
        const auto n = static_cast<Eigen::Index>(y_.size());
        jac.resize(n, v.size());
        res.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s = static_cast<double>(j);
            double f = v[0];
            jac(j, 0) = 1.0;
            for (int i = 0; i < terms; ++i) {
                const double a = v[1 + 3 * i], b = v[2 + 3 * i], g = v[3 + 3 * i];
                const double x = (s - b) / g;
                const double sg = LogisticFitParams::logistic(x);
                const double slope = sg * (1.0 - sg); // -d sg / dx
                f += a * sg;
                jac(j, 1 + 3 * i) = sg;
                jac(j, 2 + 3 * i) = a * slope / g;
                jac(j, 3 + 3 * i) = a * slope * x / g;
            }
            res[j] = f - y_[static_cast<std::size_t>(j)];
        }
    }

    void project(Eigen::VectorXd& v) const
    {
        const double n = static_cast<double>(y_.size());
        for (Eigen::Index k = 2; k < v.size(); k += 3) {
            v[k] = std::clamp(v[k], -0.5 * n, 1.5 * n);
            const double g = std::clamp(std::abs(v[k + 1]), opt_.min_width, n);
            v[k + 1] = v[k + 1] < 0.0 ? -g : g;
        }
    }

    // Parameters sitting on a bound with the gradient pushing outward are
    // held fixed for this iteration; a term pinned at the minimum width is a
    // step between samples, so its centre is held as well.
    void freeze_active_bounds(const Eigen::VectorXd& v, Eigen::MatrixXd& jtj, Eigen::VectorXd& grad) const
    {
        const double n = static_cast<double>(y_.size());
        auto freeze = [&](Eigen::Index k) {
            jtj.row(k).setZero();
            jtj.col(k).setZero();
            jtj(k, k) = 1.0;
            grad[k] = 0.0;
        };
        for (Eigen::Index k = 2; k < v.size(); k += 3) {
            if ((v[k] <= -0.5 * n && grad[k] > 0.0) || (v[k] >= 1.5 * n && grad[k] < 0.0))
                freeze(k);
            const double g = std::abs(v[k + 1]);
            const double outward = v[k + 1] < 0.0 ? -grad[k + 1] : grad[k + 1];
            if (g <= opt_.min_width && outward > 0.0) {
                freeze(k);
                freeze(k + 1);
            }
            else if (g >= n && outward < 0.0) {
                freeze(k + 1);
            }
        }
    }

    // Marquardt-scaled damping. Returns true on convergence.
    bool minimize(Eigen::VectorXd& v, double& cost) const
    {
        project(v);
        cost = rss(v);
        double lambda = 1e-3;
        Eigen::MatrixXd jac;
        Eigen::VectorXd res;
        double window_cost = cost;
        for (int it = 0; it < opt_.max_iterations; ++it) {
            if (it > 0 && it % 10 == 0) {
                if (window_cost - cost <= opt_.stall_tolerance * cost)
                    return true;
                window_cost = cost;
            }
            jacobian(v, jac, res);
            Eigen::MatrixXd jtj = jac.transpose() * jac;
            Eigen::VectorXd grad = jac.transpose() * res;
            freeze_active_bounds(v, jtj, grad);
            const Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12 * (1.0 + jtj.diagonal().maxCoeff()));
            bool improved = false;
            while (lambda < 1e16) {
                Eigen::MatrixXd a = jtj;
                a.diagonal() += lambda * diag;
                Eigen::VectorXd step = a.ldlt().solve(-grad);
                Eigen::VectorXd trial = v + step;
                project(trial);
                const double trial_cost = rss(trial);
                if (std::isfinite(trial_cost) && trial_cost < cost) {
                    const double drop = cost - trial_cost;
                    v = trial;
                    cost = trial_cost;
                    lambda = std::max(lambda * 0.1, 1e-12);
                    improved = true;
                    if (drop <= opt_.relative_tolerance * (cost + 1e-300))
                        return true;
                    break;
                }
                lambda *= 10.0;
            }
            if (!improved)
                return true; // no descent direction left: local minimum
        }
        return false;
    }

private:
    std::span<const double> y_;
    LogisticFitOptions opt_;
};

} // namespace detail

/// Deterministic starting point: c = min, term 1 spans the range at the
/// steepest step of the 5-sample box-smoothed row with |gamma| = 2 (sign
/// from the edge direction), terms 2 and 3 start empty 10 samples either side.
inline LogisticFitParams initial_logistic_params(std::span<const double> row)
{
    const auto [mn, mx] = std::minmax_element(row.begin(), row.end());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(row.size());
    std::vector<double> smooth(row.size());
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::ptrdiff_t k = j - 2; k <= j + 2; ++k)
            s += row[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, n - 1))];
        smooth[static_cast<std::size_t>(j)] = s / 5.0;
    }
    std::size_t steepest = 0;
    double best = -1.0;
    for (std::size_t j = 0; j + 1 < smooth.size(); ++j) {
        const double g = std::abs(smooth[j + 1] - smooth[j]);
        if (g > best) {
            best = g;
            steepest = j;
        }
    }
    const bool rising = smooth[steepest + 1] > smooth[steepest];
    LogisticFitParams p;
    p.c = *mn;
    p.alpha = {*mx - *mn, 0.0, 0.0};
    const double b = static_cast<double>(steepest) + 0.5;
    p.beta = {b, b - 10.0, b + 10.0};
    const double g = rising ? -2.0 : 2.0;
    p.gamma = {g, 2.0, 2.0};
    return p;
}

namespace detail {

// New term centred on the largest 5-sample mean residual, sized to it.
inline void seed_extra_term(LogisticFitParams& p, int index, std::span<const double> row)
{
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(row.size());
    std::vector<double> res(row.size());
    for (std::ptrdiff_t j = 0; j < n; ++j)
        res[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(j)] - p(static_cast<double>(j));
    std::ptrdiff_t best = 0;
    double best_mean = 0.0;
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        double s = 0.0;
        int cnt = 0;
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(j - 2, 0); k <= std::min(j + 2, n - 1); ++k, ++cnt)
            s += res[static_cast<std::size_t>(k)];
        s /= cnt;
        if (std::abs(s) > std::abs(best_mean)) {
            best_mean = s;
            best = j;
        }
    }
    const auto i = static_cast<std::size_t>(index);
    p.alpha[i] = 2.0 * best_mean;
    p.beta[i] = static_cast<double>(best);
    p.gamma[i] = p.gamma[0] < 0.0 ? -2.0 : 2.0;
}

} // namespace detail

/// Least-squares fit of the three-term logistic sum by Levenberg-Marquardt.
/// Terms are added one at a time; each extra term must pass an F test.
inline LogisticFit fit_logistic_sum(std::span<const double> row, const LogisticFitOptions& opt = {})
{
    if (row.size() < 20)
        throw ArgumentError("fit_logistic_sum: need at least 20 samples");
    const LogisticFitParams init = initial_logistic_params(row);
    detail::LogisticLevenbergMarquardt lm(row, opt);
    const double n = static_cast<double>(row.size());

    LogisticFit fit;
    fit.params = init;
    fit.initial_rss = lm.rss(detail::LogisticLevenbergMarquardt::pack(init, 3));

    Eigen::VectorXd v = detail::LogisticLevenbergMarquardt::pack(init, 1);
    double cost = 0.0;
    fit.converged = lm.minimize(v, cost);
    fit.params = detail::LogisticLevenbergMarquardt::unpack(v, init);
    fit.params.alpha[1] = fit.params.alpha[2] = 0.0;
    fit.rss = cost;
    fit.terms = 1;

    for (int terms = 2; terms <= 3; ++terms) {
        LogisticFitParams start = fit.params;
        detail::seed_extra_term(start, terms - 1, row);
        Eigen::VectorXd w = detail::LogisticLevenbergMarquardt::pack(start, terms);
        double wcost = 0.0;
        const bool ok = lm.minimize(w, wcost);
        const double dof = n - static_cast<double>(w.size());
        if (dof <= 0.0)
            break;
        const double f_stat = wcost > 0.0 ? ((fit.rss - wcost) / 3.0) / (wcost / dof)
                                          : (fit.rss > 0.0 ? INFINITY : 0.0);
        if (!(f_stat > opt.extra_term_f_threshold))
            break;
        fit.params = detail::LogisticLevenbergMarquardt::unpack(w, start);
        for (int i = terms; i < 3; ++i)
            fit.params.alpha[i] = 0.0;
        fit.rss = wcost;
        fit.terms = terms;
        fit.converged = ok;
    }
    return fit;
}

/// Line-spread function: analytic derivative of the fitted edge on `grid`.
inline std::vector<double> lsf_from_fit(const LogisticFitParams& params, std::span<const double> grid)
{
    std::vector<double> out(grid.size());
    std::transform(grid.begin(), grid.end(), out.begin(), [&](double s) { return params.derivative(s); });
    return out;
}

/// Evenly spaced grid [start, stop] with `step` spacing.
inline std::vector<double> sample_grid(double start, double stop, double step)
{
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    g.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        g.push_back(start + step * static_cast<double>(i));
    return g;
}

} // namespace gibbsim
