#include "epiwave/forecasters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epiwave/util.hpp"

namespace epiwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
}

// AICc for a least-squares fit with k effective parameters (variance included).
double aicc(double sse, long n_res, int k) {
    if (n_res - k - 1 < 1) return kInf;
    double mse = std::max(sse / static_cast<double>(n_res), 1e-300);
    double aic = static_cast<double>(n_res) * std::log(mse) + 2.0 * k;
    return aic + 2.0 * k * (k + 1.0) / static_cast<double>(n_res - k - 1);
}

// --- exponential smoothing -------------------------------------------------

struct EtsEval {
    double sse = kInf;
    double level = 0;
    double trend = 0;
};

// One pass of the smoothing recursion. Residuals are accumulated from t = 2
// so all three candidate families are compared on the same sample.
EtsEval ets_run(std::span<const double> x, ModelFamily family, double alpha, double beta,
                double phi) {
    EtsEval r;
    r.sse = 0.0;
    std::size_t n = x.size();
    if (family == ModelFamily::ses) {
        double level = x[0];
        for (std::size_t t = 1; t < n; ++t) {
            double resid = x[t] - level;
            if (t >= 2) r.sse += resid * resid;
            level = alpha * x[t] + (1 - alpha) * level;
        }
        r.level = level;
        return r;
    }
    double damp = family == ModelFamily::damped_holt ? phi : 1.0;
    double level = x[0];
    double trend = x[1] - x[0];
    for (std::size_t t = 1; t < n; ++t) {
        double forecast = level + damp * trend;
        double resid = x[t] - forecast;
        if (t >= 2) r.sse += resid * resid;
        double new_level = alpha * x[t] + (1 - alpha) * forecast;
        trend = beta * (new_level - level) + (1 - beta) * damp * trend;
        level = new_level;
    }
    r.level = level;
    r.trend = trend;
    return r;
}

struct EtsCandidate {
    double alpha = 0.5;
    double beta = 0.1;
    double phi = 0.9;
    double sse = kInf;
};

EtsCandidate ets_optimize(std::span<const double> x, ModelFamily family) {
    EtsCandidate best;
    auto consider = [&](double a, double b, double p) {
        double sse = ets_run(x, family, a, b, p).sse;
        if (sse < best.sse) best = EtsCandidate{a, b, p, sse};
    };

    if (family == ModelFamily::ses) {
        for (double a = 0.05; a < 0.96; a += 0.05) consider(a, 0, 0);
        double step = 0.05;
        for (int round = 0; round < 3; ++round) {
            step /= 5.0;
            double center = best.alpha;
            for (int i = -4; i <= 4; ++i)
                consider(std::clamp(center + i * step, 1e-4, 0.9999), 0, 0);
        }
        return best;
    }

    const double alphas[] = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
    const double betas[] = {0.01, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 0.95};
    const double phis[] = {0.80, 0.85, 0.90, 0.95, 0.98};
    bool damped = family == ModelFamily::damped_holt;
    for (double a : alphas)
        for (double b : betas) {
            if (b > a) continue;  // usual admissibility constraint
            if (damped) {
                for (double p : phis) consider(a, b, p);
            } else {
                consider(a, b, 1.0);
            }
        }
    double astep = 0.05, bstep = 0.02, pstep = 0.02;
    for (int round = 0; round < 3; ++round) {
        EtsCandidate center = best;
        for (int i = -2; i <= 2; ++i)
            for (int j = -2; j <= 2; ++j) {
                double a = std::clamp(center.alpha + i * astep, 1e-4, 0.9999);
                double b = std::clamp(center.beta + j * bstep, 1e-4, a);
                if (damped) {
                    for (int k = -2; k <= 2; ++k)
                        consider(a, b, std::clamp(center.phi + k * pstep, 0.5, 0.99));
                } else {
                    consider(a, b, 1.0);
                }
            }
        astep /= 5.0;
        bstep /= 5.0;
        pstep /= 5.0;
    }
    return best;
}

// --- autoregression ---------------------------------------------------------

std::vector<double> difference(std::span<const double> x, int d) {
    std::vector<double> w(x.begin(), x.end());
    for (int i = 0; i < d; ++i) {
        std::vector<double> next(w.size() - 1);
        for (std::size_t t = 0; t + 1 < w.size(); ++t) next[t] = w[t + 1] - w[t];
        w = std::move(next);
    }
    return w;
}

// Solves A b = rhs in place; returns false on a (near-)singular system.
bool solve_linear(std::vector<std::vector<double>>& a, std::vector<double>& rhs) {
    std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-10) return false;
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        double v = rhs[col];
        for (std::size_t c = col + 1; c < n; ++c) v -= a[col][c] * rhs[c];
        rhs[col] = v / a[col][col];
    }
    return true;
}

struct ArCandidate {
    int d = 0;
    int p = 0;
    std::vector<double> coef;  // intercept, then phi_1..phi_p
    double sse = kInf;
    long n_res = 0;
    bool ok = false;
};

ArCandidate ar_least_squares(const std::vector<double>& w, int d, int p) {
    ArCandidate cand;
    cand.d = d;
    cand.p = p;
    long m = static_cast<long>(w.size());
    long n_res = m - p;
    int k = p + 2;  // intercept + AR coefficients + variance
    if (n_res < k + 2) return cand;

    std::size_t dim = static_cast<std::size_t>(p) + 1;
    std::vector<std::vector<double>> xtx(dim, std::vector<double>(dim, 0.0));
    std::vector<double> xty(dim, 0.0);
    for (long t = p; t < m; ++t) {
        std::vector<double> row(dim);
        row[0] = 1.0;
        for (int j = 1; j <= p; ++j) row[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(t - j)];
        for (std::size_t i = 0; i < dim; ++i) {
            xty[i] += row[i] * w[static_cast<std::size_t>(t)];
            for (std::size_t j = 0; j < dim; ++j) xtx[i][j] += row[i] * row[j];
        }
    }
    std::vector<double> beta = xty;
    if (!solve_linear(xtx, beta)) return cand;

    double sse = 0.0;
    for (long t = p; t < m; ++t) {
        double pred = beta[0];
        for (int j = 1; j <= p; ++j)
            pred += beta[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(t - j)];
        double resid = w[static_cast<std::size_t>(t)] - pred;
        sse += resid * resid;
    }
    cand.coef = std::move(beta);
    cand.sse = sse;
    cand.n_res = n_res;
    cand.ok = true;
    return cand;
}

// Coefficients A_j of the level-scale representation
// x_t = c + sum_j A_j x_{t-j} + e_t implied by an AR(p) on the d-th difference.
std::vector<double> level_ar_coefficients(const FittedModel& m) {
    int d = static_cast<int>(m.params[0]);
    int p = static_cast<int>(m.params[1]);
    // poly(B) = (1 - sum phi_j B^j) * (1 - B)^d, stored low-order first.
    std::vector<double> poly(static_cast<std::size_t>(p) + 1, 0.0);
    poly[0] = 1.0;
    for (int j = 1; j <= p; ++j) poly[static_cast<std::size_t>(j)] = -m.params[static_cast<std::size_t>(2 + j)];
    for (int i = 0; i < d; ++i) {
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t j = 0; j < poly.size(); ++j) {
            next[j] += poly[j];
            next[j + 1] -= poly[j];
        }
        poly = std::move(next);
    }
    std::vector<double> a(poly.size() - 1);
    for (std::size_t j = 1; j < poly.size(); ++j) a[j - 1] = -poly[j];
    return a;
}

std::vector<double> psi_weights(const FittedModel& m, int count) {
    std::vector<double> a = level_ar_coefficients(m);
    std::vector<double> psi(static_cast<std::size_t>(count), 0.0);
    if (count == 0) return psi;
    psi[0] = 1.0;
    for (int k = 1; k < count; ++k) {
        double v = 0.0;
        for (int j = 1; j <= std::min<int>(k, static_cast<int>(a.size())); ++j)
            v += a[static_cast<std::size_t>(j - 1)] * psi[static_cast<std::size_t>(k - j)];
        psi[static_cast<std::size_t>(k)] = v;
    }
    return psi;
}

void require_history(std::span<const double> history, std::size_t min_len, const char* who) {
    if (history.size() < min_len)
        throw InsufficientDataError(std::string(who) + ": need at least " +
                                    std::to_string(min_len) + " observations, have " +
                                    std::to_string(history.size()));
    for (double v : history)
        if (!std::isfinite(v))
            throw InsufficientDataError(std::string(who) + ": history contains non-finite values");
}

} // namespace

const std::array<std::string, 23>& quantile_level_text() {
    static const std::array<std::string, 23> text = {
        "0.01", "0.025", "0.05", "0.1",  "0.15", "0.2",  "0.25", "0.3",
        "0.35", "0.4",   "0.45", "0.5",  "0.55", "0.6",  "0.65", "0.7",
        "0.75", "0.8",   "0.85", "0.9",  "0.95", "0.975", "0.99"};
    return text;
}

int quantile_level_index(double level) {
    for (std::size_t i = 0; i < kQuantileLevels.size(); ++i)
        if (std::fabs(kQuantileLevels[i] - level) < 1e-12) return static_cast<int>(i);
    return -1;
}

std::string_view family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::flat: return "flat";
        case ModelFamily::ses: return "ses";
        case ModelFamily::holt: return "holt";
        case ModelFamily::damped_holt: return "damped_holt";
        case ModelFamily::ar: return "ar";
    }
    return "unknown";
}

FittedModel fit_flat(std::span<const double> history) {
    require_history(history, 2, "fit_flat");
    std::size_t n = history.size();
    double mean = 0.0;
    for (std::size_t i = 1; i < n; ++i) mean += history[i] - history[i - 1];
    mean /= static_cast<double>(n - 1);
    double var = 0.0;
    if (n >= 3) {
        for (std::size_t i = 1; i < n; ++i) {
            double d = (history[i] - history[i - 1]) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n - 2);  // sample variance of the diffs
    }
    FittedModel m;
    m.family = ModelFamily::flat;
    m.residual_variance = std::max(var, kVarianceFloor);
    m.state = {history.back()};
    return m;
}

FittedModel fit_ets(std::span<const double> history) {
    require_history(history, 8, "fit_ets");
    long n_res = static_cast<long>(history.size()) - 2;

    EtsCandidate ses = ets_optimize(history, ModelFamily::ses);
    EtsCandidate holt = ets_optimize(history, ModelFamily::holt);
    EtsCandidate damped = ets_optimize(history, ModelFamily::damped_holt);

    double a_ses = aicc(ses.sse, n_res, 2);
    double a_holt = aicc(holt.sse, n_res, 3);
    double a_damped = aicc(damped.sse, n_res, 4);

    // Ties go to the simpler family.
    ModelFamily family = ModelFamily::ses;
    double best = a_ses;
    if (a_holt < best) {
        family = ModelFamily::holt;
        best = a_holt;
    }
    if (a_damped < best) family = ModelFamily::damped_holt;

    const EtsCandidate& c = family == ModelFamily::ses    ? ses
                            : family == ModelFamily::holt ? holt
                                                          : damped;
    EtsEval final = ets_run(history, family, c.alpha, c.beta, c.phi);

    FittedModel m;
    m.family = family;
    m.residual_variance = std::max(c.sse / static_cast<double>(n_res), kVarianceFloor);
    if (family == ModelFamily::ses) {
        m.params = {c.alpha};
        m.state = {final.level};
    } else if (family == ModelFamily::holt) {
        m.params = {c.alpha, c.beta};
        m.state = {final.level, final.trend};
    } else {
        m.params = {c.alpha, c.beta, c.phi};
        m.state = {final.level, final.trend};
    }
    return m;
}

FittedModel fit_ar(std::span<const double> history) {
    require_history(history, 8, "fit_ar");

    ArCandidate best;
    double best_aicc = kInf;
    for (int p = 0; p <= 5; ++p) {
        for (int d = 0; d <= 1; ++d) {
            std::vector<double> w = difference(history, d);
            ArCandidate cand = ar_least_squares(w, d, p);
            if (!cand.ok) continue;
            double a = aicc(cand.sse, cand.n_res, p + 2);
            if (a < best_aicc) {
                best_aicc = a;
                best = std::move(cand);
            }
        }
    }
    if (!best.ok) {
        // Degenerate regressions all the way down; fall back to the p = 0
        // drift model, which only needs a mean.
        best = ar_least_squares(difference(history, 0), 0, 0);
        if (!best.ok) throw InsufficientDataError("fit_ar: history too short to fit any model");
    }

    FittedModel m;
    m.family = ModelFamily::ar;
    m.params = {static_cast<double>(best.d), static_cast<double>(best.p)};
    m.params.insert(m.params.end(), best.coef.begin(), best.coef.end());
    m.residual_variance =
        std::max(best.sse / static_cast<double>(best.n_res), kVarianceFloor);
    std::size_t tail = static_cast<std::size_t>(std::max(best.p + best.d, 1));
    tail = std::min(tail, history.size());
    m.state.assign(history.end() - static_cast<long>(tail), history.end());
    return m;
}

std::vector<double> point_forecasts(const FittedModel& m, int horizons) {
    if (horizons < 1) throw RangeError("point_forecasts: horizons must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(horizons));
    switch (m.family) {
        case ModelFamily::flat:
        case ModelFamily::ses: {
            double v = m.state[0];
            std::fill(out.begin(), out.end(), v);
            return out;
        }
        case ModelFamily::holt: {
            for (int k = 1; k <= horizons; ++k)
                out[static_cast<std::size_t>(k - 1)] = m.state[0] + k * m.state[1];
            return out;
        }
        case ModelFamily::damped_holt: {
            double phi = m.params[2];
            double damp_sum = 0.0, damp = 1.0;
            for (int k = 1; k <= horizons; ++k) {
                damp *= phi;
                damp_sum += damp;
                out[static_cast<std::size_t>(k - 1)] = m.state[0] + damp_sum * m.state[1];
            }
            return out;
        }
        case ModelFamily::ar: {
            int d = static_cast<int>(m.params[0]);
            int p = static_cast<int>(m.params[1]);
            double c = m.params[2];
            std::vector<double> w = difference(m.state, d);
            double x_last = m.state.back();
            for (int k = 1; k <= horizons; ++k) {
                double w_next = c;
                for (int j = 1; j <= p; ++j)
                    w_next += m.params[static_cast<std::size_t>(2 + j)] *
                              w[w.size() - static_cast<std::size_t>(j)];
                w.push_back(w_next);
                if (d == 0) {
                    out[static_cast<std::size_t>(k - 1)] = w_next;
                } else {
                    x_last += w_next;
                    out[static_cast<std::size_t>(k - 1)] = x_last;
                }
            }
            return out;
        }
    }
    throw ConfigError("point_forecasts: unknown model family");
}

std::vector<double> forecast_variance_multipliers(const FittedModel& m, int horizons) {
    if (horizons < 1) throw RangeError("forecast_variance_multipliers: horizons must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(horizons));
    switch (m.family) {
        case ModelFamily::flat: {
            for (int k = 1; k <= horizons; ++k) out[static_cast<std::size_t>(k - 1)] = k;
            return out;
        }
        case ModelFamily::ses:
        case ModelFamily::holt:
        case ModelFamily::damped_holt: {
            // Innovation weights c_j of the state-space form; the h-step
            // variance is sigma^2 (1 + sum_{j<h} c_j^2).
            double alpha = m.params[0];
            double acc = 1.0;
            for (int k = 1; k <= horizons; ++k) {
                out[static_cast<std::size_t>(k - 1)] = acc;
                double cj;
                if (m.family == ModelFamily::ses) {
                    cj = alpha;
                } else if (m.family == ModelFamily::holt) {
                    cj = alpha + m.params[1] * k;
                } else {
                    double phi = m.params[2];
                    cj = alpha + m.params[1] * phi * (1.0 - std::pow(phi, k)) / (1.0 - phi);
                }
                acc += cj * cj;
            }
            return out;
        }
        case ModelFamily::ar: {
            std::vector<double> psi = psi_weights(m, horizons);
            double acc = 0.0;
            for (int k = 0; k < horizons; ++k) {
                acc += psi[static_cast<std::size_t>(k)] * psi[static_cast<std::size_t>(k)];
                out[static_cast<std::size_t>(k)] = acc;
            }
            return out;
        }
    }
    throw ConfigError("forecast_variance_multipliers: unknown model family");
}

std::vector<double> forecast_variances(const FittedModel& m, int horizons) {
    std::vector<double> out = forecast_variance_multipliers(m, horizons);
    for (double& v : out) v *= m.residual_variance;
    return out;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw RangeError("normal_quantile: p must lie strictly in (0, 1)");
    if (p == 0.5) return 0.0;
    double pm = std::min(p, 1.0 - p);
    // Safeguarded Newton on the lower tail.
    double lo = -40.0, hi = 0.0;
    double z = -1.0;
    for (int it = 0; it < 100; ++it) {
        double f = normal_cdf(z) - pm;
        if (f > 0)
            hi = z;
        else
            lo = z;
        double step = f / std::max(normal_pdf(z), 1e-300);
        double next = z - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - z) < 1e-15) {
            z = next;
            break;
        }
        z = next;
    }
    return p < 0.5 ? z : -z;
}

std::vector<QuantileForecast> forecast_quantiles(const FittedModel& m, int max_horizon,
                                                 bool clip_at_zero) {
    if (max_horizon < 1) throw RangeError("forecast_quantiles: max_horizon must be >= 1");
    std::vector<double> points = point_forecasts(m, max_horizon);
    std::vector<double> variances = forecast_variances(m, max_horizon);

    static const std::array<double, 23> z = [] {
        std::array<double, 23> zs{};
        for (std::size_t i = 0; i < kQuantileLevels.size(); ++i)
            zs[i] = normal_quantile(kQuantileLevels[i]);
        return zs;
    }();

    std::vector<QuantileForecast> out;
    out.reserve(static_cast<std::size_t>(max_horizon));
    for (int k = 1; k <= max_horizon; ++k) {
        QuantileForecast f;
        f.model = std::string(family_name(m.family));
        f.horizon = k;
        double point = points[static_cast<std::size_t>(k - 1)];
        double sigma = std::sqrt(std::max(variances[static_cast<std::size_t>(k - 1)], 0.0));
        for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
            double q = point + z[i] * sigma;
            f.values[i] = clip_at_zero ? std::max(0.0, q) : q;
        }
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace epiwave
