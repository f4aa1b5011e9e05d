#include "harvol/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace harvol {

double Rng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

void BootstrapConfig::validate() const {
    if (replications < 1) {
        throw ValidationError("inference", "bootstrap replications must be at least 1");
    }
    if (block_length && !(*block_length >= 1.0)) {
        throw ValidationError("inference", "expected block length must be at least 1");
    }
}

namespace {

std::vector<double> autocovariances(std::span<const double> x, std::size_t max_lag) {
    const auto n = x.size();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = x[i] - mean;
    std::vector<double> acv(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag && k < n; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) s += centered[t] * centered[t + k];
        acv[k] = s / static_cast<double>(n);
    }
    return acv;
}

double flat_top(double x) {
    const double a = std::abs(x);
    if (a <= 0.5) return 1.0;
    if (a <= 1.0) return 2.0 * (1.0 - a);
    return 0.0;
}

}  // namespace

BlockLength select_block_length(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 20) {
        throw ValidationError("inference", "block length selection needs at least 20 observations, got " +
                                               std::to_string(n));
    }
    for (double v : series) {
        if (!std::isfinite(v)) throw ValidationError("inference", "non-finite value in block length input");
    }
    const double upper = static_cast<double>(n) / 3.0;
    const auto log10n = std::log10(static_cast<double>(n));
    const auto kn = std::max<std::size_t>(5, static_cast<std::size_t>(std::ceil(std::sqrt(log10n))));
    const auto m_max = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))) + kn;
    const double threshold = 2.0 * std::sqrt(log10n / static_cast<double>(n));

    const auto acv = autocovariances(series, std::min(m_max + kn, n - 1));
    BlockLength out;
    if (!(acv[0] > 0.0)) {
        out.degenerate = true;
        return out;
    }
    const auto rho = [&](std::size_t k) { return k < acv.size() ? acv[k] / acv[0] : 0.0; };

    std::size_t m_hat = m_max;
    for (std::size_t m = 0; m <= m_max; ++m) {
        bool insignificant = true;
        for (std::size_t k = 1; k <= kn; ++k) {
            if (std::abs(rho(m + k)) >= threshold) {
                insignificant = false;
                break;
            }
        }
        if (insignificant) {
            m_hat = m;
            break;
        }
    }
    const std::size_t big_m = std::min(2 * m_hat, m_max);
    out.pilot_lag = big_m;
    if (big_m == 0) {
        out.value = 1.0;
        return out;
    }

    double g = 0.0;
    double spectral = acv[0];
    for (std::size_t k = 1; k <= big_m; ++k) {
        const double lam = flat_top(static_cast<double>(k) / static_cast<double>(big_m));
        const double r = k < acv.size() ? acv[k] : 0.0;
        g += 2.0 * lam * static_cast<double>(k) * r;
        spectral += 2.0 * lam * r;
    }
    const double d_sb = 2.0 * spectral * spectral;
    const double b = std::cbrt(2.0 * g * g / d_sb) * std::cbrt(static_cast<double>(n));
    if (!std::isfinite(b)) {
        out.degenerate = true;
        out.value = 1.0;
        return out;
    }
    out.value = std::clamp(b, 1.0, std::max(1.0, upper));
    return out;
}

double auto_block_length(std::span<const double> series, Warnings* warnings) {
    const auto bl = select_block_length(series);
    if (bl.degenerate && warnings) {
        warnings->push_back("block length selection degenerate (constant series); using 1");
    }
    return bl.value;
}

std::vector<std::size_t> stationary_bootstrap_indices(std::size_t n, double block_length, Rng& rng) {
    std::vector<std::size_t> idx(n);
    if (n == 0) return idx;
    const double p_new = 1.0 / block_length;
    idx[0] = rng.index(n);
    for (std::size_t i = 1; i < n; ++i) {
        idx[i] = rng.uniform() < p_new ? rng.index(n) : (idx[i - 1] + 1) % n;
    }
    return idx;
}

BootstrapResult stationary_bootstrap_pvalues(const DesignMatrix& design, const OlsFit& fit,
                                             const BootstrapConfig& config) {
    config.validate();
    const auto n = static_cast<std::size_t>(design.regressors.rows());
    const auto k = static_cast<std::size_t>(design.regressors.cols());

    BootstrapResult out;
    out.seed = config.seed;
    out.replications = config.replications;
    if (config.block_length) {
        out.block_length = *config.block_length;
        out.block_length_auto = false;
    } else {
        const Eigen::VectorXd& y = design.response;
        out.block_length = auto_block_length(std::span<const double>(y.data(), n), &out.warnings);
    }

    const std::size_t reps = config.replications;
    std::vector<double> draws(reps * k);
    std::vector<std::size_t> redraws(reps, 0);
    constexpr std::size_t kMaxAttempts = 1000;

    const auto run = [&](std::size_t first, std::size_t last) {
        Eigen::MatrixXd xb(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
        Eigen::VectorXd yb(static_cast<Eigen::Index>(n));
        for (std::size_t b = first; b < last; ++b) {
            Rng rng(derive_seed(config.seed, "bootstrap", b));
            for (std::size_t attempt = 0;; ++attempt) {
                if (attempt == kMaxAttempts) {
                    throw NumericalError("inference", "bootstrap replication " + std::to_string(b) +
                                                          " stayed rank-deficient after " +
                                                          std::to_string(kMaxAttempts) + " redraws");
                }
                const auto idx = stationary_bootstrap_indices(n, out.block_length, rng);
                for (std::size_t i = 0; i < n; ++i) {
                    const auto src = static_cast<Eigen::Index>(idx[i]);
                    xb.row(static_cast<Eigen::Index>(i)) = design.regressors.row(src);
                    yb(static_cast<Eigen::Index>(i)) = design.response(src);
                }
                const auto beta = ols_coefficients(xb, yb);
                if (!beta) {
                    ++redraws[b];
                    continue;
                }
                std::copy(beta->data(), beta->data() + k, draws.begin() + static_cast<std::ptrdiff_t>(b * k));
                break;
            }
        }
    };

    unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
    if (threads <= 1) {
        run(0, reps);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        const std::size_t chunk = (reps + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t first = w * chunk;
            const std::size_t last = std::min(reps, first + chunk);
            pool.emplace_back([&, w, first, last] {
                try {
                    run(first, last);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    out.redraws = std::accumulate(redraws.begin(), redraws.end(), std::size_t{0});
    if (static_cast<double>(out.redraws) > 0.1 * static_cast<double>(reps)) {
        out.warnings.push_back(std::to_string(out.redraws) + " rank-deficient bootstrap resamples redrawn (over 10%)");
    }

    out.p_values.resize(k);
    out.std_errors.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double estimate = fit.coefficients(static_cast<Eigen::Index>(j));
        std::size_t extreme = 0;
        double sum = 0.0;
        for (std::size_t b = 0; b < reps; ++b) {
            const double v = draws[b * k + j];
            sum += v;
            if (std::abs(v - estimate) >= std::abs(estimate)) ++extreme;
        }
        const double mean = sum / static_cast<double>(reps);
        double ss = 0.0;
        for (std::size_t b = 0; b < reps; ++b) {
            const double d = draws[b * k + j] - mean;
            ss += d * d;
        }
        out.p_values[j] = static_cast<double>(extreme) / static_cast<double>(reps);
        out.std_errors[j] = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
    }
    return out;
}

SerialTestResult auto_portmanteau(std::span<const double> residuals, std::size_t max_lag) {
    const std::size_t n = residuals.size();
    if (max_lag < 1) throw ValidationError("inference", "maximum lag must be at least 1");
    if (n <= max_lag + 10) {
        throw ValidationError("inference", "portmanteau test needs more than " + std::to_string(max_lag + 10) +
                                               " residuals, got " + std::to_string(n));
    }
    const double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) / static_cast<double>(n);
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = residuals[i] - mean;

    const double nn = static_cast<double>(n);
    const double log_n = std::log(nn);
    std::vector<double> rho2(max_lag + 1, 0.0);
    double max_abs = 0.0;
    for (std::size_t j = 1; j <= max_lag; ++j) {
        double gamma = 0.0;
        double tau = 0.0;
        for (std::size_t t = j; t < n; ++t) {
            const double prod = e[t] * e[t - j];
            gamma += prod;
            tau += prod * prod;
        }
        const double m = static_cast<double>(n - j);
        gamma /= m;
        tau /= m;
        rho2[j] = tau > 0.0 ? gamma * gamma / tau : 0.0;
        max_abs = std::max(max_abs, std::sqrt(nn * rho2[j]));
    }

    constexpr double kPilot = 2.4;
    const bool small = max_abs <= std::sqrt(kPilot * log_n);
    SerialTestResult out;
    out.max_lag = max_lag;
    double q = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 1; p <= max_lag; ++p) {
        q += nn * rho2[p];
        const double penalty = small ? static_cast<double>(p) * log_n : 2.0 * static_cast<double>(p);
        const double l = q - penalty;
        if (l > best) {
            best = l;
            out.chosen_lag = p;
            out.statistic = q;
        }
    }
    out.p_value = std::erfc(std::sqrt(out.statistic / 2.0));
    return out;
}

std::string significance_stars(double p_value) {
    if (p_value < 0.01) return "c";
    if (p_value < 0.05) return "b";
    if (p_value < 0.10) return "a";
    return "";
}

FitReport fit_model(const ModelInputs& inputs, const ModelSpec& spec, const InferenceConfig& config,
                    const std::vector<std::size_t>* restrict_rows) {
    const DesignMatrix design = build_design(inputs, spec, restrict_rows);
    const OlsFit fit = ols_fit(design);
    const BootstrapResult boot = stationary_bootstrap_pvalues(design, fit, config.bootstrap);

    FitReport r;
    r.spec = spec;
    r.labels = design.labels;
    r.panels = design.panels;
    r.coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
    r.residuals.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
    r.p_values = boot.p_values;
    r.std_errors = boot.std_errors;
    r.rows = design.rows;
    r.r_squared = fit.r_squared;
    r.adjusted_r_squared = fit.adjusted_r_squared;
    r.condition_estimate = fit.condition_estimate;
    r.serial = auto_portmanteau(r.residuals, config.max_lag);
    r.seed = boot.seed;
    r.replications = boot.replications;
    r.block_length = boot.block_length;
    r.block_length_auto = boot.block_length_auto;
    r.redraws = boot.redraws;
    r.dropped_rows = design.dropped.size();
    r.warnings = design.warnings;
    r.warnings.insert(r.warnings.end(), fit.warnings.begin(), fit.warnings.end());
    r.warnings.insert(r.warnings.end(), boot.warnings.begin(), boot.warnings.end());
    return r;
}

}  // namespace harvol
