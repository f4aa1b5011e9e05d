#include "harvol/diagnostics.hpp"

#include "harvol/errors.hpp"
#include "harvol/implied.hpp"
#include "harvol/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace harvol {

double autocorrelation(std::span<const double> x, std::size_t lag) {
    const std::size_t n = x.size();
    if (lag >= n) return 0.0;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double den = 0.0;
    for (double v : x) den += (v - mean) * (v - mean);
    if (den == 0.0) return 0.0;
    double num = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) num += (x[t] - mean) * (x[t + lag] - mean);
    return num / den;
}

DescriptiveRow describe(const WindowSeries& series, std::string label) {
    std::vector<double> x;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!series[i]) continue;
        x.push_back(*series[i]);
        where.push_back(i);
    }
    if (x.size() < 31) {
        throw ValidationError("diagnostics", "'" + label + "' needs at least 31 present values, has " +
                                                 std::to_string(x.size()));
    }
    DescriptiveRow row;
    row.label = std::move(label);
    row.count = x.size();
    const double n = static_cast<double>(x.size());
    row.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double v : x) {
        const double d = v - row.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    row.sd = std::sqrt(m2 / (n - 1.0));
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0.0) {
        row.skewness = m3 / std::pow(m2, 1.5);
        row.kurtosis = m4 / (m2 * m2);
    }
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    row.min = *lo;
    row.max = *hi;
    row.min_at = series.window(where[static_cast<std::size_t>(lo - x.begin())]).start;
    row.max_at = series.window(where[static_cast<std::size_t>(hi - x.begin())]).start;
    row.rho1 = autocorrelation(x, 1);
    row.rho6 = autocorrelation(x, 6);
    row.rho30 = autocorrelation(x, 30);
    return row;
}

void SynthConfig::validate() const {
    const int w = 24 / window_hours;
    if (seasonal.size() != static_cast<std::size_t>(w - 1)) {
        throw ValidationError("diagnostics", "expected " + std::to_string(w - 1) + " seasonal coefficients, got " +
                                                 std::to_string(seasonal.size()));
    }
    if (onset.size() != onset_days.size()) {
        throw ValidationError("diagnostics", "onset coefficient and onset day counts differ");
    }
    for (const ArProcess* p : {&ln_iv, &ln_attention[0], &ln_attention[1], &ln_attention[2]}) {
        if (!(std::abs(p->persistence) < 1.0)) {
            throw NumericalError("diagnostics", "exogenous persistence must lie in (-1, 1)");
        }
        if (p->innovation_sd < 0.0) throw ValidationError("diagnostics", "negative innovation sd");
    }
    if (noise_sd < 0.0) throw ValidationError("diagnostics", "negative noise sd");

    std::vector<double> onset_effects{0.0};
    onset_effects.insert(onset_effects.end(), onset.begin(), onset.end());
    for (int j = 1; j <= w; ++j) {
        const double gamma = j < w ? seasonal[static_cast<std::size_t>(j - 1)] : 0.0;
        for (std::size_t q = 0; q < onset_effects.size(); ++q) {
            const double effective = persistence + gamma + onset_effects[q] + std::abs(v5bar);
            if (!(std::abs(effective) < 1.0)) {
                std::string where = "slot j=" + std::to_string(j);
                if (q > 0) where += " on onset day " + format_date(onset_days[q - 1]);
                throw NumericalError("diagnostics", "explosive configuration: effective lag coefficient " +
                                                        std::to_string(effective) + " in " + where);
            }
        }
    }
}

namespace {

std::vector<double> simulate_ar(const ArProcess& p, std::size_t n, Rng& rng) {
    std::vector<double> x(n);
    const double stationary_sd = p.innovation_sd / std::sqrt(1.0 - p.persistence * p.persistence);
    double prev = p.mean + stationary_sd * rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
        prev = p.mean + p.persistence * (prev - p.mean) + p.innovation_sd * rng.normal();
        x[i] = prev;
    }
    return x;
}

}  // namespace

SynthDataset simulate(const SynthConfig& c) {
    c.validate();
    const GridPtr grid = build_grid(c.start, c.end, c.window_hours);
    const WindowGrid& g = *grid;
    const std::size_t n_all = g.size(CalendarScope::all_days);
    const std::size_t n_trading = g.size(CalendarScope::trading_days);
    const int w = g.windows_per_day();

    static constexpr const char* kAttentionStreams[3] = {"attention:general_market", "attention:ruble",
                                                         "attention:russian_economy"};
    std::array<std::vector<double>, 3> attention;
    for (int a = 0; a < 3; ++a) {
        Rng rng(derive_seed(c.seed, kAttentionStreams[a]));
        attention[a] = simulate_ar(c.ln_attention[a], n_all, rng);
    }
    Rng iv_rng(derive_seed(c.seed, "implied"));
    const std::vector<double> ln_iv = simulate_ar(c.ln_iv, n_trading, iv_rng);

    SynthDataset out;
    out.inputs.grid = grid;
    out.inputs.ln_iv = WindowSeries(grid, CalendarScope::trading_days);
    for (std::size_t t = 0; t < n_trading; ++t) out.inputs.ln_iv[t] = ln_iv[t];
    out.inputs.dln_iv = diff_log_iv(out.inputs.ln_iv);
    WindowSeries* att[3] = {&out.inputs.ln_g, &out.inputs.ln_r, &out.inputs.ln_e};
    for (int a = 0; a < 3; ++a) {
        *att[a] = WindowSeries(grid, CalendarScope::all_days);
        for (std::size_t i = 0; i < n_all; ++i) (*att[a])[i] = attention[static_cast<std::size_t>(a)][i];
    }

    double mean_gamma = 0.0;
    for (double s : c.seasonal) mean_gamma += s;
    mean_gamma /= w;
    double drift = c.intercept + c.iv_level * c.ln_iv.mean;
    for (int a = 0; a < 3; ++a) drift += c.attention[static_cast<std::size_t>(a)] * c.ln_attention[a].mean;
    const double level = drift / (1.0 - c.persistence - mean_gamma - c.v5bar);

    Rng noise(derive_seed(c.seed, "response"));
    std::vector<double> ln_v(n_trading);
    const auto past = [&](std::size_t t, std::size_t k) { return t >= k ? ln_v[t - k] : level; };
    for (std::size_t t = 0; t < n_trading; ++t) {
        const Window& win = g.window(t, CalendarScope::trading_days);
        double coef = c.persistence;
        if (win.slot < w) coef += c.seasonal[static_cast<std::size_t>(win.slot - 1)];
        for (std::size_t q = 0; q < c.onset_days.size(); ++q) {
            if (win.date == c.onset_days[q]) coef += c.onset[q];
        }
        double v = c.intercept + coef * past(t, 1);
        const std::size_t all = g.to_all_days(t);
        for (std::size_t a = 0; a < 3; ++a) {
            v += c.attention[a] * (all > 0 ? attention[a][all - 1] : c.ln_attention[a].mean);
        }
        v += c.iv_level * (t > 0 ? ln_iv[t - 1] : c.ln_iv.mean);
        v += c.div * (t > 1 ? ln_iv[t - 1] - ln_iv[t - 2] : 0.0);
        if (c.v5bar != 0.0) {
            double sum = 0.0;
            for (std::size_t k = 1; k <= 5; ++k) sum += std::exp(past(t, k));
            v += c.v5bar * std::log(sum / 5.0);
        }
        v += c.noise_sd * noise.normal();
        ln_v[t] = v;
    }

    out.inputs.ln_rv = WindowSeries(grid, CalendarScope::trading_days);
    out.rv = WindowSeries(grid, CalendarScope::trading_days);
    for (std::size_t t = std::min(c.skip_leading_windows, n_trading); t < n_trading; ++t) {
        out.inputs.ln_rv[t] = ln_v[t];
        out.rv[t] = std::exp(ln_v[t]);
    }
    for (std::size_t t = 0; t < std::min(c.skip_leading_windows, n_trading); ++t) {
        out.inputs.ln_iv[t].reset();
        out.inputs.dln_iv[t].reset();
    }
    if (c.skip_leading_windows < n_trading) out.inputs.dln_iv[c.skip_leading_windows].reset();

    out.truth["const"] = c.intercept;
    out.truth["lnRV(t-1)"] = c.persistence;
    out.truth["lnRV5(t-1)"] = c.v5bar;
    out.truth["dlnIV(t-1)"] = c.div;
    out.truth["lnIV(t-1)"] = c.iv_level;
    out.truth["lnG(t-1)"] = c.attention[0];
    out.truth["lnR(t-1)"] = c.attention[1];
    out.truth["lnE(t-1)"] = c.attention[2];
    for (int j = 1; j < w; ++j) {
        out.truth["lnRV(t-1)*I(j=" + std::to_string(j) + ")"] = c.seasonal[static_cast<std::size_t>(j - 1)];
    }
    for (std::size_t q = 0; q < c.onset_days.size(); ++q) {
        out.truth["lnRV(t-1)*I(q=" + format_date(c.onset_days[q]) + ")"] = c.onset[q];
    }
    return out;
}

}  // namespace harvol
