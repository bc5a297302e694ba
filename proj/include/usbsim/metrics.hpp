/**
 * @file metrics.hpp
 * @brief PSD, tone metrics (THD/SFDR/SNR/SNDR), noise density and static
 * linearity for reconstructed streams.
 */
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "units.hpp"

namespace usbsim {

enum class Window { Rectangular, Hann, FlatTop };

inline std::vector<double> make_window(Window w, std::size_t n)
{
    std::vector<double> v(n, 1.0);
    const double N = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * kPi * static_cast<double>(i) / N;
        switch (w) {
        case Window::Rectangular: break;
        case Window::Hann: v[i] = 0.5 - 0.5 * std::cos(x); break;
        case Window::FlatTop:
            v[i] = 0.21557895 - 0.41663158 * std::cos(x) + 0.277263158 * std::cos(2 * x)
                 - 0.083578947 * std::cos(3 * x) + 0.006947368 * std::cos(4 * x);
            break;
        }
    }
    return v;
}

namespace detail {

// FFTW planning is not thread safe; execution on a private plan is.
inline std::mutex& fftw_mutex()
{
    static std::mutex m;
    return m;
}

inline std::vector<std::complex<double>> rfft(const std::vector<double>& x)
{
    const int n = static_cast<int>(x.size());
    std::vector<double> in(x);
    std::vector<std::complex<double>> out(x.size() / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

} // namespace detail

struct PSD {
    std::vector<double> freq;    // Hz
    std::vector<double> density; // V^2/Hz, one-sided
    double resolution = 0.0;     // Hz per bin
    double enbw_bins = 1.0;      // equivalent noise bandwidth of the window, in bins
    std::size_t segments = 1;

    double total_power() const
    {
        double s = 0.0;
        for (double d : density)
            s += d;
        return s * resolution;
    }

    std::string csv() const
    {
        std::ostringstream o;
        o.precision(10);
        o << "frequency_hz,density_v2_per_hz\n";
        for (std::size_t i = 0; i < freq.size(); ++i)
            o << freq[i] << "," << density[i] << "\n";
        return o.str();
    }
};

// One-sided density, Welch-averaged over non-overlapping segments when
// segment > 0. A sine of amplitude A integrates to A^2/2 across its lobe.
inline PSD psd(const std::vector<double>& x, double f_sample, Window win = Window::Hann, std::size_t segment = 0)
{
    if (x.size() < 1024)
        throw ValidationError("psd: need at least 1024 samples, got " + std::to_string(x.size()));
    const std::size_t L = segment == 0 ? x.size() : std::min(segment, x.size());
    const std::size_t nseg = x.size() / L;
    const auto w = make_window(win, L);
    double s1 = 0.0, s2 = 0.0;
    for (double v : w) {
        s1 += v;
        s2 += v * v;
    }
    PSD p;
    p.resolution = f_sample / static_cast<double>(L);
    p.enbw_bins = static_cast<double>(L) * s2 / (s1 * s1);
    p.segments = nseg;
    const std::size_t nb = L / 2 + 1;
    p.freq.resize(nb);
    p.density.assign(nb, 0.0);
    for (std::size_t k = 0; k < nb; ++k)
        p.freq[k] = p.resolution * static_cast<double>(k);
    std::vector<double> seg(L);
    for (std::size_t s = 0; s < nseg; ++s) {
        for (std::size_t i = 0; i < L; ++i)
            seg[i] = x[s * L + i] * w[i];
        const auto X = detail::rfft(seg);
        for (std::size_t k = 0; k < nb; ++k) {
            double d = std::norm(X[k]) / (f_sample * s2);
            const bool edge = k == 0 || (L % 2 == 0 && k == nb - 1);
            if (!edge)
                d *= 2.0;
            p.density[k] += d / static_cast<double>(nseg);
        }
    }
    return p;
}

struct MetricsReport {
    double f0 = 0.0;
    double signal_power = 0.0;   // V^2
    double signal_amplitude = 0.0; // V peak
    double thd_db = 0.0;
    double sfdr_db = 0.0;
    double snr_db = 0.0;
    double sndr_db = 0.0;
    double noise_density = 0.0;  // V/rtHz, from the noise bins
    double gain_db = 0.0;
    double max_static_nonlinearity_pct = 0.0;
    std::vector<double> harmonic_freqs; // after folding
    std::vector<std::string> notes;
    PSD spectrum;

    std::string summary() const
    {
        std::ostringstream o;
        o.precision(6);
        o << "f0_hz=" << f0 << "\n"
          << "signal_amplitude_v=" << signal_amplitude << "\n"
          << "thd_db=" << thd_db << "\n"
          << "sfdr_db=" << sfdr_db << "\n"
          << "snr_db=" << snr_db << "\n"
          << "sndr_db=" << sndr_db << "\n"
          << "noise_density_v_rthz=" << noise_density << "\n";
        if (gain_db != 0.0)
            o << "gain_db=" << gain_db << "\n";
        if (max_static_nonlinearity_pct != 0.0)
            o << "max_static_nonlinearity_pct=" << max_static_nonlinearity_pct << "\n";
        for (const auto& n : notes)
            o << "note=" << n << "\n";
        return o.str();
    }
};

struct ToneOptions {
    int harmonics = 5;          // 2nd..6th
    int lobe_bins = 6;          // half-width of a tone's main lobe (flat-top)
    int dc_bins = 6;
    double floor_db = -120.0;
    Window window = Window::FlatTop;
};

inline std::size_t nearest_bin(double f, const PSD& p)
{
    const auto k = static_cast<long>(std::llround(f / p.resolution));
    return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(p.freq.size()) - 1));
}

inline double fold(double f, double fs)
{
    f = std::fmod(f, fs);
    if (f < 0.0)
        f += fs;
    return f > 0.5 * fs ? fs - f : f;
}

// Power of the component at f: density summed over its lobe.
inline double tone_power(const PSD& p, double f, int lobe_bins)
{
    const long c = static_cast<long>(nearest_bin(f, p));
    double s = 0.0;
    for (long k = c - lobe_bins; k <= c + lobe_bins; ++k)
        if (k >= 0 && k < static_cast<long>(p.density.size()))
            s += p.density[static_cast<std::size_t>(k)];
    return s * p.resolution;
}

namespace detail {

struct SineFit {
    double a = 0.0, b = 0.0, c = 0.0; // a cos + b sin + c
    double at(std::size_t i, double fs, double f0) const
    {
        const double ph = 2.0 * kPi * f0 * static_cast<double>(i) / fs;
        return a * std::cos(ph) + b * std::sin(ph) + c;
    }
};

// Three-parameter fit with the frequency known.
inline SineFit sine_fit(const std::vector<double>& x, double fs, double f0)
{
    double m[3][4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ph = 2.0 * kPi * f0 * static_cast<double>(i) / fs;
        const double v[3] = {std::cos(ph), std::sin(ph), 1.0};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c)
                m[r][c] += v[r] * v[c];
            m[r][3] += v[r] * x[i];
        }
    }
    for (int k = 0; k < 3; ++k) {
        int piv = k;
        for (int r = k + 1; r < 3; ++r)
            if (std::abs(m[r][k]) > std::abs(m[piv][k]))
                piv = r;
        std::swap(m[k], m[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == k)
                continue;
            const double q = m[r][k] / m[k][k];
            for (int c = k; c < 4; ++c)
                m[r][c] -= q * m[k][c];
        }
    }
    return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

} // namespace detail

inline MetricsReport tone_metrics(const std::vector<double>& x, double f_sample, double f0, const ToneOptions& opt = {})
{
    if (!(f0 > 0.0 && f0 < 0.5 * f_sample))
        throw ValidationError("tone_metrics: f0 must lie in (0, f_sample/2)");
    MetricsReport r;
    r.f0 = f0;
    r.spectrum = psd(x, f_sample, opt.window);
    // The fundamental is taken from a least-squares sine fit at f0 and
    // subtracted; everything else is read off the residual's spectrum, so the
    // window's leakage from the carrier tone does not set the floor.
    const auto fit = detail::sine_fit(x, f_sample, f0);
    std::vector<double> resid(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        resid[i] = x[i] - fit.at(i, f_sample, f0);
    const PSD p = psd(resid, f_sample, opt.window);
    const long nb = static_cast<long>(p.density.size());
    std::vector<char> used(static_cast<std::size_t>(nb), 0);
    auto mark = [&](std::size_t c) {
        for (long k = static_cast<long>(c) - opt.lobe_bins; k <= static_cast<long>(c) + opt.lobe_bins; ++k)
            if (k >= 0 && k < nb)
                used[static_cast<std::size_t>(k)] = 1;
    };
    for (long k = 0; k <= opt.dc_bins && k < nb; ++k)
        used[static_cast<std::size_t>(k)] = 2;
    const std::size_t c0 = nearest_bin(f0, p);
    r.signal_power = 0.5 * (fit.a * fit.a + fit.b * fit.b);
    r.signal_amplitude = std::sqrt(2.0 * r.signal_power);
    mark(c0);
    double harm = 0.0, worst_harm = 0.0;
    bool folded = false;
    for (int h = 2; h <= opt.harmonics + 1; ++h) {
        const double fh = fold(h * f0, f_sample);
        folded |= h * f0 > 0.5 * f_sample;
        r.harmonic_freqs.push_back(fh);
        const std::size_t ch = nearest_bin(fh, p);
        if (ch <= static_cast<std::size_t>(opt.dc_bins) || std::abs(static_cast<long>(ch) - static_cast<long>(c0)) <= opt.lobe_bins) {
            r.notes.push_back("harmonic " + std::to_string(h) + " lands on DC or the fundamental; skipped");
            continue;
        }
        const double ph = tone_power(p, fh, opt.lobe_bins);
        harm += ph;
        worst_harm = std::max(worst_harm, ph);
        mark(ch);
    }
    if (folded)
        r.notes.push_back("harmonics above f_sample/2 folded back");
    // noise: everything not claimed by DC, signal, or harmonics; rescaled to
    // the full band
    double noise = 0.0;
    std::size_t cnt = 0, all = 0;
    double worst_bin = 0.0;
    for (long k = 0; k < nb; ++k) {
        if (used[static_cast<std::size_t>(k)] == 2)
            continue;
        ++all;
        if (used[static_cast<std::size_t>(k)])
            continue;
        noise += p.density[static_cast<std::size_t>(k)];
        ++cnt;
    }
    // worst spur: strongest other component, measured as a tone over its lobe
    for (long k = opt.dc_bins + 1; k < nb; ++k) {
        if (std::abs(k - static_cast<long>(c0)) <= opt.lobe_bins)
            continue;
        worst_bin = std::max(worst_bin, p.density[static_cast<std::size_t>(k)]);
    }
    const double noise_mean_density = cnt ? noise / static_cast<double>(cnt) : 0.0;
    const double noise_power = noise_mean_density * p.resolution * static_cast<double>(all);
    r.noise_density = std::sqrt(noise_mean_density);
    auto db = [&](double num, double den) {
        if (den <= 0.0)
            return -opt.floor_db;
        return std::min(10.0 * std::log10(num / den), -opt.floor_db);
    };
    r.thd_db = std::max(r.signal_power > 0.0 && harm > 0.0 ? 10.0 * std::log10(harm / r.signal_power) : opt.floor_db,
                        opt.floor_db);
    // strongest spur as a tone: peak density times the window's peak-to-lobe factor
    const double spur = std::max(worst_harm, worst_bin * p.resolution * p.enbw_bins);
    r.sfdr_db = db(r.signal_power, spur);
    r.snr_db = db(r.signal_power, noise_power);
    r.sndr_db = db(r.signal_power, noise_power + harm);
    return r;
}

// Power ratio of the component at f_other to the one at f_own, in dB.
inline double crosstalk_db(const std::vector<double>& x, double f_sample, double f_own, double f_other,
                           const ToneOptions& opt = {})
{
    const PSD p = psd(x, f_sample, opt.window);
    const double own = tone_power(p, f_own, opt.lobe_bins);
    const double other = tone_power(p, f_other, opt.lobe_bins);
    if (own <= 0.0)
        return 0.0;
    if (other <= 0.0)
        return opt.floor_db * 2;
    return 10.0 * std::log10(other / own);
}

struct LinearityResult {
    double slope = 0.0;
    double intercept = 0.0;
    double gain_db = 0.0;
    double max_dev_pct = 0.0;   // of the fitted output span
    double max_abs_residual = 0.0;
};

inline LinearityResult static_linearity(const std::vector<std::pair<double, double>>& sweep)
{
    if (sweep.size() < 5)
        throw ValidationError("static_linearity: need at least 5 points");
    double xmin = sweep.front().first, xmax = xmin;
    double sx = 0, sy = 0;
    for (const auto& [x, y] : sweep) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        sx += x;
        sy += y;
    }
    if (!(xmax > xmin))
        throw ValidationError("static_linearity: sweep has zero input span");
    const double n = static_cast<double>(sweep.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : sweep) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    LinearityResult r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    for (const auto& [x, y] : sweep)
        r.max_abs_residual = std::max(r.max_abs_residual, std::abs(y - (r.slope * x + r.intercept)));
    const double span = std::abs(r.slope) * (xmax - xmin);
    r.max_dev_pct = span > 0.0 ? 100.0 * r.max_abs_residual / span : 0.0;
    r.gain_db = 20.0 * std::log10(std::abs(r.slope));
    return r;
}

struct NoiseEstimate {
    double density = 0.0; // V/rtHz
    double rms = 0.0;     // V, density * sqrt(band)
    double band = 0.0;    // Hz
};

// Median of the Hann-windowed Welch bins inside [f_lo, f_hi]. The median of
// a chi-square(2K) variable sits below its mean; the bias is divided out.
inline NoiseEstimate noise_density(const std::vector<double>& x, double f_sample, double f_lo, double f_hi,
                                   std::size_t segment = 1024)
{
    if (!(f_hi > f_lo) || f_lo < 0.0)
        throw ValidationError("noise_density: bad band");
    const PSD p = psd(x, f_sample, Window::Hann, std::min(segment, x.size()));
    std::vector<double> bins;
    for (std::size_t k = 1; k < p.freq.size(); ++k)
        if (p.freq[k] >= f_lo && p.freq[k] <= f_hi)
            bins.push_back(p.density[k]);
    NoiseEstimate e;
    e.band = f_hi - f_lo;
    if (bins.empty())
        return e;
    std::nth_element(bins.begin(), bins.begin() + bins.size() / 2, bins.end());
    const double med = bins[bins.size() / 2];
    // median/mean of chi-square with 2K dof, K averaged segments
    const double dof = 2.0 * static_cast<double>(p.segments);
    const double bias = std::pow(1.0 - 2.0 / (9.0 * dof), 3.0);
    e.density = std::sqrt(med / bias);
    e.rms = e.density * std::sqrt(e.band);
    return e;
}

} // namespace usbsim
