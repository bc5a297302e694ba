/**
 * @file interrogator.hpp
 * @brief External transceiver side: pulse-echo scheduling, link arithmetic,
 * code book, carrier demodulation, CDM decode and stream reconstruction.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "code.hpp"
#include "errors.hpp"
#include "medium.hpp"
#include "mote.hpp"
#include "units.hpp"
#include "waveform.hpp"

namespace usbsim {

struct InterrogationSchedule {
    double f_main = 1.78e6;
    double pulse_duration = 30e-6;
    double pulse_period = 100e-6;
    long n_pulses = 4096;
    double depth_target = 0.05;

    double f_sample() const { return 1.0 / pulse_period; }

    // depths: every mote depth in the scenario
    void validate(const AcousticMedium& med, const std::vector<double>& depths, const MoteConfig& cfg) const
    {
        if (!(f_main > 0.0))
            throw ValidationError("schedule: f_main must be > 0");
        if (!(pulse_duration > 0.0) || !(pulse_period > 0.0))
            throw ValidationError("schedule: pulse_duration and pulse_period must be > 0");
        if (n_pulses < 2)
            throw ValidationError("schedule: need at least 2 pulses");
        double zmin = depth_target, zmax = depth_target;
        for (double z : depths) {
            zmin = std::min(zmin, z);
            zmax = std::max(zmax, z);
        }
        const double rt_min = 2.0 * zmin / med.c;
        if (!(pulse_duration < rt_min))
            throw ValidationError("schedule: pulse_duration < 2*ToF violated (" + std::to_string(pulse_duration * 1e6)
                                  + " us >= " + std::to_string(rt_min * 1e6) + " us)");
        if (!(pulse_period - pulse_duration > cfg.t_discharge))
            throw ValidationError("schedule: pulse_period - pulse_duration > t_discharge violated");
        const double rt_max = 2.0 * zmax / med.c;
        if (pulse_period < (pulse_duration + rt_max) * (1.0 - 1e-12))
            throw ValidationError("schedule: next pulse overlaps the echo (pulse_period < pulse_duration + 2*ToF)");
    }
};

enum class Modulation { AM, DM };

struct LinkReport {
    double depth = 0.0;
    double tof = 0.0;
    double round_trip = 0.0;          // 2 ToF
    double t_symbol = 0.0;            // settle + payload code cycles, one sample
    double t_mod_am = 0.0, t_mod_dm = 0.0;
    double t_echo_min_am = 0.0, t_echo_min_dm = 0.0; // startup + modulation
    double d_min_am = 0.0, d_min_dm = 0.0;           // bounce model, modulation only
    double d_min_full_am = 0.0, d_min_full_dm = 0.0; // including startup
    double d_min_por = 0.0;
    double f_sample_max_am = 0.0, f_sample_max_dm = 0.0;
    int bits = 1;
    Modulation scheme = Modulation::AM;

    std::string text() const
    {
        std::ostringstream o;
        o.setf(std::ios::fixed);
        o.precision(3);
        o << "tof_us=" << tof * 1e6 << "\n"
          << "round_trip_us=" << round_trip * 1e6 << "\n"
          << "t_echo_min_am_us=" << t_echo_min_am * 1e6 << "\n"
          << "t_echo_min_dm_us=" << t_echo_min_dm * 1e6 << "\n"
          << "d_min_am_mm=" << d_min_am * 1e3 << "\n"
          << "d_min_dm_mm=" << d_min_dm * 1e3 << "\n"
          << "dm_bits=" << bits << "\n"
          << "d_min_full_am_mm=" << d_min_full_am * 1e3 << "\n"
          << "d_min_full_dm_mm=" << d_min_full_dm * 1e3 << "\n"
          << "d_min_por_mm=" << d_min_por * 1e3 << "\n"
          << "f_sample_max_am_hz=" << f_sample_max_am << "\n"
          << "f_sample_max_dm_hz=" << f_sample_max_dm << "\n";
        return o.str();
    }
};

struct LinkPlan {
    InterrogationSchedule schedule;
    LinkReport report;
};

// Minimum depth at which the reset still fires between back-to-back pulses:
// the round trip must cover discharge plus the charge/initialization phase.
inline double por_min_depth(const MoteConfig& cfg, const AcousticMedium& med)
{
    return 0.5 * med.c * (cfg.t_discharge + cfg.t_charge + cfg.t_amp_init);
}

// One AM sample needs settle + n code periods of modulation. A B-bit digital
// symbol stream needs B of those. The bounce diagram compares the
// modulation portions; feasibility also accounts for mote startup.
inline LinkReport link_report(double depth, const AcousticMedium& med, Modulation scheme, int bits,
                              int n_code_cycles, const MoteConfig& cfg, double f_main = 1.78e6, int settle_cycles = 2)
{
    if (!(depth > 0.0))
        throw ValidationError("plan_link: depth must be > 0");
    if (scheme == Modulation::DM && bits < 1)
        throw ValidationError("plan_link: DM needs B >= 1");
    if (n_code_cycles < 1)
        throw ValidationError("plan_link: n_code_cycles must be >= 1");
    const int B = std::max(bits, 1);
    LinkReport r;
    r.depth = depth;
    r.bits = B;
    r.scheme = scheme;
    r.tof = depth / med.c;
    r.round_trip = 2.0 * r.tof;
    const double code_period = cfg.subcarrier_divider / f_main;
    r.t_symbol = settle_cycles / f_main + n_code_cycles * code_period;
    r.t_mod_am = r.t_symbol;
    r.t_mod_dm = B * r.t_symbol;
    r.t_echo_min_am = cfg.t_startup_total + r.t_mod_am;
    r.t_echo_min_dm = cfg.t_startup_total + r.t_mod_dm;
    r.d_min_am = 0.5 * med.c * r.t_mod_am;
    r.d_min_dm = 0.5 * med.c * r.t_mod_dm;
    r.d_min_full_am = 0.5 * med.c * r.t_echo_min_am;
    r.d_min_full_dm = 0.5 * med.c * r.t_echo_min_dm;
    r.d_min_por = por_min_depth(cfg, med);
    r.f_sample_max_am = 1.0 / (2.0 * r.t_echo_min_am);
    r.f_sample_max_dm = 1.0 / (2.0 * r.t_echo_min_dm);
    return r;
}

inline LinkPlan plan_link(double depth, const AcousticMedium& med, Modulation scheme, int bits, int n_code_cycles,
                          const MoteConfig& cfg, double f_main = 1.78e6, int settle_cycles = 2)
{
    const LinkReport r = link_report(depth, med, scheme, bits, n_code_cycles, cfg, f_main, settle_cycles);
    const bool dm = scheme == Modulation::DM;
    const double t_echo = dm ? r.t_echo_min_dm : r.t_echo_min_am;
    const double d_echo = dm ? r.d_min_full_dm : r.d_min_full_am;
    if (depth < d_echo)
        throw InfeasibleLinkError("plan_link: depth " + std::to_string(depth * 1e3) + " mm below echo-duration d_min "
                                      + std::to_string(d_echo * 1e3) + " mm",
                                  "echo duration (T_echo,min)");
    if (depth < r.d_min_por)
        throw InfeasibleLinkError("plan_link: depth " + std::to_string(depth * 1e3) + " mm below POR d_min "
                                      + std::to_string(r.d_min_por * 1e3) + " mm",
                                  "power-on reset (t_discharge)");
    LinkPlan plan;
    plan.report = r;
    plan.schedule.f_main = f_main;
    plan.schedule.depth_target = depth;
    plan.schedule.pulse_duration = t_echo;
    // at d_min this is 2*T_echo,min; deeper motes wait for their echo
    plan.schedule.pulse_period = t_echo + std::max(r.round_trip, t_echo);
    if (plan.schedule.pulse_period - plan.schedule.pulse_duration <= cfg.t_discharge)
        plan.schedule.pulse_period = plan.schedule.pulse_duration + cfg.t_discharge * (1.0 + 1e-9);
    return plan;
}

enum class CodeMode { Divider, Walsh };

struct CodeBook {
    CodeMode mode = CodeMode::Divider;
    double f_main = 1.78e6;
    int base_divider = 32;
    std::vector<SubcarrierCode> codes;

    const SubcarrierCode& at(int id) const
    {
        if (id < 0 || id >= static_cast<int>(codes.size()))
            throw ValidationError("code book: no code " + std::to_string(id));
        return codes[static_cast<std::size_t>(id)];
    }

    // common period in chips (every code repeats within it)
    std::size_t common_chips() const
    {
        std::size_t n = 1;
        for (const auto& c : codes)
            n = std::max(n, c.chips.size());
        return n;
    }
};

namespace detail {

inline int sequency(const std::vector<int>& row)
{
    int s = 0;
    for (std::size_t i = 1; i < row.size(); ++i)
        s += row[i] != row[i - 1];
    return s;
}

} // namespace detail

// Divider mode: code i is the square wave at f_main / (base * 2^i), all on the
// same chip grid (base/2 carrier cycles). Walsh mode: rows of a Hadamard
// matrix of the smallest power-of-two order >= n_motes; the clock-divider
// squares come first, the all-ones row is handed out last.
inline CodeBook build_code_book(int n_motes, double f_main = 1.78e6, int base_divider = 32,
                                CodeMode mode = CodeMode::Divider, int max_divider = 4096)
{
    if (n_motes < 1)
        throw ValidationError("build_code_book: n_motes must be >= 1");
    if (base_divider < 2 || (base_divider & (base_divider - 1)) != 0)
        throw ValidationError("build_code_book: base divider must be a power of two");
    CodeBook book;
    book.mode = mode;
    book.f_main = f_main;
    book.base_divider = base_divider;
    const int chip = base_divider / 2;
    if (mode == CodeMode::Divider) {
        int cap = 0;
        for (long d = base_divider; d <= max_divider; d *= 2)
            ++cap;
        if (n_motes > cap)
            throw CapacityError("build_code_book: " + std::to_string(n_motes) + " motes exceed the "
                                + std::to_string(cap) + " divider codes up to " + std::to_string(max_divider));
        for (int i = 0; i < n_motes; ++i)
            book.codes.push_back(SubcarrierCode::square(i, base_divider << i, f_main, chip));
        return book;
    }
    int order = 2;
    while (order < n_motes)
        order *= 2;
    if (order * chip > max_divider)
        throw CapacityError("build_code_book: Walsh order " + std::to_string(order) + " exceeds max divider");
    std::vector<std::vector<int>> h{{1}};
    while (static_cast<int>(h.size()) < order) {
        const std::size_t n = h.size();
        std::vector<std::vector<int>> g(2 * n, std::vector<int>(2 * n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                g[i][j] = h[i][j];
                g[i][j + n] = h[i][j];
                g[i + n][j] = h[i][j];
                g[i + n][j + n] = -h[i][j];
            }
        h = std::move(g);
    }
    // Rademacher (clock-divider) rows first: fastest square down to slowest.
    std::vector<std::vector<int>> ordered, rest;
    for (int d = base_divider; d <= order * chip; d *= 2)
        ordered.push_back(SubcarrierCode::square(0, d, f_main, chip).chips);
    for (auto& row : ordered) {
        std::vector<int> full;
        while (static_cast<int>(full.size()) < order)
            full.insert(full.end(), row.begin(), row.end());
        row = full;
    }
    std::vector<int> ones(static_cast<std::size_t>(order), 1);
    for (const auto& row : h) {
        if (row == ones || std::find(ordered.begin(), ordered.end(), row) != ordered.end())
            continue;
        rest.push_back(row);
    }
    std::stable_sort(rest.begin(), rest.end(),
                     [](const auto& a, const auto& b) { return detail::sequency(a) > detail::sequency(b); });
    ordered.insert(ordered.end(), rest.begin(), rest.end());
    ordered.push_back(ones);
    for (int i = 0; i < n_motes; ++i) {
        SubcarrierCode c;
        c.code_id = i;
        c.chip_cycles = chip;
        c.f_main = f_main;
        c.chips = ordered[static_cast<std::size_t>(i)];
        book.codes.push_back(std::move(c));
    }
    return book;
}

// Largest power-of-two Walsh set whose common period fits in the usable
// modulation window, chips at half the period of max_code_freq.
inline int code_capacity(double depth, const AcousticMedium& med, double f_main, double max_code_freq,
                         const MoteConfig& cfg)
{
    (void)f_main;
    if (!(depth > 0.0) || !(max_code_freq > 0.0))
        throw ValidationError("code_capacity: depth and max_code_freq must be > 0");
    const double window = 2.0 * depth / med.c - cfg.t_startup_total;
    const double chip = 0.5 / max_code_freq;
    int n = 1;
    while (2.0 * n * chip <= window * (1.0 + 1e-12))
        n *= 2;
    return n;
}

enum class DemodMode { Envelope, FullCarrier };

// Second-order section, transposed direct form II.
struct Biquad {
    double b0, b1, b2, a1, a2;
    double z1 = 0.0, z2 = 0.0;
    double step(double x)
    {
        const double y = b0 * x + z1;
        z1 = b1 * x - a1 * y + z2;
        z2 = b2 * x - a2 * y;
        return y;
    }
    static Biquad lowpass(double fc, double fs, double q)
    {
        const double w0 = 2.0 * kPi * fc / fs;
        const double al = std::sin(w0) / (2.0 * q);
        const double c = std::cos(w0);
        const double a0 = 1.0 + al;
        Biquad b{};
        b.b0 = (1.0 - c) / 2.0 / a0;
        b.b1 = (1.0 - c) / a0;
        b.b2 = b.b0;
        b.a1 = -2.0 * c / a0;
        b.a2 = (1.0 - al) / a0;
        return b;
    }
};

struct DemodOptions {
    DemodMode mode = DemodMode::Envelope;
    double lock_tolerance = kPi / 4; // rad of phase wander allowed after settling
    double settle_time = 2e-6;       // s skipped before checking lock
};

// Full-carrier mode: I/Q mix against the transmit reference (phase zero at
// t = 0), 4th-order Butterworth at f_main/4 on each arm, magnitude.
inline Waveform demodulate_carrier(const Waveform& rx, double f_main, const DemodOptions& opt = {})
{
    if (opt.mode == DemodMode::Envelope)
        return rx;
    if (rx.sample_rate < 8.0 * f_main * (1.0 - 1e-12))
        throw ValidationError("demodulate_carrier: full-carrier mode needs >= 8 samples per carrier cycle");
    const double fc = f_main / 4.0;
    Biquad i1 = Biquad::lowpass(fc, rx.sample_rate, 0.54119610014619698);
    Biquad i2 = Biquad::lowpass(fc, rx.sample_rate, 1.3065629648763766);
    Biquad q1 = i1, q2 = i2;
    Waveform env(rx.sample_rate, rx.t_start, rx.size());
    double peak = 0.0;
    std::vector<double> phase(rx.size());
    for (std::size_t k = 0; k < rx.size(); ++k) {
        const double w = 2.0 * kPi * f_main * rx.time_at(k);
        const double I = i2.step(i1.step(rx[k] * std::cos(w)));
        const double Q = q2.step(q1.step(-rx[k] * std::sin(w)));
        env[k] = 2.0 * std::hypot(I, Q);
        phase[k] = std::atan2(Q, I);
        peak = std::max(peak, env[k]);
    }
    // lock check: phase must stay put wherever there is signal
    const auto skip = static_cast<std::size_t>(opt.settle_time * rx.sample_rate);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, prev = 0.0, unwrap = 0.0;
    bool first = true;
    for (std::size_t k = skip; k < rx.size(); ++k) {
        if (env[k] < 0.1 * peak)
            continue;
        double p = phase[k];
        if (!first) {
            double d = p - prev;
            while (d > kPi)
                d -= 2.0 * kPi;
            while (d < -kPi)
                d += 2.0 * kPi;
            unwrap += d;
        }
        first = false;
        prev = p;
        lo = std::min(lo, unwrap);
        hi = std::max(hi, unwrap);
    }
    if (!first && hi - lo > opt.lock_tolerance)
        throw LockFailure("demodulate_carrier: reference phase drifted " + std::to_string(hi - lo) + " rad",
                          hi - lo);
    return env;
}

enum class Truncation { Periods, Literal };

struct Calibration {
    double gain = 1.0;   // raw units per input volt
    double offset = 0.0; // raw units at zero input
};

struct DecodeResult {
    bool dropped = false;
    std::string reason;
    double raw = 0.0;
    double calibrated = 0.0;       // V, input referred
    double truncated_len = 0.0;    // s
    double echo_snr_db = 0.0;
    std::size_t n_samples = 0;
};

struct DecodeWindow {
    double start = 0.0;     // s, absolute: mote amp_ready as seen at the receiver
    double available = 0.0; // s of modulation present in the echo
    double startup = 11e-6; // s, only used by the literal truncation mode
};

// Integration length actually used. Periods mode snaps down to whole periods
// of the decoding code. Literal mode uses the 29/47 us echo lengths (startup
// included) and rounds to whole carrier cycles.
inline double truncated_length(const SubcarrierCode& code, const DecodeWindow& w, Truncation mode)
{
    if (mode == Truncation::Periods) {
        const double n = std::floor(w.available / code.period() + 1e-9);
        return n * code.period();
    }
    double best = 0.0;
    for (double lit : {29e-6, 47e-6})
        if (lit - w.startup <= w.available + 1e-12)
            best = lit - w.startup;
    return std::round(best * code.f_main) / code.f_main;
}

// Multiply by the chips and average. It is an inner product, so linear in
// the envelope.
inline DecodeResult decode_cdm(const Waveform& env, const SubcarrierCode& code, const DecodeWindow& w,
                               const Calibration& cal = {}, Truncation mode = Truncation::Periods)
{
    DecodeResult d;
    d.truncated_len = truncated_length(code, w, mode);
    if (d.truncated_len <= 0.0) {
        d.dropped = true;
        d.reason = "window shorter than one code period";
        return d;
    }
    const double pos = (w.start - env.t_start) * env.sample_rate;
    const long i0 = std::lround(pos);
    const auto n = static_cast<long>(std::llround(d.truncated_len * env.sample_rate));
    if (i0 < 0 || i0 + n > static_cast<long>(env.size())) {
        d.dropped = true;
        d.reason = "window outside received trace";
        return d;
    }
    double acc = 0.0, acc2 = 0.0;
    for (long k = 0; k < n; ++k) {
        const double t_rel = static_cast<double>(k) / env.sample_rate;
        const double v = env[static_cast<std::size_t>(i0 + k)] * code.chip_at(t_rel);
        acc += v;
        acc2 += v * v;
    }
    d.n_samples = static_cast<std::size_t>(n);
    d.raw = acc / static_cast<double>(n);
    d.calibrated = (d.raw - cal.offset) / cal.gain;
    const double var = std::max(acc2 / static_cast<double>(n) - d.raw * d.raw, 0.0);
    const double sig = std::abs(d.raw - cal.offset);
    const double se = std::sqrt(var / static_cast<double>(n));
    d.echo_snr_db = se > 0.0 && sig > 0.0 ? 20.0 * std::log10(sig / se) : 0.0;
    return d;
}

struct PulseRecord {
    long pulse_index = 0;
    double t_start = 0.0;  // s, pulse transmit time
    double t_sample = 0.0; // s, centre of the integration window at the mote
    int code_id = 0;
    DecodeResult decode;
};

struct SampleStream {
    double f_sample = 0.0;
    int code_id = 0;
    std::vector<double> samples;    // V, input referred; dropped pulses excluded
    std::vector<double> times;      // s, per sample
    std::vector<PulseRecord> records; // every pulse, dropped ones included
    std::vector<long> gaps;         // pulse indices with no sample
    bool interpolated = false;

    double bandwidth() const { return 0.5 * f_sample; }
};

inline SampleStream reconstruct(const std::vector<PulseRecord>& records, double f_sample, bool interpolate = false)
{
    if (records.size() < 2)
        throw ValidationError("reconstruct: need at least 2 pulses");
    SampleStream s;
    s.f_sample = f_sample;
    s.code_id = records.front().code_id;
    s.records = records;
    for (const auto& r : records) {
        if (r.decode.dropped) {
            s.gaps.push_back(r.pulse_index);
            if (!interpolate)
                continue;
            s.samples.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            s.samples.push_back(r.decode.calibrated);
        }
        s.times.push_back(r.t_sample);
    }
    if (interpolate && !s.gaps.empty()) {
        s.interpolated = true;
        const std::size_t n = s.samples.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isnan(s.samples[i]))
                continue;
            std::size_t a = i, b = i;
            while (a > 0 && std::isnan(s.samples[a]))
                --a;
            while (b + 1 < n && std::isnan(s.samples[b]))
                ++b;
            const bool ha = !std::isnan(s.samples[a]), hb = !std::isnan(s.samples[b]);
            if (ha && hb)
                s.samples[i] = s.samples[a] + (s.samples[b] - s.samples[a]) * double(i - a) / double(b - a);
            else
                s.samples[i] = ha ? s.samples[a] : (hb ? s.samples[b] : 0.0);
        }
    }
    return s;
}

} // namespace usbsim
