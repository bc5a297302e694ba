/**
 * @file mote.hpp
 * @brief Behavioral implant: power-up timing, chopped LNA, gm cell and the
 * rectifier-based echo modulator.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "code.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "units.hpp"
#include "waveform.hpp"

namespace usbsim {

struct MoteConfig {
    std::string name = "this_work";
    double R_S = 4000.0;              // ohm, empirical (piezo model gives the order of magnitude)
    double V_s_min = 1.25;            // V, peak open-circuit piezo amplitude to power up
    double lna_gain = 16.0;
    double lna_output_range = 0.160;  // +- V
    double lna_bandwidth = 180e3;     // Hz
    double gm = 120e-6;               // S
    double mirror_gain = 1.84;
    double gm_compression = 0.004;    // fractional cubic compression at full scale
    int f_chop_divider = 0;           // 0: chopper runs off the subcarrier code
    int subcarrier_divider = 32;
    int code_id = 0;
    bool chopping = true;
    bool nonlinear = true;            // gm compression + rectifier curve
    double t_charge = 5e-6;
    double t_amp_init = 3e-6;
    double t_startup_total = 11e-6;
    double t_discharge = 10e-6;
    double input_linear_range = 10e-3; // +- V
    double C_f = 0.44e-12;
    double C_load = 4.7e-12;
    double beta_fb = 1.0 / 16.0;
    double C_s = 7.04e-12;
    double ota_gm = 92.5e-6;          // S, LNA OTA transconductance
    double gamma_h = 0.5;             // harvesting baseline reflection (V_PZ / V_s)
    double max_modulation_depth = 0.20; // peak-to-peak, relative to gamma_h
    double chip_noise_density = 76e-9;  // V/rtHz, input referred in the reconstructed stream
    bool chip_noise = true;
    double temperature = 300.0;       // K
    double autozero_sigma = -1.0;     // V input referred; < 0 derives it from kT/C_f

    bool shared_chopper() const { return f_chop_divider == 0; }
    double quiescent_current() const { return gm * mirror_gain * lna_output_range; }

    double autozero_rms() const
    {
        if (autozero_sigma >= 0.0)
            return autozero_sigma;
        // kT/C on the feedback cap, referred through C_s
        return std::sqrt(kBoltzmann * temperature / C_f) * C_f / C_s;
    }

    double nominal_gain() const { return lna_gain * gm * mirror_gain * R_S; }

    void validate() const
    {
        auto pos = [&](double v, const char* f) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ValidationError("mote " + name + ": " + f + " must be > 0");
        };
        pos(R_S, "R_S");
        pos(V_s_min, "V_s_min");
        pos(lna_gain, "lna_gain");
        pos(lna_output_range, "lna_output_range");
        pos(lna_bandwidth, "lna_bandwidth");
        pos(gm, "gm");
        pos(mirror_gain, "mirror_gain");
        pos(t_charge, "t_charge");
        pos(t_amp_init, "t_amp_init");
        pos(t_startup_total, "t_startup_total");
        pos(t_discharge, "t_discharge");
        pos(C_f, "C_f");
        pos(C_s, "C_s");
        pos(C_load, "C_load");
        pos(beta_fb, "beta_fb");
        pos(ota_gm, "ota_gm");
        pos(input_linear_range, "input_linear_range");
        if (gm_compression < 0.0 || gm_compression >= 1.0)
            throw ValidationError("mote " + name + ": gm_compression must be in [0, 1)");
        if (subcarrier_divider < 2 || (subcarrier_divider & (subcarrier_divider - 1)) != 0)
            throw ValidationError("mote " + name + ": subcarrier_divider must be a power of two");
        if (f_chop_divider < 0)
            throw ValidationError("mote " + name + ": f_chop_divider must be >= 0");
        if (t_startup_total < t_charge + t_amp_init)
            throw ValidationError("mote " + name + ": t_startup_total >= t_charge + t_amp_init violated");
        if (std::abs(lna_gain - C_s / C_f) > 1e-6 * lna_gain)
            throw ValidationError("mote " + name + ": lna_gain = C_s/C_f violated");
        const double beta_nom = C_f / (C_f + C_s);
        if (std::abs(beta_fb - beta_nom) > 0.1 * beta_nom)
            throw ValidationError("mote " + name + ": beta_fb not within 10% of C_f/(C_f+C_s)");
        if (!(gamma_h > 0.0 && gamma_h < 1.0))
            throw ValidationError("mote " + name + ": gamma_h must be in (0, 1)");
        if (!(max_modulation_depth > 0.0 && max_modulation_depth <= 1.0))
            throw ValidationError("mote " + name + ": max_modulation_depth must be in (0, 1]");
        if (chip_noise_density < 0.0)
            throw ValidationError("mote " + name + ": chip_noise_density must be >= 0");
    }
};

struct MoteState {
    bool powered = false;
    double time_since_pulse_start = 0.0;
    double autozero_offset = 0.0;     // V at the LNA input, per interrogation
    double last_power_down = -std::numeric_limits<double>::infinity();
    std::size_t saturation_count = 0;
};

struct TimelineEvents {
    double pulse_start = 0.0;
    double pulse_end = 0.0;
    double charge_complete = 0.0;
    double por = std::numeric_limits<double>::quiet_NaN(); // NaN when no POR fired
    bool por_triggered = true;
    double amp_ready = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
    double power_down = 0.0;
};

// previous_power_down: when the mote is still holding charge from the last
// pulse (new pulse arrives before it), the reset never fires.
inline TimelineEvents power_timeline(double pulse_start, double pulse_duration, const MoteConfig& cfg,
                                     std::optional<double> previous_power_down = {})
{
    if (!(pulse_duration > 0.0))
        throw ValidationError("power_timeline: pulse_duration must be > 0");
    if (pulse_duration <= cfg.t_startup_total)
        throw ModulationWindowEmpty("power_timeline: pulse of " + std::to_string(pulse_duration * 1e6)
                                    + " us leaves no modulation window after "
                                    + std::to_string(cfg.t_startup_total * 1e6) + " us startup");
    TimelineEvents e;
    e.pulse_start = pulse_start;
    e.pulse_end = pulse_start + pulse_duration;
    e.charge_complete = pulse_start + cfg.t_charge;
    e.por_triggered = !(previous_power_down && *previous_power_down > pulse_start);
    if (e.por_triggered)
        e.por = e.charge_complete;
    e.amp_ready = pulse_start + cfg.t_startup_total;
    e.window_start = e.amp_ready;
    e.window_end = e.pulse_end;
    e.power_down = e.pulse_end + cfg.t_discharge;
    return e;
}

inline void draw_autozero_offset(MoteState& st, const MoteConfig& cfg, RandomStream& rng)
{
    st.autozero_offset = cfg.autozero_rms() * rng.gaussian();
}

struct AfeNoise {
    RandomStream* rng = nullptr;
    double density = 0.0; // V/rtHz at the LNA input, white
};

// Chopper sign at t_rel into the window.
inline int chopper_sign(const MoteConfig& cfg, const SubcarrierCode& code, double t_rel)
{
    if (!cfg.chopping)
        return 1;
    if (cfg.shared_chopper())
        return code.chip_at(t_rel);
    const double half = 0.5 * cfg.f_chop_divider / code.f_main;
    const long k = static_cast<long>(std::floor(t_rel / half + 1e-7));
    return (k % 2 == 0) ? 1 : -1;
}

// LNA: single pole at lna_bandwidth on the baseband input, input chopper,
// amplifier-referred noise and autozero residue, gain, output clip. With a
// separate chopper clock the output is chopped back to baseband here and the
// subcarrier code is applied later in echo_modulate.
inline Waveform afe_process(const Waveform& v_in, const MoteConfig& cfg, MoteState& st,
                            const SubcarrierCode& code, double window_start, AfeNoise noise = {})
{
    const double f_chop = cfg.shared_chopper() ? code.frequency() : code.f_main / cfg.f_chop_divider;
    if (v_in.sample_rate < 10.0 * f_chop)
        throw ValidationError("afe_process: sample rate below 10x the chopper frequency");
    Waveform out(v_in.sample_rate, v_in.t_start, v_in.size());
    const double a = 1.0 - std::exp(-2.0 * kPi * cfg.lna_bandwidth / v_in.sample_rate);
    const double sigma = noise.rng ? noise.density * std::sqrt(0.5 * v_in.sample_rate) : 0.0;
    double x = v_in.empty() ? 0.0 : v_in[0];
    for (std::size_t i = 0; i < v_in.size(); ++i) {
        x += a * (v_in[i] - x);
        const int s = chopper_sign(cfg, code, v_in.time_at(i) - window_start);
        double y = s * x + st.autozero_offset;
        if (sigma > 0.0)
            y += sigma * noise.rng->gaussian();
        double o = cfg.lna_gain * y;
        if (o > cfg.lna_output_range) {
            o = cfg.lna_output_range;
            ++st.saturation_count;
        } else if (o < -cfg.lna_output_range) {
            o = -cfg.lna_output_range;
            ++st.saturation_count;
        }
        if (cfg.chopping && !cfg.shared_chopper())
            o *= s;
        out[i] = o;
    }
    return out;
}

struct NoiseSpec {
    double C_T = 0.0;                 // F
    double output_noise_power = 0.0;  // V^2
    double output_noise_rms = 0.0;    // V
    double bandwidth_hz = 0.0;        // beta*G_m/(2 pi C_T)
    double Z_in = 0.0;                // ohm, switched-cap input at f_chop
    double input_referred_density = 0.0; // V/rtHz (configured chip density)
    double input_rms(double band_hz) const { return input_referred_density * std::sqrt(band_hz); }
};

inline NoiseSpec afe_noise_model(const MoteConfig& cfg, double T = 300.0, double alpha_noise = 1.0,
                                 double gamma_noise = 1.0, double f_chop = 1.78e6 / 32)
{
    if (!(cfg.C_f > 0 && cfg.C_s > 0 && cfg.C_load > 0))
        throw ValidationError("afe_noise_model: capacitances must be > 0");
    NoiseSpec ns;
    ns.C_T = cfg.C_load + cfg.C_f * cfg.C_s / (cfg.C_f + cfg.C_s);
    ns.output_noise_power = kBoltzmann * T * alpha_noise * gamma_noise / (cfg.beta_fb * ns.C_T);
    ns.output_noise_rms = std::sqrt(ns.output_noise_power);
    ns.bandwidth_hz = cfg.beta_fb * cfg.ota_gm / (2.0 * kPi * ns.C_T);
    ns.Z_in = 1.0 / (2.0 * f_chop * cfg.C_s);
    ns.input_referred_density = cfg.chip_noise_density;
    return ns;
}

inline double gm_static(double v_lna, const MoteConfig& cfg)
{
    double i = cfg.gm * cfg.mirror_gain * v_lna;
    if (cfg.nonlinear) {
        const double u = v_lna / cfg.lna_output_range;
        i *= 1.0 - cfg.gm_compression * u * u;
    }
    return cfg.quiescent_current() + i;
}

inline Waveform gm_convert(const Waveform& v_lna, const MoteConfig& cfg)
{
    Waveform out(v_lna.sample_rate, v_lna.t_start, v_lna.size());
    for (std::size_t i = 0; i < v_lna.size(); ++i)
        out[i] = gm_static(v_lna[i], cfg);
    return out;
}

// Normalized rectifier load current I_m*R_S/V_s against V_rect/V_s.
inline double rectifier_load_curve(double v)
{
    if (!(v >= 0.0 && v <= 1.0))
        throw DomainError("rectifier_load_curve: V_rect/V_s = " + std::to_string(v) + " outside [0, 1]");
    return (1.0 - v) * (1.0 - (2.0 / kPi) * std::asin(v));
}

inline double rectifier_load_slope(double v)
{
    return -(1.0 - (2.0 / kPi) * std::asin(v)) - (1.0 - v) * (2.0 / kPi) / std::sqrt(1.0 - v * v);
}

// Inverse of the (strictly decreasing) load curve on [0, 1].
inline double rectifier_inverse(double y)
{
    if (y >= 1.0)
        return 0.0;
    if (y <= 0.0)
        return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (rectifier_load_curve(mid) > y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Piezo voltage change for a load current step dI around the harvesting
// point. Linear mode: -dI*R_S. Nonlinear: the step moves along the load curve,
// scaled so the small-signal slope is the same.
inline double piezo_voltage_deviation(double dI, double V_s, const MoteConfig& cfg)
{
    if (!cfg.nonlinear)
        return -dI * cfg.R_S;
    const double v0 = cfg.gamma_h;
    const double kappa = -rectifier_load_slope(v0);
    const double y = rectifier_load_curve(v0) + kappa * dI * cfg.R_S / V_s;
    return V_s * (rectifier_inverse(y) - v0);
}

// DC transfer v_in -> dV_PZ as seen after the receiver undoes the chopping:
// half the difference of the two chopper phases.
inline double static_transfer(double v_in, double V_s, const MoteConfig& cfg)
{
    auto phase = [&](int s) {
        double v = cfg.lna_gain * s * v_in;
        v = std::clamp(v, -cfg.lna_output_range, cfg.lna_output_range);
        const double dI = gm_static(v, cfg) - cfg.quiescent_current();
        return piezo_voltage_deviation(dI, V_s, cfg);
    };
    if (!cfg.chopping)
        return phase(1);
    return 0.5 * (phase(1) - phase(-1));
}

struct ReflectionTrace {
    Waveform gamma;          // V_PZ / V_s over the whole pulse
    bool powered = true;
    std::size_t clipped = 0; // samples held at the depth cap
    double peak_request = 0.0; // largest |dGamma| asked for
};

// Gamma(t) across one pulse. I_m must start at the window start and share
// the trace sample rate.
inline ReflectionTrace echo_modulate(double V_s, const Waveform& I_m, const MoteConfig& cfg,
                                     const SubcarrierCode& code, const TimelineEvents& tl)
{
    ReflectionTrace tr;
    const double rate = I_m.sample_rate;
    const auto n = static_cast<std::size_t>(std::llround((tl.pulse_end - tl.pulse_start) * rate));
    tr.gamma = Waveform(rate, tl.pulse_start, n, cfg.gamma_h);
    if (V_s < cfg.V_s_min) {
        tr.powered = false;
        return tr;
    }
    const double cap = 0.5 * cfg.max_modulation_depth * cfg.gamma_h;
    const double I0 = cfg.quiescent_current();
    const bool recode = cfg.chopping && !cfg.shared_chopper();
    const long off = std::lround((I_m.t_start - tl.pulse_start) * rate);
    for (std::size_t k = 0; k < I_m.size(); ++k) {
        const long i = off + static_cast<long>(k);
        if (i < 0 || i >= static_cast<long>(n))
            continue;
        double dI = I_m[k] - I0;
        if (recode)
            dI *= code.chip_at(I_m.time_at(k) - tl.window_start);
        double dg = piezo_voltage_deviation(dI, V_s, cfg) / V_s;
        tr.peak_request = std::max(tr.peak_request, std::abs(dg));
        if (dg > cap) {
            dg = cap;
            ++tr.clipped;
        } else if (dg < -cap) {
            dg = -cap;
            ++tr.clipped;
        }
        tr.gamma[static_cast<std::size_t>(i)] = cfg.gamma_h + dg;
    }
    return tr;
}

} // namespace usbsim
