/**
 * @file runner.hpp
 * @brief End-to-end run of a scenario, parameter sweeps, link budget and
 * CSV/summary writers.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "interrogator.hpp"
#include "metrics.hpp"
#include "mote.hpp"
#include "rng.hpp"
#include "scenario.hpp"

namespace usbsim {

struct MoteRunResult {
    SampleStream stream;
    Calibration cal;
    BeamGain beam;
    SubcarrierCode code;
    double integration = 0.0;   // s
    std::optional<MetricsReport> metrics;
    std::optional<NoiseEstimate> noise;
    double crosstalk_db = -240.0; // worst other-tone leakage into this stream
    double input_correlation = std::numeric_limits<double>::quiet_NaN();
    std::size_t saturation = 0;
    std::size_t clipped = 0;
    std::size_t no_por = 0;
    bool powered = true;
};

struct RunArtifacts {
    std::vector<MoteRunResult> motes;
    std::vector<std::string> diagnostics;
};

namespace detail {

// Everything about one mote that stays fixed across pulses.
struct MotePlan {
    const MoteSpec* spec = nullptr;
    SubcarrierCode code;        // what the mote transmits
    SubcarrierCode decode_code; // what the receiver multiplies by
    BeamGain beam;
    double V_s = 0.0;
    double rx_gain = 0.0;       // pressure gain x two-way attenuation
    long n_total = 0;           // carrier cycles in the pulse
    long n_ready = 0;           // cycle at which modulation starts
    double integration = 0.0;
};

inline std::vector<MotePlan> plan_motes(const LinkScenario& s)
{
    int max_code = 0;
    for (const auto& m : s.motes)
        max_code = std::max(max_code, m.code_id);
    const CodeBook book = build_code_book(max_code + 1, s.schedule.f_main, s.motes.front().cfg.subcarrier_divider,
                                          s.decode.codes);
    const double f = s.schedule.f_main;
    std::vector<MotePlan> out;
    for (std::size_t i = 0; i < s.motes.size(); ++i) {
        MotePlan p;
        p.spec = &s.motes[i];
        p.code = book.at(p.spec->code_id);
        // without the chopper there is no subcarrier either (one clock)
        p.decode_code = p.spec->cfg.chopping ? p.code : p.code.unchopped();
        p.beam = beam_gain(s.geometry, i, f, s.medium, s.beam);
        p.V_s = p.beam.V_s();
        p.rx_gain = p.beam.pressure_gain * std::pow(attenuation_factor(p.spec->pos.z, s.medium, f), 2.0);
        p.n_total = std::lround(s.schedule.pulse_duration * f);
        // the mote's digital timing runs off the carrier clock
        p.n_ready = static_cast<long>(std::ceil(p.spec->cfg.t_startup_total * f - 1e-9));
        DecodeWindow w;
        w.available = static_cast<double>(p.n_total - p.n_ready) / f;
        w.startup = static_cast<double>(p.n_ready) / f;
        p.integration = truncated_length(p.decode_code, w, s.decode.truncation);
        out.push_back(std::move(p));
    }
    return out;
}

struct PulseOptions {
    bool chip_noise = true;
    bool autozero = true;
    std::function<double(double)> stimulus; // overrides the mote's own
};

struct MoteEcho {
    Waveform rx;             // envelope at the receiver, fine grid
    double window_start = 0; // receiver time of the mote's first modulated cycle
    double t_arrive = 0;     // pulse arrival at the mote
    bool powered = true;
    bool por = true;
    std::size_t clipped = 0;
};

inline MoteEcho mote_echo(const LinkScenario& s, const MotePlan& p, double t0, MoteState& st, RandomStream* chip_rng,
                          RandomStream* az_rng, const PulseOptions& opt)
{
    const double f = s.schedule.f_main;
    const int R = s.decode.rx_oversample;
    const MoteConfig& cfg = p.spec->cfg;
    MoteEcho e;
    e.t_arrive = t0 + p.spec->pos.z / s.medium.c;
    const double tp = static_cast<double>(p.n_total) / f;
    const TimelineEvents tl = power_timeline(e.t_arrive, tp, cfg, st.last_power_down);
    e.por = tl.por_triggered;
    st.last_power_down = tl.power_down;
    const double w0 = e.t_arrive + static_cast<double>(p.n_ready) / f;
    TimelineEvents tlc = tl;
    tlc.window_start = tlc.amp_ready = w0;

    st.autozero_offset = 0.0;
    if (opt.autozero && az_rng)
        draw_autozero_offset(st, cfg, *az_rng);

    const long nw = p.n_total - p.n_ready;
    Waveform vin(f, w0, static_cast<std::size_t>(nw));
    const auto& stim = opt.stimulus ? opt.stimulus : std::function<double(double)>(
                                                         [&](double t) { return p.spec->stimulus.value(t); });
    for (long k = 0; k < nw; ++k)
        vin[static_cast<std::size_t>(k)] = stim(vin.time_at(static_cast<std::size_t>(k)));

    AfeNoise nz;
    if (opt.chip_noise && cfg.chip_noise && chip_rng && cfg.chip_noise_density > 0.0 && p.integration > 0.0) {
        nz.rng = chip_rng;
        nz.density = cfg.chip_noise_density * std::sqrt(p.integration * s.schedule.f_sample());
    }
    const Waveform vl = afe_process(vin, cfg, st, p.code, w0, nz);
    const Waveform im = gm_convert(vl, cfg);
    ReflectionTrace tr = echo_modulate(p.V_s, im, cfg, p.code, tlc);
    e.powered = tr.powered;
    e.clipped = tr.clipped;

    const double D = p.beam.max_modulation_depth;
    Waveform at_mote(f, e.t_arrive, tr.gamma.size());
    for (std::size_t k = 0; k < at_mote.size(); ++k)
        at_mote[k] = (1.0 - D) + D * tr.gamma[k];
    Waveform fine = upsample_hold(at_mote, R);
    for (auto& v : fine.samples)
        v *= p.beam.pressure_gain;
    fine = propagate(fine, p.spec->pos.z, s.medium, f);
    for (auto& v : fine.samples)
        v *= attenuation_factor(p.spec->pos.z, s.medium, f); // downlink leg
    // land on the receiver's sample clock
    const double rate = fine.sample_rate;
    const double shift = std::round(fine.t_start * rate) / rate - fine.t_start;
    fine.t_start += shift;
    e.window_start = w0 + p.spec->pos.z / s.medium.c + shift;
    e.rx = std::move(fine);
    return e;
}

inline Waveform to_carrier(const Waveform& env, double f_main)
{
    Waveform out = env;
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] *= std::cos(2.0 * kPi * f_main * out.time_at(k));
    return out;
}

} // namespace detail

// Two noiseless pilot pulses (+pilot, -pilot DC) per mote, alone in the
// channel: gain and offset of raw decode units against input volts.
inline std::vector<Calibration> calibrate(const LinkScenario& s, const std::vector<detail::MotePlan>& plans)
{
    std::vector<Calibration> cals;
    for (const auto& p : plans) {
        double raw[2];
        for (int sgn = 0; sgn < 2; ++sgn) {
            const double v = sgn == 0 ? s.decode.pilot : -s.decode.pilot;
            MoteState st;
            detail::PulseOptions opt;
            opt.chip_noise = false;
            opt.autozero = false;
            opt.stimulus = [v](double) { return v; };
            const auto e = detail::mote_echo(s, p, 0.0, st, nullptr, nullptr, opt);
            Waveform rx = e.rx;
            if (s.decode.demod == DemodMode::FullCarrier)
                rx = demodulate_carrier(detail::to_carrier(rx, s.schedule.f_main), s.schedule.f_main,
                                        DemodOptions{DemodMode::FullCarrier});
            DecodeWindow w{e.window_start, p.integration, static_cast<double>(p.n_ready) / s.schedule.f_main};
            w.available = static_cast<double>(p.n_total - p.n_ready) / s.schedule.f_main;
            raw[sgn] = decode_cdm(rx, p.decode_code, w, {}, s.decode.truncation).raw;
        }
        Calibration c;
        c.gain = (raw[0] - raw[1]) / (2.0 * s.decode.pilot);
        c.offset = 0.5 * (raw[0] + raw[1]);
        if (c.gain == 0.0)
            c.gain = 1.0; // unpowered; every pulse is dropped anyway
        cals.push_back(c);
    }
    return cals;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b)
{
    const std::size_t n = std::min(a.size(), b.size());
    if (n < 2)
        return std::numeric_limits<double>::quiet_NaN();
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : std::numeric_limits<double>::quiet_NaN();
}

inline RunArtifacts run(const LinkScenario& s)
{
    s.validate();
    const auto plans = detail::plan_motes(s);
    const auto cals = calibrate(s, plans);
    const std::size_t M = plans.size();
    const double f = s.schedule.f_main;
    const double fs = s.schedule.f_sample();
    RunArtifacts art;
    art.motes.resize(M);

    // Carrier noise is specified input referred in the stream; map it to the
    // envelope through the reference mote's gain and integration time.
    const auto& ref = plans.front();
    CarrierNoiseModel env_noise = s.noise.carrier;
    const double to_env = std::abs(cals.front().gain) * std::sqrt(ref.integration * fs);
    env_noise.white_density = s.noise.carrier.white_density * to_env;
    env_noise.flicker_corner = s.noise.carrier.flicker_corner / (ref.integration * fs);
    std::optional<CarrierNoiseProcess> carrier;
    if (env_noise.active() && ref.integration > 0.0)
        carrier.emplace(env_noise, s.seed, stream_id::carrier);

    std::vector<MoteState> states(M);
    std::vector<RandomStream> chip_rngs, az_rngs;
    for (std::size_t i = 0; i < M; ++i) {
        chip_rngs.emplace_back(s.seed, stream_id::chip_noise + i);
        az_rngs.emplace_back(s.seed, stream_id::autozero + i);
    }
    std::vector<std::vector<PulseRecord>> recs(M);
    std::vector<std::vector<double>> truth(M);
    for (long k = 0; k < s.schedule.n_pulses; ++k) {
        const double t0 = static_cast<double>(k) * s.schedule.pulse_period;
        std::vector<detail::MoteEcho> echoes;
        std::vector<Waveform> parts;
        for (std::size_t i = 0; i < M; ++i) {
            detail::PulseOptions opt;
            opt.autozero = s.noise.autozero;
            echoes.push_back(detail::mote_echo(s, plans[i], t0, states[i], &chip_rngs[i], &az_rngs[i], opt));
            parts.push_back(echoes.back().rx);
            art.motes[i].clipped += echoes.back().clipped;
        }
        Waveform rx = superpose(parts);
        if (carrier)
            carrier->apply(rx);
        if (s.decode.demod == DemodMode::FullCarrier)
            rx = demodulate_carrier(detail::to_carrier(rx, f), f, DemodOptions{DemodMode::FullCarrier});
        for (std::size_t i = 0; i < M; ++i) {
            const auto& p = plans[i];
            const auto& e = echoes[i];
            DecodeWindow w;
            w.start = e.window_start;
            w.available = static_cast<double>(p.n_total - p.n_ready) / f;
            w.startup = static_cast<double>(p.n_ready) / f;
            PulseRecord r;
            r.pulse_index = k;
            r.t_start = t0;
            r.code_id = p.spec->code_id;
            r.decode = decode_cdm(rx, p.decode_code, w, cals[i], s.decode.truncation);
            r.t_sample = e.t_arrive + static_cast<double>(p.n_ready) / f + 0.5 * r.decode.truncated_len;
            if (!e.powered) {
                r.decode.dropped = true;
                r.decode.reason = "mote not powered";
            } else if (!e.por) {
                ++art.motes[i].no_por;
            }
            recs[i].push_back(r);
            if (!r.decode.dropped)
                truth[i].push_back(p.spec->stimulus.value(r.t_sample));
        }
    }

    for (std::size_t i = 0; i < M; ++i) {
        auto& mr = art.motes[i];
        const auto& p = plans[i];
        mr.stream = reconstruct(recs[i], fs, s.decode.interpolate_gaps);
        mr.cal = cals[i];
        mr.beam = p.beam;
        mr.code = p.decode_code;
        mr.integration = p.integration;
        mr.saturation = states[i].saturation_count;
        mr.powered = p.V_s >= p.spec->cfg.V_s_min;
        if (!mr.powered)
            art.diagnostics.push_back("mote " + std::to_string(i) + ": harvested amplitude below V_s_min");
        if (mr.clipped)
            art.diagnostics.push_back("mote " + std::to_string(i) + ": modulation depth cap hit on "
                                      + std::to_string(mr.clipped) + " samples");
        const auto& x = mr.stream.samples;
        const bool has_gaps = !mr.stream.gaps.empty() && !mr.stream.interpolated;
        if (x.size() < 1024 || has_gaps) {
            art.diagnostics.push_back("mote " + std::to_string(i) + ": stream too short or gapped for spectral metrics");
            continue;
        }
        const auto& st = p.spec->stimulus;
        if (st.is_tone() && st.amplitude_pp > 0.0) {
            mr.metrics = tone_metrics(x, fs, st.frequency);
            for (std::size_t j = 0; j < M; ++j) {
                const auto& o = s.motes[j].stimulus;
                if (j == i || !o.is_tone() || std::abs(o.frequency - st.frequency) < 1e-9)
                    continue;
                mr.crosstalk_db = std::max(mr.crosstalk_db, crosstalk_db(x, fs, st.frequency, o.frequency));
            }
        } else {
            mr.noise = noise_density(x, fs, 0.02 * fs, 0.48 * fs);
        }
        if (st.kind == Stimulus::Kind::File)
            mr.input_correlation = pearson(x, truth[i]);
    }
    return art;
}

namespace detail {

inline std::string fmt(double v, const char* f = "%.9g")
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

} // namespace detail

inline std::string stream_csv(const SampleStream& s)
{
    std::ostringstream o;
    o << "pulse_index,t_start,truncated_len_us,code_id,raw_sample,calibrated_uV\n";
    for (const auto& r : s.records) {
        o << r.pulse_index << "," << detail::fmt(r.t_start, "%.9e") << "," << detail::fmt(r.decode.truncated_len * 1e6, "%.6f")
          << "," << r.code_id << ",";
        if (r.decode.dropped)
            o << "nan,nan\n";
        else
            o << detail::fmt(r.decode.raw, "%.12e") << "," << detail::fmt(r.decode.calibrated * 1e6, "%.6f") << "\n";
    }
    return o.str();
}

inline std::string run_summary(const LinkScenario& s, const RunArtifacts& a)
{
    std::ostringstream o;
    o << "scenario=" << s.name << "\n" << "seed=" << s.seed << "\n"
      << "f_sample_hz=" << detail::fmt(s.schedule.f_sample()) << "\n"
      << "n_pulses=" << s.schedule.n_pulses << "\n";
    for (std::size_t i = 0; i < a.motes.size(); ++i) {
        const auto& m = a.motes[i];
        const std::string p = "mote" + std::to_string(i) + ".";
        o << p << "code_id=" << m.stream.code_id << "\n"
          << p << "harvest_vpp=" << detail::fmt(m.beam.harvest_vpp) << "\n"
          << p << "max_modulation_depth=" << detail::fmt(m.beam.max_modulation_depth) << "\n"
          << p << "integration_us=" << detail::fmt(m.integration * 1e6) << "\n"
          << p << "cal_gain=" << detail::fmt(m.cal.gain) << "\n"
          << p << "samples=" << m.stream.samples.size() << "\n"
          << p << "dropped=" << m.stream.gaps.size() << "\n"
          << p << "saturation=" << m.saturation << "\n"
          << p << "depth_cap_hits=" << m.clipped << "\n";
        if (m.metrics) {
            o << p << "thd_db=" << detail::fmt(m.metrics->thd_db) << "\n"
              << p << "sfdr_db=" << detail::fmt(m.metrics->sfdr_db) << "\n"
              << p << "snr_db=" << detail::fmt(m.metrics->snr_db) << "\n"
              << p << "sndr_db=" << detail::fmt(m.metrics->sndr_db) << "\n"
              << p << "amplitude_v=" << detail::fmt(m.metrics->signal_amplitude) << "\n";
            if (a.motes.size() > 1)
                o << p << "crosstalk_db=" << detail::fmt(m.crosstalk_db) << "\n";
        }
        if (m.noise)
            o << p << "noise_density_v_rthz=" << detail::fmt(m.noise->density) << "\n"
              << p << "noise_rms_v=" << detail::fmt(m.noise->density * std::sqrt(0.5 * s.schedule.f_sample())) << "\n";
        if (!std::isnan(m.input_correlation))
            o << p << "input_correlation=" << detail::fmt(m.input_correlation) << "\n";
    }
    for (const auto& d : a.diagnostics)
        o << "diagnostic=" << d << "\n";
    return o.str();
}

inline void write_outputs(const LinkScenario& s, const RunArtifacts& a, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < a.motes.size(); ++i) {
        std::ofstream(dir / ("stream_mote" + std::to_string(i) + ".csv")) << stream_csv(a.motes[i].stream);
        if (a.motes[i].metrics)
            std::ofstream(dir / ("psd_mote" + std::to_string(i) + ".csv")) << a.motes[i].metrics->spectrum.csv();
    }
    std::ofstream(dir / "summary.txt") << run_summary(s, a);
}

enum class SweepAxis { Depth, LateralX, LateralY, MoteDz, InputAmplitude };

inline SweepAxis parse_axis(const std::string& a)
{
    if (a == "depth") return SweepAxis::Depth;
    if (a == "lateral_x") return SweepAxis::LateralX;
    if (a == "lateral_y") return SweepAxis::LateralY;
    if (a == "mote_dz") return SweepAxis::MoteDz;
    if (a == "input_amplitude") return SweepAxis::InputAmplitude;
    throw ValidationError("sweep: unknown axis '" + a + "'");
}

// Grid values are in mm for geometric axes and mVpp for input_amplitude.
inline LinkScenario apply_axis(LinkScenario s, SweepAxis axis, double value)
{
    switch (axis) {
    case SweepAxis::Depth: {
        const double z = value * 1e-3, z0 = s.motes.front().pos.z;
        for (auto& m : s.motes)
            m.pos.z = z + (m.pos.z - z0);
        s.schedule.depth_target = z;
        break;
    }
    case SweepAxis::LateralX: s.motes.front().pos.x = value * 1e-3; break;
    case SweepAxis::LateralY: s.motes.front().pos.y = value * 1e-3; break;
    case SweepAxis::MoteDz:
        if (s.motes.size() < 2)
            throw ValidationError("sweep: mote_dz needs two motes");
        s.motes[1].pos.z = s.motes[0].pos.z + value * 1e-3;
        break;
    case SweepAxis::InputAmplitude:
        for (auto& m : s.motes)
            if (m.stimulus.is_tone())
                m.stimulus.amplitude_pp = value * 1e-3;
        break;
    }
    s.sync_geometry();
    return s;
}

struct SweepRow {
    double value = 0.0;
    std::string error;
    RunArtifacts art;
    std::vector<BeamGain> beams;
};

inline std::vector<double> parse_grid(const std::string& g)
{
    double a, b, st;
    char c1, c2;
    std::istringstream in(g);
    if (!(in >> a >> c1 >> b >> c2 >> st) || c1 != ':' || c2 != ':' || !(st > 0.0))
        throw ValidationError("--grid: expected a:b:step with step > 0");
    std::vector<double> v;
    const long n = static_cast<long>(std::floor((b - a) / st + 1e-9));
    for (long i = 0; i <= n; ++i)
        v.push_back(a + static_cast<double>(i) * st);
    return v;
}

// One isolated run per grid point, same seed everywhere. Points run on a
// small pool; results come back in grid order.
inline std::vector<SweepRow> sweep(const LinkScenario& base, SweepAxis axis, const std::vector<double>& grid,
                                   unsigned jobs = 0)
{
    std::vector<SweepRow> rows(grid.size());
    if (grid.empty())
        return rows;
    if (jobs == 0)
        jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(grid.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            SweepRow& r = rows[i];
            r.value = grid[i];
            try {
                LinkScenario s = apply_axis(base, axis, grid[i]);
                for (std::size_t m = 0; m < s.motes.size(); ++m)
                    r.beams.push_back(beam_gain(s.geometry, m, s.schedule.f_main, s.medium, s.beam));
                r.art = run(s);
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, std::size_t n_motes, const std::string& axis)
{
    std::ostringstream o;
    o << axis;
    for (std::size_t m = 0; m < n_motes; ++m) {
        const std::string p = ",m" + std::to_string(m) + "_";
        o << p << "harvest_vpp" << p << "max_modulation_depth" << p << "fresnel_mm" << p << "snr_db" << p << "sndr_db"
          << p << "sfdr_db" << p << "thd_db" << p << "crosstalk_db";
    }
    o << ",error\n";
    for (const auto& r : rows) {
        o << detail::fmt(r.value);
        for (std::size_t m = 0; m < n_motes; ++m) {
            const bool hb = m < r.beams.size();
            o << "," << (hb ? detail::fmt(r.beams[m].harvest_vpp) : "nan") << ","
              << (hb ? detail::fmt(r.beams[m].max_modulation_depth) : "nan") << ","
              << (hb ? detail::fmt(r.beams[m].fresnel_distance * 1e3) : "nan");
            const MetricsReport* mr = m < r.art.motes.size() && r.art.motes[m].metrics ? &*r.art.motes[m].metrics : nullptr;
            o << "," << (mr ? detail::fmt(mr->snr_db) : "nan") << "," << (mr ? detail::fmt(mr->sndr_db) : "nan") << ","
              << (mr ? detail::fmt(mr->sfdr_db) : "nan") << "," << (mr ? detail::fmt(mr->thd_db) : "nan") << ","
              << (mr && n_motes > 1 ? detail::fmt(r.art.motes[m].crosstalk_db) : "nan");
        }
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        o << "," << err << "\n";
    }
    return o.str();
}

// Link arithmetic for the first mote at the scenario's target depth.
inline std::string report_link_budget(const LinkScenario& s)
{
    const MoteConfig& cfg = s.motes.front().cfg;
    const double z = s.schedule.depth_target;
    const double f = s.schedule.f_main;
    std::ostringstream o;
    o << "depth_mm=" << detail::fmt(z * 1e3) << "\n" << "medium=" << s.medium.name << "\n"
      << "c_m_s=" << detail::fmt(s.medium.c) << "\n";
    const LinkReport r = link_report(z, s.medium, Modulation::DM, s.dm_bits, 1, cfg, f, s.decode.settle_cycles);
    o << r.text();
    for (Modulation m : {Modulation::AM, Modulation::DM}) {
        const char* tag = m == Modulation::AM ? "feasible_am=" : "feasible_dm=";
        try {
            plan_link(z, s.medium, m, s.dm_bits, 1, cfg, f, s.decode.settle_cycles);
            o << tag << "yes\n";
        } catch (const InfeasibleLinkError& e) {
            o << tag << "no (" << e.constraint << ")\n";
        }
    }
    o << "d_min_ratio_dm_am=" << detail::fmt(r.d_min_dm / r.d_min_am) << "\n";
    const double max_code_freq = f / cfg.subcarrier_divider;
    o << "code_capacity=" << code_capacity(z, s.medium, f, max_code_freq, cfg) << "\n";
    const double fs = s.schedule.f_sample();
    const double sig = cfg.input_linear_range / std::sqrt(2.0);
    const double dc = s.noise.carrier.white_enabled ? s.noise.carrier.white_density : 0.0;
    const double dchip = cfg.chip_noise ? cfg.chip_noise_density : 0.0;
    const double nrms = std::sqrt(dc * dc + dchip * dchip) * std::sqrt(0.5 * fs);
    const double snr = nrms > 0 ? sig * sig / (nrms * nrms) : 1e12;
    const double snr_db = 10.0 * std::log10(snr);
    o << "f_sample_hz=" << detail::fmt(fs) << "\n"
      << "predicted_snr_db=" << detail::fmt(snr_db) << "\n"
      << "uplink_rate_shannon_bps=" << detail::fmt(fs * std::log2(1.0 + snr)) << "\n"
      << "uplink_rate_enob_bps=" << detail::fmt(fs * (snr_db - 1.76) / 6.02) << "\n";
    return o.str();
}

} // namespace usbsim
