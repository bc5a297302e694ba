/**
 * @file channel.hpp
 * @brief Acoustic path: delay + attenuation, empirical beam profile, echo
 * superposition and interrogator carrier amplitude noise.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "medium.hpp"
#include "rng.hpp"
#include "units.hpp"
#include "waveform.hpp"

namespace usbsim {

inline double attenuation_factor(double distance, const AcousticMedium& med, double f_carrier)
{
    const double db = med.alpha * (f_carrier / 1e6) * (distance * 100.0);
    return std::pow(10.0, -db / 20.0);
}

inline Waveform propagate(const Waveform& w, double distance, const AcousticMedium& med, double f_carrier)
{
    if (!(distance >= 0.0))
        throw ValidationError("propagate: distance must be >= 0");
    Waveform out = w;
    if (distance == 0.0)
        return out;
    out.t_start += distance / med.c;
    const double g = attenuation_factor(distance, med, f_carrier);
    for (auto& s : out.samples)
        s *= g;
    return out;
}

struct MotePosition {
    double z = 0.05; // m, depth on the transducer axis
    double x = 0.0;  // m
    double y = 0.0;  // m
};

struct LinkGeometry {
    double aperture = 12.7e-3; // m, diameter
    std::vector<MotePosition> motes;

    void validate() const
    {
        if (!(aperture > 0.0))
            throw ValidationError("geometry: aperture must be > 0");
        for (std::size_t i = 0; i < motes.size(); ++i) {
            if (!(motes[i].z > 0.0))
                throw ValidationError("geometry: mote " + std::to_string(i) + " depth must be > 0");
            for (std::size_t j = 0; j < i; ++j)
                if (motes[i].z == motes[j].z && motes[i].x == motes[j].x && motes[i].y == motes[j].y)
                    throw ValidationError("geometry: motes " + std::to_string(j) + " and "
                                          + std::to_string(i) + " share a position");
        }
    }
};

// Empirical beam numbers. The margin is quoted for the 12.7 mm aperture and
// scales with it.
struct BeamCalibration {
    double harvest_vpp_at_focus = 6.0;  // open-circuit piezo Vpp on axis at N
    double depth_at_focus = 0.40;       // modulation-depth ceiling at and before N
    double depth_decay_per_cm = 0.06;   // absolute, beyond N
    double lateral_margin = 1.75e-3;    // m, at N
    double margin_gain = 0.72;          // pressure gain at the margin
    double lateral_limit = 5e-3;        // m, model validity
};

struct BeamGain {
    double fresnel_distance = 0.0;
    double axial_gain = 0.0;
    double lateral_gain = 0.0;
    double pressure_gain = 0.0;        // 1 on axis at N
    double max_modulation_depth = 0.0;
    double harvest_vpp = 0.0;          // open-circuit piezo, Vpp
    double V_s() const { return 0.5 * harvest_vpp; }
};

inline double fresnel_distance(double aperture, double f, const AcousticMedium& med)
{
    const double a = 0.5 * aperture;
    return a * a * f / med.c;
}

inline BeamGain beam_gain(const LinkGeometry& g, std::size_t mote_index, double f, const AcousticMedium& med,
                          const BeamCalibration& cal = {})
{
    if (mote_index >= g.motes.size())
        throw ValidationError("beam_gain: mote index out of range");
    const MotePosition& p = g.motes[mote_index];
    if (!(p.z > 0.0))
        throw ValidationError("beam_gain: depth must be > 0");
    if (std::abs(p.x) > cal.lateral_limit || std::abs(p.y) > cal.lateral_limit)
        throw ModelRangeError("beam_gain: lateral offset beyond +-" + std::to_string(cal.lateral_limit * 1e3)
                              + " mm model range");
    BeamGain b;
    b.fresnel_distance = fresnel_distance(g.aperture, f, med);
    const double u = p.z / b.fresnel_distance;
    b.axial_gain = u * std::exp(1.0 - u);
    const double margin = cal.lateral_margin * g.aperture / 12.7e-3;
    const double sigma_n = margin / std::sqrt(-2.0 * std::log(cal.margin_gain));
    const double sigma = sigma_n * std::max(1.0, u);
    const double r2 = p.x * p.x + p.y * p.y;
    b.lateral_gain = std::exp(-r2 / (2.0 * sigma * sigma));
    b.pressure_gain = b.axial_gain * b.lateral_gain;
    const double beyond_cm = std::max(0.0, p.z - b.fresnel_distance) * 100.0;
    b.max_modulation_depth = std::max(0.0, cal.depth_at_focus - cal.depth_decay_per_cm * beyond_cm);
    b.harvest_vpp = cal.harvest_vpp_at_focus * b.pressure_gain;
    return b;
}

// Sum on the union grid. Echoes that sit on the common grid are added
// sample for sample; off-grid ones are linearly interpolated.
inline Waveform superpose(const std::vector<Waveform>& echoes)
{
    if (echoes.empty())
        return {};
    const double rate = echoes.front().sample_rate;
    double t0 = echoes.front().t_start, t1 = echoes.front().t_end();
    for (const auto& e : echoes) {
        if (std::abs(e.sample_rate - rate) > 1e-12 * rate)
            throw ValidationError("superpose: sample rates differ");
        t0 = std::min(t0, e.t_start);
        t1 = std::max(t1, e.t_end());
    }
    const auto n = static_cast<std::size_t>(std::llround((t1 - t0) * rate));
    Waveform out(rate, t0, n);
    for (const auto& e : echoes) {
        const double pos = (e.t_start - t0) * rate;
        const double ip = std::round(pos);
        if (std::abs(pos - ip) < 1e-6) {
            const auto o = static_cast<std::size_t>(ip);
            for (std::size_t i = 0; i < e.size() && o + i < n; ++i)
                out[o + i] += e[i];
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                const double x = static_cast<double>(k) - pos;
                if (x < 0.0 || x > static_cast<double>(e.size() - 1))
                    continue;
                const auto i = static_cast<std::size_t>(x);
                const double fr = x - static_cast<double>(i);
                const double b = i + 1 < e.size() ? e[i + 1] : e[i];
                out[k] += e[i] + fr * (b - e[i]);
            }
        }
    }
    return out;
}

struct CarrierNoiseModel {
    double white_density = 319e-9;  // V/rtHz
    double flicker_corner = 1e3;    // Hz, where 1/f meets the white level
    bool white_enabled = true;
    bool flicker_enabled = true;

    bool active() const
    {
        return (white_enabled && white_density > 0.0) || (flicker_enabled && flicker_corner > 0.0 && white_density > 0.0);
    }
};

// White + 1/f amplitude noise evaluated at arbitrary, increasing times.
// The 1/f part is a bank of first-order (Ornstein-Uhlenbeck) processes with
// octave-spaced corners; equal variance per octave gives a 1/f sum. Each
// state is advanced with its exact transition, so gaps between pulses cost
// nothing and the process stays continuous across them.
class CarrierNoiseProcess {
public:
    static constexpr double kLowestPole = 0.5; // Hz

    CarrierNoiseProcess(const CarrierNoiseModel& m, std::uint64_t seed, std::uint64_t stream = stream_id::carrier)
        : model_(m), rng_(seed, stream)
    {
        if (m.white_density < 0.0 || m.flicker_corner < 0.0)
            throw ValidationError("carrier noise: densities must be >= 0");
        if (m.flicker_enabled && m.flicker_corner > 0.0 && m.white_density > 0.0) {
            const double top = 4.0 * m.flicker_corner;
            const double var = std::log(2.0) * m.white_density * m.white_density * m.flicker_corner;
            for (double f = kLowestPole; f <= top * 1.0000001; f *= 2.0) {
                poles_.push_back(f);
                sig_.push_back(std::sqrt(var));
            }
            state_.resize(poles_.size());
            for (std::size_t i = 0; i < poles_.size(); ++i)
                state_[i] = sig_[i] * rng_.gaussian();
            decay_.assign(poles_.size(), 0.0);
            drive_.assign(poles_.size(), 0.0);
        }
    }

    std::size_t pole_count() const { return poles_.size(); }

    void apply(Waveform& w)
    {
        const bool white = model_.white_enabled && model_.white_density > 0.0;
        const double sw = white ? model_.white_density * std::sqrt(0.5 * w.sample_rate) : 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double t = w.time_at(k);
            double v = 0.0;
            if (!poles_.empty()) {
                if (have_t_) {
                    const double dt = t - last_t_;
                    if (dt < 0.0)
                        throw ValidationError("carrier noise: time went backwards");
                    if (dt != cached_dt_)
                        cache(dt);
                    for (std::size_t i = 0; i < poles_.size(); ++i)
                        state_[i] = state_[i] * decay_[i] + drive_[i] * rng_.gaussian();
                }
                have_t_ = true;
                last_t_ = t;
                for (double s : state_)
                    v += s;
            }
            if (white)
                v += sw * rng_.gaussian();
            w[k] += v;
        }
    }

private:
    void cache(double dt)
    {
        cached_dt_ = dt;
        for (std::size_t i = 0; i < poles_.size(); ++i) {
            const double a = std::exp(-2.0 * kPi * poles_[i] * dt);
            decay_[i] = a;
            drive_[i] = sig_[i] * std::sqrt(std::max(0.0, 1.0 - a * a));
        }
    }

    CarrierNoiseModel model_;
    RandomStream rng_;
    std::vector<double> poles_, sig_, state_, decay_, drive_;
    double last_t_ = 0.0;
    double cached_dt_ = -1.0;
    bool have_t_ = false;
};

inline Waveform inject_carrier_noise(const Waveform& w, const CarrierNoiseModel& model, std::uint64_t seed,
                                     std::uint64_t stream = stream_id::carrier)
{
    Waveform out = w;
    if (!model.active())
        return out;
    CarrierNoiseProcess proc(model, seed, stream);
    proc.apply(out);
    return out;
}

} // namespace usbsim
