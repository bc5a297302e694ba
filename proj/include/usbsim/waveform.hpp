#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace usbsim {

// Uniformly sampled real series. Sample i sits at t_start + i / sample_rate.
struct Waveform {
    double sample_rate = 0.0; // Hz
    double t_start = 0.0;     // s
    std::vector<double> samples;

    Waveform() = default;
    Waveform(double rate, double t0, std::vector<double> s)
        : sample_rate(rate), t_start(t0), samples(std::move(s)) {}
    Waveform(double rate, double t0, std::size_t n, double fill = 0.0)
        : sample_rate(rate), t_start(t0), samples(n, fill) {}

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double dt() const { return 1.0 / sample_rate; }
    double time_at(std::size_t i) const { return t_start + static_cast<double>(i) / sample_rate; }
    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
    double t_end() const { return t_start + duration(); }
    double& operator[](std::size_t i) { return samples[i]; }
    double operator[](std::size_t i) const { return samples[i]; }
};

// Sample-and-hold onto a grid `factor` times finer. Start time is kept.
inline Waveform upsample_hold(const Waveform& w, int factor)
{
    Waveform out(w.sample_rate * factor, w.t_start, w.size() * static_cast<std::size_t>(factor));
    for (std::size_t i = 0; i < w.size(); ++i)
        for (int k = 0; k < factor; ++k)
            out.samples[i * factor + k] = w.samples[i];
    return out;
}

} // namespace usbsim
