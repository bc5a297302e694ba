// Acceptance checks, one line per criterion:
//   acceptance --criterion N      (exit 0 on PASS, 1 on FAIL)
//   acceptance                    (all of them)

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "../properties.hpp"
#include "usbsim/usbsim.hpp"

using namespace usbsim;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

const fs::path kScenarios = fs::path(USBSIM_SOURCE_DIR) / "scenarios";

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string num(double v, const char* f = "%.4g")
{
    char b[64];
    std::snprintf(b, sizeof b, f, v);
    return b;
}

void quiet(LinkScenario& s)
{
    s.noise.carrier.white_enabled = false;
    s.noise.carrier.flicker_enabled = false;
    s.noise.autozero = false;
    for (auto& m : s.motes)
        m.cfg.chip_noise = false;
}

// Normalized exact vs linear reflection over [0, 20 R_S].
Verdict c1()
{
    Stopwatch sw;
    const auto pp = load_material("table1");
    const auto med = load_medium("water");
    const double R_S = series_resistance(pp, med);
    const auto curve = normalized_gamma_curve(pp, med, 20 * R_S, 400);
    double worst = 0.0;
    bool monotone = true;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        worst = std::max(worst, std::abs(curve[i].exact - curve[i].linear));
        if (i && !(curve[i].exact > curve[i - 1].exact))
            monotone = false;
    }
    const double t = sw.seconds();
    return {worst <= 0.03 && monotone && t < 1.0,
            "R_S=" + num(R_S) + " ohm max_dev=" + num(worst) + " (<= 0.03) monotone=" + (monotone ? "yes" : "no")
                + " runtime=" + num(t) + " s"};
}

// Resonance identities for the table set and 20 perturbed sets.
Verdict c2()
{
    Stopwatch sw;
    const PiezoMaterialGeometry base = load_material("table1");
    props::Gen g(2024);
    double worst = 0.0;
    int failed = 0;
    for (int i = 0; i <= 20; ++i) {
        PiezoMaterialGeometry raw = base;
        if (i > 0)
            for (double* v : {&raw.rho, &raw.eps33, &raw.c33E, &raw.e33, &raw.l, &raw.A})
                *v *= g.uniform(0.8, 1.2);
        const auto rep = verify_resonance_identities(derive_params(raw));
        for (const auto& it : rep.items)
            worst = std::max(worst, it.residual);
        failed += !rep.pass;
    }
    const double t = sw.seconds();
    return {failed == 0 && worst < 1e-6 && t < 1.0,
            "sets=21 failed=" + std::to_string(failed) + " worst_residual=" + num(worst) + " runtime=" + num(t) + " s"};
}

// Rectifier curve linearity over a 10% window, exact points.
Verdict c3()
{
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= 1000; ++i) {
        const double v = 0.5 * (0.95 + 0.1 * i / 1000.0);
        pts.emplace_back(rectifier_load_curve(v), v);
    }
    const double dev = static_linearity(pts).max_dev_pct;
    const double i1 = rectifier_load_curve(1.0);
    const double ratio = rectifier_load_curve(0.5) / rectifier_load_curve(0.0);
    const bool ok = dev <= 0.5 && i1 == 0.0 && std::abs(ratio - 1.0 / 3.0) < 1e-12;
    return {ok, "window_dev=" + num(dev) + "% (<= 0.5) I(1)=" + num(i1) + " I(0.5)/I(0)=" + num(ratio, "%.15g")};
}

std::vector<std::pair<double, double>> dc_sweep(LinkScenario s)
{
    quiet(s);
    s.schedule.n_pulses = 8;
    std::vector<std::pair<double, double>> out;
    for (int i = -10; i <= 10; ++i) {
        const double v = i * 1e-3;
        for (auto& m : s.motes) {
            m.stimulus.kind = Stimulus::Kind::Dc;
            m.stimulus.offset = v;
        }
        const auto art = run(s);
        double acc = 0;
        int n = 0;
        for (const auto& r : art.motes[0].stream.records)
            if (!r.decode.dropped) {
                acc += r.decode.raw;
                ++n;
            }
        out.emplace_back(v, acc / n);
    }
    return out;
}

// Static linearity of the default chain and of the linear oracle chain.
Verdict c4()
{
    const auto s = load_scenario(kScenarios / "single_mote_313hz.cfg");
    const auto plan = detail::plan_motes(s).front();
    std::vector<std::pair<double, double>> tr;
    for (int i = -10; i <= 10; ++i)
        tr.emplace_back(i * 1e-3, static_transfer(i * 1e-3, plan.V_s, s.motes[0].cfg));
    const auto model = static_linearity(tr);
    const auto pipe = static_linearity(dc_sweep(s));
    auto lin = s;
    lin.motes[0].cfg = load_mote_preset("ideal_linear");
    lin.motes[0].cfg.R_S = s.motes[0].cfg.R_S;
    const auto oracle = static_linearity(dc_sweep(lin));
    const double oracle_res = oracle.max_dev_pct / 100.0;
    const bool ok = model.max_dev_pct <= 1.2 && pipe.max_dev_pct <= 1.2 && std::abs(model.gain_db - 23.0) <= 1.0
                 && oracle_res < 1e-10;
    return {ok, "V_s=" + num(plan.V_s) + " V gain=" + num(model.gain_db) + " dB (23 +- 1) transfer_nonlin="
                    + num(model.max_dev_pct) + "% pipeline_nonlin=" + num(pipe.max_dev_pct)
                    + "% (<= 1.2) linear_oracle_residual=" + num(oracle_res) + " (< 1e-10)"};
}

// Single-mote tone.
Verdict c5()
{
    Stopwatch sw;
    const auto s = load_scenario(kScenarios / "single_mote_313hz.cfg");
    const auto art = run(s);
    const double t = sw.seconds();
    const auto& m = art.motes[0].metrics;
    if (!m)
        return {false, "no tone metrics"};
    const bool ok = m->thd_db <= -40 && m->sfdr_db >= 46 && std::abs(m->snr_db - 48) <= 3 && t < 30;
    return {ok, "thd=" + num(m->thd_db) + " dB (<= -40) sfdr=" + num(m->sfdr_db) + " dB (>= 46) snr="
                    + num(m->snr_db) + " dB (48 +- 3) runtime=" + num(t) + " s"};
}

// Total and chip-only noise.
Verdict c6()
{
    const auto s = load_scenario(kScenarios / "noise_floor_50mm.cfg");
    const auto total = run(s).motes[0].noise;
    auto chip = s;
    chip.noise.carrier.white_enabled = false;
    chip.noise.carrier.flicker_enabled = false;
    const auto only = run(chip).motes[0].noise;
    if (!total || !only)
        return {false, "no noise estimate"};
    const double d = total->density, rms = only->density * std::sqrt(5e3);
    const bool ok = std::abs(d - 328e-9) <= 0.1 * 328e-9 && std::abs(rms - 5.37e-6) <= 0.15 * 5.37e-6;
    return {ok, "total=" + num(d * 1e9) + " nV/rtHz (328 +- 10%) chip_only=" + num(only->density * 1e9)
                    + " nV/rtHz, " + num(rms * 1e6) + " uVrms in 5 kHz (5.37 +- 15%)"};
}

double density_near(const std::vector<double>& x, double fs, double lo, double hi)
{
    const auto p = psd(x, fs, Window::Hann, 2048);
    double s = 0;
    int n = 0;
    for (std::size_t k = 1; k < p.freq.size(); ++k)
        if (p.freq[k] >= lo && p.freq[k] <= hi) {
            s += p.density[k];
            ++n;
        }
    return s / n;
}

// Chopping suppresses the low-frequency flicker.
Verdict c7()
{
    const auto s = load_scenario(kScenarios / "noise_floor_50mm.cfg");
    const double fs = s.schedule.f_sample();
    const auto on = run(s).motes[0].stream.samples;
    auto off_s = s;
    for (auto& m : off_s.motes)
        m.cfg.chopping = false;
    const auto off = run(off_s).motes[0].stream.samples;
    const double d_on = density_near(on, fs, 5, 15), d_off = density_near(off, fs, 5, 15);
    const double gap = 10 * std::log10(d_off / d_on);
    return {gap >= 10.0, "10 Hz density chopped=" + num(std::sqrt(d_on) * 1e9) + " nV/rtHz unchopped="
                             + num(std::sqrt(d_off) * 1e9) + " nV/rtHz gap=" + num(gap) + " dB (>= 10)"};
}

// Two motes on orthogonal codes; crosstalk grows with vertical offset.
Verdict c8()
{
    const auto s = load_scenario(kScenarios / "dual_mote_414_313hz.cfg");
    const auto art = run(s);
    std::ostringstream d;
    bool ok = true;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& m = art.motes[i];
        const bool rec = m.metrics && std::abs(m.metrics->signal_amplitude - 10e-3) < 1e-3;
        ok = ok && rec && m.crosstalk_db <= -40;
        d << "mote" << i << " amp=" << num(m.metrics ? m.metrics->signal_amplitude * 1e3 : 0) << " mV xtalk="
          << num(m.crosstalk_db) << " dB; ";
    }
    auto base = s;
    base.schedule.n_pulses = 2048;
    const std::vector<double> grid{-2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2};
    const auto rows = sweep(base, SweepAxis::MoteDz, grid);
    std::vector<double> worst;
    for (const auto& r : rows) {
        double w = -240;
        if (!r.error.empty())
            return {false, "sweep point " + num(r.value) + " failed: " + r.error};
        for (const auto& m : r.art.motes)
            w = std::max(w, m.crosstalk_db);
        worst.push_back(w);
    }
    bool mono = true;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (grid[i + 1] <= 0 && !(worst[i] >= worst[i + 1]))
            mono = false;
        if (grid[i] >= 0 && !(worst[i + 1] >= worst[i]))
            mono = false;
    }
    d << "dz sweep worst xtalk [";
    for (std::size_t i = 0; i < grid.size(); ++i)
        d << (i ? " " : "") << num(grid[i]) << ":" << num(worst[i], "%.1f");
    d << "] monotone in |dz|=" << (mono ? "yes" : "no");
    return {ok && mono, d.str()};
}

// Code capacity, round trip, d_min ratio.
Verdict c9()
{
    const AcousticMedium med;
    const MoteConfig cfg = load_mote_preset("this_work");
    const double f = 1.78e6, fc = f / cfg.subcarrier_divider;
    std::ostringstream d;
    bool cap_ok = true;
    for (double z : {35.0, 40.0, 50.0, 60.0, 65.0, 69.9, 70.0, 80.0, 100.0}) {
        const int got = code_capacity(z * 1e-3, med, f, fc, cfg), want = z < 70 ? 4 : 8;
        cap_ok = cap_ok && got == want;
        d << num(z) << "mm:" << got << (got == want ? "" : "(want " + std::to_string(want) + ")") << " ";
    }
    const auto plan = plan_link(0.05, med, Modulation::AM, 8, 1, cfg, f, 2);
    const bool rt_ok = std::abs(plan.report.round_trip - 66e-6) < 0.5e-6;
    bool ratio_ok = true;
    for (int B = 1; B <= 8; ++B) {
        const auto r = link_report(0.05, med, Modulation::DM, B, 1, cfg, f, 2);
        ratio_ok = ratio_ok && std::abs(r.d_min_dm / r.d_min_am - B) <= 1e-12 * B;
    }
    d << "round_trip=" << num(plan.report.round_trip * 1e6) << " us (66) d_min_dm/am=B for B=1..8: "
      << (ratio_ok ? "yes" : "no");
    return {cap_ok && rt_ok && ratio_ok, d.str()};
}

// Depth-ceiling decay and axial harvest peak at 2 MHz.
Verdict c10()
{
    const auto s = load_scenario(kScenarios / "depth_sweep_2mhz.cfg");
    const double f = s.schedule.f_main;
    auto at = [&](double z) {
        LinkGeometry g = s.geometry;
        g.motes.assign(1, {z, 0.0, 0.0});
        return beam_gain(g, 0, f, s.medium, s.beam);
    };
    const double N = fresnel_distance(s.geometry.aperture, f, s.medium);
    double best = -1, best_z = 0;
    for (int i = 0; i <= 1000; ++i) {
        const double z = 20e-3 + i * 0.1e-3;
        const double h = at(z).harvest_vpp;
        if (h > best) {
            best = h;
            best_z = z;
        }
    }
    // fit the decay over N .. N + 3 cm
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= 30; ++i) {
        const double dz = i * 1e-3;
        pts.emplace_back(dz * 100, at(N + dz).max_modulation_depth);
    }
    const double per_cm = -static_linearity(pts).slope * 100;
    const bool ok = std::abs(per_cm - 6) <= 1 && std::abs(best_z - N) <= 2e-3 && N >= 52e-3 && N <= 54e-3;
    return {ok, "f=" + num(f / 1e6) + " MHz N=" + num(N * 1e3) + " mm peak=" + num(best_z * 1e3)
                    + " mm (N +- 2) decay=" + num(per_cm) + " %/cm (6 +- 1)"};
}

// Randomized property suites.
Verdict c11()
{
    Stopwatch sw;
    std::ostringstream d;
    bool ok = true;
    for (const auto& o : props::all(1000)) {
        ok = ok && o.failures == 0 && o.trials == 1000;
        d << "[" << o.name << ": " << o.trials - o.failures << "/" << o.trials << "] ";
        if (o.failures)
            d << "(" << o.counterexample << ") ";
    }
    d << "runtime=" << num(sw.seconds()) << " s";
    return {ok, d.str()};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "run one criterion (1-11)")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    const std::map<int, std::function<Verdict()>> all = {{1, c1}, {2, c2}, {3, c3}, {4, c4},  {5, c5},  {6, c6},
                                                          {7, c7}, {8, c8}, {9, c9}, {10, c10}, {11, c11}};
    bool pass = true;
    for (const auto& [n, fn] : all) {
        if (only && n != only)
            continue;
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
        pass = pass && v.pass;
    }
    return pass ? 0 : 1;
}
