/**
 * @file scenario.hpp
 * @brief Scenario and preset files: YAML with unit-suffixed values.
 */
#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "channel.hpp"
#include "errors.hpp"
#include "interrogator.hpp"
#include "medium.hpp"
#include "mote.hpp"
#include "piezo.hpp"
#include "units.hpp"

#ifndef USBSIM_DATA_DIR
#define USBSIM_DATA_DIR "data"
#endif

namespace usbsim {

inline constexpr int kSchemaVersion = 1;

inline std::filesystem::path data_dir()
{
    if (const char* env = std::getenv("USBSIM_DATA_DIR"); env && *env)
        return env;
    return USBSIM_DATA_DIR;
}

namespace cfg {

inline std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

inline std::string scalar(const YAML::Node& n, const std::string& path)
{
    if (!n.IsScalar())
        throw ValidationError(path + ": expected a scalar value");
    return n.as<std::string>();
}

inline double quantity(const YAML::Node& n, const std::string& path, Dim d)
{
    return parse_quantity(scalar(n, path), d, path);
}

inline long integer(const YAML::Node& n, const std::string& path)
{
    const std::string s = scalar(n, path);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw ValidationError(path + ": expected an integer ('" + s + "')");
    return v;
}

inline bool flag(const YAML::Node& n, const std::string& path) { return parse_switch(scalar(n, path), path); }

// Throws on keys outside `allowed`, so typos are schema errors.
inline void check_keys(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed)
{
    if (!n.IsMap())
        throw ValidationError((path.empty() ? std::string("document") : path) + ": expected a mapping");
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key))
            throw ValidationError(join(path, key) + ": unknown key");
    }
}

inline YAML::Node load_file(const std::filesystem::path& p)
{
    if (!std::filesystem::exists(p))
        throw ValidationError("file not found: " + p.string());
    try {
        return YAML::LoadFile(p.string());
    } catch (const YAML::Exception& e) {
        throw ValidationError(p.string() + ": parse error: " + e.what());
    }
}

inline void check_schema(const YAML::Node& doc, const std::string& file)
{
    if (!doc["schema"])
        throw ValidationError(file + ": schema: missing");
    const long v = integer(doc["schema"], "schema");
    if (v != kSchemaVersion)
        throw ValidationError(file + ": schema: version " + std::to_string(v) + " not supported (expected "
                              + std::to_string(kSchemaVersion) + ")");
}

inline YAML::Node library_entry(const std::string& file, const std::string& section, const std::string& name)
{
    const auto path = data_dir() / file;
    YAML::Node doc = load_file(path);
    check_schema(doc, path.string());
    const YAML::Node sec = doc[section];
    if (!sec || !sec.IsMap())
        throw ValidationError(path.string() + ": missing '" + section + "' section");
    const YAML::Node e = sec[name];
    if (!e)
        throw ValidationError(path.string() + ": no " + section + " entry named '" + name + "'");
    return e;
}

} // namespace cfg

inline PiezoParams piezo_from_node(const YAML::Node& n, const std::string& path, const std::string& name)
{
    cfg::check_keys(n, path, {"description", "rho", "eps33", "c33E", "e33", "thickness", "area"});
    auto need = [&](const char* k) {
        if (!n[k])
            throw ValidationError(cfg::join(path, k) + ": missing");
        return n[k];
    };
    PiezoMaterialGeometry g;
    g.rho = cfg::quantity(need("rho"), cfg::join(path, "rho"), Dim::density);
    g.eps33 = cfg::quantity(need("eps33"), cfg::join(path, "eps33"), Dim::permittivity);
    g.c33E = cfg::quantity(need("c33E"), cfg::join(path, "c33E"), Dim::stiffness);
    g.e33 = cfg::quantity(need("e33"), cfg::join(path, "e33"), Dim::charge_density);
    g.l = cfg::quantity(need("thickness"), cfg::join(path, "thickness"), Dim::length);
    g.A = cfg::quantity(need("area"), cfg::join(path, "area"), Dim::area);
    return derive_params(g, name);
}

inline PiezoParams load_material(const std::string& name)
{
    return piezo_from_node(cfg::library_entry("materials.yaml", "materials", name), "materials." + name, name);
}

inline AcousticMedium medium_from_node(const YAML::Node& n, const std::string& path, const std::string& name)
{
    cfg::check_keys(n, path, {"description", "c", "alpha", "Z_B"});
    AcousticMedium m;
    m.name = name;
    if (n["c"])
        m.c = cfg::quantity(n["c"], cfg::join(path, "c"), Dim::speed);
    if (n["alpha"])
        m.alpha = cfg::quantity(n["alpha"], cfg::join(path, "alpha"), Dim::attenuation);
    if (n["Z_B"])
        m.Z_B = cfg::quantity(n["Z_B"], cfg::join(path, "Z_B"), Dim::impedance);
    m.validate();
    return m;
}

inline AcousticMedium load_medium(const std::string& name)
{
    return medium_from_node(cfg::library_entry("media.yaml", "media", name), "media." + name, name);
}

namespace detail {

struct MoteField {
    const char* key;
    Dim dim;
    double MoteConfig::*member;
};

inline const std::vector<MoteField>& mote_fields()
{
    static const std::vector<MoteField> f = {
        {"R_S", Dim::resistance, &MoteConfig::R_S},
        {"V_s_min", Dim::voltage, &MoteConfig::V_s_min},
        {"lna_gain", Dim::none, &MoteConfig::lna_gain},
        {"lna_output_range", Dim::voltage, &MoteConfig::lna_output_range},
        {"lna_bandwidth", Dim::frequency, &MoteConfig::lna_bandwidth},
        {"gm", Dim::conductance, &MoteConfig::gm},
        {"mirror_gain", Dim::none, &MoteConfig::mirror_gain},
        {"gm_compression", Dim::none, &MoteConfig::gm_compression},
        {"t_charge", Dim::time, &MoteConfig::t_charge},
        {"t_amp_init", Dim::time, &MoteConfig::t_amp_init},
        {"t_startup_total", Dim::time, &MoteConfig::t_startup_total},
        {"t_discharge", Dim::time, &MoteConfig::t_discharge},
        {"input_linear_range", Dim::voltage, &MoteConfig::input_linear_range},
        {"C_f", Dim::capacitance, &MoteConfig::C_f},
        {"C_load", Dim::capacitance, &MoteConfig::C_load},
        {"beta_fb", Dim::none, &MoteConfig::beta_fb},
        {"C_s", Dim::capacitance, &MoteConfig::C_s},
        {"ota_gm", Dim::conductance, &MoteConfig::ota_gm},
        {"gamma_h", Dim::none, &MoteConfig::gamma_h},
        {"max_modulation_depth", Dim::percent, &MoteConfig::max_modulation_depth},
        {"chip_noise_density", Dim::noise_density, &MoteConfig::chip_noise_density},
        {"temperature", Dim::temperature, &MoteConfig::temperature},
        {"autozero_sigma", Dim::voltage, &MoteConfig::autozero_sigma},
    };
    return f;
}

} // namespace detail

// Applies whatever keys are present. R_S may be the word "model", which
// is reported back through r_s_from_model.
inline void apply_mote_fields(MoteConfig& m, const YAML::Node& n, const std::string& path, bool* r_s_from_model = nullptr)
{
    std::set<std::string> allowed{"description", "f_chop_divider", "subcarrier_divider", "chopping", "nonlinear", "chip_noise"};
    for (const auto& f : detail::mote_fields())
        allowed.insert(f.key);
    cfg::check_keys(n, path, allowed);
    for (const auto& f : detail::mote_fields()) {
        const YAML::Node v = n[f.key];
        if (!v)
            continue;
        const std::string p = cfg::join(path, f.key);
        if (std::string(f.key) == "R_S" && v.IsScalar() && v.as<std::string>() == "model") {
            if (!r_s_from_model)
                throw ValidationError(p + ": 'model' only allowed in scenario overrides");
            *r_s_from_model = true;
            continue;
        }
        if (f.dim == Dim::percent) {
            // accept 20 % or a bare fraction
            m.*(f.member) = cfg::quantity(v, p, Dim::percent);
        } else {
            m.*(f.member) = cfg::quantity(v, p, f.dim);
        }
    }
    if (n["f_chop_divider"])
        m.f_chop_divider = static_cast<int>(cfg::integer(n["f_chop_divider"], cfg::join(path, "f_chop_divider")));
    if (n["subcarrier_divider"])
        m.subcarrier_divider = static_cast<int>(cfg::integer(n["subcarrier_divider"], cfg::join(path, "subcarrier_divider")));
    if (n["chopping"])
        m.chopping = cfg::flag(n["chopping"], cfg::join(path, "chopping"));
    if (n["nonlinear"])
        m.nonlinear = cfg::flag(n["nonlinear"], cfg::join(path, "nonlinear"));
    if (n["chip_noise"])
        m.chip_noise = cfg::flag(n["chip_noise"], cfg::join(path, "chip_noise"));
}

inline MoteConfig load_mote_preset(const std::string& name)
{
    MoteConfig m;
    m.name = name;
    apply_mote_fields(m, cfg::library_entry("motes.yaml", "motes", name), "motes." + name);
    m.validate();
    return m;
}

struct Stimulus {
    enum class Kind { Zero, Dc, Tone, File };
    Kind kind = Kind::Tone;
    double frequency = 313.0;   // Hz
    double amplitude_pp = 20e-3; // V
    double phase = 0.0;         // rad
    double offset = 0.0;        // V, added to tone, or the DC value
    std::string path;
    std::vector<double> t, v;   // file samples

    double value(double time) const
    {
        switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Dc: return offset;
        case Kind::Tone: return offset + 0.5 * amplitude_pp * std::sin(2.0 * kPi * frequency * time + phase);
        case Kind::File: {
            if (t.empty())
                return 0.0;
            if (time <= t.front())
                return v.front();
            if (time >= t.back())
                return v.back();
            const auto it = std::upper_bound(t.begin(), t.end(), time);
            const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
            const double fr = (time - t[i]) / (t[i + 1] - t[i]);
            return v[i] + fr * (v[i + 1] - v[i]);
        }
        }
        return 0.0;
    }

    bool is_tone() const { return kind == Kind::Tone; }
};

inline void load_stimulus_file(Stimulus& s, const std::filesystem::path& p)
{
    std::ifstream in(p);
    if (!in)
        throw ValidationError("stimulus file not found: " + p.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a, b;
        if (!(ls >> a >> b)) {
            if (s.t.empty())
                continue; // header
            throw ValidationError(p.string() + ":" + std::to_string(lineno) + ": expected 'time_s,volts'");
        }
        if (!s.t.empty() && !(a > s.t.back()))
            throw ValidationError(p.string() + ":" + std::to_string(lineno) + ": time must increase");
        s.t.push_back(a);
        s.v.push_back(b);
    }
    if (s.t.size() < 2)
        throw ValidationError(p.string() + ": need at least two samples");
}

struct MoteSpec {
    MoteConfig cfg;
    std::string preset = "this_work";
    int code_id = 0;
    MotePosition pos;
    Stimulus stimulus;
    bool r_s_from_model = false;
};

struct NoiseSettings {
    CarrierNoiseModel carrier;     // stream referred, input volts
    bool autozero = true;
};

struct DecodeSettings {
    CodeMode codes = CodeMode::Divider;
    Truncation truncation = Truncation::Periods;
    DemodMode demod = DemodMode::Envelope;
    int settle_cycles = 2;
    int rx_oversample = 8;
    double pilot = 5e-3; // V, calibration DC level
    bool interpolate_gaps = false;
};

struct LinkScenario {
    int schema = kSchemaVersion;
    std::string name = "scenario";
    std::uint64_t seed = 1;
    std::string piezo_name = "apc840";
    PiezoParams piezo;
    AcousticMedium medium;
    LinkGeometry geometry;
    BeamCalibration beam;
    InterrogationSchedule schedule;
    std::vector<MoteSpec> motes;
    NoiseSettings noise;
    DecodeSettings decode;
    int dm_bits = 8;
    std::string output_dir = "out";
    std::filesystem::path source;

    std::vector<double> depths() const
    {
        std::vector<double> d;
        for (const auto& m : motes)
            d.push_back(m.pos.z);
        return d;
    }

    void sync_geometry()
    {
        geometry.motes.clear();
        for (const auto& m : motes)
            geometry.motes.push_back(m.pos);
    }

    void validate() const
    {
        if (motes.empty() || motes.size() > 8)
            throw ValidationError("motes: need 1 to 8 motes");
        medium.validate();
        geometry.validate();
        std::set<int> codes;
        for (std::size_t i = 0; i < motes.size(); ++i) {
            const auto& m = motes[i];
            m.cfg.validate();
            if (!codes.insert(m.code_id).second)
                throw ValidationError("motes[" + std::to_string(i) + "].code: code_id " + std::to_string(m.code_id)
                                      + " assigned twice");
            if (m.code_id < 0)
                throw ValidationError("motes[" + std::to_string(i) + "].code: must be >= 0");
            schedule.validate(medium, depths(), m.cfg);
            if (m.stimulus.is_tone() && !(m.stimulus.frequency < 0.5 * schedule.f_sample()))
                throw ValidationError("motes[" + std::to_string(i)
                                      + "].stimulus: tone frequency must be below f_sample/2");
            if (schedule.pulse_duration - m.cfg.t_startup_total <= 0.0)
                throw ValidationError("motes[" + std::to_string(i) + "]: pulse shorter than mote startup");
        }
        if (decode.rx_oversample < 1)
            throw ValidationError("decode.rx_oversample must be >= 1");
        if (decode.demod == DemodMode::FullCarrier && decode.rx_oversample < 8)
            throw ValidationError("decode.rx_oversample must be >= 8 in full-carrier mode");
        if (!(decode.pilot > 0.0))
            throw ValidationError("decode.pilot must be > 0");
        const int max_code = *codes.rbegin();
        build_code_book(max_code + 1, schedule.f_main, motes.front().cfg.subcarrier_divider, decode.codes);
    }
};

inline LinkScenario scenario_from_yaml(const YAML::Node& doc, const std::filesystem::path& source = {})
{
    const std::string file = source.empty() ? std::string("scenario") : source.string();
    cfg::check_keys(doc, "", {"schema", "name", "seed", "piezo", "medium", "transducer", "carrier", "schedule",
                              "decode", "noise", "motes", "output", "dm_bits"});
    cfg::check_schema(doc, file);
    LinkScenario s;
    s.source = source;
    if (doc["name"])
        s.name = cfg::scalar(doc["name"], "name");
    if (doc["seed"])
        s.seed = static_cast<std::uint64_t>(cfg::integer(doc["seed"], "seed"));
    if (doc["dm_bits"])
        s.dm_bits = static_cast<int>(cfg::integer(doc["dm_bits"], "dm_bits"));
    if (doc["output"])
        s.output_dir = cfg::scalar(doc["output"], "output");

    // piezo / medium: preset name or inline mapping
    if (const auto p = doc["piezo"]; p) {
        if (p.IsScalar()) {
            s.piezo_name = p.as<std::string>();
            s.piezo = load_material(s.piezo_name);
        } else {
            s.piezo_name = "inline";
            s.piezo = piezo_from_node(p, "piezo", "inline");
        }
    } else {
        s.piezo = load_material(s.piezo_name);
    }
    if (const auto m = doc["medium"]; m) {
        s.medium = m.IsScalar() ? load_medium(m.as<std::string>()) : medium_from_node(m, "medium", "inline");
    } else {
        s.medium = load_medium("phantom");
    }

    if (const auto t = doc["transducer"]; t) {
        cfg::check_keys(t, "transducer", {"aperture", "harvest_at_focus", "depth_at_focus", "depth_decay",
                                          "lateral_margin", "margin_gain", "lateral_limit"});
        if (t["aperture"])
            s.geometry.aperture = cfg::quantity(t["aperture"], "transducer.aperture", Dim::length);
        if (t["harvest_at_focus"])
            s.beam.harvest_vpp_at_focus = cfg::quantity(t["harvest_at_focus"], "transducer.harvest_at_focus", Dim::voltage_pp);
        if (t["depth_at_focus"])
            s.beam.depth_at_focus = cfg::quantity(t["depth_at_focus"], "transducer.depth_at_focus", Dim::percent);
        if (t["depth_decay"])
            s.beam.depth_decay_per_cm = cfg::quantity(t["depth_decay"], "transducer.depth_decay", Dim::percent_per_cm);
        if (t["lateral_margin"])
            s.beam.lateral_margin = cfg::quantity(t["lateral_margin"], "transducer.lateral_margin", Dim::length);
        if (t["margin_gain"])
            s.beam.margin_gain = cfg::quantity(t["margin_gain"], "transducer.margin_gain", Dim::none);
        if (t["lateral_limit"])
            s.beam.lateral_limit = cfg::quantity(t["lateral_limit"], "transducer.lateral_limit", Dim::length);
    }

    if (const auto c = doc["carrier"]; c) {
        cfg::check_keys(c, "carrier", {"f_main", "mode"});
        if (c["f_main"])
            s.schedule.f_main = cfg::quantity(c["f_main"], "carrier.f_main", Dim::frequency);
        if (c["mode"]) {
            const auto mode = cfg::scalar(c["mode"], "carrier.mode");
            if (mode == "envelope")
                s.decode.demod = DemodMode::Envelope;
            else if (mode == "full")
                s.decode.demod = DemodMode::FullCarrier;
            else
                throw ValidationError("carrier.mode: expected envelope or full");
        }
    }

    if (const auto sc = doc["schedule"]; sc) {
        cfg::check_keys(sc, "schedule", {"pulse_duration", "pulse_period", "f_sample", "n_pulses", "depth_target"});
        if (sc["pulse_duration"])
            s.schedule.pulse_duration = cfg::quantity(sc["pulse_duration"], "schedule.pulse_duration", Dim::time);
        if (sc["pulse_period"] && sc["f_sample"])
            throw ValidationError("schedule: give pulse_period or f_sample, not both");
        if (sc["pulse_period"])
            s.schedule.pulse_period = cfg::quantity(sc["pulse_period"], "schedule.pulse_period", Dim::time);
        if (sc["f_sample"])
            s.schedule.pulse_period = 1.0 / cfg::quantity(sc["f_sample"], "schedule.f_sample", Dim::frequency);
        if (sc["n_pulses"])
            s.schedule.n_pulses = cfg::integer(sc["n_pulses"], "schedule.n_pulses");
        if (sc["depth_target"])
            s.schedule.depth_target = cfg::quantity(sc["depth_target"], "schedule.depth_target", Dim::length);
    }

    if (const auto d = doc["decode"]; d) {
        cfg::check_keys(d, "decode", {"codes", "truncation", "settle_cycles", "rx_oversample", "pilot", "interpolate_gaps"});
        if (d["codes"]) {
            const auto v = cfg::scalar(d["codes"], "decode.codes");
            if (v == "divider")
                s.decode.codes = CodeMode::Divider;
            else if (v == "walsh")
                s.decode.codes = CodeMode::Walsh;
            else
                throw ValidationError("decode.codes: expected divider or walsh");
        }
        if (d["truncation"]) {
            const auto v = cfg::scalar(d["truncation"], "decode.truncation");
            if (v == "periods")
                s.decode.truncation = Truncation::Periods;
            else if (v == "literal")
                s.decode.truncation = Truncation::Literal;
            else
                throw ValidationError("decode.truncation: expected periods or literal");
        }
        if (d["settle_cycles"])
            s.decode.settle_cycles = static_cast<int>(cfg::integer(d["settle_cycles"], "decode.settle_cycles"));
        if (d["rx_oversample"])
            s.decode.rx_oversample = static_cast<int>(cfg::integer(d["rx_oversample"], "decode.rx_oversample"));
        if (d["pilot"])
            s.decode.pilot = cfg::quantity(d["pilot"], "decode.pilot", Dim::voltage);
        if (d["interpolate_gaps"])
            s.decode.interpolate_gaps = cfg::flag(d["interpolate_gaps"], "decode.interpolate_gaps");
    }

    if (const auto nz = doc["noise"]; nz) {
        cfg::check_keys(nz, "noise", {"carrier", "carrier_white", "carrier_flicker", "flicker_corner", "autozero"});
        auto& c = s.noise.carrier;
        if (nz["carrier"]) {
            const bool on = cfg::flag(nz["carrier"], "noise.carrier");
            c.white_enabled = c.white_enabled && on;
            c.flicker_enabled = c.flicker_enabled && on;
        }
        if (nz["carrier_white"])
            c.white_density = cfg::quantity(nz["carrier_white"], "noise.carrier_white", Dim::noise_density);
        if (nz["carrier_flicker"])
            c.flicker_enabled = c.flicker_enabled && cfg::flag(nz["carrier_flicker"], "noise.carrier_flicker");
        if (nz["flicker_corner"])
            c.flicker_corner = cfg::quantity(nz["flicker_corner"], "noise.flicker_corner", Dim::frequency);
        if (nz["autozero"])
            s.noise.autozero = cfg::flag(nz["autozero"], "noise.autozero");
    }

    const auto motes = doc["motes"];
    if (!motes || !motes.IsSequence() || motes.size() == 0)
        throw ValidationError("motes: expected a non-empty list");
    const auto base_dir = source.empty() ? std::filesystem::path(".") : source.parent_path();
    for (std::size_t i = 0; i < motes.size(); ++i) {
        const std::string path = "motes[" + std::to_string(i) + "]";
        const auto mn = motes[i];
        cfg::check_keys(mn, path, {"preset", "code", "depth", "x", "y", "stimulus", "overrides"});
        MoteSpec ms;
        if (mn["preset"])
            ms.preset = cfg::scalar(mn["preset"], path + ".preset");
        ms.cfg = load_mote_preset(ms.preset);
        ms.code_id = static_cast<int>(i);
        if (mn["code"])
            ms.code_id = static_cast<int>(cfg::integer(mn["code"], path + ".code"));
        ms.pos.z = s.schedule.depth_target;
        if (mn["depth"])
            ms.pos.z = cfg::quantity(mn["depth"], path + ".depth", Dim::length);
        if (mn["x"])
            ms.pos.x = cfg::quantity(mn["x"], path + ".x", Dim::length);
        if (mn["y"])
            ms.pos.y = cfg::quantity(mn["y"], path + ".y", Dim::length);
        if (mn["overrides"])
            apply_mote_fields(ms.cfg, mn["overrides"], path + ".overrides", &ms.r_s_from_model);
        if (ms.r_s_from_model)
            ms.cfg.R_S = series_resistance(s.piezo, s.medium);
        ms.cfg.code_id = ms.code_id;
        if (const auto st = mn["stimulus"]; st) {
            const std::string sp = path + ".stimulus";
            cfg::check_keys(st, sp, {"type", "frequency", "amplitude", "phase", "offset", "value", "path"});
            const std::string type = st["type"] ? cfg::scalar(st["type"], sp + ".type") : "tone";
            if (type == "tone") {
                ms.stimulus.kind = Stimulus::Kind::Tone;
                if (st["frequency"])
                    ms.stimulus.frequency = cfg::quantity(st["frequency"], sp + ".frequency", Dim::frequency);
                if (st["amplitude"])
                    ms.stimulus.amplitude_pp = cfg::quantity(st["amplitude"], sp + ".amplitude", Dim::voltage_pp);
                if (st["phase"])
                    ms.stimulus.phase = cfg::quantity(st["phase"], sp + ".phase", Dim::none);
                if (st["offset"])
                    ms.stimulus.offset = cfg::quantity(st["offset"], sp + ".offset", Dim::voltage);
            } else if (type == "dc") {
                ms.stimulus.kind = Stimulus::Kind::Dc;
                if (st["value"])
                    ms.stimulus.offset = cfg::quantity(st["value"], sp + ".value", Dim::voltage);
            } else if (type == "zero") {
                ms.stimulus.kind = Stimulus::Kind::Zero;
            } else if (type == "file") {
                ms.stimulus.kind = Stimulus::Kind::File;
                if (!st["path"])
                    throw ValidationError(sp + ".path: missing");
                auto fp = std::filesystem::path(cfg::scalar(st["path"], sp + ".path"));
                if (fp.is_relative())
                    fp = base_dir / fp;
                ms.stimulus.path = fp.string();
                load_stimulus_file(ms.stimulus, fp);
            } else {
                throw ValidationError(sp + ".type: expected tone, dc, zero or file");
            }
        }
        s.motes.push_back(std::move(ms));
    }
    s.sync_geometry();
    s.validate();
    return s;
}

inline LinkScenario load_scenario(const std::filesystem::path& path)
{
    return scenario_from_yaml(cfg::load_file(path), path);
}

} // namespace usbsim
