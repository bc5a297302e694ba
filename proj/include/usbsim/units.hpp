#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>
#include <string_view>
#include <unordered_map>

#include "errors.hpp"

namespace usbsim {

inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kPi = 3.14159265358979323846;

enum class Dim {
    none, length, area, time, frequency, voltage, voltage_pp, current, resistance,
    capacitance, conductance, density, permittivity, stiffness, charge_density,
    speed, impedance, attenuation, noise_density, temperature, percent, percent_per_cm
};

inline const char* dim_name(Dim d)
{
    switch (d) {
    case Dim::none: return "dimensionless";
    case Dim::length: return "length";
    case Dim::area: return "area";
    case Dim::time: return "time";
    case Dim::frequency: return "frequency";
    case Dim::voltage: return "voltage";
    case Dim::voltage_pp: return "peak-to-peak voltage";
    case Dim::current: return "current";
    case Dim::resistance: return "resistance";
    case Dim::capacitance: return "capacitance";
    case Dim::conductance: return "conductance";
    case Dim::density: return "density";
    case Dim::permittivity: return "permittivity";
    case Dim::stiffness: return "stiffness";
    case Dim::charge_density: return "stress constant";
    case Dim::speed: return "speed";
    case Dim::impedance: return "acoustic impedance";
    case Dim::attenuation: return "attenuation";
    case Dim::noise_density: return "noise density";
    case Dim::temperature: return "temperature";
    case Dim::percent: return "percent";
    case Dim::percent_per_cm: return "percent per cm";
    }
    return "?";
}

namespace detail {

struct UnitEntry {
    Dim dim;
    double scale;
};

inline const std::unordered_map<std::string, UnitEntry>& unit_table()
{
    static const std::unordered_map<std::string, UnitEntry> t = {
        {"m", {Dim::length, 1.0}}, {"cm", {Dim::length, 1e-2}}, {"mm", {Dim::length, 1e-3}},
        {"um", {Dim::length, 1e-6}}, {"in", {Dim::length, 0.0254}},
        {"m^2", {Dim::area, 1.0}}, {"mm^2", {Dim::area, 1e-6}}, {"cm^2", {Dim::area, 1e-4}},
        {"s", {Dim::time, 1.0}}, {"ms", {Dim::time, 1e-3}}, {"us", {Dim::time, 1e-6}},
        {"ns", {Dim::time, 1e-9}},
        {"Hz", {Dim::frequency, 1.0}}, {"kHz", {Dim::frequency, 1e3}},
        {"MHz", {Dim::frequency, 1e6}}, {"S/s", {Dim::frequency, 1.0}},
        {"kS/s", {Dim::frequency, 1e3}},
        {"V", {Dim::voltage, 1.0}}, {"mV", {Dim::voltage, 1e-3}}, {"uV", {Dim::voltage, 1e-6}},
        {"Vpp", {Dim::voltage_pp, 1.0}}, {"mVpp", {Dim::voltage_pp, 1e-3}},
        {"uVpp", {Dim::voltage_pp, 1e-6}},
        {"A", {Dim::current, 1.0}}, {"mA", {Dim::current, 1e-3}}, {"uA", {Dim::current, 1e-6}},
        {"Ohm", {Dim::resistance, 1.0}}, {"kOhm", {Dim::resistance, 1e3}},
        {"MOhm", {Dim::resistance, 1e6}},
        {"F", {Dim::capacitance, 1.0}}, {"nF", {Dim::capacitance, 1e-9}},
        {"pF", {Dim::capacitance, 1e-12}}, {"fF", {Dim::capacitance, 1e-15}},
        {"S", {Dim::conductance, 1.0}}, {"mS", {Dim::conductance, 1e-3}},
        {"uS", {Dim::conductance, 1e-6}},
        {"kg/m^3", {Dim::density, 1.0}},
        {"F/m", {Dim::permittivity, 1.0}}, {"nF/m", {Dim::permittivity, 1e-9}},
        {"Pa", {Dim::stiffness, 1.0}}, {"GPa", {Dim::stiffness, 1e9}},
        {"C/m^2", {Dim::charge_density, 1.0}},
        {"m/s", {Dim::speed, 1.0}},
        {"Rayl", {Dim::impedance, 1.0}}, {"MRayl", {Dim::impedance, 1e6}},
        {"dB/cm/MHz", {Dim::attenuation, 1.0}},
        {"V/rtHz", {Dim::noise_density, 1.0}}, {"uV/rtHz", {Dim::noise_density, 1e-6}},
        {"nV/rtHz", {Dim::noise_density, 1e-9}},
        {"K", {Dim::temperature, 1.0}},
        {"%", {Dim::percent, 1e-2}}, {"%/cm", {Dim::percent_per_cm, 1e-2}},
    };
    return t;
}

} // namespace detail

// "50 mm" -> 0.05. A bare number is taken as already SI. Throws
// ValidationError on unknown units or a unit of the wrong dimension.
inline double parse_quantity(std::string_view text, Dim expected, std::string_view field = {})
{
    std::string s(text);
    auto fail = [&](const std::string& why) {
        std::string where = field.empty() ? std::string() : std::string(field) + ": ";
        throw ValidationError(where + why + " ('" + s + "')");
    };
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin)
        fail("expected a number");
    std::string unit(end);
    while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.front())))
        unit.erase(unit.begin());
    while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.back())))
        unit.pop_back();
    if (!std::isfinite(v))
        fail("non-finite value");
    if (unit.empty())
        return v;
    const auto& t = detail::unit_table();
    auto it = t.find(unit);
    if (it == t.end())
        fail("unknown unit '" + unit + "'");
    if (it->second.dim != expected)
        fail(std::string("unit '") + unit + "' is not a " + dim_name(expected));
    return v * it->second.scale;
}

inline bool parse_switch(std::string_view text, std::string_view field = {})
{
    std::string s(text);
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "on" || s == "true" || s == "yes" || s == "1")
        return true;
    if (s == "off" || s == "false" || s == "no" || s == "0")
        return false;
    throw ValidationError(std::string(field) + ": expected on/off, got '" + std::string(text) + "'");
}

} // namespace usbsim
