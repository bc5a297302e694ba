#pragma once

#include <string>

#include "errors.hpp"

namespace usbsim {

struct AcousticMedium {
    std::string name = "phantom";
    double c = 1515.0;        // m/s
    double alpha = 0.25;      // dB/(cm*MHz), amplitude
    double Z_B = 1.56e6;      // specific acoustic impedance, Pa*s/m (scaled by face area where used)

    void validate() const
    {
        if (!(c > 0.0))
            throw ValidationError("medium " + name + ": c must be > 0");
        if (!(alpha >= 0.0))
            throw ValidationError("medium " + name + ": alpha must be >= 0");
        if (!(Z_B > 0.0))
            throw ValidationError("medium " + name + ": Z_B must be > 0");
    }
};

} // namespace usbsim
