#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "errors.hpp"

namespace usbsim {

// +-1 chip sequence clocked from the carrier. One entry of `chips` per chip,
// covering exactly one code period.
struct SubcarrierCode {
    int code_id = 0;
    int chip_cycles = 16;   // carrier cycles per chip (base divider / 2)
    std::vector<int> chips{1, -1};
    double f_main = 1.78e6;

    double chip_duration() const { return chip_cycles / f_main; }
    double period() const { return static_cast<double>(chips.size()) * chip_duration(); }
    double frequency() const { return 1.0 / period(); }
    // carrier cycles per period; for the square codes this is the clock divider
    int divider() const { return chip_cycles * static_cast<int>(chips.size()); }

    // t_rel measured from the start of the modulation window
    int chip_at(double t_rel) const
    {
        // the small bias keeps samples that land exactly on a chip edge on the
        // later chip despite rounding in t_rel
        const double x = std::floor(t_rel / chip_duration() + 1e-7);
        const long n = static_cast<long>(chips.size());
        long idx = static_cast<long>(x) % n;
        if (idx < 0)
            idx += n;
        return chips[static_cast<std::size_t>(idx)];
    }

    // Square wave at f_main / divider on the given chip grid.
    static SubcarrierCode square(int id, int divider, double f_main, int chip_cycles)
    {
        if (divider % (2 * chip_cycles) != 0)
            throw ValidationError("square code: divider must be a multiple of 2 chips");
        SubcarrierCode c;
        c.code_id = id;
        c.chip_cycles = chip_cycles;
        c.f_main = f_main;
        const int n = divider / chip_cycles;
        c.chips.assign(n, 1);
        for (int i = n / 2; i < n; ++i)
            c.chips[i] = -1;
        return c;
    }

    // All-ones sequence with the same period, used when chopping is off.
    SubcarrierCode unchopped() const
    {
        SubcarrierCode c = *this;
        c.chips.assign(chips.size(), 1);
        return c;
    }
};

} // namespace usbsim
