/**
 * @file piezo.hpp
 * @brief Lossless thickness-mode piezo as a three-port (two acoustic faces,
 * one electrical terminal), reflection coefficient and series resistance.
 */
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "medium.hpp"
#include "units.hpp"

namespace usbsim {

using cplx = std::complex<double>;

struct PiezoMaterialGeometry {
    double rho = 0.0;   // kg/m^3
    double eps33 = 0.0; // F/m (clamped)
    double c33E = 0.0;  // Pa
    double e33 = 0.0;   // C/m^2
    double l = 0.0;     // thickness, m
    double A = 0.0;     // face area, m^2
};

struct PiezoParams : PiezoMaterialGeometry {
    std::string name;
    double c33D = 0.0;   // Pa
    double h33 = 0.0;    // V/m
    double k = 0.0;
    double kt = 0.0;
    double va = 0.0;     // m/s
    double va_bar = 0.0; // m/s, stiffened
    double C0 = 0.0;     // F
    double Z0 = 0.0;     // Pa*s/m
    double fp = 0.0;     // Hz
    double fs = 0.0;     // Hz, closed-form approximation
    std::vector<std::string> warnings;
};

inline PiezoParams derive_params(const PiezoMaterialGeometry& raw, std::string name = {})
{
    auto need_positive = [](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ValidationError(std::string("piezo: ") + field + " must be > 0");
    };
    need_positive(raw.rho, "rho");
    need_positive(raw.eps33, "eps33");
    need_positive(raw.c33E, "c33E");
    need_positive(raw.l, "thickness");
    need_positive(raw.A, "area");
    // e33 = 0 is the decoupled limit and is allowed
    if (!(raw.e33 >= 0.0) || !std::isfinite(raw.e33))
        throw ValidationError("piezo: e33 must be >= 0");

    PiezoParams p;
    static_cast<PiezoMaterialGeometry&>(p) = raw;
    p.name = std::move(name);
    p.k = raw.e33 / std::sqrt(raw.eps33 * raw.c33E);
    if (!(p.k < 1.0))
        throw ValidationError("piezo: coupling k = " + std::to_string(p.k) + " is not < 1");
    const double k2 = p.k * p.k;
    p.kt = std::sqrt(k2 / (1.0 + k2));
    p.h33 = raw.e33 / raw.eps33;
    p.c33D = raw.c33E * (1.0 + k2);
    p.va = std::sqrt(raw.c33E / raw.rho);
    p.va_bar = std::sqrt(p.c33D / raw.rho);
    p.C0 = raw.A * raw.eps33 / raw.l;
    p.Z0 = raw.rho * p.va_bar;
    p.fp = p.va_bar / (2.0 * raw.l);
    p.fs = p.fp / std::sqrt(1.0 + 8.0 * k2 / (kPi * kPi));

    auto cube_check = [&](double v, const char* what) {
        if (v < 0.1e-3 || v > 5e-3)
            p.warnings.push_back(std::string(what) + " outside the 0.1-5 mm cube-scale range");
    };
    cube_check(raw.l, "thickness");
    cube_check(std::sqrt(raw.A), "face side");
    return p;
}

struct ThreePortMatrix {
    cplx m, n, p, r;
    double f = 0.0;
    double beta_l = 0.0;

    // Full symmetric 3x3 (ports 1,2 acoustic; 3 electrical), zero-based.
    cplx at(int i, int j) const
    {
        static constexpr int kind[3][3] = {{0, 1, 2}, {1, 0, 2}, {2, 2, 3}};
        switch (kind[i][j]) {
        case 0: return m;
        case 1: return n;
        case 2: return p;
        default: return r;
        }
    }
};

inline constexpr double kSingularTol = 1e-9;

inline ThreePortMatrix three_port_matrix(const PiezoParams& pp, double f)
{
    if (!(f > 0.0) || !std::isfinite(f))
        throw ValidationError("three_port_matrix: f must be > 0");
    const cplx j(0.0, 1.0);
    const double w = 2.0 * kPi * f;
    const double bl = w * pp.l / pp.va_bar;
    const double s = std::sin(bl), c = std::cos(bl);
    if (std::abs(s) < kSingularTol)
        throw SingularityError("three_port_matrix: m and n singular, |sin(beta*l)| = "
                                   + std::to_string(std::abs(s)) + " at f = " + std::to_string(f),
                               std::abs(s));
    const double z0a = pp.Z0 * pp.A;
    ThreePortMatrix M;
    M.f = f;
    M.beta_l = bl;
    // tan -> infinity at beta*l = pi/2: m is exactly zero there
    M.m = std::abs(c) < kSingularTol ? cplx(0.0, 0.0) : z0a * c / (j * s);
    M.n = z0a / (j * s);
    M.p = pp.h33 / (j * w);
    M.r = 1.0 / (j * w * pp.C0);
    return M;
}

inline bool is_open(cplx z) { return std::isinf(z.real()) || std::isinf(z.imag()); }

// Impedance looking into acoustic port 1 with port 2 on Z_B and the
// electrical port on Z_E. Z_B here is the lumped (area-scaled) value.
// Pass Z_E = infinity for an open electrical port.
inline cplx acoustic_input_impedance_Z1(const ThreePortMatrix& M, cplx Z_B, cplx Z_E)
{
    const cplx m = M.m, n = M.n, p = M.p, r = M.r;
    if (is_open(Z_E)) {
        if (std::abs(m + Z_B) == 0.0)
            throw SingularityError("Z1: m + Z_B = 0", 0.0);
        return (m * m - n * n + m * Z_B) / (m + Z_B);
    }
    const cplx den = (Z_E + r) * (m + Z_B) - p * p;
    const double scale = std::abs(Z_E + r) * std::abs(m + Z_B) + std::norm(p);
    if (std::abs(den) <= 1e-12 * scale)
        throw SingularityError("Z1: denominator (Z_E + r)(m + Z_B) - p^2 vanishes, |den| = "
                                   + std::to_string(std::abs(den)),
                               std::abs(den));
    return (p * p * (2.0 * n - 2.0 * m - Z_B) + (Z_E + r) * (m * m - n * n + m * Z_B)) / den;
}

inline cplx reflection_from_impedance(cplx Z1, cplx Z_B) { return (Z1 - Z_B) / (Z1 + Z_B); }

inline double lumped_load(const PiezoParams& pp, const AcousticMedium& med) { return med.Z_B * pp.A; }

inline cplx reflection_exact(const PiezoParams& pp, double f, const AcousticMedium& med, cplx Z_E)
{
    const ThreePortMatrix M = three_port_matrix(pp, f);
    const cplx zb = lumped_load(pp, med);
    return reflection_from_impedance(acoustic_input_impedance_Z1(M, zb, Z_E), zb);
}

// Electrical impedance with both faces on Z_B (lumped). Z_B = 0 gives the
// unloaded Z3,NL.
inline cplx electrical_impedance_Z3(const ThreePortMatrix& M, cplx Z_B)
{
    const cplx den = M.m + M.n + Z_B;
    if (std::abs(den) <= 1e-15 * (std::abs(M.m) + std::abs(M.n) + std::abs(Z_B)))
        throw SingularityError("Z3: m + n + Z_B = 0", std::abs(den));
    return M.r - 2.0 * M.p * M.p / den;
}

// Series resonance: the unloaded Z3,NL crosses zero. For the lossless model
// Z3,NL is purely imaginary, so the root is taken on its imaginary part.
// Bisection on [0.7 fp, fp), run until the bracket stops shrinking.
inline double series_resonance(const PiezoParams& pp)
{
    if (pp.k == 0.0)
        return pp.fp;
    // Im{Z3,NL} with m + n written as -j Z0 A cot(beta*l/2), which stays
    // finite all the way up to fp
    auto g = [&](double f) {
        const double w = 2.0 * kPi * f;
        const double bl = w * pp.l / pp.va_bar;
        return -1.0 / (w * pp.C0) + 2.0 * pp.h33 * pp.h33 * std::tan(0.5 * bl) / (w * w * pp.Z0 * pp.A);
    };
    double lo = 0.7 * pp.fp, hi = pp.fp * (1.0 - 1e-13);
    double glo = g(lo), ghi = g(hi);
    if (!(glo * ghi < 0.0))
        throw RootSolveError("series_resonance: Im{Z3,NL} does not change sign on [0.7 fp, fp)");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        const double gm = g(mid);
        if (gm == 0.0)
            return mid;
        if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    const double root = 0.5 * (lo + hi);
    if (std::abs(root - pp.fs) > 0.01 * pp.fs)
        throw RootSolveError("series_resonance: root " + std::to_string(root)
                             + " Hz disagrees with closed form " + std::to_string(pp.fs) + " Hz by > 1%");
    return root;
}

struct SeriesResistance {
    double value = 0.0;        // ohm, 2 Z_B |p|^2 / |m+n|^2
    double mr_form = 0.0;      // ohm, 2 Z_B (mr - p^2)/(m^2 - n^2)
    double re_z3 = 0.0;        // ohm, exact Re{Z3} with the load
    double f = 0.0;            // Hz
};

inline SeriesResistance series_resistance_detail(const PiezoParams& pp, const AcousticMedium& med)
{
    const double f = series_resonance(pp);
    const ThreePortMatrix M = three_port_matrix(pp, f);
    const double zb = lumped_load(pp, med);
    SeriesResistance out;
    out.f = f;
    // |m + n| = Z0 A |cot(beta*l/2)|; the m/n sum cancels badly near fp
    const double mn2 = std::pow(pp.Z0 * pp.A / std::tan(0.5 * M.beta_l), 2);
    out.value = mn2 == 0.0 ? 0.0 : 2.0 * zb * std::norm(M.p) / mn2;
    out.mr_form = (2.0 * zb * (M.m * M.r - M.p * M.p) / (M.m * M.m - M.n * M.n)).real();
    out.re_z3 = electrical_impedance_Z3(M, zb).real();
    return out;
}

inline double series_resistance(const PiezoParams& pp, const AcousticMedium& med)
{
    return series_resistance_detail(pp, med).value;
}

inline cplx reflection_linear(cplx Z_E, double R_S)
{
    if (!(R_S > 0.0))
        throw ValidationError("reflection_linear: R_S must be > 0");
    if (is_open(Z_E))
        return 1.0;
    return Z_E / (Z_E + R_S);
}

struct GammaCurvePoint {
    double R_E = 0.0;
    double exact = 0.0;  // |Gamma(R_E)| / |Gamma(open)|
    double linear = 0.0; // R_E / (R_E + R_S)
};

// Resistive-load sweep at the series resonance, both models normalized to
// their open-circuit value. n + 1 evenly spaced points on [0, R_max].
inline std::vector<GammaCurvePoint> normalized_gamma_curve(const PiezoParams& pp, const AcousticMedium& med,
                                                           double R_max, int n = 200)
{
    if (!(R_max > 0.0) || n < 1)
        throw ValidationError("normalized_gamma_curve: need R_max > 0 and n >= 1");
    const double f = series_resonance(pp);
    const double R_S = series_resistance(pp, med);
    const double open = std::abs(reflection_exact(pp, f, med, cplx(std::numeric_limits<double>::infinity(), 0.0)));
    std::vector<GammaCurvePoint> out;
    for (int i = 0; i <= n; ++i) {
        GammaCurvePoint p;
        p.R_E = R_max * i / n;
        p.exact = std::abs(reflection_exact(pp, f, med, p.R_E)) / open;
        p.linear = reflection_linear(p.R_E, R_S).real();
        out.push_back(p);
    }
    return out;
}

struct IdentityResult {
    std::string name;
    cplx lhs, rhs;
    double residual = 0.0; // |lhs - rhs| / max(|rhs|, 1e-300)
};

struct IdentityReport {
    double f = 0.0;
    double beta_l = 0.0;
    std::vector<IdentityResult> items;
    bool pass = false;
};

// Resonance identities at the series resonance (or at f when given).
// These are the sign-corrected forms; see README.
inline IdentityReport verify_resonance_identities(const PiezoParams& pp, std::optional<double> f_eval = {})
{
    IdentityReport rep;
    rep.f = f_eval ? *f_eval : series_resonance(pp);
    const ThreePortMatrix M = three_port_matrix(pp, rep.f);
    rep.beta_l = M.beta_l;
    const double bl = M.beta_l, half = 0.5 * bl;
    const double kt2 = pp.kt * pp.kt;
    const cplx m = M.m, n = M.n, p = M.p, r = M.r;
    auto add = [&](std::string name, cplx lhs, cplx rhs) {
        double den = std::max(std::abs(rhs), 1e-300);
        rep.items.push_back({std::move(name), lhs, rhs, std::abs(lhs - rhs) / den});
    };
    const double cot_half = std::cos(half) / std::sin(half);
    add("(m+n)/(m-n) = -cot^2(bl/2)", (m + n) / (m - n), -cot_half * cot_half);
    const cplx one_minus = 1.0 - m * r / (p * p);
    add("1 - mr/p^2 = 1 - bl/(kt^2 tan bl)", one_minus, 1.0 - bl / (kt2 * std::tan(bl)));
    add("1 - mr/p^2 = tan^2(bl/2)", one_minus, std::tan(half) * std::tan(half));
    add("tan(bl/2)/(bl/2) = 1/kt^2", std::tan(half) / half, 1.0 / kt2);
    // unit load: both closed forms scale linearly with Z_B
    const cplx rs_a = 2.0 * std::norm(p) / std::norm(m + n);
    const cplx rs_b = 2.0 * (m * r - p * p) / (m * m - n * n);
    add("2|p|^2/|m+n|^2 = 2(mr-p^2)/(m^2-n^2)", rs_a, rs_b);
    rep.pass = true;
    for (const auto& it : rep.items)
        if (!(it.residual < 1e-6))
            rep.pass = false;
    return rep;
}

} // namespace usbsim
