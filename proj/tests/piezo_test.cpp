#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "usbsim/piezo.hpp"
#include "usbsim/scenario.hpp"

using namespace usbsim;

namespace {

// Goldens from tests/oracles/piezo_oracle.py (mpmath, 50 digits).
constexpr double kTolGolden = 1e-9;

PiezoMaterialGeometry table1_raw()
{
    return {7600.0, 16.8e-9, 50e9, 20.0, 0.75e-3, 0.56e-6};
}

PiezoMaterialGeometry pzt4_raw()
{
    return {7500.0, 5.62e-9, 115e9, 15.1, 0.75e-3, 0.5625e-6};
}

AcousticMedium water()
{
    AcousticMedium m;
    m.name = "water";
    m.c = 1482.0;
    m.alpha = 0.0022;
    m.Z_B = 1.48e6;
    return m;
}

void expect_rel(double got, double want, double tol, const char* what)
{
    EXPECT_NEAR(got, want, tol * std::abs(want)) << what;
}

void expect_crel(cplx got, cplx want, double tol, const char* what)
{
    EXPECT_LE(std::abs(got - want), tol * std::abs(want)) << what << ": got " << got << " want " << want;
}

} // namespace

TEST(DeriveParams, Table1Goldens)
{
    const auto p = derive_params(table1_raw(), "table1");
    expect_rel(p.k, 0.69006555934235422, kTolGolden, "k");
    expect_rel(p.kt, 0.56796183424706481, kTolGolden, "kt");
    expect_rel(p.h33, 1190476190.4761905, kTolGolden, "h33");
    expect_rel(p.c33D, 73809523809.52381, kTolGolden, "c33D");
    expect_rel(p.va, 2564.9458802128852, kTolGolden, "va");
    expect_rel(p.va_bar, 3116.3728032155514, kTolGolden, "va_bar");
    expect_rel(p.C0, 1.2544e-11, kTolGolden, "C0");
    expect_rel(p.Z0, 23684433.304438191, kTolGolden, "Z0");
    expect_rel(p.fp, 2077581.8688103676, kTolGolden, "fp");
    expect_rel(p.fs, 1764732.1963421871, kTolGolden, "fs closed form");
}

TEST(DeriveParams, Table1PaperValues)
{
    const auto p = derive_params(table1_raw());
    EXPECT_NEAR(p.fp, 2.07e6, 0.01e6);
    EXPECT_NEAR(p.fs, 1.76e6, 0.01e6);
    EXPECT_NEAR(p.C0, 12.6e-12, 0.1e-12);
    EXPECT_NEAR(p.Z0, 23e6, 1e6);
    EXPECT_NEAR(p.k, 0.69, 0.005);
}

TEST(DeriveParams, FormulasToMachinePrecision)
{
    const auto raw = table1_raw();
    const auto p = derive_params(raw);
    const double k = raw.e33 / std::sqrt(raw.eps33 * raw.c33E);
    expect_rel(p.k, k, 1e-12, "k");
    expect_rel(p.kt, std::sqrt(k * k / (1 + k * k)), 1e-12, "kt");
    expect_rel(p.C0, raw.A * raw.eps33 / raw.l, 1e-12, "C0");
    expect_rel(p.c33D, raw.c33E * (1 + k * k), 1e-12, "c33D");
    expect_rel(p.h33, raw.e33 / raw.eps33, 1e-12, "h33");
    expect_rel(p.va_bar, std::sqrt(p.c33D / raw.rho), 1e-12, "va_bar");
    expect_rel(p.Z0, raw.rho * p.va_bar, 1e-12, "Z0");
    expect_rel(p.fp, p.va_bar / (2 * raw.l), 1e-12, "fp");
    EXPECT_LT(p.fs, p.fp);
    EXPECT_GT(p.k, 0.0);
    EXPECT_LT(p.k, 1.0);
}

TEST(DeriveParams, Idempotent)
{
    const auto a = derive_params(table1_raw());
    const auto b = derive_params(static_cast<const PiezoMaterialGeometry&>(a));
    EXPECT_EQ(a.fp, b.fp);
    EXPECT_EQ(a.C0, b.C0);
    EXPECT_EQ(a.kt, b.kt);
    EXPECT_EQ(a.fs, b.fs);
}

TEST(DeriveParams, ZeroCoupling)
{
    auto raw = table1_raw();
    raw.e33 = 0.0;
    const auto p = derive_params(raw);
    EXPECT_EQ(p.k, 0.0);
    EXPECT_EQ(p.kt, 0.0);
    EXPECT_EQ(p.va_bar, p.va);
    EXPECT_EQ(p.fs, p.fp);
    EXPECT_EQ(series_resonance(p), p.fp);
}

TEST(DeriveParams, DoublingThickness)
{
    auto raw = table1_raw();
    const auto a = derive_params(raw);
    raw.l *= 2;
    const auto b = derive_params(raw);
    expect_rel(b.fp, a.fp / 2, 1e-12, "fp");
    expect_rel(b.C0, a.C0 / 2, 1e-12, "C0");
    EXPECT_EQ(a.k, b.k);
    EXPECT_EQ(a.c33D, b.c33D);
    EXPECT_EQ(a.Z0, b.Z0);
}

TEST(DeriveParams, RejectsNonPositive)
{
    const char* names[] = {"rho", "eps33", "c33E", "thickness", "area"};
    for (int i = 0; i < 5; ++i) {
        auto raw = table1_raw();
        double* f[] = {&raw.rho, &raw.eps33, &raw.c33E, &raw.l, &raw.A};
        *f[i] = 0.0;
        try {
            derive_params(raw);
            FAIL() << names[i];
        } catch (const ValidationError& e) {
            EXPECT_NE(std::string(e.what()).find(names[i]), std::string::npos) << e.what();
        }
    }
    auto raw = table1_raw();
    raw.e33 = -1.0;
    EXPECT_THROW(derive_params(raw), ValidationError);
}

TEST(DeriveParams, CubeScaleWarning)
{
    auto raw = table1_raw();
    EXPECT_TRUE(derive_params(raw).warnings.empty());
    raw.l = 8e-3;
    EXPECT_FALSE(derive_params(raw).warnings.empty());
}

TEST(ThreePort, GoldensAtSeriesResonance)
{
    const auto p = derive_params(table1_raw());
    const double fs = series_resonance(p);
    expect_rel(fs, 1763647.9218359118, 1e-12, "fs root");
    const auto M = three_port_matrix(p, fs);
    expect_rel(M.beta_l, 2.6668808762425397, 1e-12, "beta_l");
    expect_crel(M.m, cplx(0, 25.808685532319541), kTolGolden, "m");
    expect_crel(M.n, cplx(0, -29.017286495687819), kTolGolden, "n");
    expect_crel(M.p, cplx(0, -107.43083582706287), kTolGolden, "p");
    expect_crel(M.r, cplx(0, -7194.0291848479601), kTolGolden, "r");
}

TEST(ThreePort, PurelyImaginaryAndSymmetric)
{
    const auto p = derive_params(table1_raw());
    for (double f : {0.3e6, 1.2e6, 1.76e6, 2.5e6}) {
        const auto M = three_port_matrix(p, f);
        EXPECT_EQ(M.m.real(), 0.0);
        EXPECT_EQ(M.n.real(), 0.0);
        EXPECT_EQ(M.p.real(), 0.0);
        EXPECT_EQ(M.r.real(), 0.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                EXPECT_EQ(M.at(i, j), M.at(j, i));
        EXPECT_EQ(M.at(0, 1), M.at(1, 0));
        EXPECT_EQ(M.at(0, 2), M.at(1, 2));
    }
}

TEST(ThreePort, QuarterWaveMIsZero)
{
    const auto p = derive_params(table1_raw());
    const double f = p.va_bar / (4 * p.l);
    const auto M = three_port_matrix(p, f);
    EXPECT_EQ(M.m, cplx(0.0, 0.0));
    EXPECT_TRUE(std::isfinite(std::abs(M.n)));
}

TEST(ThreePort, SinSingularityThrows)
{
    const auto p = derive_params(table1_raw());
    try {
        three_port_matrix(p, p.fp); // beta*l = pi
        FAIL();
    } catch (const SingularityError& e) {
        EXPECT_LT(e.residual, kSingularTol);
        EXPECT_NE(std::string(e.what()).find("sin"), std::string::npos);
    }
    EXPECT_THROW(three_port_matrix(p, 0.0), ValidationError);
}

TEST(ThreePort, MSquaredMinusNSquared)
{
    // m^2 - n^2 = (Z0 A)^2 for every non-singular f
    const auto p = derive_params(table1_raw());
    const double z0a2 = std::pow(p.Z0 * p.A, 2);
    std::uint64_t s = 12345;
    for (int i = 0; i < 100; ++i) {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        const double u = static_cast<double>(s >> 11) / 9007199254740992.0;
        const double f = 0.05 * p.fp + u * 1.9 * p.fp;
        if (std::abs(std::sin(2 * kPi * f * p.l / p.va_bar)) < 1e-3)
            continue;
        const auto M = three_port_matrix(p, f);
        expect_crel(M.m * M.m - M.n * M.n, cplx(z0a2, 0.0), 1e-9, "m^2-n^2");
    }
}

TEST(Z1, GoldenAtFourKilohm)
{
    const auto p = derive_params(table1_raw());
    const auto M = three_port_matrix(p, series_resonance(p));
    const double zb = lumped_load(p, water());
    expect_crel(acoustic_input_impedance_Z1(M, zb, 4000.0), cplx(3.6680322347235053, -1.3526346412788739), kTolGolden,
                "Z1");
    expect_crel(reflection_exact(p, M.f, water(), 4000.0), cplx(0.66196960051522743, -0.10167860491165363), kTolGolden,
                "Gamma(4k)");
    const cplx inf(std::numeric_limits<double>::infinity(), 0.0);
    expect_crel(reflection_exact(p, M.f, water(), inf), cplx(0.93722303424581322, -0.22703562150482924), kTolGolden,
                "Gamma(inf)");
}

TEST(Z1, DecoupledAndOpenPortAgree)
{
    auto raw = table1_raw();
    const auto p = derive_params(raw);
    const double f = 1.5e6;
    const double zb = lumped_load(p, water());
    const auto M = three_port_matrix(p, f);
    const cplx inf(std::numeric_limits<double>::infinity(), 0.0);
    const cplx open = acoustic_input_impedance_Z1(M, zb, inf);
    const cplx want = (M.m * M.m - M.n * M.n + M.m * zb) / (M.m + zb);
    expect_crel(open, want, 1e-14, "open");
    // huge but finite Z_E converges to the open value
    expect_crel(acoustic_input_impedance_Z1(M, zb, 1e15), open, 1e-9, "Z_E -> inf");
    // h33 = 0 decouples the electrical port
    auto M0 = M;
    M0.p = 0.0;
    expect_crel(acoustic_input_impedance_Z1(M0, zb, 4000.0), want, 1e-14, "p = 0");
}

TEST(Z1, SingularDenominator)
{
    ThreePortMatrix M;
    M.m = cplx(0, 1);
    M.n = cplx(0, 2);
    M.p = cplx(0, 1);
    M.r = cplx(0, -1);
    // Z_B = 0: (Z_E - j) j + 1 = 0 at Z_E = 2j
    try {
        acoustic_input_impedance_Z1(M, 0.0, cplx(0, 2));
        FAIL();
    } catch (const SingularityError& e) {
        EXPECT_LT(e.residual, 1e-9);
    }
}

TEST(Reflection, MatchedIsZero)
{
    EXPECT_EQ(reflection_from_impedance(50.0, 50.0), cplx(0.0, 0.0));
}

TEST(Reflection, ShortCircuitNormalizedResidual)
{
    // The lossless exact model does not reach the linear model's 0 at
    // Z_E = 0; the residual scales with the load.
    const auto p = derive_params(table1_raw());
    const double fs = series_resonance(p);
    const auto M = three_port_matrix(p, fs);
    const cplx inf(std::numeric_limits<double>::infinity(), 0.0);
    auto norm0 = [&](double zb_specific) {
        const double zb = zb_specific * p.A;
        const cplx g0 = reflection_from_impedance(acoustic_input_impedance_Z1(M, zb, 0.0), zb);
        const cplx gi = reflection_from_impedance(acoustic_input_impedance_Z1(M, zb, inf), zb);
        return g0 / gi;
    };
    expect_crel(norm0(1.48e6), cplx(-0.003920094915, 0.01517618282), 1e-8, "Gamma(0)/Gamma(inf)");
    EXPECT_LT(std::abs(norm0(1.48e6)), 2e-2);
    EXPECT_LT(std::abs(norm0(1.48e6 / 20)), 1e-3);
    EXPECT_NEAR(std::abs(norm0(1.48e6 / 20)) * 20, std::abs(norm0(1.48e6)), 0.05 * std::abs(norm0(1.48e6)));
    // fifty points near the short: linear model is Z/(Z+R_S)
    const double rs = series_resistance(p, water());
    for (int i = 0; i < 50; ++i) {
        const double re = rs * 1e-3 * i / 49.0;
        const double gn = std::abs(reflection_exact(p, fs, water(), re)) / std::abs(reflection_exact(p, fs, water(), inf));
        EXPECT_LT(std::abs(gn - reflection_linear(re, rs).real()), 2e-2);
    }
}

TEST(Z3, LoadedAndUnloaded)
{
    const auto p = derive_params(table1_raw());
    const double fs = series_resonance(p);
    const auto M = three_port_matrix(p, fs);
    const cplx z3nl = electrical_impedance_Z3(M, 0.0);
    EXPECT_LT(std::abs(z3nl), 1e-6 * std::abs(M.r));
    const double zb = lumped_load(p, water());
    expect_rel(electrical_impedance_Z3(M, zb).real(), 1742.0276262921755, kTolGolden, "Re Z3");
    const auto rs = series_resistance_detail(p, water());
    EXPECT_NEAR(rs.re_z3, rs.value, 0.1 * rs.value);
}

TEST(Z3, LowFrequencyLimit)
{
    const auto p = derive_params(table1_raw());
    const double fs = series_resonance(p);
    const auto M = three_port_matrix(p, fs / 100);
    const cplx z3 = electrical_impedance_Z3(M, lumped_load(p, water()));
    expect_crel(z3, cplx(193.39000351303293, -487323.86684484731), 1e-9, "Z3(fs/100)");
    expect_crel(M.r, cplx(0, -719402.91848479601), 1e-12, "r(fs/100)");
    // capacitive: clamped C0 raised by the coupling
    const cplx free = (1 - p.kt * p.kt) * M.r;
    EXPECT_LT(std::abs(z3 - free), 0.05 * std::abs(free));
}

TEST(Z3, SingularDenominator)
{
    ThreePortMatrix M;
    M.m = cplx(0, 1);
    M.n = cplx(0, -1);
    M.p = cplx(0, 1);
    M.r = cplx(0, -1);
    EXPECT_THROW(electrical_impedance_Z3(M, 0.0), SingularityError);
}

TEST(SeriesResistance, Table1Goldens)
{
    const auto p = derive_params(table1_raw());
    const auto r = series_resistance_detail(p, water());
    expect_rel(r.value, 1858.2589285714286, kTolGolden, "R_S");
    expect_rel(r.mr_form, r.value, 1e-9, "closed forms agree");
    EXPECT_GT(r.value, 0.0);
}

TEST(SeriesResistance, Pzt4Goldens)
{
    const auto p = derive_params(pzt4_raw());
    expect_rel(series_resonance(p), 2676438.296407818, 1e-12, "fs");
    const auto r = series_resistance_detail(p, water());
    expect_rel(r.value, 3245.471689838165, kTolGolden, "R_S");
    expect_rel(r.re_z3, 3082.3516925660086, kTolGolden, "Re Z3");
}

TEST(SeriesResistance, PaperCubesWithinThirtyPercent)
{
    const auto p854 = load_material("apc854");
    const auto p840 = load_material("apc840");
    const auto w = load_medium("water");
    EXPECT_NEAR(series_resistance(p854, w), 1.5e3, 0.3 * 1.5e3);
    EXPECT_NEAR(series_resistance(p840, w), 4e3, 0.3 * 4e3);
}

TEST(SeriesResistance, LinearInLoad)
{
    const auto p = derive_params(table1_raw());
    auto w = water();
    const double r1 = series_resistance(p, w);
    w.Z_B *= 2;
    expect_rel(series_resistance(p, w), 2 * r1, 1e-12, "x2");
    double prev = 0.0;
    for (int i = 1; i <= 10; ++i) {
        w.Z_B = 0.3e6 * i;
        const double r = series_resistance(p, w);
        EXPECT_GT(r, prev);
        prev = r;
    }
}

TEST(ReflectionLinear, Basics)
{
    EXPECT_EQ(reflection_linear(0.0, 4000.0), cplx(0.0, 0.0));
    EXPECT_EQ(reflection_linear(4000.0, 4000.0), cplx(0.5, 0.0));
    EXPECT_EQ(reflection_linear(cplx(std::numeric_limits<double>::infinity(), 0), 4000.0), cplx(1.0, 0.0));
    EXPECT_NEAR(reflection_linear(1e12, 4000.0).real(), 1.0, 1e-8);
    EXPECT_THROW(reflection_linear(1.0, 0.0), ValidationError);
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double g = reflection_linear(100.0 * i, 4000.0).real();
        EXPECT_GT(g, prev);
        EXPECT_GE(g, 0.0);
        EXPECT_LT(g, 1.0);
        prev = g;
    }
}

TEST(Identities, PassAtResonance)
{
    const auto rep = verify_resonance_identities(derive_params(table1_raw()));
    EXPECT_TRUE(rep.pass);
    ASSERT_EQ(rep.items.size(), 5u);
    for (const auto& it : rep.items)
        EXPECT_LT(it.residual, 1e-6) << it.name;
}

TEST(Identities, FailOffResonance)
{
    const auto p = derive_params(table1_raw());
    const auto rep = verify_resonance_identities(p, 0.9 * series_resonance(p));
    EXPECT_FALSE(rep.pass);
    double worst = 0;
    for (const auto& it : rep.items)
        worst = std::max(worst, it.residual);
    EXPECT_GT(worst, 1e-3);
}

TEST(Identities, WeakCouplingLimit)
{
    // The two closed forms assume Z_B << |m + n|, which fails as k -> 0
    // because m + n vanishes at fp. They grow as 1/k^2; the exact loaded
    // Re{Z3} goes to zero as k^2 (oracle: 0.029627023 ohm at e33 x 1e-3).
    auto raw = table1_raw();
    raw.e33 *= 1e-3;
    const auto r = series_resistance_detail(derive_params(raw), water());
    const auto full = series_resistance_detail(derive_params(table1_raw()), water());
    expect_rel(r.value * 1e-6, full.value, 1e-6, "|p|^2 form ~ 1/k^2");
    expect_rel(r.mr_form, r.value, 1e-3, "mr form");
    EXPECT_NEAR(r.re_z3, 0.029627023, 1e-6);
    EXPECT_LT(r.re_z3, 1e-4 * full.re_z3);
}

TEST(SeriesResonance, AgreesWithClosedForm)
{
    const auto p = derive_params(table1_raw());
    const double fs = series_resonance(p);
    EXPECT_NEAR(fs, p.fs, 0.01 * p.fs);
    EXPECT_GT(fs, 0.7 * p.fp);
    EXPECT_LT(fs, p.fp);
}
