// usbsim: command-line front end for scenario files.
//   usbsim validate --scenario FILE
//   usbsim run      --scenario FILE [--seed N] [--out DIR]
//   usbsim sweep    --scenario FILE --axis AXIS --grid a:b:step [--jobs N] [--out DIR]
//   usbsim budget   --scenario FILE
//   usbsim codebook [--scenario FILE | --motes N --mode divider|walsh]
// Exit codes: 0 ok, 2 validation, 3 runtime.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "usbsim/usbsim.hpp"

namespace {

int fail(int code, const std::string& what)
{
    std::cerr << "usbsim: " << what << "\n";
    return code;
}

void print_codebook(const usbsim::CodeBook& b, std::ostream& o)
{
    o << "code_id,divider,frequency_hz,chip_us,chips\n";
    for (const auto& c : b.codes) {
        o << c.code_id << "," << c.divider() << "," << c.frequency() << "," << c.chip_duration() * 1e6 << ",";
        for (int x : c.chips)
            o << (x > 0 ? '+' : '-');
        o << "\n";
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ultrasonic backscatter link simulator"};
    app.require_subcommand(1);
    std::string scenario_path, out_dir, axis, grid, format = "csv", mode = "divider";
    std::optional<std::uint64_t> seed;
    unsigned jobs = 0;
    int n_motes = 2;

    auto add_common = [&](CLI::App* c, bool needs_scenario) {
        auto* o = c->add_option("--scenario", scenario_path, "scenario file");
        if (needs_scenario)
            o->required();
        c->add_option("--seed", seed, "override the scenario seed");
        c->add_option("--format", format, "output format")->check(CLI::IsMember({"csv"}));
    };
    auto* v_validate = app.add_subcommand("validate", "load and check a scenario");
    add_common(v_validate, true);
    auto* v_run = app.add_subcommand("run", "simulate a scenario");
    add_common(v_run, true);
    v_run->add_option("--out", out_dir, "output directory (default: scenario output key)");
    auto* v_sweep = app.add_subcommand("sweep", "run one scenario per grid point");
    add_common(v_sweep, true);
    v_sweep->add_option("--axis", axis, "depth | lateral_x | lateral_y | mote_dz | input_amplitude")->required();
    v_sweep->add_option("--grid", grid, "a:b:step (mm, or mVpp for input_amplitude)")->required();
    v_sweep->add_option("--jobs", jobs, "worker threads (default: cores)");
    v_sweep->add_option("--out", out_dir, "write sweep.csv here instead of stdout");
    auto* v_budget = app.add_subcommand("budget", "link-budget arithmetic");
    add_common(v_budget, true);
    auto* v_codebook = app.add_subcommand("codebook", "print the code book");
    add_common(v_codebook, false);
    v_codebook->add_option("--motes", n_motes, "number of codes");
    v_codebook->add_option("--mode", mode, "divider | walsh")->check(CLI::IsMember({"divider", "walsh"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        std::optional<usbsim::LinkScenario> scn;
        if (!scenario_path.empty()) {
            scn = usbsim::load_scenario(scenario_path);
            if (seed)
                scn->seed = *seed;
        }
        if (*v_validate) {
            std::cout << "ok " << scn->name << ": " << scn->motes.size() << " mote(s), f_main "
                      << scn->schedule.f_main / 1e6 << " MHz, depth " << scn->schedule.depth_target * 1e3 << " mm\n";
            for (const auto& w : scn->piezo.warnings)
                std::cout << "warning: " << w << "\n";
            return 0;
        }
        if (*v_run) {
            const auto art = usbsim::run(*scn);
            std::filesystem::path dir = out_dir.empty() ? scn->output_dir : out_dir;
            usbsim::write_outputs(*scn, art, dir);
            std::cout << usbsim::run_summary(*scn, art);
            return 0;
        }
        if (*v_sweep) {
            const auto ax = usbsim::parse_axis(axis);
            const auto pts = usbsim::parse_grid(grid);
            const auto rows = usbsim::sweep(*scn, ax, pts, jobs);
            const auto csv = usbsim::sweep_csv(rows, scn->motes.size(), axis);
            if (out_dir.empty()) {
                std::cout << csv;
            } else {
                std::filesystem::create_directories(out_dir);
                std::ofstream(std::filesystem::path(out_dir) / "sweep.csv") << csv;
            }
            return 0;
        }
        if (*v_budget) {
            std::cout << usbsim::report_link_budget(*scn);
            return 0;
        }
        if (*v_codebook) {
            usbsim::CodeBook b;
            if (scn) {
                int max_code = 0;
                for (const auto& m : scn->motes)
                    max_code = std::max(max_code, m.code_id);
                b = usbsim::build_code_book(max_code + 1, scn->schedule.f_main, scn->motes.front().cfg.subcarrier_divider,
                                            scn->decode.codes);
            } else {
                b = usbsim::build_code_book(n_motes, 1.78e6, 32,
                                            mode == "walsh" ? usbsim::CodeMode::Walsh : usbsim::CodeMode::Divider);
            }
            print_codebook(b, std::cout);
            return 0;
        }
    } catch (const usbsim::ValidationError& e) {
        return fail(2, e.what());
    } catch (const usbsim::CapacityError& e) {
        return fail(2, e.what());
    } catch (const std::exception& e) {
        return fail(3, e.what());
    }
    return 0;
}
