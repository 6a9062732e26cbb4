// Command-line driver: map generation, functional evaluation, pullbacks,
// moment centering, and the experiment suite, all writing self-describing
// JSON. Exit code 0 means pass/success, 1 an experiment that reached its
// fail verdict, 2 a usage error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reparam/functionals.hpp"
#include "reparam/mapspace.hpp"
#include "reparam/mobius.hpp"
#include "reparam/moment.hpp"
#include "reparam/parallel.hpp"
#include "reparam/properness.hpp"
#include "reparam/serialize.hpp"

namespace {

using namespace reparam;

Vec3 to_vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

DiscreteMap load_map(const std::string& path) {
    return map_from_json(ordered_json::parse(read_text_file(path)));
}

std::vector<Vec3> meridian_profile() {
    std::vector<Vec3> pts;
    for (int i = 0; i <= 8; ++i) {
        const double t = std::numbers::pi * i / 8.0;
        pts.push_back({std::sin(t), 0.0, std::cos(t)});
    }
    return pts;
}

GroupFamily family_from(const std::string& s) {
    if (s == "G0") return GroupFamily::G0;
    if (s == "G1") return GroupFamily::G1;
    if (s == "G2") return GroupFamily::G2;
    throw std::invalid_argument("--family: expected G0, G1 or G2, got " + s);
}

EscapeMode mode_from(const std::string& s) {
    if (s == "dilate_to_zero") return EscapeMode::dilate_to_zero;
    if (s == "dilate_to_inf") return EscapeMode::dilate_to_inf;
    if (s == "translate_to_inf") return EscapeMode::translate_to_inf;
    throw std::invalid_argument("--mode: unknown escape mode " + s);
}

// The RunConfig block embedded in every emitted JSON document.
ordered_json run_config(int mesh_level, const std::string& target_tag, const SobolevParams* norm,
                        const std::uint64_t* seed, const ordered_json& tolerances,
                        const std::string& out) {
    ordered_json j;
    j["mesh_level"] = mesh_level;
    j["target"] = target_tag;
    if (norm) {
        j["norm"]["k"] = norm->k;
        j["norm"]["p"] = norm->p;
    } else {
        j["norm"] = nullptr;
    }
    if (seed) {
        j["seed"] = *seed;
    } else {
        j["seed"] = nullptr;
    }
    j["tolerances"] = tolerances;
    j["out"] = out.empty() ? "stdout" : out;
    return j;
}

void print_or_write(const ordered_json& j, const std::string& out_path) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text_file(out_path, text);
    }
}

// Reports go to stdout without --out; with --out they land in that
// directory as <experiment>_report.json plus a CSV of the step table.
int emit_report(const ExperimentReport& report, ordered_json rc, const std::string& out_dir) {
    ordered_json j = report_to_json(report);
    j["run_config"] = std::move(rc);
    if (out_dir.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::filesystem::create_directories(out_dir);
        const auto base = (std::filesystem::path(out_dir) / report.experiment).string();
        write_text_file(base + "_report.json", j.dump(2) + "\n");
        write_text_file(base + "_steps.csv", report_to_csv(report));
        std::cout << report.experiment << ": " << (report.pass ? "pass" : "FAIL") << " ("
                  << report.verdict << ")\n";
    }
    return report.pass ? 0 : 1;
}

double a_factor(const MobiusElement& g) { return kak_decompose(g).a; }

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap_from_env();

    CLI::App app{"numerical laboratory for the Moebius group acting on discretized sphere maps"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    int rc = 0;

    // ---- generate ----------------------------------------------------
    auto* gen = app.add_subcommand("generate", "emit a stock map as a JSON map file");
    std::string gen_name, gen_out;
    int gen_level = 4, gen_degree = 2;
    std::vector<double> gen_value{0.0, 0.0, 1.0};
    std::vector<double> gen_bump_center{0.6, 0.0, 0.8};
    double gen_bump_amp = 0.0, gen_bump_radius = 0.5;
    std::uint64_t gen_seed = 0;
    gen->add_option("--map", gen_name, "identity|constant|power|power2|power3|axis")->required();
    gen->add_option("--level", gen_level, "icosphere subdivision level")->check(CLI::Range(0, 8));
    gen->add_option("--degree", gen_degree, "degree for --map power")->check(CLI::Range(1, 16));
    gen->add_option("--value", gen_value, "value of the constant map")->expected(3);
    auto* gen_amp =
        gen->add_option("--bump-amplitude", gen_bump_amp, "optional bump perturbation strength");
    gen->add_option("--bump-radius", gen_bump_radius, "geodesic radius of the bump support");
    gen->add_option("--bump-center", gen_bump_center, "bump center on the sphere")->expected(3);
    auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "bump direction seed");
    gen_amp->needs(gen_seed_opt);
    gen->add_option("--out", gen_out, "output map file")->required();
    gen->callback([&] {
        auto mesh = make_mesh(gen_level);
        DiscreteMap f;
        if (gen_name == "identity") {
            f = identity_map(mesh);
        } else if (gen_name == "constant") {
            f = constant_map(mesh, normalized(to_vec3(gen_value)));
        } else if (gen_name == "power") {
            f = power_map(mesh, gen_degree);
        } else if (gen_name == "power2") {
            f = power_map(mesh, 2);
        } else if (gen_name == "power3") {
            f = power_map(mesh, 3);
        } else if (gen_name == "axis") {
            f = axis_map(mesh, meridian_profile());
        } else {
            throw std::invalid_argument("--map: unknown stock map " + gen_name);
        }
        if (gen_bump_amp != 0.0) {
            f = bump_perturb(f, normalized(to_vec3(gen_bump_center)), gen_bump_radius,
                             gen_bump_amp, gen_seed);
        }
        print_or_write(map_to_json(f), gen_out);
        rc = 0;
    });

    // ---- functional --------------------------------------------------
    auto* fn = app.add_subcommand("functional", "evaluate energies, norms and diameters");
    std::string fn_in, fn_out;
    fn->add_option("--in", fn_in, "input map file")->required();
    fn->add_option("--out", fn_out, "output JSON file (default: stdout)");
    fn->callback([&] {
        const DiscreteMap f = load_map(fn_in);
        ordered_json j;
        j["energy"] = energy(f);
        j["volume"] = volume(f);
        j["v1"] = v1_energy(f, 2);
        j["norms"]["k1p2"] = sobolev_norm(f, SobolevParams(1, 2.0));
        j["norms"]["k2p2"] = sobolev_norm(f, SobolevParams(2, 2.0));
        j["diameters"]["sphere"] = diameter(f);
        j["diameters"]["southern_chart_disc"] =
            diameter(f, SphericalRegion::chart_disc(Complex(0.0, 0.0), 1.0));
        j["diameters"]["northern_chart_disc"] =
            diameter(f, SphericalRegion::chart_disc_complement(Complex(0.0, 0.0), 1.0));
        j["version"] = kToolVersion;
        j["run_config"] = run_config(f.mesh->level, target_tag_string(f.target), nullptr,
                                     nullptr, ordered_json::object(), fn_out);
        print_or_write(j, fn_out);
        rc = 0;
    });

    // ---- pullback ----------------------------------------------------
    auto* pb = app.add_subcommand("pullback", "precompose a map with a group element");
    std::string pb_in, pb_out;
    std::vector<double> pb_element, pb_rotation, pb_dilation, pb_translation;
    pb->add_option("--in", pb_in, "input map file")->required();
    pb->add_option("--element", pb_element, "group element as 8 reals")->expected(8);
    pb->add_option("--rotation", pb_rotation, "axis x y z and angle")->expected(4);
    pb->add_option("--dilation", pb_dilation, "chart multiplier (real or real imag)")
        ->expected(1, 2);
    pb->add_option("--translation", pb_translation, "chart translation real imag")->expected(2);
    pb->add_option("--out", pb_out, "output map file")->required();
    pb->callback([&] {
        const int given = (pb_element.empty() ? 0 : 1) + (pb_rotation.empty() ? 0 : 1) +
                          (pb_dilation.empty() ? 0 : 1) + (pb_translation.empty() ? 0 : 1);
        if (given != 1) {
            throw std::invalid_argument(
                "pullback needs exactly one of --element, --rotation, --dilation, --translation");
        }
        MobiusElement g = MobiusElement::identity();
        if (!pb_element.empty()) {
            std::array<double, 8> r{};
            std::copy(pb_element.begin(), pb_element.end(), r.begin());
            g = MobiusElement::from_reals(r);
        } else if (!pb_rotation.empty()) {
            g = MobiusElement::rotation(normalized({pb_rotation[0], pb_rotation[1], pb_rotation[2]}),
                                        pb_rotation[3]);
        } else if (!pb_dilation.empty()) {
            const double im = pb_dilation.size() > 1 ? pb_dilation[1] : 0.0;
            g = MobiusElement::diagonal(Complex(pb_dilation[0], im));
        } else {
            g = MobiusElement::translation(Complex(pb_translation[0], pb_translation[1]));
        }
        const DiscreteMap f = load_map(pb_in);
        print_or_write(map_to_json(pullback(f, g)), pb_out);
        rc = 0;
    });

    // ---- moment ------------------------------------------------------
    auto* mo = app.add_subcommand("moment", "pseudo-moment map, optionally centered");
    std::string mo_in, mo_out, mo_out_map;
    bool mo_center = false;
    double mo_tol = 0.0;
    int mo_max_iter = 60;
    mo->add_option("--in", mo_in, "input map file")->required();
    mo->add_flag("--center", mo_center, "solve for the centering element");
    mo->add_option("--tol", mo_tol, "residual target (default: 1e-3 * volume)");
    mo->add_option("--max-iter", mo_max_iter, "iteration cap")->check(CLI::PositiveNumber);
    mo->add_option("--out", mo_out, "output JSON file (default: stdout)");
    mo->add_option("--out-map", mo_out_map, "write the centered map here");
    mo->callback([&] {
        const DiscreteMap f = load_map(mo_in);
        const MomentVector m = pseudo_moment(f);
        ordered_json j;
        j["moment"] = m.components;
        double tol = mo_tol;
        if (mo_center) {
            if (tol <= 0.0) tol = 1e-3 * volume(f);
            const CenteringResult cr = center_map(f, tol, mo_max_iter);
            j["centered"] = cr.converged;
            j["g"] = element_to_json(cr.g);
            j["residual"] = cr.residual;
            j["iterations"] = cr.iterations;
            if (!mo_out_map.empty()) print_or_write(map_to_json(cr.f_centered), mo_out_map);
        } else {
            j["centered"] = false;
            j["g"] = element_to_json(MobiusElement::identity());
            j["residual"] = m.norm();
            j["iterations"] = 0;
        }
        ordered_json tolerances;
        tolerances["tol"] = tol;
        tolerances["max_iter"] = mo_max_iter;
        j["version"] = kToolVersion;
        j["run_config"] = run_config(f.mesh->level, target_tag_string(f.target), nullptr,
                                     nullptr, tolerances, mo_out);
        print_or_write(j, mo_out);
        rc = 0;
    });

    // ---- calibrate ---------------------------------------------------
    auto* cal = app.add_subcommand("calibrate", "estimate the energy-difference constant");
    int cal_samples = 200, cal_k = 1;
    double cal_p = 2.0;
    std::uint64_t cal_seed = 0;
    std::string cal_out;
    cal->add_option("--samples", cal_samples, "number of random map pairs")
        ->check(CLI::Range(10, 100000));
    cal->add_option("--seed", cal_seed, "sampling seed")->required();
    cal->add_option("--k", cal_k, "Sobolev order")->check(CLI::Range(1, 2));
    cal->add_option("--p", cal_p, "Sobolev exponent")->check(CLI::Range(1.0 + 1e-9, 16.0));
    cal->add_option("--out", cal_out, "output JSON file (default: stdout)");
    cal->callback([&] {
        const SobolevParams params(cal_k, cal_p);
        const CalibrationReport rep = calibrate_energy_bound(cal_samples, params, cal_seed);
        ordered_json j;
        j["constant_estimate"] = rep.constant_estimate;
        j["sample_count"] = rep.sample_count;
        j["excluded"] = rep.excluded;
        j["max_ratio_observed"] = rep.max_ratio_observed;
        j["version"] = kToolVersion;
        j["run_config"] = run_config(4, "unit_sphere", &params, &cal_seed,
                                     ordered_json::object(), cal_out);
        print_or_write(j, cal_out);
        rc = 0;
    });

    // ---- experiment --------------------------------------------------
    auto* ex = app.add_subcommand("experiment", "run an orbit experiment");
    ex->require_subcommand(1);

    auto* esc = ex->add_subcommand("escape", "walk an escape sequence out of a neighborhood");
    std::string esc_map, esc_family = "G2", esc_mode = "dilate_to_inf", esc_norm = "c0", esc_out;
    int esc_nmax = 12, esc_k = 1;
    double esc_eps = 0.1, esc_p = 2.0;
    bool esc_control = false;
    std::uint64_t esc_seed = 0;
    esc->add_option("--map", esc_map, "input map file")->required();
    esc->add_option("--family", esc_family, "G0|G1|G2");
    esc->add_option("--mode", esc_mode, "dilate_to_zero|dilate_to_inf|translate_to_inf");
    esc->add_option("--nmax", esc_nmax, "last sequence index probed")->check(CLI::PositiveNumber);
    esc->add_option("--eps", esc_eps, "neighborhood radius")->check(CLI::PositiveNumber);
    esc->add_option("--norm", esc_norm, "c0|sobolev neighborhood metric");
    esc->add_option("--k", esc_k, "Sobolev order for --norm sobolev")->check(CLI::Range(1, 2));
    esc->add_option("--p", esc_p, "Sobolev exponent for --norm sobolev");
    auto* esc_control_flag =
        esc->add_flag("--control", esc_control, "random rotations instead of an escape sequence");
    auto* esc_seed_opt = esc->add_option("--seed", esc_seed, "rotation seed for --control");
    esc_control_flag->needs(esc_seed_opt);
    esc->add_option("--out", esc_out, "report directory (default: stdout)");
    esc->callback([&] {
        const DiscreteMap f = load_map(esc_map);
        const SobolevParams params(esc_k, esc_p);
        NeighborhoodSpec nbhd = esc_norm == "c0"
                                    ? NeighborhoodSpec::c0(f, esc_eps)
                                    : NeighborhoodSpec::sobolev(f, esc_eps, params);
        ExperimentReport report =
            esc_control
                ? rotation_control_experiment(f, esc_nmax, nbhd, esc_seed)
                : orbit_escape_experiment(f, family_from(esc_family), mode_from(esc_mode),
                                          esc_nmax, nbhd);
        ordered_json tolerances;
        tolerances["eps"] = esc_eps;
        rc = emit_report(report,
                         run_config(f.mesh->level, target_tag_string(f.target),
                                    esc_norm == "c0" ? nullptr : &params,
                                    esc_control ? &esc_seed : nullptr, tolerances, esc_out),
                         esc_out);
    });

    auto* sep = ex->add_subcommand("separate", "look for overlap between two orbit saturations");
    std::string sep_map1, sep_map2, sep_out;
    double sep_eps1 = 0.05, sep_eps2 = 0.05;
    int sep_budget = 200;
    std::uint64_t sep_seed = 0;
    sep->add_option("--map1", sep_map1, "first map file")->required();
    sep->add_option("--map2", sep_map2, "second map file")->required();
    sep->add_option("--eps1", sep_eps1, "radius around the first map")->check(CLI::PositiveNumber);
    sep->add_option("--eps2", sep_eps2, "radius around the second map")->check(CLI::PositiveNumber);
    sep->add_option("--budget", sep_budget, "sample pairs")->check(CLI::PositiveNumber);
    sep->add_option("--seed", sep_seed, "sampling seed")->required();
    sep->add_option("--out", sep_out, "report directory (default: stdout)");
    sep->callback([&] {
        const DiscreteMap f1 = load_map(sep_map1);
        const DiscreteMap f2 = load_map(sep_map2);
        ExperimentReport report =
            separation_experiment(f1, f2, sep_eps1, sep_eps2, sep_budget, sep_seed);
        ordered_json tolerances;
        tolerances["eps1"] = sep_eps1;
        tolerances["eps2"] = sep_eps2;
        rc = emit_report(report,
                         run_config(f1.mesh->level, target_tag_string(f1.target), nullptr,
                                    &sep_seed, tolerances, sep_out),
                         sep_out);
    });

    auto* st = ex->add_subcommand("stabilizer", "hunt for group elements fixing a map");
    std::string st_map, st_out;
    double st_threshold = 0.0;
    int st_budget = 200, st_n = 8;
    std::uint64_t st_seed = 0;
    st->add_option("--map", st_map, "input map file")->required();
    st->add_option("--threshold", st_threshold,
                   "acceptance residual (default: 3x resampling error)");
    st->add_option("--budget", st_budget, "random probe count")->check(CLI::PositiveNumber);
    st->add_option("--n", st_n, "compact exhaustion index for the draws")
        ->check(CLI::PositiveNumber);
    st->add_option("--seed", st_seed, "probe seed")->required();
    st->add_option("--out", st_out, "report directory (default: stdout)");
    st->callback([&] {
        const DiscreteMap f = load_map(st_map);
        const double threshold = st_threshold > 0.0
                                     ? st_threshold
                                     : 3.0 * resampling_error(f, SobolevParams(1, 2.0));
        const StabilizerEstimate est = stabilizer_search(f, threshold, st_budget, st_n, st_seed);

        ExperimentReport report;
        report.experiment = "stabilizer";
        report.seed = st_seed;
        report.parameters = {{"threshold", est.threshold},
                             {"budget", static_cast<double>(st_budget)},
                             {"n", static_cast<double>(st_n)},
                             {"candidates", static_cast<double>(est.candidates.size())},
                             {"max_a_factor", est.max_a_factor},
                             {"best_circle_fraction", est.best_circle_fraction}};
        report.steps.columns = {"candidate", "residual", "a_factor"};
        for (std::size_t i = 0; i < est.candidates.size(); ++i) {
            report.steps.rows.push_back({static_cast<double>(i), est.candidates[i].residual,
                                         a_factor(est.candidates[i].g)});
            if (i < 16) {
                report.witnesses.emplace_back("candidate_" + std::to_string(i),
                                              est.candidates[i].g.to_reals());
            }
        }
        report.pass = est.verdict != StabilizerEstimate::Verdict::noncompact_suspect;
        switch (est.verdict) {
            case StabilizerEstimate::Verdict::finite_like:
                report.verdict = "finite-like: " + std::to_string(est.candidates.size()) +
                                 " isolated candidates";
                break;
            case StabilizerEstimate::Verdict::circle_like:
                report.verdict = "circle-like: a rotation circle stays under the threshold";
                break;
            case StabilizerEstimate::Verdict::noncompact_suspect:
                report.verdict = "noncompact suspect: acceptance outside the probed compact set";
                break;
        }
        ordered_json tolerances;
        tolerances["threshold"] = est.threshold;
        rc = emit_report(report,
                         run_config(f.mesh->level, target_tag_string(f.target), nullptr,
                                    &st_seed, tolerances, st_out),
                         st_out);
    });

    auto* pre = ex->add_subcommand("precompact", "bound the transporter set between two maps");
    std::string pre_map1, pre_map2, pre_out;
    double pre_eps = 0.05;
    int pre_budget = 200;
    std::uint64_t pre_seed = 0;
    pre->add_option("--map1", pre_map1, "source map file")->required();
    pre->add_option("--map2", pre_map2, "destination map file")->required();
    pre->add_option("--eps", pre_eps, "acceptance radius around the destination")
        ->check(CLI::PositiveNumber);
    pre->add_option("--budget", pre_budget, "transporter samples")->check(CLI::PositiveNumber);
    pre->add_option("--seed", pre_seed, "sampling seed")->required();
    pre->add_option("--out", pre_out, "report directory (default: stdout)");
    pre->callback([&] {
        const DiscreteMap f1 = load_map(pre_map1);
        const DiscreteMap f2 = load_map(pre_map2);
        ExperimentReport report = precompact_witness(f1, f2, pre_eps, pre_budget, pre_seed);
        ordered_json tolerances;
        tolerances["eps"] = pre_eps;
        rc = emit_report(report,
                         run_config(f1.mesh->level, target_tag_string(f1.target), nullptr,
                                    &pre_seed, tolerances, pre_out),
                         pre_out);
    });

    auto* al = ex->add_subcommand("align", "register one map against another over the group");
    std::string al_map, al_target, al_out, al_out_element;
    int al_budget = 8, al_k = 1;
    double al_p = 2.0, al_threshold = 0.0;
    std::uint64_t al_seed = 0;
    al->add_option("--map", al_map, "map to be reparametrized")->required();
    al->add_option("--target", al_target, "map to match")->required();
    al->add_option("--budget", al_budget, "optimizer starts beyond the identity")
        ->check(CLI::PositiveNumber);
    al->add_option("--seed", al_seed, "start seed")->required();
    al->add_option("--k", al_k, "Sobolev order")->check(CLI::Range(1, 2));
    al->add_option("--p", al_p, "Sobolev exponent");
    al->add_option("--threshold", al_threshold, "optional pass criterion on the residual");
    al->add_option("--out", al_out, "report directory (default: stdout)");
    al->add_option("--out-element", al_out_element, "write the aligning element here");
    al->callback([&] {
        const DiscreteMap f = load_map(al_map);
        const DiscreteMap h = load_map(al_target);
        const SobolevParams params(al_k, al_p);
        const AlignResult result = align(f, h, params, al_budget, al_seed);

        ExperimentReport report;
        report.experiment = "align";
        report.seed = al_seed;
        report.parameters = {{"budget", static_cast<double>(al_budget)},
                             {"residual", result.residual},
                             {"a_factor", a_factor(result.g)},
                             {"threshold", al_threshold > 0.0 ? al_threshold : -1.0}};
        report.steps.columns = {"residual", "a_factor"};
        report.steps.rows = {{result.residual, a_factor(result.g)}};
        report.witnesses.emplace_back("g", result.g.to_reals());
        report.pass = al_threshold <= 0.0 || result.residual <= al_threshold;
        report.verdict = report.pass ? "registered" : "residual above the requested threshold";

        if (!al_out_element.empty()) print_or_write(element_to_json(result.g), al_out_element);
        ordered_json tolerances;
        tolerances["threshold"] = al_threshold;
        rc = emit_report(report,
                         run_config(f.mesh->level, target_tag_string(f.target), &params,
                                    &al_seed, tolerances, al_out),
                         al_out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
