#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "reparam/errors.hpp"
#include "reparam/properness.hpp"

using namespace reparam;

namespace {

constexpr double kPi = 3.14159265358979323846;

double longest_edge(const SphereMesh& mesh) {
    double best = 0.0;
    for (const Face& fc : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            best = std::max(best, distance(mesh.vertices[fc[e]], mesh.vertices[fc[(e + 1) % 3]]));
        }
    }
    return best;
}

double lipschitz_estimate(const DiscreteMap& f) {
    double best = 0.0;
    const SphereMesh& mesh = *f.mesh;
    for (const Face& fc : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            const int a = fc[e];
            const int b = fc[(e + 1) % 3];
            double dv = 0.0;
            for (int c = 0; c < f.target.dim; ++c) {
                const double d = f.value(a)[c] - f.value(b)[c];
                dv += d * d;
            }
            best = std::max(best, std::sqrt(dv) / distance(mesh.vertices[a], mesh.vertices[b]));
        }
    }
    return best;
}

bool reports_equal(const ExperimentReport& a, const ExperimentReport& b) {
    return a.experiment == b.experiment && a.seed == b.seed && a.parameters == b.parameters &&
           a.steps.columns == b.steps.columns && a.steps.rows == b.steps.rows &&
           a.witnesses == b.witnesses && a.pass == b.pass && a.verdict == b.verdict;
}

double param(const ExperimentReport& r, const std::string& name) {
    for (const auto& [key, value] : r.parameters) {
        if (key == name) return value;
    }
    FAIL("missing parameter ", name);
    return 0.0;
}

std::vector<Vec3> meridian_profile() {
    std::vector<Vec3> profile;
    for (int i = 0; i <= 8; ++i) {
        const double t = kPi * i / 8.0;
        profile.push_back({std::sin(t), 0.0, std::cos(t)});
    }
    return profile;
}

}  // namespace

TEST_CASE("neighborhoods: membership is the declared distance") {
    const auto mesh = make_mesh(3);
    const DiscreteMap id = identity_map(mesh);
    const DiscreteMap h = bump_perturb(id, Vec3{0.0, 0.0, 1.0}, 0.8, 0.05, 3u);

    const NeighborhoodSpec c0ball = NeighborhoodSpec::c0(id, 0.1);
    CHECK(c0ball.distance_to(h) == c0_distance(id, h));
    CHECK(c0ball.contains(h));
    CHECK(!c0ball.contains(pullback(id, MobiusElement::diagonal(Complex(4.0, 0.0)))));

    const SobolevParams k12(1, 2.0);
    const NeighborhoodSpec sball = NeighborhoodSpec::sobolev(id, 0.3, k12);
    CHECK(sball.distance_to(h) == sobolev_distance(id, h, k12));

    CHECK_THROWS_AS(NeighborhoodSpec::c0(id, 0.0), std::invalid_argument);
}

TEST_CASE("resampling error: small for exactly-resampled maps, shrinks with level") {
    const SobolevParams k12(1, 2.0);
    const DiscreteMap id4 = identity_map(make_mesh(4));
    CHECK(resampling_error(id4, k12) < 1e-6);
    CHECK(resampling_error_c0(id4) < 1e-6);

    const double coarse = resampling_error(power_map(make_mesh(3), 2), k12);
    const double fine = resampling_error(power_map(make_mesh(4), 2), k12);
    CHECK(coarse > 1e-5);
    CHECK(fine < coarse);
}

TEST_CASE("orbit escape: dilations leave and stay out") {
    const auto mesh = make_mesh(5);
    const DiscreteMap id = identity_map(mesh);
    const NeighborhoodSpec ball = NeighborhoodSpec::c0(id, 0.1);

    const ExperimentReport report =
        orbit_escape_experiment(id, GroupFamily::G2, EscapeMode::dilate_to_inf, 12, ball);
    CHECK(report.pass);

    const double first_exit = param(report, "first_exit");
    CHECK(first_exit >= 1.0);
    REQUIRE(report.steps.rows.size() == 12);

    // sup displacement approaches the diameter of the target sphere
    const double d12 = report.steps.rows.back()[1];
    CHECK(std::abs(d12 - 2.0) <= 0.05 * 2.0);

    // no return after the first exit
    for (const auto& row : report.steps.rows) {
        if (row[0] >= first_exit) CHECK(row[2] == 0.0);
    }

    // monotone tail sets in early
    int n1 = 12;
    for (int start = 1; start <= 12; ++start) {
        bool monotone = true;
        for (std::size_t i = static_cast<std::size_t>(start); i < report.steps.rows.size(); ++i) {
            if (report.steps.rows[i][1] < report.steps.rows[i - 1][1] - 1e-12) monotone = false;
        }
        if (monotone) {
            n1 = start;
            break;
        }
    }
    CHECK(n1 <= 5);

    // proof-constant diagnostics are recorded and ordered sensibly
    CHECK(param(report, "disc_radius_half_eps") > 0.0);
    CHECK(param(report, "complement_radius_half_eps") >= param(report, "disc_radius_half_eps"));

    CHECK(report.witnesses.size() == 1);
}

TEST_CASE("orbit escape: guards") {
    const auto mesh = make_mesh(3);
    const DiscreteMap id = identity_map(mesh);
    const NeighborhoodSpec ball = NeighborhoodSpec::c0(id, 0.1);

    const DiscreteMap c = constant_map(mesh, Vec3{1.0, 0.0, 0.0});
    CHECK_THROWS_AS(orbit_escape_experiment(c, GroupFamily::G2, EscapeMode::dilate_to_inf, 6,
                                            NeighborhoodSpec::c0(c, 0.1)),
                    ConstantMapRejected);

    const NeighborhoodSpec off_center = NeighborhoodSpec::c0(power_map(mesh, 2), 0.1);
    CHECK_THROWS_AS(
        orbit_escape_experiment(id, GroupFamily::G2, EscapeMode::dilate_to_inf, 6, off_center),
        std::invalid_argument);

    CHECK_THROWS_AS(
        orbit_escape_experiment(id, GroupFamily::G2, EscapeMode::translate_to_inf, 6, ball),
        InvalidMode);
}

TEST_CASE("rotation control: rotated copies realign into the ball") {
    const auto mesh = make_mesh(3);
    const DiscreteMap id = identity_map(mesh);
    const NeighborhoodSpec ball = NeighborhoodSpec::c0(id, 0.1);

    const ExperimentReport report = rotation_control_experiment(id, 5, ball, 21u);
    CHECK(report.pass);
    REQUIRE(report.steps.rows.size() == 5);
    bool some_rotation_moves_far = false;
    for (const auto& row : report.steps.rows) {
        CHECK(row[2] < 0.1);   // aligned residual back inside
        CHECK(row[3] == 1.0);  // flagged as returned
        if (row[1] > 0.5) some_rotation_moves_far = true;
    }
    // the raw displacement is genuinely large for generic rotations
    CHECK(some_rotation_moves_far);
}

TEST_CASE("align: recovery of a pulled-back copy on all stock maps") {
    const auto mesh = make_mesh(4);
    const SobolevParams k12(1, 2.0);
    const double edge = longest_edge(*mesh);

    const std::vector<Vec3> profile = meridian_profile();
    const DiscreteMap stocks[] = {identity_map(mesh), power_map(mesh, 2), power_map(mesh, 3),
                                  axis_map(mesh, profile)};
    const MobiusElement moves[] = {
        MobiusElement::rotation(normalized(Vec3{1.0, 2.0, 2.0}), 0.9),
        compose(MobiusElement::hermitian_exp(Vec3{0.5, -0.3, 0.6}),
                MobiusElement::rotation(Vec3{0.0, 0.0, 1.0}, 1.2)),
        MobiusElement::diagonal(Complex(3.0, 0.0)),  // a-factor sqrt(3)
    };

    int case_index = 0;
    for (const DiscreteMap& f : stocks) {
        const double resample_bound = edge * lipschitz_estimate(f);
        for (const MobiusElement& g0 : moves) {
            CHECK(kak_decompose(g0).a <= 2.0);
            const DiscreteMap h = pullback(f, g0);
            const AlignResult res =
                align(f, h, k12, 4, 1000u + static_cast<std::uint64_t>(case_index));
            CHECK(res.residual <= 2.0 * resample_bound);
            CHECK(res.residual == sobolev_distance(pullback(f, res.g), h, k12));
            ++case_index;
        }
    }
}

TEST_CASE("align: self-alignment and the energy obstruction") {
    const auto mesh = make_mesh(4);
    const SobolevParams k12(1, 2.0);
    const DiscreteMap id = identity_map(mesh);
    const DiscreteMap p2 = power_map(mesh, 2);

    const AlignResult self = align(p2, p2, k12, 2, 5u);
    CHECK(self.residual <= 2.0 * std::max(resampling_error(p2, k12), 1e-9));

    // 8 pi vs 16 pi conformal energies: no group element can close this
    const AlignResult blocked = align(id, p2, k12, 3, 6u);
    CHECK(blocked.residual >= 1.0);
}

TEST_CASE("energy separation threshold: formula, zero gap, constant scaling") {
    const auto mesh = make_mesh(4);
    const SobolevParams k12(1, 2.0);
    const DiscreteMap id = identity_map(mesh);
    const DiscreteMap c = constant_map(mesh, Vec3{0.0, 0.0, 1.0});

    const CalibrationReport calib = calibrate_energy_bound(40, k12, 77u);
    const double eps = energy_separation_threshold(c, id, calib);
    CHECK(eps > 0.0);

    // the returned value solves the quadratic
    const double delta = std::abs(energy(c) - energy(id));
    const double s = sobolev_norm(c, calib.params) + sobolev_norm(id, calib.params);
    CHECK(std::abs(delta - 2.0 * calib.constant_estimate * eps * (s + eps)) <= 1e-8 * delta);

    // doubling C roughly halves eps while it is small against the norms
    CalibrationReport doubled = calib;
    doubled.constant_estimate *= 2.0;
    const double eps2 = energy_separation_threshold(c, id, doubled);
    CHECK(eps2 < eps);
    CHECK(eps2 > 0.35 * eps);
    CHECK(eps2 < 0.75 * eps);

    // conformal rotation produces no gap
    const DiscreteMap rotated =
        pullback(id, MobiusElement::rotation(normalized(Vec3{1.0, 1.0, 0.0}), 0.8));
    CHECK_THROWS_AS(energy_separation_threshold(id, rotated, calib), ZeroGap);
}

TEST_CASE("separation: constant against identity with active certificate") {
    const auto mesh = make_mesh(4);
    const DiscreteMap id = identity_map(mesh);
    const DiscreteMap c = constant_map(mesh, Vec3{0.0, 0.0, 1.0});

    const ExperimentReport report = separation_experiment(c, id, 0.1, 0.1, 60, 2024u);
    CHECK(report.pass);
    CHECK(param(report, "certificate_active") == 1.0);
    CHECK(param(report, "eps_star") > 0.0);
    CHECK(param(report, "min_distance") > 0.0);
    CHECK(param(report, "gap_violations") == 0.0);
    REQUIRE(report.steps.rows.size() == 60);
    CHECK(report.witnesses.size() == 2);

    // byte-for-byte reproducibility from the same configuration
    const ExperimentReport again = separation_experiment(c, id, 0.1, 0.1, 60, 2024u);
    CHECK(reports_equal(report, again));
}

TEST_CASE("separation: identity against power map, and same-orbit guards") {
    const auto mesh = make_mesh(4);
    const DiscreteMap id = identity_map(mesh);
    const DiscreteMap p2 = power_map(mesh, 2);

    const ExperimentReport report = separation_experiment(id, p2, 0.08, 0.08, 40, 99u);
    CHECK(report.pass);
    CHECK(param(report, "certificate_active") == 1.0);
    CHECK(param(report, "min_distance") > 0.0);

    CHECK_THROWS_AS(separation_experiment(id, id, 0.1, 0.1, 10, 1u), SameOrbitSuspected);

    const DiscreteMap nearby =
        pullback(id, MobiusElement::rotation(Vec3{0.0, 0.0, 1.0}, 0.15));
    CHECK_THROWS_AS(separation_experiment(id, nearby, 0.1, 0.1, 10, 1u), SameOrbitSuspected);
}

TEST_CASE("stabilizer: cube roots of unity for the third power map") {
    const auto mesh = make_mesh(4);
    const DiscreteMap f = power_map(mesh, 3);
    const SobolevParams k12(1, 2.0);
    const double threshold = 3.0 * resampling_error(f, k12);

    const StabilizerEstimate est = stabilizer_search(f, threshold, 120, 8, 31u);
    CHECK(est.verdict == StabilizerEstimate::Verdict::finite_like);
    REQUIRE(est.candidates.size() == 3);

    std::vector<double> angles;
    for (const StabilizerCandidate& cand : est.candidates) {
        CHECK(cand.residual <= threshold);
        CHECK(kak_decompose(cand.g).a <= 1.01);
        const Complex mult = chart_multiplier(cand.g);
        angles.push_back(std::arg(mult));
    }
    std::sort(angles.begin(), angles.end());
    CHECK(std::abs(angles[0] - (-2.0 * kPi / 3.0)) <= 0.02);
    CHECK(std::abs(angles[1] - 0.0) <= 0.02);
    CHECK(std::abs(angles[2] - (2.0 * kPi / 3.0)) <= 0.02);
}

TEST_CASE("stabilizer: circle for a latitude-constant map, trivial for identity") {
    const auto mesh = make_mesh(4);
    const SobolevParams k12(1, 2.0);

    const DiscreteMap axis = axis_map(mesh, meridian_profile());
    const double axis_threshold = 3.0 * resampling_error(axis, k12);
    const StabilizerEstimate circle = stabilizer_search(axis, axis_threshold, 120, 8, 32u);
    CHECK(circle.verdict == StabilizerEstimate::Verdict::circle_like);
    CHECK(circle.best_circle_fraction >= 0.75);

    const DiscreteMap id = identity_map(mesh);
    const double id_threshold = 3.0 * resampling_error(id, k12);
    const StabilizerEstimate trivial = stabilizer_search(id, id_threshold, 120, 8, 33u);
    CHECK(trivial.verdict == StabilizerEstimate::Verdict::finite_like);
    CHECK(trivial.candidates.size() == 1);
    CHECK(trivial.candidates[0].g == MobiusElement::identity());

    const DiscreteMap p2 = power_map(mesh, 2);
    const StabilizerEstimate square =
        stabilizer_search(p2, 3.0 * resampling_error(p2, k12), 120, 8, 34u);
    CHECK(square.verdict == StabilizerEstimate::Verdict::finite_like);
    CHECK(square.candidates.size() == 2);
    CHECK(square.max_a_factor <= 1.01);

    CHECK_THROWS_AS(
        stabilizer_search(constant_map(mesh, Vec3{1.0, 0.0, 0.0}), 0.1, 10, 4, 1u),
        ConstantMapRejected);
}

TEST_CASE("precompact: identity transporters stay near the identity") {
    const auto mesh = make_mesh(4);
    const DiscreteMap id = identity_map(mesh);

    const ExperimentReport report = precompact_witness(id, id, 0.05, 150, 77u);
    CHECK(report.pass);
    CHECK(param(report, "escape_excluded") == 1.0);
    CHECK(param(report, "accepted") > 0.0);
    CHECK(param(report, "hull_a_factor") <= 1.2);
    CHECK(param(report, "hull_n") >= 1.0);
    CHECK(!report.witnesses.empty());

    const ExperimentReport again = precompact_witness(id, id, 0.05, 150, 77u);
    CHECK(reports_equal(report, again));
}

TEST_CASE("precompact: transporters cluster at a planted dilation") {
    const auto mesh = make_mesh(4);
    const DiscreteMap id = identity_map(mesh);
    const DiscreteMap f2 = pullback(id, MobiusElement::diagonal(Complex(2.0, 0.0)));

    const ExperimentReport report = precompact_witness(id, f2, 0.05, 150, 78u);
    CHECK(report.pass);
    CHECK(param(report, "accepted") > 0.0);
    // the planted dilation has a-factor sqrt(2); the hull sits around it
    CHECK(param(report, "hull_a_factor") >= 1.25);
    CHECK(param(report, "hull_a_factor") <= 1.7);

    CHECK_THROWS_AS(
        precompact_witness(constant_map(mesh, Vec3{1.0, 0.0, 0.0}), id, 0.05, 10, 1u),
        ConstantMapRejected);
}
