#include "reparam/properness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reparam/errors.hpp"
#include "reparam/rng.hpp"

namespace reparam {

namespace {

constexpr double kPi = 3.14159265358979323846;

// maps of image diameter below this are treated as constant
constexpr double kConstantFloor = 1e-5;

void require_non_constant(const DiscreteMap& f, const char* who) {
    if (!(diameter(f) > kConstantFloor)) {
        throw ConstantMapRejected(std::string(who) + ": map is constant within tolerance");
    }
}

double longest_edge(const SphereMesh& mesh) {
    double best = 0.0;
    for (const Face& fc : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            best = std::max(best, distance(mesh.vertices[fc[e]], mesh.vertices[fc[(e + 1) % 3]]));
        }
    }
    return best;
}

MobiusElement rotation_vec(const Vec3& r) {
    const double n = norm(r);
    if (n < 1e-14) return MobiusElement::identity();
    return MobiusElement::rotation(r / n, n);
}

MobiusElement polar_chart(const std::array<double, 6>& x) {
    return compose(MobiusElement::hermitian_exp(Vec3{x[0], x[1], x[2]}),
                   rotation_vec(Vec3{x[3], x[4], x[5]}));
}

// Golden-section minimization of phi over [a, b]. Returns the best
// abscissa; phi is assumed unimodal on the bracket but the routine only
// ever keeps improvements, so a bad bracket just wastes the budget.
template <typename F>
double golden_min(F&& phi, double a, double b, int iters) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = phi(x1);
    double f2 = phi(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = phi(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

double region_diameter_or_zero(const DiscreteMap& f, const SphericalRegion& region) {
    try {
        return diameter(f, region);
    } catch (const EmptyRegion&) {
        return 0.0;
    }
}

// Smallest radius at which the monotone predicate flips to true,
// bisected on a log scale over [lo, hi].
template <typename P>
double bisect_radius(P&& holds_at, double lo, double hi) {
    if (holds_at(lo)) return lo;
    if (!holds_at(hi)) return hi;
    double llo = std::log(lo);
    double lhi = std::log(hi);
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (llo + lhi);
        if (holds_at(std::exp(mid))) {
            lhi = mid;
        } else {
            llo = mid;
        }
    }
    return std::exp(lhi);
}

// Perturbs f by a random bump while staying strictly inside the given
// ball around f; retreats on amplitude until membership holds.
DiscreteMap perturb_within(const DiscreteMap& f, const NeighborhoodSpec& ball, Rng& rng) {
    const Vec3 center = rng.unit_vector();
    const double radius = 0.35 + 0.75 * rng.uniform();
    double amplitude = ball.radius * (0.25 + 0.5 * rng.uniform());
    for (int attempt = 0; attempt < 6; ++attempt) {
        const DiscreteMap h = bump_perturb(f, center, radius, amplitude, rng.next_u64());
        if (ball.contains(h)) return h;
        amplitude *= 0.4;
    }
    return f;
}

double group_gap(const MobiusElement& g1, const MobiusElement& g2) {
    const auto r1 = g1.to_reals();
    const auto r2 = g2.to_reals();
    double plus = 0.0;
    double minus = 0.0;
    for (int i = 0; i < 8; ++i) {
        plus += (r1[i] - r2[i]) * (r1[i] - r2[i]);
        minus += (r1[i] + r2[i]) * (r1[i] + r2[i]);
    }
    return std::sqrt(std::min(plus, minus));
}

}  // namespace

NeighborhoodSpec NeighborhoodSpec::c0(DiscreteMap center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("NeighborhoodSpec: radius must be positive");
    NeighborhoodSpec out;
    out.center = std::move(center);
    out.radius = radius;
    return out;
}

NeighborhoodSpec NeighborhoodSpec::sobolev(DiscreteMap center, double radius,
                                           const SobolevParams& params) {
    NeighborhoodSpec out = c0(std::move(center), radius);
    out.norm = params;
    return out;
}

double NeighborhoodSpec::distance_to(const DiscreteMap& h) const {
    return norm ? sobolev_distance(center, h, *norm) : c0_distance(center, h);
}

bool NeighborhoodSpec::contains(const DiscreteMap& h) const { return distance_to(h) < radius; }

double resampling_error(const DiscreteMap& f, const SobolevParams& params) {
    const double angle = 0.5 * longest_edge(*f.mesh);
    const Vec3 axes[] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.6, 0.0, 0.8}};
    double est = 1e-12;
    for (const Vec3& ax : axes) {
        const MobiusElement u = MobiusElement::rotation(ax, angle);
        const DiscreteMap round_trip = pullback(pullback(f, u), inverse(u));
        est = std::max(est, sobolev_distance(round_trip, f, params));
    }
    return est;
}

double resampling_error_c0(const DiscreteMap& f) {
    const double angle = 0.5 * longest_edge(*f.mesh);
    const Vec3 axes[] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.6, 0.0, 0.8}};
    double est = 1e-12;
    for (const Vec3& ax : axes) {
        const MobiusElement u = MobiusElement::rotation(ax, angle);
        est = std::max(est, c0_distance(pullback(pullback(f, u), inverse(u)), f));
    }
    return est;
}

namespace {

// rotation vectors of the 24 rotations of the cube, a 62-degree net of
// the rotation group used to seed the alignment search
std::vector<Vec3> rotation_net() {
    std::vector<Vec3> net;
    net.push_back({0.0, 0.0, 0.0});
    const Vec3 face[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (const Vec3& ax : face) {
        for (const double a : {0.5 * kPi, kPi, 1.5 * kPi}) net.push_back(ax * a);
    }
    const Vec3 edge[] = {{1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1}};
    for (const Vec3& ax : edge) net.push_back(normalized(ax) * kPi);
    const Vec3 corner[] = {{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1}};
    for (const Vec3& ax : corner) {
        for (const double a : {2.0 * kPi / 3.0, -2.0 * kPi / 3.0}) net.push_back(normalized(ax) * a);
    }
    return net;
}

}  // namespace

AlignResult align(const DiscreteMap& f, const DiscreteMap& h, const SobolevParams& params,
                  int budget, std::uint64_t seed) {
    require_same_space(f, h);
    if (budget < 0) throw std::invalid_argument("align: budget must be non-negative");

    const auto objective = [&](const std::array<double, 6>& x) {
        return sobolev_distance(pullback(f, polar_chart(x)), h, params);
    };

    // coarse rotation scan; the best two grid points become extra starts
    const std::vector<Vec3> net = rotation_net();
    int net_best = 0;
    int net_second = 0;
    double net_best_value = std::numeric_limits<double>::infinity();
    double net_second_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < net.size(); ++i) {
        const Vec3& r = net[i];
        const double v = objective({0.0, 0.0, 0.0, r.x, r.y, r.z});
        if (v < net_best_value) {
            net_second = net_best;
            net_second_value = net_best_value;
            net_best = static_cast<int>(i);
            net_best_value = v;
        } else if (v < net_second_value) {
            net_second = static_cast<int>(i);
            net_second_value = v;
        }
    }

    std::vector<std::array<double, 6>> starts;
    starts.push_back({});
    for (const int idx : {net_best, net_second}) {
        const Vec3& r = net[static_cast<std::size_t>(idx)];
        starts.push_back({0.0, 0.0, 0.0, r.x, r.y, r.z});
    }
    for (int i = 1; i <= budget; ++i) {
        // random starts stay inside K_4: a-factor at most 2, any rotation
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        const Vec3 p = rng.unit_vector() * (rng.uniform() * 2.0 * std::log(2.0));
        const Vec3 r = rng.unit_vector() * (rng.uniform() * kPi);
        starts.push_back({p.x, p.y, p.z, r.x, r.y, r.z});
    }

    std::array<double, 6> best_x{};
    double best = std::numeric_limits<double>::infinity();
    for (const std::array<double, 6>& start : starts) {
        std::array<double, 6> x = start;
        double value = objective(x);
        double step = 1.6;
        for (int sweep = 0; sweep < 7; ++sweep) {
            for (int c = 0; c < 6; ++c) {
                const double here = x[c];
                const double cand = golden_min(
                    [&](double t) {
                        std::array<double, 6> probe = x;
                        probe[c] = t;
                        return objective(probe);
                    },
                    here - step, here + step, 12);
                std::array<double, 6> probe = x;
                probe[c] = cand;
                const double cand_value = objective(probe);
                if (cand_value < value) {
                    x = probe;
                    value = cand_value;
                }
            }
            step *= 0.5;
        }
        if (value < best) {
            best = value;
            best_x = x;
        }
    }
    return {polar_chart(best_x), best};
}

ExperimentReport orbit_escape_experiment(const DiscreteMap& f, GroupFamily family, EscapeMode mode,
                                         int n_max, const NeighborhoodSpec& nbhd) {
    require_non_constant(f, "orbit_escape_experiment");
    require_same_space(f, nbhd.center);
    if (f.values != nbhd.center.values) {
        throw std::invalid_argument("orbit_escape_experiment: neighborhood must be centered at f");
    }
    if (n_max < 1) throw std::invalid_argument("orbit_escape_experiment: n_max must be positive");

    ExperimentReport report;
    report.experiment = "orbit_escape";
    report.parameters = {{"mesh_level", static_cast<double>(f.mesh->level)},
                         {"family", static_cast<double>(family)},
                         {"mode", static_cast<double>(mode)},
                         {"n_max", static_cast<double>(n_max)},
                         {"eps", nbhd.radius}};
    report.steps.columns = {"n", "distance", "inside"};

    int last_inside = 0;
    for (int n = 1; n <= n_max; ++n) {
        const MobiusElement g = escape_sequence(family, mode, n);
        const double d = nbhd.distance_to(pullback(f, g));
        const bool inside = d < nbhd.radius;
        if (inside) last_inside = n;
        report.steps.rows.push_back({static_cast<double>(n), d, inside ? 1.0 : 0.0});
    }
    const bool escaped = last_inside < n_max;
    const int first_exit = last_inside + 1;

    // proof-constant diagnostics: chart-disc radii at which the map's
    // regional diameter crosses half the neighborhood radius
    const double half = 0.5 * nbhd.radius;
    const double rho = bisect_radius(
        [&](double r) {
            return region_diameter_or_zero(f, SphericalRegion::chart_disc(Complex(0.0), r)) >= half;
        },
        1e-4, 1e4);
    const double big_r = bisect_radius(
        [&](double r) {
            return region_diameter_or_zero(
                       f, SphericalRegion::chart_disc_complement(Complex(0.0), r)) <= half;
        },
        1e-4, 1e4);
    report.parameters.emplace_back("first_exit", escaped ? static_cast<double>(first_exit) : -1.0);
    report.parameters.emplace_back("disc_radius_half_eps", rho);
    report.parameters.emplace_back("complement_radius_half_eps", big_r);

    report.pass = escaped;
    if (escaped) {
        report.witnesses.emplace_back("first_exit_element",
                                      escape_sequence(family, mode, first_exit).to_reals());
        report.verdict = "escaped at n = " + std::to_string(first_exit) + ", no return";
    } else {
        report.verdict = "did not leave the neighborhood for good within the probed range";
    }
    return report;
}

ExperimentReport rotation_control_experiment(const DiscreteMap& f, int n_max,
                                             const NeighborhoodSpec& nbhd, std::uint64_t seed) {
    require_non_constant(f, "rotation_control_experiment");
    require_same_space(f, nbhd.center);
    if (f.values != nbhd.center.values) {
        throw std::invalid_argument(
            "rotation_control_experiment: neighborhood must be centered at f");
    }
    if (n_max < 1) throw std::invalid_argument("rotation_control_experiment: n_max positive");

    const SobolevParams correction_norm(1, 2.0);
    ExperimentReport report;
    report.experiment = "rotation_control";
    report.seed = seed;
    report.parameters = {{"mesh_level", static_cast<double>(f.mesh->level)},
                         {"n_max", static_cast<double>(n_max)},
                         {"eps", nbhd.radius}};
    report.steps.columns = {"n", "raw_distance", "aligned_residual", "inside_after_alignment"};

    bool all_return = true;
    for (int n = 1; n <= n_max; ++n) {
        const MobiusElement u = random_element(1.0, GroupFamily::G0, mix_seed(seed, n));
        const DiscreteMap moved = pullback(f, u);
        const double raw = nbhd.distance_to(moved);
        const AlignResult back = align(f, moved, correction_norm, 2, mix_seed(seed, 100 + n));
        const bool inside = back.residual < nbhd.radius;
        all_return = all_return && inside;
        report.steps.rows.push_back(
            {static_cast<double>(n), raw, back.residual, inside ? 1.0 : 0.0});
    }
    report.pass = all_return;
    report.verdict = all_return ? "non-escaping: every rotation realigns into the neighborhood"
                                : "a rotated copy failed to realign";
    return report;
}

double energy_separation_threshold(const DiscreteMap& f1, const DiscreteMap& f2,
                                   const CalibrationReport& calib) {
    const double e1 = energy(f1);
    const double e2 = energy(f2);
    const double delta = std::abs(e1 - e2);
    if (!(delta > 0.02 * std::max(e1, e2) + 1e-9)) {
        throw ZeroGap("energy_separation_threshold: energy gap within quadrature noise");
    }
    const double c = calib.constant_estimate;
    if (!(c > 0.0)) {
        throw std::invalid_argument("energy_separation_threshold: calibration constant not positive");
    }
    const double s = sobolev_norm(f1, calib.params) + sobolev_norm(f2, calib.params);
    // positive root of 2 C eps^2 + 2 C s eps - delta = 0
    return 0.5 * (-s + std::sqrt(s * s + 2.0 * delta / c));
}

ExperimentReport separation_experiment(const DiscreteMap& f1, const DiscreteMap& f2, double eps1,
                                       double eps2, int sample_budget, std::uint64_t seed) {
    require_same_space(f1, f2);
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) {
        throw std::invalid_argument("separation_experiment: radii must be positive");
    }
    if (sample_budget < 1) throw std::invalid_argument("separation_experiment: empty budget");

    const SobolevParams params(1, 2.0);

    // not-same-orbit guard
    bool all_zero = true;
    for (const double d : map_difference(f1, f2)) {
        if (d != 0.0) {
            all_zero = false;
            break;
        }
    }
    if (all_zero) throw SameOrbitSuspected("separation_experiment: inputs are the same map");
    const bool const1 = !(diameter(f1) > kConstantFloor);
    const bool const2 = !(diameter(f2) > kConstantFloor);
    double orbit_gap = -1.0;
    if (!const1 && !const2) {
        orbit_gap = align(f1, f2, params, 3, mix_seed(seed, 0xA716u)).residual;
        if (orbit_gap <= 3.0 * (eps1 + eps2)) {
            throw SameOrbitSuspected("separation_experiment: alignment residual too small");
        }
    } else if (const1 && const2) {
        if (c0_distance(f1, f2) <= eps1 + eps2) {
            throw SameOrbitSuspected("separation_experiment: constants too close");
        }
    }
    // one constant and one genuine map can never share an orbit

    const double e1 = energy(f1);
    const double e2 = energy(f2);
    const double delta = std::abs(e1 - e2);
    const bool certificate = delta > 0.02 * std::max(e1, e2) + 1e-9;
    double eps_star = -1.0;
    if (certificate) {
        const CalibrationReport calib =
            calibrate_energy_bound(60, params, mix_seed(seed, 0xCA11Bu));
        eps_star = energy_separation_threshold(f1, f2, calib);
    }

    ExperimentReport report;
    report.experiment = "separation";
    report.seed = seed;
    report.parameters = {{"mesh_level", static_cast<double>(f1.mesh->level)},
                         {"eps1", eps1},
                         {"eps2", eps2},
                         {"samples", static_cast<double>(sample_budget)},
                         {"energy_f1", e1},
                         {"energy_f2", e2},
                         {"energy_gap", delta},
                         {"align_residual", orbit_gap},
                         {"certificate_active", certificate ? 1.0 : 0.0},
                         {"eps_star", eps_star}};
    report.steps.columns = {"sample", "distance", "energy_h1g1", "energy_h2g2", "gap_positive"};

    const NeighborhoodSpec ball1 = NeighborhoodSpec::sobolev(f1, eps1, params);
    const NeighborhoodSpec ball2 = NeighborhoodSpec::sobolev(f2, eps2, params);

    double min_distance = std::numeric_limits<double>::infinity();
    int gap_violations = 0;
    MobiusElement witness_g1 = MobiusElement::identity();
    MobiusElement witness_g2 = MobiusElement::identity();
    for (int s = 0; s < sample_budget; ++s) {
        Rng rng(mix_seed(seed, 1000u + static_cast<std::uint64_t>(s)));
        const DiscreteMap h1 = perturb_within(f1, ball1, rng);
        const DiscreteMap h2 = perturb_within(f2, ball2, rng);
        MobiusElement g1 = MobiusElement::identity();
        MobiusElement g2 = MobiusElement::identity();
        if (s % 4 == 3) {
            const int m = 1 + (s / 8) % 5;
            if ((s / 4) % 2 == 0) {
                g1 = escape_sequence(GroupFamily::G2, EscapeMode::dilate_to_inf, m);
                g2 = random_element(6.0, GroupFamily::G0, rng.next_u64());
            } else {
                g1 = random_element(6.0, GroupFamily::G0, rng.next_u64());
                g2 = escape_sequence(GroupFamily::G1, EscapeMode::translate_to_inf, m);
            }
        } else {
            g1 = random_element(6.0, GroupFamily::G0, rng.next_u64());
            g2 = random_element(6.0, GroupFamily::G0, rng.next_u64());
        }
        const DiscreteMap k1 = pullback(h1, g1);
        const DiscreteMap k2 = pullback(h2, g2);
        const double dist = sobolev_distance(k1, k2, params);
        const double ea = energy(k1);
        const double eb = energy(k2);
        const bool gap_ok = std::abs(ea - eb) > 0.0;
        if (certificate && !gap_ok) ++gap_violations;
        if (dist < min_distance) {
            min_distance = dist;
            witness_g1 = g1;
            witness_g2 = g2;
        }
        report.steps.rows.push_back(
            {static_cast<double>(s), dist, ea, eb, gap_ok ? 1.0 : 0.0});
    }

    report.parameters.emplace_back("min_distance", min_distance);
    report.parameters.emplace_back("gap_violations", static_cast<double>(gap_violations));
    report.witnesses.emplace_back("closest_g1", witness_g1.to_reals());
    report.witnesses.emplace_back("closest_g2", witness_g2.to_reals());
    report.pass = min_distance > 0.0 && gap_violations == 0;
    report.verdict = report.pass ? "neighborhoods stayed separated on every sample"
                                 : "separation violated";
    return report;
}

StabilizerEstimate stabilizer_search(const DiscreteMap& f, double threshold, int budget, int n,
                                     std::uint64_t seed) {
    require_non_constant(f, "stabilizer_search");
    if (!(threshold > 0.0)) throw std::invalid_argument("stabilizer_search: threshold positive");
    if (budget < 1 || n < 1) throw std::invalid_argument("stabilizer_search: bad budget or n");

    const SobolevParams params(1, 2.0);
    const auto residual = [&](const MobiusElement& g) {
        return sobolev_distance(pullback(f, g), f, params);
    };

    StabilizerEstimate out;
    out.threshold = threshold;

    std::vector<StabilizerCandidate> accepted;
    std::vector<MobiusElement> refine_seeds;
    bool escape_hit = false;

    // identity is always a member
    accepted.push_back({MobiusElement::identity(), residual(MobiusElement::identity())});

    // random draws in K_n
    for (int i = 0; i < budget; ++i) {
        const MobiusElement g =
            random_element(static_cast<double>(n), GroupFamily::G0,
                           mix_seed(seed, static_cast<std::uint64_t>(i)));
        const double r = residual(g);
        if (r <= threshold) {
            accepted.push_back({g, r});
        } else if (r < 4.0 * threshold && refine_seeds.size() < 8) {
            refine_seeds.push_back(g);
        }
    }

    // escape probes: none of these may fix f
    const std::pair<GroupFamily, EscapeMode> probes[] = {
        {GroupFamily::G2, EscapeMode::dilate_to_inf},
        {GroupFamily::G2, EscapeMode::dilate_to_zero},
        {GroupFamily::G1, EscapeMode::translate_to_inf},
        {GroupFamily::G1, EscapeMode::dilate_to_inf},
        {GroupFamily::G0, EscapeMode::dilate_to_inf},
    };
    for (const auto& [fam, mode] : probes) {
        for (int m = 1; m <= 6; ++m) {
            const MobiusElement g = escape_sequence(fam, mode, m);
            const double r = residual(g);
            if (r <= threshold) {
                accepted.push_back({g, r});
                escape_hit = true;
            }
        }
    }

    // rotation-circle scans about the coordinate axes, with golden
    // refinement at every local minimum of the scan
    const Vec3 axes[] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    constexpr int kScan = 64;
    for (const Vec3& ax : axes) {
        std::array<double, kScan> scan{};
        int hits = 0;
        for (int j = 0; j < kScan; ++j) {
            const double theta = 2.0 * kPi * j / kScan;
            const MobiusElement g = MobiusElement::rotation(ax, theta);
            scan[j] = residual(g);
            if (scan[j] <= threshold) {
                accepted.push_back({g, scan[j]});
                ++hits;
            }
        }
        out.best_circle_fraction =
            std::max(out.best_circle_fraction, static_cast<double>(hits) / kScan);
        for (int j = 0; j < kScan; ++j) {
            const double left = scan[(j + kScan - 1) % kScan];
            const double right = scan[(j + 1) % kScan];
            if (scan[j] <= left && scan[j] <= right && scan[j] > threshold) {
                const double theta = 2.0 * kPi * j / kScan;
                const double span = 2.0 * kPi / kScan;
                const double refined = golden_min(
                    [&](double t) { return residual(MobiusElement::rotation(ax, t)); },
                    theta - span, theta + span, 16);
                const MobiusElement g = MobiusElement::rotation(ax, refined);
                const double r = residual(g);
                if (r <= threshold) accepted.push_back({g, r});
            }
        }
    }

    // six-parameter local refinement around the near-miss random draws
    for (const MobiusElement& seed_g : refine_seeds) {
        // refine in the chart around the seed by composing on the right
        std::array<double, 6> x{};
        const auto local = [&](const std::array<double, 6>& t) {
            return residual(compose(seed_g, polar_chart(t)));
        };
        double value = local(x);
        double step = 0.15;
        for (int sweep = 0; sweep < 3; ++sweep) {
            for (int c = 0; c < 6; ++c) {
                const double cand = golden_min(
                    [&](double t) {
                        std::array<double, 6> probe = x;
                        probe[c] = t;
                        return local(probe);
                    },
                    x[c] - step, x[c] + step, 10);
                std::array<double, 6> probe = x;
                probe[c] = cand;
                const double v = local(probe);
                if (v < value) {
                    x = probe;
                    value = v;
                }
            }
            step *= 0.5;
        }
        if (value <= threshold) accepted.push_back({compose(seed_g, polar_chart(x)), value});
    }

    // merge near-duplicates, best residual first
    std::sort(accepted.begin(), accepted.end(),
              [](const StabilizerCandidate& a, const StabilizerCandidate& b) {
                  return a.residual < b.residual;
              });
    for (const StabilizerCandidate& cand : accepted) {
        bool fresh = true;
        for (const StabilizerCandidate& kept : out.candidates) {
            if (group_gap(cand.g, kept.g) < 0.25) {
                fresh = false;
                break;
            }
        }
        if (fresh) out.candidates.push_back(cand);
    }

    out.max_a_factor = 1.0;
    bool left_kn = false;
    for (const StabilizerCandidate& cand : out.candidates) {
        out.max_a_factor = std::max(out.max_a_factor, kak_decompose(cand.g).a);
        if (!in_compact_set(cand.g, CompactExhaustionIndex{n, GroupFamily::G0})) left_kn = true;
    }

    if (escape_hit || left_kn) {
        out.verdict = StabilizerEstimate::Verdict::noncompact_suspect;
    } else if (out.best_circle_fraction >= 0.75) {
        out.verdict = StabilizerEstimate::Verdict::circle_like;
    } else {
        out.verdict = StabilizerEstimate::Verdict::finite_like;
    }
    return out;
}

ExperimentReport precompact_witness(const DiscreteMap& f1, const DiscreteMap& f2, double eps,
                                    int sample_budget, std::uint64_t seed) {
    require_same_space(f1, f2);
    require_non_constant(f1, "precompact_witness");
    require_non_constant(f2, "precompact_witness");
    if (!(eps > 0.0)) throw std::invalid_argument("precompact_witness: eps must be positive");
    if (sample_budget < 1) throw std::invalid_argument("precompact_witness: empty budget");

    const SobolevParams params(1, 2.0);
    const AlignResult anchor = align(f1, f2, params, 2, mix_seed(seed, 0xA119u));

    ExperimentReport report;
    report.experiment = "precompact_witness";
    report.seed = seed;
    report.parameters = {{"mesh_level", static_cast<double>(f1.mesh->level)},
                         {"eps", eps},
                         {"samples", static_cast<double>(sample_budget)},
                         {"align_residual", anchor.residual}};
    report.steps.columns = {"sample", "mode", "a_factor", "c_entry", "distance", "accepted"};

    const NeighborhoodSpec ball1 = NeighborhoodSpec::c0(f1, eps);

    double max_a = 0.0;
    double max_c = 0.0;
    double hull_bound = 0.0;
    int accepted_count = 0;
    for (int s = 0; s < sample_budget; ++s) {
        Rng rng(mix_seed(seed, 3000u + static_cast<std::uint64_t>(s)));
        const DiscreteMap h = perturb_within(f1, ball1, rng);
        const int mode = s % 3;
        MobiusElement g = MobiusElement::identity();
        if (mode == 0) {
            // cluster around the aligned anchor, heavy on small moves
            const double u1 = rng.uniform();
            const double u2 = rng.uniform();
            const Vec3 p = rng.unit_vector() * (0.3 * u1 * u1 * u1);
            const Vec3 r = rng.unit_vector() * (0.3 * u2 * u2 * u2);
            g = compose(anchor.g, compose(MobiusElement::hermitian_exp(p), rotation_vec(r)));
        } else if (mode == 1) {
            g = random_element(2.0, GroupFamily::G0, rng.next_u64());
        } else {
            g = random_element(8.0, GroupFamily::G0, rng.next_u64());
        }
        const double dist = c0_distance(pullback(h, g), f2);
        const bool in_ball = dist < eps;
        const double a = kak_decompose(g).a;
        const double c_entry = std::abs(g.matrix().c);
        if (in_ball) {
            ++accepted_count;
            max_a = std::max(max_a, a);
            max_c = std::max(max_c, c_entry);
            hull_bound = std::max(hull_bound, exhaustion_size(g, GroupFamily::G0));
            if (report.witnesses.size() < 16) {
                report.witnesses.emplace_back("transporter_" + std::to_string(s), g.to_reals());
            }
        }
        report.steps.rows.push_back({static_cast<double>(s), static_cast<double>(mode), a, c_entry,
                                     dist, in_ball ? 1.0 : 0.0});
    }

    // every escape probe must fail the membership
    bool escape_excluded = true;
    const std::pair<GroupFamily, EscapeMode> probes[] = {
        {GroupFamily::G2, EscapeMode::dilate_to_inf},
        {GroupFamily::G2, EscapeMode::dilate_to_zero},
        {GroupFamily::G1, EscapeMode::translate_to_inf},
    };
    for (const auto& [fam, mode] : probes) {
        for (int m = 2; m <= 8; ++m) {
            const double dist = c0_distance(pullback(f1, escape_sequence(fam, mode, m)), f2);
            if (dist < eps) escape_excluded = false;
        }
    }

    const int hull_n = accepted_count > 0 ? static_cast<int>(std::ceil(hull_bound)) : 0;
    report.parameters.emplace_back("accepted", static_cast<double>(accepted_count));
    report.parameters.emplace_back("hull_a_factor", max_a);
    report.parameters.emplace_back("hull_c_entry", max_c);
    report.parameters.emplace_back("hull_n", static_cast<double>(hull_n));
    report.parameters.emplace_back("escape_excluded", escape_excluded ? 1.0 : 0.0);

    report.pass = escape_excluded;
    if (accepted_count == 0) {
        report.verdict = "vacuously pre-compact: no transporters sampled";
    } else if (report.pass) {
        report.verdict = "transporters confined to K_" + std::to_string(hull_n);
    } else {
        report.verdict = "an escape element entered the transporter set";
    }
    return report;
}

}  // namespace reparam
