#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reparam/functionals.hpp"
#include "reparam/mapspace.hpp"

namespace reparam {

// A metric ball around a map. The membership test here is the single
// source of truth for every experiment that speaks of neighborhoods.
struct NeighborhoodSpec {
    DiscreteMap center;
    double radius = 0.0;
    std::optional<SobolevParams> norm;  // empty: sup distance

    static NeighborhoodSpec c0(DiscreteMap center, double radius);
    static NeighborhoodSpec sobolev(DiscreteMap center, double radius, const SobolevParams& params);

    double distance_to(const DiscreteMap& h) const;
    bool contains(const DiscreteMap& h) const;  // distance_to(h) < radius
};

struct ExperimentStepTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// Everything an experiment produced, reproducible bit for bit from the
// recorded parameters and seed.
struct ExperimentReport {
    std::string experiment;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> parameters;
    ExperimentStepTable steps;
    std::vector<std::pair<std::string, std::array<double, 8>>> witnesses;
    bool pass = false;
    std::string verdict;
};

// How far the discretization itself moves a map: the map is dragged
// around a small rotation loop and compared with itself. Experiments
// should not use tolerances below a few multiples of this.
double resampling_error(const DiscreteMap& f, const SobolevParams& params);
double resampling_error_c0(const DiscreteMap& f);

// Walks f along an escape sequence and records the distance to the
// neighborhood center at every stage. Passes when the orbit leaves the
// ball and stays out through the end of the probed range. Throws
// ConstantMapRejected for maps of near-zero image diameter, and
// std::invalid_argument when nbhd is not centered at f.
ExperimentReport orbit_escape_experiment(const DiscreteMap& f, GroupFamily family, EscapeMode mode,
                                         int n_max, const NeighborhoodSpec& nbhd);

// Control companion of the escape experiment: pure rotations instead of
// an escape sequence. Records the raw displacement and the residual
// after re-alignment; passes when every aligned residual stays inside
// the ball, labeling the sequence non-escaping.
ExperimentReport rotation_control_experiment(const DiscreteMap& f, int n_max,
                                             const NeighborhoodSpec& nbhd, std::uint64_t seed);

// Samples the two neighborhoods, moves both sides by group elements
// drawn from a large compact set plus escape elements, and reports the
// minimum distance observed. When the energies of f1 and f2 genuinely
// differ, an energy-gap certificate is evaluated alongside. Throws
// SameOrbitSuspected when f1 and f2 fail the not-same-orbit guard.
ExperimentReport separation_experiment(const DiscreteMap& f1, const DiscreteMap& f2, double eps1,
                                       double eps2, int sample_budget, std::uint64_t seed);

// Largest eps with |E(f1) - E(f2)| - 2 C eps (|f1| + |f2| + eps) > 0,
// where C comes from the calibration and the norms are taken with its
// parameters. Throws ZeroGap when the energy gap is within quadrature
// noise of zero.
double energy_separation_threshold(const DiscreteMap& f1, const DiscreteMap& f2,
                                   const CalibrationReport& calib);

struct StabilizerCandidate {
    MobiusElement g = MobiusElement::identity();
    double residual = 0.0;
};

struct StabilizerEstimate {
    enum class Verdict { finite_like, circle_like, noncompact_suspect };
    // accepted candidates after merging near-duplicates, best first
    std::vector<StabilizerCandidate> candidates;
    double threshold = 0.0;
    double max_a_factor = 1.0;
    // fraction of the densest rotation-circle scan that was accepted
    double best_circle_fraction = 0.0;
    Verdict verdict = Verdict::finite_like;
};

// Hunts for group elements fixing f up to the threshold: random draws
// in K_n, escape probes, rotation-circle scans about the coordinate
// axes, and local refinement around every promising point. The verdict
// is noncompact_suspect as soon as an accepted element leaves K_n or an
// escape probe slips under the threshold. Throws ConstantMapRejected.
StabilizerEstimate stabilizer_search(const DiscreteMap& f, double threshold, int budget, int n,
                                     std::uint64_t seed);

// Samples h near f1 and records every group element g that drags h into
// the eps-ball around f2. The witness is the hull of the recorded set:
// max KAK a-factor, max translation entry, and the smallest exhaustion
// index containing all of it. Escape probes must all fail the
// membership. Throws ConstantMapRejected.
ExperimentReport precompact_witness(const DiscreteMap& f1, const DiscreteMap& f2, double eps,
                                    int sample_budget, std::uint64_t seed);

struct AlignResult {
    MobiusElement g = MobiusElement::identity();
    double residual = 0.0;
};

// Best-effort registration: minimizes sobolev_distance(pullback(f, g), h)
// over the whole group by multi-start coordinate descent in the
// six-parameter polar chart (Hermitian exponential times rotation).
// budget counts optimizer starts beyond the identity start. The returned
// residual is the contract; g is only as good as it.
AlignResult align(const DiscreteMap& f, const DiscreteMap& h, const SobolevParams& params,
                  int budget, std::uint64_t seed);

}  // namespace reparam
