// Times the OpenMP kernels against their serial reference twins on one
// mesh level. Usage: bench_kernels [level] [repeats].

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "reparam/functionals.hpp"
#include "reparam/mapspace.hpp"
#include "reparam/mobius.hpp"
#include "reparam/parallel.hpp"

using namespace reparam;

namespace {

double time_ms(int repeats, const std::function<void()>& body) {
    body();  // warm-up, also touches lazily built mesh caches
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) body();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

void row(const char* name, double serial_ms, double parallel_ms, double max_diff) {
    std::printf("%-14s %10.3f ms %12.3f ms %8.2fx   max diff %.3e\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms, max_diff);
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap_from_env();
    const int level = argc > 1 ? std::atoi(argv[1]) : 5;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;

    auto mesh = make_mesh(level);
    const DiscreteMap f = power_map(mesh, 2);
    const MobiusElement g =
        compose(MobiusElement::hermitian_exp({0.4, -0.2, 0.3}),
                MobiusElement::rotation(normalized({1.0, 2.0, 2.0}), 0.9));

    std::printf("level %d: %zu vertices, %zu faces, %d threads, %d repeats\n", level,
                mesh->vertices.size(), mesh->faces.size(), effective_threads(), repeats);
    std::printf("%-14s %13s %15s %9s\n", "kernel", "serial", "parallel", "speedup");

    double e_serial = 0.0, e_par = 0.0;
    const double t_es = time_ms(repeats, [&] { e_serial = reference::energy_serial(f); });
    const double t_ep = time_ms(repeats, [&] { e_par = energy(f); });
    row("energy", t_es, t_ep, std::abs(e_serial - e_par));

    DiscreteMap pb_serial, pb_par;
    const double t_ps = time_ms(repeats, [&] { pb_serial = reference::pullback_serial(f, g); });
    const double t_pp = time_ms(repeats, [&] { pb_par = pullback(f, g); });
    double pb_diff = 0.0;
    for (std::size_t i = 0; i < pb_serial.values.size(); ++i) {
        pb_diff = std::max(pb_diff, std::abs(pb_serial.values[i] - pb_par.values[i]));
    }
    row("pullback", t_ps, t_pp, pb_diff);

    const SphericalRegion all = SphericalRegion::chart_disc(Complex(0.0, 0.0), 1e100);
    double d_serial = 0.0, d_par = 0.0;
    const double t_ds = time_ms(repeats, [&] { d_serial = reference::diameter_exact(f, all); });
    const double t_dp = time_ms(repeats, [&] { d_par = diameter(f); });
    row("diameter", t_ds, t_dp, std::abs(d_serial - d_par));

    return 0;
}
