// Compares the serial reference kernels against the OpenMP ones on
// synthetic instances and reports timings plus the observed deviation.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "taxoforge/gmm.hpp"
#include "taxoforge/parallel.hpp"
#include "taxoforge/rng.hpp"
#include "taxoforge/search.hpp"

using namespace taxoforge;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

AspectEmbeddings random_embeddings(std::size_t rows, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    AspectEmbeddings m;
    m.aspect_name = "bench";
    m.rows = rows;
    m.dim = dim;
    m.data.resize(rows * dim);
    // a few planted centers keep EM busy for a realistic iteration count
    const int centers = 8;
    std::vector<double> mu(centers * dim);
    for (auto& v : mu) v = rng.normal();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* c = mu.data() + (r % centers) * dim;
        for (std::size_t t = 0; t < dim; ++t) m.data[r * dim + t] = c[t] + 0.3 * rng.normal();
    }
    return m;
}

std::vector<SoftAssignment> random_instance(std::size_t rows, int aspects, int k,
                                            std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SoftAssignment> out;
    for (int a = 0; a < aspects; ++a) {
        SoftAssignment s;
        s.aspect_name = "a" + std::to_string(a);
        s.rows = rows;
        s.k = static_cast<std::size_t>(k);
        s.probs.resize(rows * s.k);
        for (std::size_t d = 0; d < rows; ++d) {
            double total = 0.0;
            for (int i = 0; i < k; ++i) {
                double v = -std::log(1.0 - rng.uniform());
                s.probs[d * s.k + i] = v;
                total += v;
            }
            for (int i = 0; i < k; ++i) s.probs[d * s.k + i] /= total;
        }
        out.push_back(std::move(s));
    }
    return out;
}

struct Timing {
    double serial_ms = 0.0;
    double openmp_ms = 0.0;
    double max_delta = 0.0;
};

void print_row(const std::string& name, const Timing& t) {
    std::printf("%-34s %10.1f %10.1f %8.2fx %12.3e\n", name.c_str(), t.serial_ms, t.openmp_ms,
                t.openmp_ms > 0 ? t.serial_ms / t.openmp_ms : 0.0, t.max_delta);
}

Timing bench_gmm(std::size_t rows, std::size_t dim, int k) {
    auto data = random_embeddings(rows, dim, 11);
    GmmConfig cfg;
    cfg.project = false;
    Timing t;

    cfg.exec = ExecMode::Serial;
    double t0 = now_ms();
    GmmModel serial = fit_gmm(data, k, 7, cfg);
    t.serial_ms = now_ms() - t0;

    cfg.exec = ExecMode::OpenMP;
    t0 = now_ms();
    GmmModel parallel = fit_gmm(data, k, 7, cfg);
    t.openmp_ms = now_ms() - t0;

    for (std::size_t i = 0; i < serial.means.size(); ++i)
        t.max_delta = std::max(t.max_delta, std::abs(serial.means[i] - parallel.means[i]));
    return t;
}

Timing bench_search(std::size_t rows, int aspects, int k, int kv, bool prune) {
    auto inst = random_instance(rows, aspects, k, 23);
    SearchOptions opts;
    opts.prune = prune;
    opts.seed = 5;
    Timing t;

    opts.exec = ExecMode::Serial;
    double t0 = now_ms();
    auto serial = search_optimal(inst, kv, opts);
    t.serial_ms = now_ms() - t0;

    opts.exec = ExecMode::OpenMP;
    t0 = now_ms();
    auto parallel = search_optimal(inst, kv, opts);
    t.openmp_ms = now_ms() - t0;

    t.max_delta = std::abs(serial.max_score - parallel.max_score);
    return t;
}

} // namespace

int main(int argc, char** argv) {
    bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    std::printf("threads available: %d\n\n", hardware_threads());
    std::printf("%-34s %10s %10s %9s %12s\n", "kernel", "serial ms", "openmp ms", "speedup",
                "max |delta|");

    if (quick) {
        print_row("gmm fit 500x64 k=4", bench_gmm(500, 64, 4));
        print_row("search 200 docs 4x4 kv=4", bench_search(200, 4, 4, 4, false));
    } else {
        print_row("gmm fit 2000x128 k=8", bench_gmm(2000, 128, 8));
        print_row("gmm fit 5000x256 k=4", bench_gmm(5000, 256, 4));
        print_row("search 500 docs 5x4 kv=4", bench_search(500, 5, 4, 4, false));
        print_row("search 500 docs 6x4 kv=4", bench_search(500, 6, 4, 4, false));
        print_row("search+prune 500 docs 6x4 kv=4", bench_search(500, 6, 4, 4, true));
    }
    return 0;
}
