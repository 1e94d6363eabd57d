// Serial vs OpenMP: dense kernels and a replication loop.
#include <glamer/kernels.hpp>
#include <glamer/simbench.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

using namespace glamer;
using Clock = std::chrono::steady_clock;

template <class F>
static double best_of(int reps, F&& f)
{
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = Clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    return best;
}

static void kernels_bench(Eigen::Index n, Eigen::Index p)
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) X(i, j) = g(rng);
    Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return g(rng); });
    Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) { return g(rng); });
    Eigen::VectorXd o1, o2, o3, o4;

    double ts = best_of(20, [&] { kernels::serial::xt_times(X, v, o1); });
    double tp = best_of(20, [&] { kernels::omp::xt_times(X, v, o2); });
    double ts2 = best_of(20, [&] { kernels::serial::times(X, b, o3); });
    double tp2 = best_of(20, [&] { kernels::omp::times(X, b, o4); });
    bool same = o1 == o2 && o3 == o4;
    std::printf("%6ld x %4ld  X'v serial %9.3f ms  omp %9.3f ms  x%.2f | Xb serial %9.3f ms  omp %9.3f ms  x%.2f  %s\n",
                static_cast<long>(n), static_cast<long>(p), ts * 1e3, tp * 1e3, ts / tp, ts2 * 1e3, tp2 * 1e3,
                ts2 / tp2, same ? "identical" : "MISMATCH");
}

static void replication_bench(int reps)
{
    SyntheticSpec spec;
    spec.n = 200;
    spec.sigma = 1.0;
    spec.seed = 11;
    spec.factors.push_back({"f", 8, {0, 0, 0, 0, 1, 1, 1, 1}, {0.0, 2.0}});
    MethodConfig mc;
    mc.method = Method::glamer_ric;
    mc.net.n_lambda = 30;

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    std::vector<CurvePoint> serial, parallel;
    double ts = best_of(1, [&] { serial = consistency_experiment(spec, GridAxis::n, {200.0}, reps, mc); });
#ifdef _OPENMP
    omp_set_num_threads(threads);
#endif
    double tp = best_of(1, [&] { parallel = consistency_experiment(spec, GridAxis::n, {200.0}, reps, mc); });
    bool same = serial[0].recovery_rate == parallel[0].recovery_rate && serial[0].mean_md == parallel[0].mean_md;
    std::printf("%d replications  1 thread %.3f s  %d threads %.3f s  x%.2f  %s\n", reps, ts, threads, tp, ts / tp,
                same ? "identical" : "MISMATCH");
}

int main(int argc, char** argv)
{
    int reps = argc > 1 ? std::atoi(argv[1]) : 20;
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif
    for (auto [n, p] : {std::pair<Eigen::Index, Eigen::Index>{200, 20}, {2000, 50}, {20000, 100}, {100000, 200}})
        kernels_bench(n, p);
    replication_bench(reps);
    return 0;
}
