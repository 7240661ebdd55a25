// Compares the OpenMP kernels against their serial references on random
// numeric tables and reports the speedup. Also sanity-checks that both
// variants return bit-identical results before timing.

#include <chrono>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "synthweave/dataset.hpp"
#include "synthweave/kernels.hpp"
#include "synthweave/rng.hpp"

using namespace synthweave;

namespace {

Table random_table(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Schema schema;
    for (std::size_t c = 0; c < cols; ++c)
        schema.columns.push_back({"f" + std::to_string(c), ColumnKind::Numeric});
    Table t(schema, std::vector<std::vector<std::string>>(cols));
    Rng rng(seed);
    for (std::size_t r = 0; r < rows; ++r) {
        Row row(cols);
        for (std::size_t c = 0; c < cols; ++c) row[c] = Cell::number(rng.next_double());
        t.add_row(std::move(row));
    }
    return t;
}

template <typename F>
double time_ms(F&& fn, int reps) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void print_row(const std::string& kernel, std::size_t n, double serial_ms, double parallel_ms) {
    std::cout << std::left << std::setw(18) << kernel << std::right << std::setw(10) << n
              << std::fixed << std::setprecision(3) << std::setw(14) << serial_ms
              << std::setw(14) << parallel_ms << std::setprecision(2) << std::setw(10)
              << serial_ms / parallel_ms << "\n";
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::cout << "OpenMP threads: " << omp_get_max_threads() << "\n";
#else
    std::cout << "built without OpenMP; both columns run serially\n";
#endif
    std::cout << std::left << std::setw(18) << "kernel" << std::right << std::setw(10) << "rows"
              << std::setw(14) << "serial ms" << std::setw(14) << "parallel ms" << std::setw(10)
              << "speedup" << "\n";
    std::cout << std::string(66, '-') << "\n";

    for (std::size_t n : {2000u, 10000u, 50000u}) {
        const Table t = random_table(n, 8, 42);
        const Scaler scaler = fit_scaler(t);
        const RowDistance dist{&t.schema(), &scaler, 2.0};
        auto d = [&](std::uint32_t a, std::uint32_t b) { return dist(t.row(a), t.row(b)); };

        std::vector<std::uint32_t> all(n);
        std::iota(all.begin(), all.end(), 0u);

        // distance scan
        {
            const auto ref = kernels::distances_from_serial(all, 0, d);
            const auto par = kernels::distances_from(all, 0, d);
            if (ref != par) {
                std::cerr << "distance scan mismatch\n";
                return 1;
            }
            const int reps = n <= 10000 ? 20 : 5;
            const double s = time_ms([&] { kernels::distances_from_serial(all, 0, d); }, reps);
            const double p = time_ms([&] { kernels::distances_from(all, 0, d); }, reps);
            print_row("distance_scan", n, s, p);
        }

        // nearest neighbor over 500 queries
        {
            const std::size_t n_q = 500;
            const auto ref = kernels::batch_nearest_serial(n_q, all, d);
            const auto par = kernels::batch_nearest(n_q, all, d);
            if (ref != par) {
                std::cerr << "nearest mismatch\n";
                return 1;
            }
            const double s = time_ms([&] { kernels::batch_nearest_serial(n_q, all, d); }, 3);
            const double p = time_ms([&] { kernels::batch_nearest(n_q, all, d); }, 3);
            print_row("batch_nearest", n, s, p);
        }

        // k nearest neighbors over 200 queries
        {
            const std::size_t n_q = 200;
            const auto ref = kernels::batch_knn_serial(n_q, n, 10, true, d);
            const auto par = kernels::batch_knn(n_q, n, 10, true, d);
            if (ref != par) {
                std::cerr << "knn mismatch\n";
                return 1;
            }
            const double s = time_ms([&] { kernels::batch_knn_serial(n_q, n, 10, true, d); }, 3);
            const double p = time_ms([&] { kernels::batch_knn(n_q, n, 10, true, d); }, 3);
            print_row("batch_knn", n, s, p);
        }
    }
    std::cout << "all parallel kernels matched their serial references\n";
    return 0;
}
