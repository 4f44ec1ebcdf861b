#ifndef REINOPT_PARALLEL_HPP
#define REINOPT_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace reinopt {

// Execution policy for the Monte Carlo kernels. Serial is a plain loop kept
// as the reference implementation; OpenMP distributes replications across
// threads. Both fill the same per-index output slots, and every reduction
// downstream walks those slots in index order, so results are identical for
// any thread count.
enum class Exec {
    Serial,
    OpenMP,
};

struct ExecPolicy {
    Exec exec = Exec::OpenMP;
    int threads = 0; // 0 = library default
};

inline int effective_threads(const ExecPolicy& policy) {
#ifdef _OPENMP
    if (policy.exec == Exec::Serial) return 1;
    return policy.threads > 0 ? policy.threads : omp_get_max_threads();
#else
    (void)policy;
    return 1;
#endif
}

namespace detail_parallel {

// Exceptions may not escape an OpenMP region; the first one is kept and
// rethrown after the join.
class ErrorCollector {
public:
    template <class Fn>
    void run(Fn&& fn) noexcept {
        try {
            fn();
        } catch (...) {
            if (!failed_.exchange(true, std::memory_order_acq_rel)) {
                error_ = std::current_exception();
            }
        }
    }

    bool failed() const { return failed_.load(std::memory_order_acquire); }

    void rethrow_if_failed() const {
        if (failed_.load(std::memory_order_acquire)) std::rethrow_exception(error_);
    }

private:
    std::atomic<bool> failed_{false};
    std::exception_ptr error_;
};

} // namespace detail_parallel

// fn(i) writes into disjoint caller-owned slots keyed by i.
template <class Fn>
void for_indexed(std::size_t n, const ExecPolicy& policy, Fn&& fn) {
#ifdef _OPENMP
    if (policy.exec == Exec::OpenMP) {
        const int threads = effective_threads(policy);
        detail_parallel::ErrorCollector errors;
#pragma omp parallel for schedule(static) num_threads(threads)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            if (errors.failed()) continue;
            errors.run([&] { fn(static_cast<std::size_t>(i)); });
        }
        errors.rethrow_if_failed();
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

// out[i] = fn(i) for i in [0,n).
template <class T, class Fn>
void map_indexed(std::size_t n, const ExecPolicy& policy, Fn&& fn, std::vector<T>& out) {
    out.resize(n);
    for_indexed(n, policy, [&](std::size_t i) { out[i] = fn(i); });
}

// Serial reference driver, bitwise comparable against the OpenMP one.
template <class T, class Fn>
void map_indexed_serial(std::size_t n, Fn&& fn, std::vector<T>& out) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
}

} // namespace reinopt

#endif
