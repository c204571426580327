#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <mutex>
#include <span>
#include <vector>

#include "clv/carnot.hpp"
#include "clv/errors.hpp"
#include "clv/field.hpp"
#include "clv/rng.hpp"

namespace clv {

struct QuadratureBudget {
    std::int64_t samples = 100000;
    std::uint64_t seed = 1;
    enum class Method { monte_carlo, tensor_grid };
    Method method = Method::monte_carlo;
    double exclusion_radius = 0.0;  // mask radius (in S-distance) around declared singular points
    int jobs = 1;

    QuadratureBudget with_seed(std::uint64_t s) const {
        QuadratureBudget b = *this;
        b.seed = s;
        return b;
    }
    QuadratureBudget with_samples(std::int64_t n) const {
        QuadratureBudget b = *this;
        b.samples = n;
        return b;
    }
};

struct IntegralEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t samples_used = 0;
    double excluded_measure = 0.0;
};

struct ValueSE {
    double value = 0.0;
    double se = 0.0;
};

// First and second moments of a vector of per-draw component values, sampled
// uniformly over the bounding box of B_{box_radius}. cov is the covariance of
// the component MEANS (sample covariance divided by the number of draws).
struct MeanStats {
    int k = 0;
    std::vector<double> mean;
    std::vector<double> cov;  // row-major k x k
    std::int64_t draws = 0;
    double box_volume = 0.0;
    double excluded_fraction = 0.0;

    double cov_at(int i, int j) const { return cov[i * k + j]; }
};

// Per-draw evaluation: receives the point and its norm value, writes k
// component values (indicator-gated integrands).
using ComponentsFn = std::function<void(std::span<const double>, double, std::span<double>)>;

namespace detail {

inline constexpr std::int64_t kChunk = 16384;

// Runs fn(chunk_index) for all chunks; with jobs > 1 the chunks execute on a
// small pool. Callers must only write chunk-indexed slots from fn.
template <typename Fn>
void for_each_chunk(std::int64_t n_chunks, int jobs, Fn&& fn) {
    if (jobs <= 1 || n_chunks <= 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::int64_t> next{0};
    const int workers = static_cast<int>(std::min<std::int64_t>(jobs, n_chunks));
    std::vector<std::future<void>> pool;
    pool.reserve(workers);
    for (int wkr = 0; wkr < workers; ++wkr)
        pool.emplace_back(std::async(std::launch::async, [&] {
            for (std::int64_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) fn(c);
        }));
    for (auto& f : pool) f.get();
}

struct BoxSpec {
    int N = 0;
    double half_width[kMaxDim];
    double volume = 1.0;
};

inline BoxSpec make_box(const CarnotGroup& g, const HomogeneousNorm& s, double radius) {
    BoxSpec box;
    box.N = g.ambient_dim;
    s.box_half_widths(g, radius, {box.half_width, static_cast<std::size_t>(box.N)});
    box.volume = 1.0;
    for (int j = 0; j < box.N; ++j) box.volume *= 2.0 * box.half_width[j];
    return box;
}

inline bool masked(const CarnotGroup& g, const HomogeneousNorm& s,
                   std::span<const std::vector<double>> singulars, double excl,
                   std::span<const double> x) {
    if (excl <= 0.0 || singulars.empty()) return false;
    const int N = g.ambient_dim;
    double inv[kMaxDim], rel[kMaxDim];
    for (const auto& sp : singulars) {
        g.inverse(sp, {inv, static_cast<std::size_t>(N)});
        g.compose({inv, static_cast<std::size_t>(N)}, x, {rel, static_cast<std::size_t>(N)});
        if (s.value({rel, static_cast<std::size_t>(N)}) < excl) return true;
    }
    return false;
}

// Kahan-compensated accumulator; keeps constant-field means exact to a few
// ulp independently of the sample count.
struct KahanAcc {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

struct ChunkSums {
    std::vector<KahanAcc> s1;   // component sums
    std::vector<double> s2;     // upper-triangular cross sums
    std::int64_t masked_count = 0;
};

}  // namespace detail

inline MeanStats sample_components(const CarnotGroup& g, const HomogeneousNorm& s,
                                   double box_radius, int k, const ComponentsFn& components,
                                   const QuadratureBudget& budget,
                                   std::span<const std::vector<double>> singular_points = {}) {
    if (budget.samples < 1) throw ConfigError("quadrature budget must have samples >= 1");
    if (k < 1 || k > 64) throw ConfigError("sample_components supports 1..64 components");
    const detail::BoxSpec box = detail::make_box(g, s, box_radius);
    const int N = box.N;
    const int npairs = k * (k + 1) / 2;

    if (budget.method == QuadratureBudget::Method::tensor_grid) {
        // Midpoint product rule; no statistical error estimate.
        const int m = std::max(2, static_cast<int>(std::floor(
                                      std::pow(static_cast<double>(budget.samples), 1.0 / N))));
        std::int64_t total = 1;
        for (int j = 0; j < N; ++j) total *= m;
        MeanStats st;
        st.k = k;
        st.mean.assign(k, 0.0);
        st.cov.assign(k * k, 0.0);
        st.draws = total;
        st.box_volume = box.volume;
        std::vector<double> x(N), vals(k);
        std::int64_t masked_count = 0;
        for (std::int64_t idx = 0; idx < total; ++idx) {
            std::int64_t rem = idx;
            for (int j = 0; j < N; ++j) {
                const int cell = static_cast<int>(rem % m);
                rem /= m;
                x[j] = -box.half_width[j] + (2.0 * box.half_width[j]) * ((cell + 0.5) / m);
            }
            if (detail::masked(g, s, singular_points, budget.exclusion_radius, x)) {
                ++masked_count;
                continue;
            }
            const double sv = s.value(x);
            components(x, sv, vals);
            for (int j = 0; j < k; ++j) {
                if (std::isnan(vals[j])) throw EvaluationError("integrand returned NaN", x);
                st.mean[j] += vals[j];
            }
        }
        for (int j = 0; j < k; ++j) st.mean[j] /= static_cast<double>(total);
        st.excluded_fraction = static_cast<double>(masked_count) / static_cast<double>(total);
        return st;
    }

    const std::int64_t M = budget.samples;
    const std::int64_t n_chunks = (M + detail::kChunk - 1) / detail::kChunk;
    std::vector<detail::ChunkSums> slots(n_chunks);
    std::atomic<bool> failed{false};
    std::vector<double> fail_point;
    std::mutex fail_mutex;

    detail::for_each_chunk(n_chunks, budget.jobs, [&](std::int64_t c) {
        if (failed.load(std::memory_order_relaxed)) return;
        detail::ChunkSums sums;
        sums.s1.assign(k, detail::KahanAcc{});
        sums.s2.assign(npairs, 0.0);
        Rng rng(derive_seed(budget.seed, static_cast<std::uint64_t>(c)));
        const std::int64_t lo = c * detail::kChunk;
        const std::int64_t hi = std::min(M, lo + detail::kChunk);
        double x[kMaxDim], vals[64];
        for (std::int64_t i = lo; i < hi; ++i) {
            for (int j = 0; j < N; ++j) x[j] = rng.uniform(-box.half_width[j], box.half_width[j]);
            std::span<const double> xs{x, static_cast<std::size_t>(N)};
            if (detail::masked(g, s, singular_points, budget.exclusion_radius, xs)) {
                ++sums.masked_count;
                continue;
            }
            const double sv = s.value(xs);
            components(xs, sv, {vals, static_cast<std::size_t>(k)});
            for (int j = 0; j < k; ++j) {
                if (std::isnan(vals[j])) {
                    std::lock_guard<std::mutex> lock(fail_mutex);
                    if (!failed.exchange(true)) fail_point.assign(x, x + N);
                    return;
                }
            }
            int pair = 0;
            for (int a = 0; a < k; ++a) {
                sums.s1[a].add(vals[a]);
                for (int b = a; b < k; ++b, ++pair) sums.s2[pair] += vals[a] * vals[b];
            }
        }
        slots[c] = std::move(sums);
    });
    if (failed.load())
        throw EvaluationError("integrand returned NaN", fail_point);

    MeanStats st;
    st.k = k;
    st.mean.assign(k, 0.0);
    st.cov.assign(k * k, 0.0);
    st.draws = M;
    st.box_volume = box.volume;
    std::vector<detail::KahanAcc> s1(k);
    std::vector<double> s2(npairs, 0.0);
    std::int64_t masked_count = 0;
    for (std::int64_t c = 0; c < n_chunks; ++c) {  // fixed reduction order
        for (int j = 0; j < k; ++j) s1[j].add(slots[c].s1[j].sum);
        for (int j = 0; j < npairs; ++j) s2[j] += slots[c].s2[j];
        masked_count += slots[c].masked_count;
    }
    const double Md = static_cast<double>(M);
    for (int j = 0; j < k; ++j) st.mean[j] = s1[j].sum / Md;
    if (M > 1) {
        int pair = 0;
        for (int a = 0; a < k; ++a)
            for (int b = a; b < k; ++b, ++pair) {
                double sample_cov = (s2[pair] - Md * st.mean[a] * st.mean[b]) / (Md - 1.0);
                if (a == b) sample_cov = std::max(0.0, sample_cov);
                st.cov[a * k + b] = st.cov[b * k + a] = sample_cov / Md;
            }
    }
    st.excluded_fraction = static_cast<double>(masked_count) / Md;
    return st;
}

// First-order (delta method) propagation of the sampling covariance through a
// smooth statistic of the component means. The gradient is taken by central
// differences, which is exact for the linear case.
inline ValueSE delta_method(const MeanStats& st,
                            const std::function<double(std::span<const double>)>& stat) {
    const int k = st.k;
    std::vector<double> m = st.mean;
    ValueSE out;
    out.value = stat(m);
    std::vector<double> grad(k, 0.0);
    for (int j = 0; j < k; ++j) {
        const double h = 1e-6 * std::max(std::abs(m[j]), 1e-12);
        const double saved = m[j];
        m[j] = saved + h;
        const double fp = stat(m);
        m[j] = saved - h;
        const double fm = stat(m);
        m[j] = saved;
        grad[j] = (fp - fm) / (2.0 * h);
    }
    double var = 0.0;
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) var += grad[a] * st.cov_at(a, b) * grad[b];
    out.se = std::sqrt(std::max(0.0, var));
    return out;
}

inline IntegralEstimate integrate(const CarnotGroup& g, const HomogeneousNorm& s, Region region,
                                  const ScalarField& w, const QuadratureBudget& budget) {
    // The hit count rides along as a second component so the empty-region
    // error can be raised from the same sample stream.
    const ComponentsFn comp = [&](std::span<const double> x, double sv, std::span<double> out) {
        if (region.contains(sv)) {
            out[0] = w.evaluate(x);
            out[1] = 1.0;
        } else {
            out[0] = 0.0;
            out[1] = 0.0;
        }
    };
    MeanStats st = sample_components(g, s, region.outer_radius(), 2, comp, budget,
                                     w.singular_points);
    if (st.mean[1] == 0.0) throw ConfigError("integrate: no samples landed in the region");
    IntegralEstimate est;
    est.value = st.box_volume * st.mean[0];
    est.std_error = st.box_volume * std::sqrt(std::max(0.0, st.cov_at(0, 0)));
    est.samples_used = st.draws;
    est.excluded_measure = st.box_volume * st.excluded_fraction;
    return est;
}

inline IntegralEstimate region_measure(const CarnotGroup& g, const HomogeneousNorm& s,
                                       Region region, const QuadratureBudget& budget) {
    return integrate(g, s, region, constant_field(1.0), budget);
}

// Ratio estimator sharing one sample set between numerator and denominator,
// so that average * measure reproduces integrate up to rounding.
inline IntegralEstimate average(const CarnotGroup& g, const HomogeneousNorm& s, Region region,
                                const ScalarField& w, const QuadratureBudget& budget) {
    const ComponentsFn comp = [&](std::span<const double> x, double sv, std::span<double> out) {
        if (region.contains(sv)) {
            out[0] = w.evaluate(x);
            out[1] = 1.0;
        } else {
            out[0] = 0.0;
            out[1] = 0.0;
        }
    };
    MeanStats st = sample_components(g, s, region.outer_radius(), 2, comp, budget,
                                     w.singular_points);
    if (st.mean[1] == 0.0) throw ConfigError("average: no samples landed in the region");
    ValueSE v = delta_method(st, [](std::span<const double> m) { return m[0] / m[1]; });
    IntegralEstimate est;
    est.value = v.value;
    est.std_error = v.se;
    est.samples_used = st.draws;
    est.excluded_measure = st.box_volume * st.excluded_fraction;
    return est;
}

// Minimum of w over the sample cloud, refined by a deterministic pattern
// search seeded at the best samples. This is an upper-bound estimator of the
// essential infimum: it can only overestimate the true infimum.
inline double ess_inf(const CarnotGroup& g, const HomogeneousNorm& s, Region region,
                      const ScalarField& w, const QuadratureBudget& budget) {
    const int N = g.ambient_dim;
    const std::int64_t M = budget.samples;
    const std::int64_t n_chunks = (M + detail::kChunk - 1) / detail::kChunk;
    const detail::BoxSpec box = detail::make_box(g, s, region.outer_radius());
    struct Best {
        double value;
        std::vector<double> x;
    };
    std::vector<std::vector<Best>> slots(n_chunks);

    detail::for_each_chunk(n_chunks, budget.jobs, [&](std::int64_t c) {
        Rng rng(derive_seed(budget.seed, static_cast<std::uint64_t>(c)));
        const std::int64_t lo = c * detail::kChunk;
        const std::int64_t hi = std::min(M, lo + detail::kChunk);
        double x[kMaxDim];
        std::vector<Best> best;
        for (std::int64_t i = lo; i < hi; ++i) {
            for (int j = 0; j < N; ++j) x[j] = rng.uniform(-box.half_width[j], box.half_width[j]);
            std::span<const double> xs{x, static_cast<std::size_t>(N)};
            if (!region.contains(s.value(xs))) continue;
            if (detail::masked(g, s, w.singular_points, budget.exclusion_radius, xs)) continue;
            const double v = w.checked_eval(xs);
            if (best.size() < 10 || v < best.back().value) {
                best.push_back({v, std::vector<double>(x, x + N)});
                std::sort(best.begin(), best.end(),
                          [](const Best& a, const Best& b) { return a.value < b.value; });
                if (best.size() > 10) best.pop_back();
            }
        }
        slots[c] = std::move(best);
    });

    std::vector<Best> seeds;
    for (auto& chunk_best : slots)
        for (auto& b : chunk_best) seeds.push_back(std::move(b));
    if (seeds.empty()) throw ConfigError("ess_inf: no samples landed in the region");
    std::stable_sort(seeds.begin(), seeds.end(),
                     [](const Best& a, const Best& b) { return a.value < b.value; });
    if (seeds.size() > 10) seeds.resize(10);

    double inf = seeds.front().value;
    for (const auto& seed_pt : seeds) {
        std::vector<double> x = seed_pt.x;
        double fx = seed_pt.value;
        double scale = 0.05;
        std::vector<double> probe(N);
        while (scale > 1e-9) {
            bool improved = false;
            for (int j = 0; j < N; ++j) {
                const double step = scale * box.half_width[j];
                for (int sgn = -1; sgn <= 1; sgn += 2) {
                    probe = x;
                    probe[j] += sgn * step;
                    if (!region.contains(s.value(probe))) continue;
                    if (detail::masked(g, s, w.singular_points, budget.exclusion_radius, probe))
                        continue;
                    const double v = w.checked_eval(probe);
                    if (v < fx) {
                        fx = v;
                        x = probe;
                        improved = true;
                    }
                }
            }
            if (!improved) scale *= 0.5;
        }
        inf = std::min(inf, fx);
    }
    return inf;
}

// Fraction of the region cloud with w < eps (Monte-Carlo measure fraction of
// the sublevel set).
inline double sublevel_fraction(const CarnotGroup& g, const HomogeneousNorm& s, Region region,
                                const ScalarField& w, double eps, const QuadratureBudget& budget) {
    if (!(eps > 0.0)) throw ConfigError("sublevel_fraction: eps must be positive");
    const ComponentsFn comp = [&](std::span<const double> x, double sv, std::span<double> out) {
        if (region.contains(sv)) {
            out[0] = (w.evaluate(x) < eps) ? 1.0 : 0.0;
            out[1] = 1.0;
        } else {
            out[0] = 0.0;
            out[1] = 0.0;
        }
    };
    MeanStats st = sample_components(g, s, region.outer_radius(), 2, comp, budget,
                                     w.singular_points);
    if (st.mean[1] == 0.0) throw ConfigError("sublevel_fraction: no samples landed in the region");
    return st.mean[0] / st.mean[1];
}

}  // namespace clv
