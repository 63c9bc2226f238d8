// AVX2+FMA kernels. Four quaternion coordinates per step; the channel-major
// layout makes every load a plain contiguous one. Compiled as its own
// translation unit with -mavx2 -mfma so the rest of the binary stays on the
// baseline ISA; selection happens at runtime in kernels.cpp.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "rotateqvs/kernels.hpp"

namespace rqvs::kern {
namespace {

struct Q4 {
    __m256d w, x, y, z;
};

inline Q4 load4(ConstQuatView v, std::size_t i) {
    return {_mm256_loadu_pd(v.w + i), _mm256_loadu_pd(v.x + i), _mm256_loadu_pd(v.y + i),
            _mm256_loadu_pd(v.z + i)};
}

inline void store4(QuatView v, std::size_t i, Q4 q) {
    _mm256_storeu_pd(v.w + i, q.w);
    _mm256_storeu_pd(v.x + i, q.x);
    _mm256_storeu_pd(v.y + i, q.y);
    _mm256_storeu_pd(v.z + i, q.z);
}

inline Q4 conj4(Q4 q) {
    const __m256d zero = _mm256_setzero_pd();
    return {q.w, _mm256_sub_pd(zero, q.x), _mm256_sub_pd(zero, q.y), _mm256_sub_pd(zero, q.z)};
}

// Hamilton product, same coordinate expansion as the scalar route but with
// fused multiply-adds.
inline Q4 ham4(Q4 a, Q4 b) {
    __m256d w = _mm256_mul_pd(a.w, b.w);
    w = _mm256_fnmadd_pd(a.x, b.x, w);
    w = _mm256_fnmadd_pd(a.y, b.y, w);
    w = _mm256_fnmadd_pd(a.z, b.z, w);

    __m256d x = _mm256_mul_pd(a.w, b.x);
    x = _mm256_fmadd_pd(a.x, b.w, x);
    x = _mm256_fmadd_pd(a.y, b.z, x);
    x = _mm256_fnmadd_pd(a.z, b.y, x);

    __m256d y = _mm256_mul_pd(a.w, b.y);
    y = _mm256_fnmadd_pd(a.x, b.z, y);
    y = _mm256_fmadd_pd(a.y, b.w, y);
    y = _mm256_fmadd_pd(a.z, b.x, y);

    __m256d z = _mm256_mul_pd(a.w, b.z);
    z = _mm256_fmadd_pd(a.x, b.y, z);
    z = _mm256_fnmadd_pd(a.y, b.x, z);
    z = _mm256_fmadd_pd(a.z, b.w, z);

    return {w, x, y, z};
}

inline __m256d norm_sq4(Q4 q) {
    __m256d n = _mm256_mul_pd(q.w, q.w);
    n = _mm256_fmadd_pd(q.x, q.x, n);
    n = _mm256_fmadd_pd(q.y, q.y, n);
    n = _mm256_fmadd_pd(q.z, q.z, n);
    return n;
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void k_normalize(ConstQuatView t, QuatView out, double* inv_norms) {
    const __m256d floor4 = _mm256_set1_pd(detail::kZeroNormSq);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t m = 0;
    for (; m + 4 <= t.n; m += 4) {
        const Q4 q = load4(t, m);
        const __m256d n2 = norm_sq4(q);
        if (_mm256_movemask_pd(_mm256_cmp_pd(n2, floor4, _CMP_LT_OQ)))
            throw ZeroNormError("time coordinate collapsed to zero norm");
        const __m256d inv = _mm256_div_pd(one, _mm256_sqrt_pd(n2));
        store4(out, m, {_mm256_mul_pd(q.w, inv), _mm256_mul_pd(q.x, inv), _mm256_mul_pd(q.y, inv),
                        _mm256_mul_pd(q.z, inv)});
        if (inv_norms)
            _mm256_storeu_pd(inv_norms + m, inv);
    }
    for (; m < t.n; ++m) {
        const Quaternion q = t.at(m);
        const double n2 = q.norm_sq();
        if (n2 < detail::kZeroNormSq)
            throw ZeroNormError("time coordinate collapsed to zero norm");
        const double inv = 1.0 / std::sqrt(n2);
        out.set(m, inv * q);
        if (inv_norms)
            inv_norms[m] = inv;
    }
}

void k_hamilton(ConstQuatView a, ConstQuatView b, QuatView out) {
    std::size_t m = 0;
    for (; m + 4 <= out.n; m += 4)
        store4(out, m, ham4(load4(a, m), load4(b, m)));
    for (; m < out.n; ++m)
        out.set(m, hamilton(a.at(m), b.at(m)));
}

void k_sandwich(ConstQuatView q, ConstQuatView v, QuatView out, bool conjugate_q) {
    std::size_t m = 0;
    for (; m + 4 <= out.n; m += 4) {
        Q4 qm = load4(q, m);
        if (conjugate_q)
            qm = conj4(qm);
        store4(out, m, ham4(ham4(qm, load4(v, m)), conj4(qm)));
    }
    for (; m < out.n; ++m) {
        const Quaternion qm = conjugate_q ? q.at(m).conjugate() : q.at(m);
        out.set(m, hamilton(hamilton(qm, v.at(m)), qm.conjugate()));
    }
}

void k_residual(ConstQuatView s, ConstQuatView r, ConstQuatView o, QuatView out) {
    std::size_t m = 0;
    for (; m + 4 <= out.n; m += 4) {
        const Q4 a = load4(s, m), b = load4(r, m), c = load4(o, m);
        // conj(o) negates the imaginary channels, so those subtractions flip to adds.
        store4(out, m, {_mm256_sub_pd(_mm256_add_pd(a.w, b.w), c.w),
                        _mm256_add_pd(_mm256_add_pd(a.x, b.x), c.x),
                        _mm256_add_pd(_mm256_add_pd(a.y, b.y), c.y),
                        _mm256_add_pd(_mm256_add_pd(a.z, b.z), c.z)});
    }
    for (; m < out.n; ++m)
        out.set(m, s.at(m) + r.at(m) - o.at(m).conjugate());
}

void k_norms(ConstQuatView q, double* sum_norm, double* sum_sq) {
    __m256d l1 = _mm256_setzero_pd(), l2 = _mm256_setzero_pd();
    std::size_t m = 0;
    for (; m + 4 <= q.n; m += 4) {
        const __m256d n2 = norm_sq4(load4(q, m));
        l2 = _mm256_add_pd(l2, n2);
        l1 = _mm256_add_pd(l1, _mm256_sqrt_pd(n2));
    }
    double s1 = hsum(l1), s2 = hsum(l2);
    for (; m < q.n; ++m) {
        const double n2 = q.at(m).norm_sq();
        s2 += n2;
        s1 += std::sqrt(n2);
    }
    *sum_norm = s1;
    *sum_sq = s2;
}

double k_score_tail(ConstQuatView lhs, ConstQuatView ent, ConstQuatView ut, bool l1) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t m = 0;
    for (; m + 4 <= ent.n; m += 4) {
        const Q4 q = load4(ut, m);
        const Q4 rot = ham4(ham4(q, load4(ent, m)), conj4(q));
        const Q4 l = load4(lhs, m);
        const Q4 res = {_mm256_sub_pd(l.w, rot.w), _mm256_add_pd(l.x, rot.x),
                        _mm256_add_pd(l.y, rot.y), _mm256_add_pd(l.z, rot.z)};
        const __m256d n2 = norm_sq4(res);
        acc = _mm256_add_pd(acc, l1 ? _mm256_sqrt_pd(n2) : n2);
    }
    double s = hsum(acc);
    for (; m < ent.n; ++m) {
        const Quaternion q = ut.at(m);
        const Quaternion rot = hamilton(hamilton(q, ent.at(m)), q.conjugate());
        const Quaternion res = lhs.at(m) - rot.conjugate();
        s += l1 ? res.norm() : res.norm_sq();
    }
    return l1 ? s : std::sqrt(s);
}

double k_score_head(ConstQuatView rhs, ConstQuatView ent, ConstQuatView ut, bool l1) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t m = 0;
    for (; m + 4 <= ent.n; m += 4) {
        const Q4 q = load4(ut, m);
        const Q4 rot = ham4(ham4(q, load4(ent, m)), conj4(q));
        const Q4 r = load4(rhs, m);
        const Q4 res = {_mm256_sub_pd(rot.w, r.w), _mm256_sub_pd(rot.x, r.x),
                        _mm256_sub_pd(rot.y, r.y), _mm256_sub_pd(rot.z, r.z)};
        const __m256d n2 = norm_sq4(res);
        acc = _mm256_add_pd(acc, l1 ? _mm256_sqrt_pd(n2) : n2);
    }
    double s = hsum(acc);
    for (; m < ent.n; ++m) {
        const Quaternion q = ut.at(m);
        const Quaternion rot = hamilton(hamilton(q, ent.at(m)), q.conjugate());
        const Quaternion res = rot - rhs.at(m);
        s += l1 ? res.norm() : res.norm_sq();
    }
    return l1 ? s : std::sqrt(s);
}

void k_adagrad(double* p, double* acc, const double* g, std::size_t n, double lr, double eps) {
    const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        const __m256d ai = _mm256_fmadd_pd(gi, gi, _mm256_loadu_pd(acc + i));
        _mm256_storeu_pd(acc + i, ai);
        const __m256d step =
            _mm256_div_pd(_mm256_mul_pd(vlr, gi), _mm256_add_pd(_mm256_sqrt_pd(ai), veps));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        acc[i] += g[i] * g[i];
        p[i] -= lr * g[i] / (std::sqrt(acc[i]) + eps);
    }
}

} // namespace

const Ops& avx2_ops_impl() {
    static const Ops ops = {
        "avx2",  k_normalize, k_hamilton, k_sandwich, k_residual,
        k_norms, k_score_tail, k_score_head, k_adagrad,
    };
    return ops;
}

} // namespace rqvs::kern

#endif // x86_64
