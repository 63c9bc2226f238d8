#pragma once

#include <cstddef>

#include "rotateqvs/quaternion_vector.hpp"

namespace rqvs::kern {

/// A complete set of coordinate-loop kernels. Two implementations exist: a
/// scalar one that defers to the reference loops, and an AVX2+FMA one that
/// processes four coordinates per step. Everything downstream calls through
/// this table so the variants stay interchangeable.
struct Ops {
    const char* name;

    /// out[m] = t[m]/|t[m]|; optional 1/|t[m]| per coordinate into inv_norms.
    /// Throws ZeroNormError when a coordinate is numerically zero.
    void (*normalize)(ConstQuatView t, QuatView out, double* inv_norms);

    /// out[m] = a[m] b[m].
    void (*hamilton)(ConstQuatView a, ConstQuatView b, QuatView out);

    /// out[m] = q[m] v[m] conj(q[m]); conjugate_q flips to conj(q[m]) v[m] q[m].
    void (*sandwich)(ConstQuatView q, ConstQuatView v, QuatView out, bool conjugate_q);

    /// out[m] = s[m] + r[m] - conj(o[m]).
    void (*residual)(ConstQuatView s, ConstQuatView r, ConstQuatView o, QuatView out);

    /// *sum_norm = sum_m |q[m]|, *sum_sq = sum_m |q[m]|^2.
    void (*norms)(ConstQuatView q, double* sum_norm, double* sum_sq);

    /// Candidate-tail score: residual r[m] = lhs[m] - conj(ut[m] ent[m] conj(ut[m])).
    /// Returns sum_m |r[m]| when l1, else sqrt(sum_m |r[m]|^2).
    double (*score_tail)(ConstQuatView lhs, ConstQuatView ent, ConstQuatView ut, bool l1);

    /// Candidate-head score: residual r[m] = (ut[m] ent[m] conj(ut[m])) - rhs[m].
    double (*score_head)(ConstQuatView rhs, ConstQuatView ent, ConstQuatView ut, bool l1);

    /// Adagrad step over a flat span: acc += g^2; p -= lr * g / (sqrt(acc) + eps).
    void (*adagrad)(double* p, double* acc, const double* g, std::size_t n, double lr, double eps);
};

/// Plain-loop reference implementation. Always available.
const Ops& scalar_ops();

/// True when the AVX2 translation unit was built into this binary.
bool avx2_compiled();

/// True when avx2_compiled() and the running CPU reports AVX2 and FMA.
bool avx2_supported();

/// The vector implementation. Throws UnknownLabelError when unsupported.
const Ops& avx2_ops();

/// The implementation the process settled on: ROTATEQVS_KERNELS=scalar|avx2
/// when set (fails loudly on an unknown value; avx2 on a machine without it
/// falls back to scalar with a stderr note), otherwise the fastest supported
/// one. Selection is made once and cached.
const Ops& active();

/// Test hook: override the cached selection. Pass "scalar" or "avx2".
void force(const char* name);

} // namespace rqvs::kern
