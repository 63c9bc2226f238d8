#include <cmath>

#include "rotateqvs/kernels.hpp"

// Reference kernels. These are the semantics; the vector variants are judged
// against them. Nothing here is tuned, and that is the point.

namespace rqvs::kern {
namespace {

void k_normalize(ConstQuatView t, QuatView out, double* inv_norms) {
    elementwise_normalize(t, out, inv_norms);
}

void k_hamilton(ConstQuatView a, ConstQuatView b, QuatView out) {
    elementwise_hamilton(a, b, out);
}

void k_sandwich(ConstQuatView q, ConstQuatView v, QuatView out, bool conjugate_q) {
    elementwise_sandwich(q, v, out, conjugate_q);
}

void k_residual(ConstQuatView s, ConstQuatView r, ConstQuatView o, QuatView out) {
    elementwise_residual(s, r, o, out);
}

void k_norms(ConstQuatView q, double* sum_norm, double* sum_sq) {
    elementwise_norms(q, sum_norm, sum_sq);
}

double k_score_tail(ConstQuatView lhs, ConstQuatView ent, ConstQuatView ut, bool l1) {
    double acc = 0.0;
    for (std::size_t m = 0; m < ent.n; ++m) {
        const Quaternion q = ut.at(m);
        const Quaternion rot = hamilton(hamilton(q, ent.at(m)), q.conjugate());
        const Quaternion res = lhs.at(m) - rot.conjugate();
        acc += l1 ? res.norm() : res.norm_sq();
    }
    return l1 ? acc : std::sqrt(acc);
}

double k_score_head(ConstQuatView rhs, ConstQuatView ent, ConstQuatView ut, bool l1) {
    double acc = 0.0;
    for (std::size_t m = 0; m < ent.n; ++m) {
        const Quaternion q = ut.at(m);
        const Quaternion rot = hamilton(hamilton(q, ent.at(m)), q.conjugate());
        const Quaternion res = rot - rhs.at(m);
        acc += l1 ? res.norm() : res.norm_sq();
    }
    return l1 ? acc : std::sqrt(acc);
}

void k_adagrad(double* p, double* acc, const double* g, std::size_t n, double lr, double eps) {
    for (std::size_t i = 0; i < n; ++i) {
        acc[i] += g[i] * g[i];
        p[i] -= lr * g[i] / (std::sqrt(acc[i]) + eps);
    }
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar", k_normalize, k_hamilton, k_sandwich, k_residual,
        k_norms,  k_score_tail, k_score_head, k_adagrad,
    };
    return ops;
}

} // namespace rqvs::kern
