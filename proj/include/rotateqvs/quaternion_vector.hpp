#pragma once

#include <cstddef>
#include <vector>

#include "rotateqvs/errors.hpp"
#include "rotateqvs/quaternion.hpp"

namespace rqvs {

/// Read-only view over n quaternions stored as four parallel channels.
struct ConstQuatView {
    const double* w = nullptr;
    const double* x = nullptr;
    const double* y = nullptr;
    const double* z = nullptr;
    std::size_t n = 0;

    Quaternion at(std::size_t i) const { return {w[i], x[i], y[i], z[i]}; }
};

/// Mutable view over n quaternions stored as four parallel channels.
struct QuatView {
    double* w = nullptr;
    double* x = nullptr;
    double* y = nullptr;
    double* z = nullptr;
    std::size_t n = 0;

    Quaternion at(std::size_t i) const { return {w[i], x[i], y[i], z[i]}; }
    void set(std::size_t i, const Quaternion& q) const {
        w[i] = q.w;
        x[i] = q.x;
        y[i] = q.y;
        z[i] = q.z;
    }
    void add(std::size_t i, const Quaternion& q) const {
        w[i] += q.w;
        x[i] += q.x;
        y[i] += q.y;
        z[i] += q.z;
    }
    ConstQuatView as_const() const { return {w, x, y, z, n}; }
    operator ConstQuatView() const { return as_const(); }
};

/// Owning vector of k quaternions, structure-of-arrays: each of the four
/// components lives in its own contiguous run so coordinate loops stream
/// through memory channel by channel.
class QuaternionVector {
public:
    QuaternionVector() = default;
    explicit QuaternionVector(std::size_t k) : buf_(4 * k, 0.0), k_(k) {}

    std::size_t size() const { return k_; }
    void assign_zero(std::size_t k) {
        buf_.assign(4 * k, 0.0);
        k_ = k;
    }

    Quaternion at(std::size_t i) const { return view().at(i); }
    void set(std::size_t i, const Quaternion& q) { view().set(i, q); }

    QuatView view() {
        double* p = buf_.data();
        return {p, p + k_, p + 2 * k_, p + 3 * k_, k_};
    }
    ConstQuatView view() const {
        const double* p = buf_.data();
        return {p, p + k_, p + 2 * k_, p + 3 * k_, k_};
    }
    ConstQuatView cview() const { return view(); }

    double* raw() { return buf_.data(); }
    const double* raw() const { return buf_.data(); }
    static std::size_t raw_size(std::size_t k) { return 4 * k; }

private:
    std::vector<double> buf_;
    std::size_t k_ = 0;
};

/// n rows of k quaternions each. The four channels are table-wide, so row r's
/// w components occupy [r*k, (r+1)*k) of the w channel; a row view is four
/// pointers into the same offsets.
class QuaternionTable {
public:
    QuaternionTable() = default;
    QuaternionTable(std::size_t rows, std::size_t k) : buf_(4 * rows * k, 0.0), rows_(rows), k_(k) {}

    std::size_t rows() const { return rows_; }
    std::size_t dim() const { return k_; }

    QuatView row(std::size_t r) {
        double* p = buf_.data();
        const std::size_t nk = rows_ * k_, off = r * k_;
        return {p + off, p + nk + off, p + 2 * nk + off, p + 3 * nk + off, k_};
    }
    ConstQuatView row(std::size_t r) const {
        const double* p = buf_.data();
        const std::size_t nk = rows_ * k_, off = r * k_;
        return {p + off, p + nk + off, p + 2 * nk + off, p + 3 * nk + off, k_};
    }

    /// Whole table as one flat span of 4*rows*k doubles, channel-major.
    /// Order: all w, all x, all y, all z. Checkpoint I/O and the optimizer
    /// state both key off this layout.
    double* raw() { return buf_.data(); }
    const double* raw() const { return buf_.data(); }
    std::size_t raw_size() const { return buf_.size(); }

private:
    std::vector<double> buf_;
    std::size_t rows_ = 0;
    std::size_t k_ = 0;
};

// ---------------------------------------------------------------------------
// Reference coordinate-wise operations. Each is a plain loop over the scalar
// quaternion ops, kept deliberately naive: faster kernels are tested against
// these, so clarity beats speed here.

/// out[m] = a[m] b[m] (Hamilton product per coordinate).
inline void elementwise_hamilton(ConstQuatView a, ConstQuatView b, QuatView out) {
    for (std::size_t m = 0; m < out.n; ++m)
        out.set(m, hamilton(a.at(m), b.at(m)));
}

/// out[m] = t[m] / |t[m]|. If inv_norms is non-null it receives 1/|t[m]|,
/// which the backward pass needs to undo the projection.
inline void elementwise_normalize(ConstQuatView t, QuatView out, double* inv_norms) {
    for (std::size_t m = 0; m < out.n; ++m) {
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

/// out[m] = q[m] v[m] conj(q[m]), or with conjugate_q the reverse sandwich
/// conj(q[m]) v[m] q[m]. q must hold unit quaternions; this is not checked.
inline void elementwise_sandwich(ConstQuatView q, ConstQuatView v, QuatView out, bool conjugate_q) {
    for (std::size_t m = 0; m < out.n; ++m) {
        const Quaternion qm = conjugate_q ? q.at(m).conjugate() : q.at(m);
        out.set(m, hamilton(hamilton(qm, v.at(m)), qm.conjugate()));
    }
}

/// out[m] = s[m] + r[m] - conj(o[m]). The translation residual whose size is
/// the plausibility score.
inline void elementwise_residual(ConstQuatView s, ConstQuatView r, ConstQuatView o, QuatView out) {
    for (std::size_t m = 0; m < out.n; ++m)
        out.set(m, s.at(m) + r.at(m) - o.at(m).conjugate());
}

/// Accumulates both norms of a residual in one pass: sum_m |q[m]| and
/// sum_m |q[m]|^2.
inline void elementwise_norms(ConstQuatView q, double* sum_norm, double* sum_sq) {
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t m = 0; m < q.n; ++m) {
        const double n2 = q.at(m).norm_sq();
        l2 += n2;
        l1 += std::sqrt(n2);
    }
    *sum_norm = l1;
    *sum_sq = l2;
}

} // namespace rqvs
