#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rqvs {

/// Outcome of one property suite: worst residual observed and whether it
/// stayed inside the suite's tolerance.
struct SuiteResult {
    std::string name;
    bool pass = false;
    double max_residual = 0.0;
    std::string detail;
};

/// Hamilton product vs its 3D-vector form, norm multiplicativity, and the
/// conjugate anti-homomorphism (two and three factors) on seeded random
/// quaternions.
SuiteResult check_quaternion_algebra(std::uint64_t seed, int cases = 10000);

/// Sandwich rotation vs the axis-angle formula on seeded (v, u, theta) cases,
/// plus real-part and norm preservation.
SuiteResult check_rotation_oracle(std::uint64_t seed, int cases = 10000);

/// Analytic loss gradients vs central finite differences (step 1e-5) on
/// random micro-instances (k <= 8, n_e <= 5, eta <= 3).
SuiteResult check_gradients(std::uint64_t seed, int instances = 100);

/// Filtered ranks vs a brute-force materialize-filter-sort oracle on random
/// graphs with <= 10 entities and <= 5 relations, both sides of every query.
SuiteResult check_ranking_oracle(std::uint64_t seed, int graphs = 20);

/// Scalar vs AVX2 kernels on random views; passes vacuously (with a note)
/// when the machine has no AVX2.
SuiteResult check_kernel_equivalence(std::uint64_t seed);

std::vector<SuiteResult> run_all_checks(std::uint64_t seed);

} // namespace rqvs
