#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "rotateqvs/errors.hpp"
#include "rotateqvs/kernels.hpp"

namespace rqvs::kern {

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops_impl(); // kernels_avx2.cpp

bool avx2_compiled() { return true; }

bool avx2_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#else
bool avx2_compiled() { return false; }
bool avx2_supported() { return false; }
#endif

const Ops& avx2_ops() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported())
        return avx2_ops_impl();
#endif
    throw UnknownLabelError("avx2 kernels unavailable on this machine");
}

namespace {

const Ops* g_active = nullptr;

const Ops* select() {
    const char* want = std::getenv("ROTATEQVS_KERNELS");
    if (want && *want) {
        if (std::strcmp(want, "scalar") == 0)
            return &scalar_ops();
        if (std::strcmp(want, "avx2") == 0) {
            if (avx2_supported())
                return &avx2_ops();
            std::fprintf(stderr, "ROTATEQVS_KERNELS=avx2 requested but unsupported; using scalar\n");
            return &scalar_ops();
        }
        throw UnknownLabelError(std::string("ROTATEQVS_KERNELS=") + want);
    }
    return avx2_supported() ? &avx2_ops() : &scalar_ops();
}

} // namespace

const Ops& active() {
    if (!g_active)
        g_active = select();
    return *g_active;
}

void force(const char* name) {
    if (std::strcmp(name, "scalar") == 0)
        g_active = &scalar_ops();
    else if (std::strcmp(name, "avx2") == 0)
        g_active = &avx2_ops();
    else
        throw UnknownLabelError(name);
}

} // namespace rqvs::kern
