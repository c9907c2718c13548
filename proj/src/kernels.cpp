#include "sttt/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "sttt/common.hpp"

namespace sttt::kern {

template <class T>
Table<T> scalar_table();

#if defined(__AVX2__)
template <class T>
Table<T> avx2_table();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__AVX2__) && (defined(__x86_64__) || defined(_M_X64))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

struct State {
    Isa isa;
    Table<float> f32;
    Table<double> f64;

    State() { set(cpu_has_avx2() ? Isa::avx2 : Isa::scalar); }

    void set(Isa i) {
        if (i == Isa::avx2 && !cpu_has_avx2())
            throw ConfigError("kernel variant avx2 not available on this host");
        isa = i;
        if (i == Isa::scalar) {
            f32 = scalar_table<float>();
            f64 = scalar_table<double>();
        }
#if defined(__AVX2__)
        else {
            f32 = avx2_table<float>();
            f64 = avx2_table<double>();
        }
#endif
    }
};

State& state() {
    static State s;
    return s;
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

template <>
const Table<float>& active<float>() {
    return state().f32;
}
template <>
const Table<double>& active<double>() {
    return state().f64;
}

Isa active_isa() { return state().isa; }

std::vector<Isa> available() {
    std::vector<Isa> v{Isa::scalar};
    if (cpu_has_avx2()) v.push_back(Isa::avx2);
    return v;
}

void select(Isa isa) { state().set(isa); }

void init_from_env() {
    const char* e = std::getenv("STTT_KERNEL");
    if (!e || !std::strcmp(e, "auto")) return;
    if (!std::strcmp(e, "scalar"))
        select(Isa::scalar);
    else if (!std::strcmp(e, "avx2"))
        select(Isa::avx2);
    else
        throw ConfigError(std::string("STTT_KERNEL: unknown kernel variant '") + e + "'");
}

template <class T>
const Table<T>& table_for(Isa isa) {
    static Table<T> scalar = scalar_table<T>();
#if defined(__AVX2__)
    static Table<T> avx2 = cpu_has_avx2() ? avx2_table<T>() : scalar_table<T>();
#endif
    if (isa == Isa::scalar) return scalar;
#if defined(__AVX2__)
    if (cpu_has_avx2()) return avx2;
#endif
    throw ConfigError("kernel variant avx2 not available on this host");
}

template const Table<float>& table_for<float>(Isa);
template const Table<double>& table_for<double>(Isa);

}  // namespace sttt::kern
