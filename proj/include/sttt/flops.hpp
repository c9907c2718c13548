#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace sttt {

// Multiply-accumulate accounting. Only dense contractions book MACs
// (matmul, attention score/mix, conv taps); elementwise work and
// normalizations book nothing, so the analytic complexity model can match
// the measured counters exactly.
enum class FlopCategory : int {
    attention = 0,
    ttt_update = 1,
    ttt_apply = 2,
    conv = 3,
    projection = 4,
    other = 5,
};

constexpr int kFlopCategories = 6;

const char* flop_category_name(FlopCategory c);

struct FlopCounter {
    std::array<uint64_t, kFlopCategories> macs{};

    void add(FlopCategory c, uint64_t n) { macs[static_cast<int>(c)] += n; }
    uint64_t total() const {
        uint64_t t = 0;
        for (uint64_t m : macs) t += m;
        return t;
    }
    uint64_t get(FlopCategory c) const { return macs[static_cast<int>(c)]; }
    void reset() { macs.fill(0); }
};

namespace flops {

// Process-wide counter (one logical job per process; subcommands are
// single jobs). Ops book into the current category scope.
FlopCounter& counter();
void add(uint64_t macs);
FlopCategory current_category();

// RAII category scope. Nesting restores the previous category.
class Scope {
public:
    explicit Scope(FlopCategory c);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

private:
    FlopCategory prev_;
};

}  // namespace flops

}  // namespace sttt
