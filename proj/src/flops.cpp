#include "sttt/flops.hpp"

#include <cstdlib>
#include <iostream>

#include "sttt/common.hpp"

namespace sttt {

const char* flop_category_name(FlopCategory c) {
    switch (c) {
        case FlopCategory::attention: return "attention";
        case FlopCategory::ttt_update: return "ttt_update";
        case FlopCategory::ttt_apply: return "ttt_apply";
        case FlopCategory::conv: return "conv";
        case FlopCategory::projection: return "projection";
        case FlopCategory::other: return "other";
    }
    return "?";
}

namespace flops {

namespace {
FlopCounter g_counter;
FlopCategory g_category = FlopCategory::other;
}  // namespace

FlopCounter& counter() { return g_counter; }

void add(uint64_t macs) { g_counter.add(g_category, macs); }

FlopCategory current_category() { return g_category; }

Scope::Scope(FlopCategory c) : prev_(g_category) { g_category = c; }
Scope::~Scope() { g_category = prev_; }

}  // namespace flops

int log_level() {
    static int lvl = [] {
        const char* e = std::getenv("STTT_LOG");
        return e ? std::atoi(e) : 0;
    }();
    return lvl;
}

void log_line(int level, const std::string& msg) {
    if (log_level() >= level) std::cerr << msg << "\n";
}

std::string shape_str(const std::vector<int64_t>& s) {
    std::string r = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) r += ",";
        r += std::to_string(s[i]);
    }
    return r + "]";
}

}  // namespace sttt
