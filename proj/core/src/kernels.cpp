#include "cis/kernels.hpp"

#include <cmath>
#include <sstream>

#include "cis/error.hpp"
#include "cis/lin_expr.hpp"
#include "cis/parser.hpp"

namespace cis {
namespace {

// Deterministic small signed stimulus; accumulators stay far from wrap.
std::int64_t stim(std::int64_t i) { return (i * 7919) % 97 - 48; }

std::uint64_t u(std::int64_t v) { return static_cast<std::uint64_t>(v); }

MachineConfig kernel_machine(std::int64_t words) {
    MachineConfig mc = MachineConfig::toy();
    mc.slots.push_back({3, MachineConfig::SlotKind::Storage, 2});
    std::int64_t cap = 1024;
    while (cap < words) cap = checked_mul(cap, 2);
    mc.storage_words = cap;
    return mc;
}

// All kernels share one datapath: slot1 streams the primary operand into the
// ALU, slot3 streams the second operand, and the ALU result feeds slot1's
// write port.
const char* kPaths = "slot1->slot2;slot3->slot2.b;slot2->slot1";

struct Layout {
    std::string text;
    std::int64_t in_words = 0;
    std::int64_t out_words = 0;
};

Layout dot_text(std::int64_t n) {
    std::ostringstream t;
    t << "operation I e0\n"
      << "operation C e0\n"
      << "operation RA R<" << n << ", t1>(e0)\n"
      << "operation RB R<" << n << ", t2>(e0)\n"
      << "operation W e0\n"
      << "constraint I.e0 < RA.e0[0]\n"
      << "constraint C.e0 == RA.e0[0] + 1\n"
      << "constraint RB.e0[0] == RA.e0[0]\n"
      << "constraint RA.e0[1] - RA.e0[0] == RB.e0[1] - RB.e0[0]\n"
      << "constraint W.e0 == RA.e0[0] + " << n + 1 << "\n"
      << "bind I 0:0 @I \"" << kPaths << "\"\n"
      << "bind C 2:0 @C \"MAC%" << n << "\"\n"
      << "bind RA 1:1 @S \"address=0;steps=1\"\n"
      << "bind RB 3:1 @S \"address=" << n << ";steps=1\"\n"
      << "bind W 1:0 @S \"address=" << 2 * n << "\"\n";
    return {t.str(), 2 * n, 1};
}

Layout mvm_text(std::int64_t m, std::int64_t n) {
    std::ostringstream t;
    t << "operation I e0\n"
      << "operation C e0\n"
      << "operation RA R<" << m << ", d1>(R<" << n << ", t1>(e0))\n"
      << "operation RX R<" << m << ", d2>(R<" << n << ", t2>(e0))\n"
      << "operation W R<" << m << ", t3>(e0)\n"
      << "constraint I.e0 < RA.e0[0][0]\n"
      << "constraint C.e0 == RA.e0[0][0] + 1\n"
      << "constraint RX.e0[0][0] == RA.e0[0][0]\n"
      << "constraint RA.e0[0][1] - RA.e0[0][0] == RX.e0[0][1] - RX.e0[0][0]\n"
      << "constraint RA.e0[1][0] - RA.e0[0][0] == RX.e0[1][0] - RX.e0[0][0]\n"
      << "constraint W.e0[0] == RA.e0[0][0] + " << n + 1 << "\n"
      << "constraint W.e0[1] - W.e0[0] == RA.e0[1][0] - RA.e0[0][0]\n"
      << "bind I 0:0 @I \"" << kPaths << "\"\n"
      << "bind C 2:0 @C \"MAC%" << n << "\"\n"
      << "bind RA 1:1 @S \"address=0;steps=" << n << ",1\"\n"
      << "bind RX 3:1 @S \"address=" << m * n << ";steps=0,1\"\n"
      << "bind W 1:0 @S \"address=" << m * n + n << ";steps=1\"\n";
    return {t.str(), m * n + n, m};
}

Layout mmm_text(std::int64_t m, std::int64_t n, std::int64_t k) {
    std::ostringstream t;
    t << "operation I e0\n"
      << "operation C e0\n"
      << "operation RA R<" << m << ", d1>(R<" << n << ", d2>(R<" << k << ", t1>(e0)))\n"
      << "operation RB R<" << m << ", d3>(R<" << n << ", d4>(R<" << k << ", t2>(e0)))\n"
      << "operation W R<" << m << ", w1>(R<" << n << ", w2>(e0))\n"
      << "constraint I.e0 < RA.e0[0][0][0]\n"
      << "constraint C.e0 == RA.e0[0][0][0] + 1\n"
      << "constraint RB.e0[0][0][0] == RA.e0[0][0][0]\n"
      << "constraint RA.e0[0][0][1] - RA.e0[0][0][0] == RB.e0[0][0][1] - RB.e0[0][0][0]\n"
      << "constraint RA.e0[0][1][0] - RA.e0[0][0][0] == RB.e0[0][1][0] - RB.e0[0][0][0]\n"
      << "constraint RA.e0[1][0][0] - RA.e0[0][0][0] == RB.e0[1][0][0] - RB.e0[0][0][0]\n"
      << "constraint W.e0[0][0] == RA.e0[0][0][0] + " << k + 1 << "\n"
      << "constraint W.e0[0][1] - W.e0[0][0] == RA.e0[0][1][0] - RA.e0[0][0][0]\n"
      << "constraint W.e0[1][0] - W.e0[0][0] == RA.e0[1][0][0] - RA.e0[0][0][0]\n"
      << "bind I 0:0 @I \"" << kPaths << "\"\n"
      << "bind C 2:0 @C \"MAC%" << k << "\"\n"
      << "bind RA 1:1 @S \"address=0;steps=" << k << ",0,1\"\n"
      << "bind RB 3:1 @S \"address=" << m * k << ";steps=0,1," << n << "\"\n"
      << "bind W 1:0 @S \"address=" << m * k + k * n << ";steps=" << n << ",1\"\n";
    return {t.str(), m * k + k * n, m * n};
}

Layout conv1d_text(std::int64_t n, std::int64_t k) {
    std::int64_t w = n - k + 1;
    std::ostringstream t;
    t << "operation I e0\n"
      << "operation C e0\n"
      << "operation RX R<" << w << ", d1>(R<" << k << ", t1>(e0))\n"
      << "operation RH R<" << w << ", d2>(R<" << k << ", t2>(e0))\n"
      << "operation W R<" << w << ", t3>(e0)\n"
      << "constraint I.e0 < RX.e0[0][0]\n"
      << "constraint C.e0 == RX.e0[0][0] + 1\n"
      << "constraint RH.e0[0][0] == RX.e0[0][0]\n"
      << "constraint RX.e0[0][1] - RX.e0[0][0] == RH.e0[0][1] - RH.e0[0][0]\n"
      << "constraint RX.e0[1][0] - RX.e0[0][0] == RH.e0[1][0] - RH.e0[0][0]\n"
      << "constraint W.e0[0] == RX.e0[0][0] + " << k + 1 << "\n"
      << "constraint W.e0[1] - W.e0[0] == RX.e0[1][0] - RX.e0[0][0]\n"
      << "bind I 0:0 @I \"" << kPaths << "\"\n"
      << "bind C 2:0 @C \"MAC%" << k << "\"\n"
      << "bind RX 1:1 @S \"address=0;steps=1,1\"\n"
      << "bind RH 3:1 @S \"address=" << n << ";steps=0,1\"\n"
      << "bind W 1:0 @S \"address=" << n + k << ";steps=1\"\n";
    return {t.str(), n + k, w};
}

Layout conv2d_text(std::int64_t n, std::int64_t k) {
    std::int64_t w = n - k + 1;
    std::ostringstream t;
    t << "operation I e0\n"
      << "operation C e0\n"
      << "operation RX R<" << w << ", d1>(R<" << w << ", d2>(R<" << k << ", d3>(R<" << k
      << ", t1>(e0))))\n"
      << "operation RH R<" << w << ", d4>(R<" << w << ", d5>(R<" << k << ", d6>(R<" << k
      << ", t2>(e0))))\n"
      << "operation W R<" << w << ", w1>(R<" << w << ", w2>(e0))\n"
      << "constraint I.e0 < RX.e0[0][0][0][0]\n"
      << "constraint C.e0 == RX.e0[0][0][0][0] + 1\n"
      << "constraint RH.e0[0][0][0][0] == RX.e0[0][0][0][0]\n"
      << "constraint RX.e0[0][0][0][1] - RX.e0[0][0][0][0] == "
         "RH.e0[0][0][0][1] - RH.e0[0][0][0][0]\n"
      << "constraint RX.e0[0][0][1][0] - RX.e0[0][0][0][0] == "
         "RH.e0[0][0][1][0] - RH.e0[0][0][0][0]\n"
      << "constraint RX.e0[0][1][0][0] - RX.e0[0][0][0][0] == "
         "RH.e0[0][1][0][0] - RH.e0[0][0][0][0]\n"
      << "constraint RX.e0[1][0][0][0] - RX.e0[0][0][0][0] == "
         "RH.e0[1][0][0][0] - RH.e0[0][0][0][0]\n"
      << "constraint W.e0[0][0] == RX.e0[0][0][0][0] + " << k * k + 1 << "\n"
      << "constraint W.e0[0][1] - W.e0[0][0] == RX.e0[0][1][0][0] - RX.e0[0][0][0][0]\n"
      << "constraint W.e0[1][0] - W.e0[0][0] == RX.e0[1][0][0][0] - RX.e0[0][0][0][0]\n"
      << "bind I 0:0 @I \"" << kPaths << "\"\n"
      << "bind C 2:0 @C \"MAC%" << k * k << "\"\n"
      << "bind RX 1:1 @S \"address=0;steps=" << n << ",1," << n << ",1\"\n"
      << "bind RH 3:1 @S \"address=" << n * n << ";steps=0,0," << k << ",1\"\n"
      << "bind W 1:0 @S \"address=" << n * n + k * k << ";steps=" << w << ",1\"\n";
    return {t.str(), n * n + k * k, w * w};
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError("kernel size out of range: " + what);
}

}  // namespace

KernelSpec KernelSpec::dot(std::int64_t n) { return {Family::Dot, n, 0, 0}; }
KernelSpec KernelSpec::mvm(std::int64_t m, std::int64_t n) { return {Family::Mvm, n, m, 0}; }
KernelSpec KernelSpec::mmm(std::int64_t m, std::int64_t n, std::int64_t k) {
    return {Family::Mmm, n, m, k};
}
KernelSpec KernelSpec::conv1d(std::int64_t n, std::int64_t k) {
    return {Family::Conv1d, n, 0, k};
}
KernelSpec KernelSpec::conv2d(std::int64_t n, std::int64_t k) {
    return {Family::Conv2d, n, 0, k};
}

std::string KernelSpec::name() const {
    std::ostringstream s;
    switch (family) {
        case Family::Dot:
            s << "DOT-" << n;
            break;
        case Family::Mvm:
            s << "MVM-" << m << "x" << n;
            break;
        case Family::Mmm:
            if (m == n && n == k)
                s << "MMM-" << m << "x" << n;
            else
                s << "MMM-" << m << "x" << n << "x" << k;
            break;
        case Family::Conv1d:
            s << "1DCONV-" << n << "/" << k;
            break;
        case Family::Conv2d:
            s << "2DCONV-" << n << "x" << n << "/" << k << "x" << k;
            break;
    }
    return s.str();
}

std::int64_t ideal_latency(const KernelSpec& spec) {
    switch (spec.family) {
        case KernelSpec::Family::Dot:
            return spec.n;
        case KernelSpec::Family::Mvm:
            return checked_mul(spec.m, spec.n);
        case KernelSpec::Family::Mmm:
            return checked_mul(checked_mul(spec.m, spec.n), spec.k);
        case KernelSpec::Family::Conv1d:
            return checked_mul(spec.n - spec.k + 1, spec.k);
        case KernelSpec::Family::Conv2d: {
            std::int64_t w = spec.n - spec.k + 1;
            return checked_mul(checked_mul(w, w), checked_mul(spec.k, spec.k));
        }
    }
    throw InternalError("unreachable kernel family");
}

double overhead_pct(std::int64_t measured, std::int64_t ideal) {
    if (ideal < 1) throw ValidationError("ideal latency must be positive");
    double pct = 100.0 * static_cast<double>(measured - ideal) / static_cast<double>(ideal);
    return std::round(pct * 10.0) / 10.0;
}

KernelBundle build_kernel(const KernelSpec& spec) {
    Layout lay;
    switch (spec.family) {
        case KernelSpec::Family::Dot:
            require(spec.n >= 2, spec.name());
            lay = dot_text(spec.n);
            break;
        case KernelSpec::Family::Mvm:
            require(spec.m >= 2 && spec.n >= 2, spec.name());
            lay = mvm_text(spec.m, spec.n);
            break;
        case KernelSpec::Family::Mmm:
            require(spec.m >= 2 && spec.n >= 2 && spec.k >= 2, spec.name());
            lay = mmm_text(spec.m, spec.n, spec.k);
            break;
        case KernelSpec::Family::Conv1d:
            require(spec.k >= 2 && spec.n >= spec.k + 1, spec.name());
            lay = conv1d_text(spec.n, spec.k);
            break;
        case KernelSpec::Family::Conv2d:
            require(spec.k >= 2 && spec.n >= spec.k + 1, spec.name());
            lay = conv2d_text(spec.n, spec.k);
            break;
    }

    KernelBundle b;
    b.spec = spec;
    b.model_text = lay.text;
    b.model = parse_spec(lay.text);
    b.machine = kernel_machine(lay.in_words + lay.out_words);
    b.memory.resize(static_cast<size_t>(lay.in_words + lay.out_words), 0);
    for (std::int64_t i = 0; i < lay.in_words; ++i) b.memory[static_cast<size_t>(i)] = stim(i);
    b.output_base = lay.in_words;
    auto in = [&](std::int64_t i) { return u(b.memory[static_cast<size_t>(i)]); };

    std::vector<std::uint64_t> out(static_cast<size_t>(lay.out_words), 0);
    switch (spec.family) {
        case KernelSpec::Family::Dot: {
            for (std::int64_t i = 0; i < spec.n; ++i) out[0] += in(i) * in(spec.n + i);
            break;
        }
        case KernelSpec::Family::Mvm: {
            for (std::int64_t i = 0; i < spec.m; ++i)
                for (std::int64_t j = 0; j < spec.n; ++j)
                    out[static_cast<size_t>(i)] += in(i * spec.n + j) * in(spec.m * spec.n + j);
            break;
        }
        case KernelSpec::Family::Mmm: {
            std::int64_t bbase = spec.m * spec.k;
            for (std::int64_t i = 0; i < spec.m; ++i)
                for (std::int64_t j = 0; j < spec.n; ++j)
                    for (std::int64_t kk = 0; kk < spec.k; ++kk)
                        out[static_cast<size_t>(i * spec.n + j)] +=
                            in(i * spec.k + kk) * in(bbase + kk * spec.n + j);
            break;
        }
        case KernelSpec::Family::Conv1d: {
            std::int64_t w = spec.n - spec.k + 1;
            for (std::int64_t t = 0; t < w; ++t)
                for (std::int64_t j = 0; j < spec.k; ++j)
                    out[static_cast<size_t>(t)] += in(t + j) * in(spec.n + j);
            break;
        }
        case KernelSpec::Family::Conv2d: {
            std::int64_t w = spec.n - spec.k + 1;
            std::int64_t hbase = spec.n * spec.n;
            for (std::int64_t i = 0; i < w; ++i)
                for (std::int64_t j = 0; j < w; ++j)
                    for (std::int64_t p = 0; p < spec.k; ++p)
                        for (std::int64_t q = 0; q < spec.k; ++q)
                            out[static_cast<size_t>(i * w + j)] +=
                                in((i + p) * spec.n + j + q) * in(hbase + p * spec.k + q);
            break;
        }
    }
    b.expected_output.reserve(out.size());
    for (std::uint64_t v : out) b.expected_output.push_back(static_cast<std::int64_t>(v));
    return b;
}

std::vector<KernelSpec> kernel_corpus() {
    return {
        KernelSpec::dot(32),         KernelSpec::dot(512),       KernelSpec::mvm(32, 32),
        KernelSpec::mvm(64, 64),     KernelSpec::mmm(32, 32, 32), KernelSpec::mmm(64, 64, 64),
        KernelSpec::conv1d(32, 3),   KernelSpec::conv1d(512, 3), KernelSpec::conv2d(32, 3),
        KernelSpec::conv2d(64, 3),
    };
}

}  // namespace cis
