#ifndef CIS_KERNELS_HPP
#define CIS_KERNELS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cis/machine.hpp"
#include "cis/model.hpp"

namespace cis {

// One sized instance of a corpus kernel (the streaming benchmark set).
struct KernelSpec {
    enum class Family { Dot, Mvm, Mmm, Conv1d, Conv2d };

    Family family = Family::Dot;
    std::int64_t n = 0;  // Dot: length; Mvm/Mmm: see name(); Conv: input size
    std::int64_t m = 0;  // Mvm/Mmm rows
    std::int64_t k = 0;  // Mmm inner dim; Conv kernel size

    std::string name() const;  // "DOT-32", "MVM-64x64", "1DCONV-32/3", ...

    static KernelSpec dot(std::int64_t n);
    static KernelSpec mvm(std::int64_t m, std::int64_t n);
    static KernelSpec mmm(std::int64_t m, std::int64_t n, std::int64_t k);
    static KernelSpec conv1d(std::int64_t n, std::int64_t k);
    static KernelSpec conv2d(std::int64_t n, std::int64_t k);
};

// ALU-operation count of the zero-overhead single-ALU machine.
std::int64_t ideal_latency(const KernelSpec& spec);

// 100 * (measured - ideal) / ideal, rounded to one decimal. ideal must be >= 1.
double overhead_pct(std::int64_t measured, std::int64_t ideal);

// Everything needed to run one kernel end to end.
struct KernelBundle {
    KernelSpec spec;
    std::string model_text;  // operation/constraint/bind source
    Model model;
    MachineConfig machine;
    std::vector<std::int64_t> memory;           // inputs placed, outputs zeroed
    std::vector<std::int64_t> expected_output;  // reference result
    std::int64_t output_base = 0;               // where the kernel writes it
};

KernelBundle build_kernel(const KernelSpec& spec);

// The ten stock instances: DOT-32/512, MVM-32x32/64x64, MMM-32x32/64x64,
// 1DCONV-32/3, 1DCONV-512/3, 2DCONV-32x32/3x3, 2DCONV-64x64/3x3.
std::vector<KernelSpec> kernel_corpus();

}  // namespace cis

#endif
