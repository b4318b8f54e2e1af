#ifndef CIS_SIMULATOR_HPP
#define CIS_SIMULATOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cis/assembly.hpp"
#include "cis/machine.hpp"
#include "cis/model.hpp"
#include "cis/scheduler.hpp"

namespace cis {

struct TraceEvent {
    std::int64_t cycle = 0;
    int slot = 0;
    int fsm = 0;
    int event = 0;
    std::int64_t addr = 0;
    std::int64_t data = 0;
};

struct Trace {
    std::vector<TraceEvent> events;  // non-decreasing cycle order
    std::vector<std::int64_t> final_memory;
    std::int64_t total_cycles = 0;
    std::vector<std::pair<std::int64_t, int>> issue_log;  // (cycle, instruction index)

    struct PathChange {
        std::int64_t cycle = 0;
        int dst_slot = 0;
        int dst_port = 0;
        std::string path;
    };
    std::vector<PathChange> path_log;

    // "cycle=<c> slot=<s> fsm=<f> event=e<k> addr=<a> data=<d>" per event.
    std::string text() const;
    // Datapath routes in force at `cycle` (persistence probe).
    std::vector<std::string> paths_at(std::int64_t cycle) const;
};

inline constexpr std::int64_t kDefaultCycleCap = 10'000'000;

// Cycle-accurate run: single-issue sequencer, autonomous FSMs firing per
// their configured loop structure, storage reads registered 1 cycle,
// computation registered 1 cycle, interconnect combinational, writes
// sampling their input port the cycle they fire. Memory is one shared
// scratchpad addressed by every storage slot.
Trace simulate(const Program& program, const MachineConfig& config,
               const std::vector<std::int64_t>& memory_init,
               std::int64_t cycle_cap = kDefaultCycleCap);

struct TraceCheckReport {
    bool ok = true;
    std::string detail;       // first mismatch, when !ok
    std::int64_t shift = 0;   // global offset between scheduled and fired
    int anchors_checked = 0;
};

// Confirms every anchor referenced by the model's constraints fired at its
// scheduled time plus one global shift.
TraceCheckReport check_trace(const Trace& trace, const Model& model, const Schedule& schedule);

// Flat text (one decimal word per line), or raw little-endian int64 when
// the path ends in ".bin".
std::vector<std::int64_t> read_memory_file(const std::string& path);
void write_memory_file(const std::string& path, const std::vector<std::int64_t>& words);

}  // namespace cis

#endif
