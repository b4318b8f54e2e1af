#ifndef CIS_EMITTER_HPP
#define CIS_EMITTER_HPP

#include <map>
#include <string>

#include "cis/assembly.hpp"
#include "cis/model.hpp"
#include "cis/scheduler.hpp"

namespace cis {

// Turns a verified schedule into a single-issue instruction timeline:
// one @A per distinct activation cycle (targets ordered by slot:fsm);
// configuration instructions packed into the slots before the earliest
// activation, processing operations latest-activated first (ties by name);
// the whole map shifted so the first slot is cycle 0; gaps covered by @W;
// a final @W appended up to the shifted scheduled latency.
Program synchronize(const Model& model, const Schedule& schedule);

// Per-operation activation cycle relative to the earliest activation.
// Throws ValidationError if the program lacks activation metadata for an op.
std::map<std::string, std::int64_t> activation_offsets(const Program& program);

// Configuration instructions realizing one operation: the bound resource
// instructions (payload segments split on ';'), then @R/@T per tree node in
// innermost-to-outermost (post-) order, delays substituted from the
// schedule. A trailing "steps=a,b,..." payload segment supplies @R strides,
// outermost Repeat first (default 1).
std::vector<Instruction> expand_config(const OperationDef& op,
                                       const std::map<VarId, std::int64_t>& assignment);

}  // namespace cis

#endif
