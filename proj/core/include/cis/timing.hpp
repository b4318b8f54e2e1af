#ifndef CIS_TIMING_HPP
#define CIS_TIMING_HPP

#include <string>
#include <vector>

#include "cis/model.hpp"

namespace cis {

// Expression tree mirrored with symbolic annotations. Node 0 is the root;
// children are stored by index so the tree is a flat, copyable value.
struct TimingTree {
    struct Node {
        OpExpr::Kind kind = OpExpr::Kind::Event;
        int event = 0;
        std::int64_t iter = 1;
        DelayTerm delay;
        int left = -1;
        int right = -1;
        LinExpr duration;
        LinExpr start;  // relative to the operation's activation
    };
    std::vector<Node> nodes;
};

// Structure copy without annotations.
TimingTree build_tree(const OpExpr& root);

// Event -> 1; Transit -> left + right + delay;
// Repeat -> child*iter + delay*(iter-1). Children before parents.
void compute_durations(TimingTree& tree);

// Root -> 0; left child (and Repeat child) inherits the parent's start;
// a Transit's right child starts at parent.start + left.duration + delay.
// Requires durations.
void compute_start_times(TimingTree& tree);

TimingTree annotate(const OpExpr& root);

// t_anchor = OpStart(op) + static event start + sum_i x_i * (D_i + tau_i),
// where D_i is the duration of the i-th enclosing Repeat's child (outermost
// first) and tau_i its delay. Anchor is validated against the model.
LinExpr anchor_time(const Model& model, const Anchor& anchor);

// OpStart(op) + root duration.
LinExpr op_end_time(const Model& model, const std::string& op);

// One line per node, pre-order: "<path> dur=<expr> start=<expr>" with paths
// like "/", "/l", "/l/r".
std::string dump_tree(const TimingTree& tree);

}  // namespace cis

#endif
