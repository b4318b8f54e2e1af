#include "cis/timing.hpp"

#include "cis/error.hpp"

namespace cis {
namespace {

int build_node(TimingTree& t, const OpExpr& e) {
    int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes[id].kind = e.kind;
    switch (e.kind) {
        case OpExpr::Kind::Event:
            t.nodes[id].event = e.event;
            break;
        case OpExpr::Kind::Repeat: {
            t.nodes[id].iter = e.iter;
            t.nodes[id].delay = e.delay;
            int l = build_node(t, *e.left);
            t.nodes[id].left = l;
            break;
        }
        case OpExpr::Kind::Transit: {
            t.nodes[id].delay = e.delay;
            int l = build_node(t, *e.left);
            int r = build_node(t, *e.right);
            t.nodes[id].left = l;
            t.nodes[id].right = r;
            break;
        }
    }
    return id;
}

void durations(TimingTree& t, int id) {
    auto& n = t.nodes[id];
    switch (n.kind) {
        case OpExpr::Kind::Event:
            n.duration = LinExpr(1);
            break;
        case OpExpr::Kind::Repeat:
            durations(t, n.left);
            n.duration =
                t.nodes[n.left].duration * n.iter + n.delay.lin() * (n.iter - 1);
            break;
        case OpExpr::Kind::Transit:
            durations(t, n.left);
            durations(t, n.right);
            n.duration = t.nodes[n.left].duration + t.nodes[n.right].duration + n.delay.lin();
            break;
    }
}

void starts(TimingTree& t, int id) {
    const auto& n = t.nodes[id];
    switch (n.kind) {
        case OpExpr::Kind::Event:
            break;
        case OpExpr::Kind::Repeat:
            t.nodes[n.left].start = n.start;
            starts(t, n.left);
            break;
        case OpExpr::Kind::Transit:
            t.nodes[n.left].start = n.start;
            t.nodes[n.right].start = n.start + t.nodes[n.left].duration + n.delay.lin();
            starts(t, n.left);
            starts(t, n.right);
            break;
    }
}

}  // namespace

TimingTree build_tree(const OpExpr& root) {
    TimingTree t;
    build_node(t, root);
    return t;
}

void compute_durations(TimingTree& tree) {
    CIS_ASSERT(!tree.nodes.empty(), "timing tree is empty");
    durations(tree, 0);
}

void compute_start_times(TimingTree& tree) {
    CIS_ASSERT(!tree.nodes.empty(), "timing tree is empty");
    tree.nodes[0].start = LinExpr(0);
    starts(tree, 0);
}

TimingTree annotate(const OpExpr& root) {
    TimingTree t = build_tree(root);
    compute_durations(t);
    compute_start_times(t);
    return t;
}

namespace {

// Walks to the event leaf, collecting (child duration, delay) of each
// enclosing Repeat, outermost first. Returns the leaf id or -1.
int find_event(const TimingTree& t, int id, int event,
               std::vector<std::pair<LinExpr, LinExpr>>& repeats) {
    const auto& n = t.nodes[id];
    switch (n.kind) {
        case OpExpr::Kind::Event:
            return n.event == event ? id : -1;
        case OpExpr::Kind::Repeat: {
            repeats.emplace_back(t.nodes[n.left].duration, n.delay.lin());
            int hit = find_event(t, n.left, event, repeats);
            if (hit < 0) repeats.pop_back();
            return hit;
        }
        case OpExpr::Kind::Transit: {
            if (int hit = find_event(t, n.left, event, repeats); hit >= 0) return hit;
            return find_event(t, n.right, event, repeats);
        }
    }
    return -1;
}

}  // namespace

LinExpr anchor_time(const Model& model, const Anchor& anchor) {
    model.validate_anchor(anchor);
    const OperationDef* op = model.find_op(anchor.op);
    TimingTree t = annotate(*op->expr);

    std::vector<std::pair<LinExpr, LinExpr>> repeats;
    int leaf = find_event(t, 0, anchor.event, repeats);
    CIS_ASSERT(leaf >= 0, "validated anchor lost its event");
    CIS_ASSERT(repeats.size() == anchor.indices.size(), "index/repeat depth mismatch");

    LinExpr time = LinExpr(VarId::op_start(anchor.op)) + t.nodes[leaf].start;
    for (size_t i = 0; i < repeats.size(); ++i)
        time += (repeats[i].first + repeats[i].second) * anchor.indices[i];
    return time;
}

LinExpr op_end_time(const Model& model, const std::string& op) {
    const OperationDef* def = model.find_op(op);
    if (!def) throw ValidationError("unknown operation '" + op + "'");
    TimingTree t = build_tree(*def->expr);
    compute_durations(t);
    return LinExpr(VarId::op_start(op)) + t.nodes[0].duration;
}

namespace {

void dump_node(const TimingTree& t, int id, const std::string& path, std::string& out) {
    const auto& n = t.nodes[id];
    out += path + " dur=" + n.duration.text() + " start=" + n.start.text() + "\n";
    if (n.left >= 0) dump_node(t, n.left, path == "/" ? "/l" : path + "/l", out);
    if (n.right >= 0) dump_node(t, n.right, path == "/" ? "/r" : path + "/r", out);
}

}  // namespace

std::string dump_tree(const TimingTree& tree) {
    std::string out;
    dump_node(tree, 0, "/", out);
    return out;
}

}  // namespace cis
