#include "cis/model.hpp"

#include <set>

#include "cis/error.hpp"

namespace cis {

DelayTerm DelayTerm::constant(std::int64_t v) {
    DelayTerm d;
    d.kind = Kind::Constant;
    d.value = v;
    return d;
}

DelayTerm DelayTerm::symbol(std::string n) {
    DelayTerm d;
    d.kind = Kind::Symbol;
    d.name = std::move(n);
    return d;
}

LinExpr DelayTerm::lin() const {
    if (kind == Kind::Constant) return LinExpr(value);
    return LinExpr(VarId::delay_sym(name));
}

std::string DelayTerm::text() const {
    return kind == Kind::Constant ? std::to_string(value) : name;
}

std::shared_ptr<OpExpr> OpExpr::make_event(int id) {
    auto n = std::make_shared<OpExpr>();
    n->kind = Kind::Event;
    n->event = id;
    return n;
}

std::shared_ptr<OpExpr> OpExpr::make_repeat(std::int64_t iter, DelayTerm delay,
                                            std::shared_ptr<OpExpr> child) {
    auto n = std::make_shared<OpExpr>();
    n->kind = Kind::Repeat;
    n->iter = iter;
    n->delay = std::move(delay);
    n->left = std::move(child);
    return n;
}

std::shared_ptr<OpExpr> OpExpr::make_transit(DelayTerm delay, std::shared_ptr<OpExpr> left,
                                             std::shared_ptr<OpExpr> right) {
    auto n = std::make_shared<OpExpr>();
    n->kind = Kind::Transit;
    n->delay = std::move(delay);
    n->left = std::move(left);
    n->right = std::move(right);
    return n;
}

int OpExpr::num_events() const {
    switch (kind) {
        case Kind::Event:
            return 1;
        case Kind::Repeat:
            return left->num_events();
        case Kind::Transit:
            return left->num_events() + right->num_events();
    }
    return 0;
}

int OpExpr::num_repeats() const {
    switch (kind) {
        case Kind::Event:
            return 0;
        case Kind::Repeat:
            return 1 + left->num_repeats();
        case Kind::Transit:
            return left->num_repeats() + right->num_repeats();
    }
    return 0;
}

int OpExpr::num_transits() const {
    switch (kind) {
        case Kind::Event:
            return 0;
        case Kind::Repeat:
            return left->num_transits();
        case Kind::Transit:
            return 1 + left->num_transits() + right->num_transits();
    }
    return 0;
}

std::string OpExpr::text() const {
    switch (kind) {
        case Kind::Event:
            return "e" + std::to_string(event);
        case Kind::Repeat:
            return "R<" + std::to_string(iter) + "," + delay.text() + ">(" + left->text() + ")";
        case Kind::Transit:
            return "T<" + delay.text() + ">(" + left->text() + "," + right->text() + ")";
    }
    return "?";
}

bool structurally_equal(const OpExpr& a, const OpExpr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case OpExpr::Kind::Event:
            return a.event == b.event;
        case OpExpr::Kind::Repeat:
            return a.iter == b.iter && a.delay == b.delay && structurally_equal(*a.left, *b.left);
        case OpExpr::Kind::Transit:
            return a.delay == b.delay && structurally_equal(*a.left, *b.left) &&
                   structurally_equal(*a.right, *b.right);
    }
    return false;
}

std::string rel_text(Rel r) {
    switch (r) {
        case Rel::LT: return "<";
        case Rel::LE: return "<=";
        case Rel::EQ: return "==";
        case Rel::GE: return ">=";
        case Rel::GT: return ">";
    }
    return "?";
}

std::string ConstraintStmt::text() const {
    return lhs.text() + " " + rel_text(rel) + " " + rhs.text();
}

bool ConstraintStmt::holds(std::int64_t l, std::int64_t r) const {
    switch (rel) {
        case Rel::LT: return l < r;
        case Rel::LE: return l <= r;
        case Rel::EQ: return l == r;
        case Rel::GE: return l >= r;
        case Rel::GT: return l > r;
    }
    return false;
}

std::string ResourceBinding::kind_text() const {
    switch (kind) {
        case Kind::I: return "@I";
        case Kind::C: return "@C";
        case Kind::S: return "@S";
    }
    return "?";
}

const OperationDef* Model::find_op(const std::string& name) const {
    for (const auto& op : operations)
        if (op.name == name) return &op;
    return nullptr;
}

namespace {

// Repeat iters on the root-to-leaf path of `event`, or nullopt if the event
// is not in this subtree.
std::optional<std::vector<std::int64_t>> iters_on_path(const OpExpr& node, int event) {
    switch (node.kind) {
        case OpExpr::Kind::Event:
            if (node.event == event) return std::vector<std::int64_t>{};
            return std::nullopt;
        case OpExpr::Kind::Repeat: {
            auto sub = iters_on_path(*node.left, event);
            if (!sub) return std::nullopt;
            sub->insert(sub->begin(), node.iter);
            return sub;
        }
        case OpExpr::Kind::Transit: {
            if (auto sub = iters_on_path(*node.left, event)) return sub;
            return iters_on_path(*node.right, event);
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<std::int64_t> Model::repeat_iters_on_path(const std::string& op, int event) const {
    const OperationDef* def = find_op(op);
    if (!def) throw ValidationError("unknown operation '" + op + "'");
    auto path = iters_on_path(*def->expr, event);
    if (!path)
        throw ValidationError("operation '" + op + "' has no event e" + std::to_string(event));
    return *path;
}

void Model::validate_anchor(const Anchor& a) const {
    auto iters = repeat_iters_on_path(a.op, a.event);
    if (a.indices.size() != iters.size())
        throw ValidationError("anchor " + a.text() + ": expected " +
                              std::to_string(iters.size()) + " indices, got " +
                              std::to_string(a.indices.size()));
    for (size_t i = 0; i < iters.size(); ++i) {
        if (a.indices[i] < 0 || a.indices[i] >= iters[i])
            throw ValidationError("anchor " + a.text() + ": index " +
                                  std::to_string(a.indices[i]) + " outside [0, " +
                                  std::to_string(iters[i]) + ")");
    }
}

std::vector<Anchor> anchors_in(const LinExpr& e) {
    std::vector<Anchor> out;
    for (const auto& [v, c] : e.terms()) {
        CIS_ASSERT(v.kind == VarId::Kind::Anchor, "constraint side holds non-anchor variable");
        out.push_back(Anchor{v.op, v.event, v.indices});
    }
    return out;
}

void Model::validate() const {
    std::set<std::string> names;
    std::set<std::pair<int, int>> bound;
    for (const auto& op : operations) {
        if (!names.insert(op.name).second)
            throw ValidationError("duplicate operation name '" + op.name + "'");
        if (op.binding) {
            if (!bound.insert({op.binding->slot, op.binding->fsm}).second)
                throw ValidationError("operation '" + op.name + "': slot " +
                                      std::to_string(op.binding->slot) + ":" +
                                      std::to_string(op.binding->fsm) + " bound twice");
        }
    }
    for (const auto& c : constraints) {
        for (const auto& side : {c.lhs, c.rhs})
            for (const auto& a : anchors_in(side)) validate_anchor(a);
    }
}

bool models_equal(const Model& a, const Model& b) {
    if (a.operations.size() != b.operations.size()) return false;
    if (a.constraints.size() != b.constraints.size()) return false;
    for (size_t i = 0; i < a.operations.size(); ++i) {
        const auto& x = a.operations[i];
        const auto& y = b.operations[i];
        if (x.name != y.name || x.binding != y.binding) return false;
        if (!structurally_equal(*x.expr, *y.expr)) return false;
    }
    for (size_t i = 0; i < a.constraints.size(); ++i)
        if (a.constraints[i] != b.constraints[i]) return false;
    return true;
}

}  // namespace cis
