#ifndef CIS_MODEL_HPP
#define CIS_MODEL_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cis/lin_expr.hpp"

namespace cis {

// Delay parameter of an R/T operator: a literal cycle count or a named symbol.
struct DelayTerm {
    enum class Kind { Constant, Symbol };

    Kind kind = Kind::Constant;
    std::int64_t value = 0;
    std::string name;

    static DelayTerm constant(std::int64_t v);
    static DelayTerm symbol(std::string n);

    LinExpr lin() const;
    std::string text() const;

    friend bool operator==(const DelayTerm&, const DelayTerm&) = default;
};

// Operation expression tree. Leaves are single-cycle events; R repeats its
// child `iter` times with `delay` cycles between iterations; T runs `left`,
// waits `delay`, then runs `right`.
struct OpExpr {
    enum class Kind { Event, Repeat, Transit };

    Kind kind = Kind::Event;
    int event = 0;              // Event
    std::int64_t iter = 1;      // Repeat, >= 1
    DelayTerm delay;            // Repeat / Transit
    std::shared_ptr<OpExpr> left;   // Repeat child or Transit left
    std::shared_ptr<OpExpr> right;  // Transit right

    static std::shared_ptr<OpExpr> make_event(int id);
    static std::shared_ptr<OpExpr> make_repeat(std::int64_t iter, DelayTerm delay,
                                               std::shared_ptr<OpExpr> child);
    static std::shared_ptr<OpExpr> make_transit(DelayTerm delay, std::shared_ptr<OpExpr> left,
                                                std::shared_ptr<OpExpr> right);

    int num_events() const;
    int num_repeats() const;
    int num_transits() const;
    std::string text() const;
};

bool structurally_equal(const OpExpr& a, const OpExpr& b);

// One concrete instance of an event: op name, event ordinal, and one index
// per enclosing Repeat (outermost first).
struct Anchor {
    std::string op;
    int event = 0;
    std::vector<int> indices;

    VarId var() const { return VarId::anchor(op, event, indices); }
    std::string text() const { return var().text(); }

    friend auto operator<=>(const Anchor&, const Anchor&) = default;
};

enum class Rel { LT, LE, EQ, GE, GT };

std::string rel_text(Rel r);

// Linear (in)equality between two anchor combinations. Sides are canonical
// LinExprs whose variables are all Anchor-kind.
struct ConstraintStmt {
    LinExpr lhs;
    Rel rel = Rel::EQ;
    LinExpr rhs;

    std::string text() const;
    bool holds(std::int64_t l, std::int64_t r) const;

    friend bool operator==(const ConstraintStmt&, const ConstraintStmt&) = default;
};

// Which resource instruction realizes an operation. The payload is the
// instruction's field text; ';' separates several instructions of the same
// kind, and a trailing "steps=…" segment supplies @R strides (outermost
// Repeat first, default 1).
struct ResourceBinding {
    enum class Kind { I, C, S };

    int slot = 0;
    int fsm = 0;
    Kind kind = Kind::S;
    std::string payload;

    std::string kind_text() const;

    friend bool operator==(const ResourceBinding&, const ResourceBinding&) = default;
};

struct OperationDef {
    std::string name;
    std::shared_ptr<OpExpr> expr;
    std::optional<ResourceBinding> binding;
};

struct Model {
    std::vector<OperationDef> operations;
    std::vector<ConstraintStmt> constraints;

    const OperationDef* find_op(const std::string& name) const;

    // Checks every model invariant: unique op names, unique bound (slot, fsm)
    // pairs, and full anchor validity in all constraints. Throws
    // ValidationError on the first violation.
    void validate() const;

    // Anchor checks: op exists, event ordinal in range, index count matches
    // Repeat nesting on the event's path, each index < its Repeat's iter.
    void validate_anchor(const Anchor& a) const;

    // Iteration counts of the Repeats enclosing `event`, outermost first.
    std::vector<std::int64_t> repeat_iters_on_path(const std::string& op, int event) const;
};

bool models_equal(const Model& a, const Model& b);

// Decomposes a canonical constraint-side LinExpr back into anchors.
std::vector<Anchor> anchors_in(const LinExpr& e);

}  // namespace cis

#endif
