#include <string>

#include "cis/bench.hpp"
#include "cis/error.hpp"
#include "cis/model.hpp"
#include "cis/parser.hpp"
#include "doctest.h"

using namespace cis;

static const char* kToy = R"(operation I e0
operation C e0
operation S_RD R<64, t1>(e0)
operation S_WR R<64, t2>(e0)

constraint I.e0 < S_RD.e0[0]
constraint C.e0 <= S_RD.e0[0]+1
constraint S_WR.e0[0] == S_RD.e0[0]+2
constraint S_RD.e0[1]-S_RD.e0[0] == \
           S_WR.e0[1]-S_WR.e0[0]

bind I 0:0 @I "slot1->slot2;slot2->slot1"
bind C 2:0 @C "ADD-1"
bind S_RD 1:1 @S "address=0"
bind S_WR 1:0 @S "address=0"
)";

TEST_CASE("parses the vector-add model") {
    Model m = parse_spec(kToy);
    REQUIRE(m.operations.size() == 4);
    REQUIRE(m.constraints.size() == 4);
    CHECK(m.operations[0].name == "I");
    CHECK(m.operations[2].expr->text() == "R<64,t1>(e0)");
    CHECK(m.operations[2].expr->num_events() == 1);
    CHECK(m.operations[2].expr->num_repeats() == 1);
    CHECK(m.constraints[0].rel == Rel::LT);
    CHECK(m.constraints[1].rel == Rel::LE);
    CHECK(m.constraints[2].rel == Rel::EQ);
    REQUIRE(m.find_op("S_WR") != nullptr);
    REQUIRE(m.find_op("S_WR")->binding.has_value());
    CHECK(m.find_op("S_WR")->binding->slot == 1);
    CHECK(m.find_op("S_WR")->binding->fsm == 0);
    CHECK(m.find_op("S_WR")->binding->kind == ResourceBinding::Kind::S);
    CHECK(m.find_op("C")->binding->payload == "ADD-1");
}

TEST_CASE("comments and line continuations are transparent") {
    Model a = parse_spec("operation x e0  # trailing comment\n");
    Model b = parse_spec("operation \\\n  x \\\n  e0\n");
    CHECK(models_equal(a, b));
    // '#' inside a quoted payload is payload, not comment.
    Model c = parse_spec("operation x e0\nbind x 0:0 @I \"a#b\"\n");
    CHECK(c.operations[0].binding->payload == "a#b");
}

TEST_CASE("nested operator expressions parse to the right shape") {
    Model m = parse_spec("operation a R<2,t1>(T<t2>(R<3,t3>(T<t4>(e0,e1)),e2))");
    const OpExpr& root = *m.operations[0].expr;
    CHECK(root.kind == OpExpr::Kind::Repeat);
    CHECK(root.iter == 2);
    CHECK(root.delay == DelayTerm::symbol("t1"));
    CHECK(root.num_events() == 3);
    CHECK(root.num_repeats() == 2);
    CHECK(root.num_transits() == 2);
    CHECK(root.text() == "R<2,t1>(T<t2>(R<3,t3>(T<t4>(e0,e1)),e2))");
    // Constant delays parse as literals.
    Model k = parse_spec("operation b T<5>(e0,e1)");
    CHECK(k.operations[0].expr->delay == DelayTerm::constant(5));
}

TEST_CASE("serialization round-trips structurally") {
    for (const char* text : {kToy, "operation a R<2,t1>(T<t2>(R<3,t3>(T<t4>(e0,e1)),e2))",
                             "operation a T<0>(e0,T<3>(e1,e2))\nconstraint a.e1 == a.e0+4\n"}) {
        Model m = parse_spec(text);
        Model back = parse_spec(emit_text(m));
        CHECK(models_equal(m, back));
    }
}

TEST_CASE("round-trip holds across generated models") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ComplexityParams p{3 + static_cast<std::int64_t>(seed % 4),
                           static_cast<std::int64_t>(seed % 5),
                           2 + static_cast<std::int64_t>(seed % 6), seed};
        Model m = gen_random_app(p);
        Model back = parse_spec(emit_text(m));
        CHECK(models_equal(m, back));
        CHECK(emit_text(back) == emit_text(m));
    }
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parse_spec("operation I e0\noperation C %%\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.col > 0);
    }
    CHECK_THROWS_AS(parse_spec("operation a R<0,1>(e0)"), ParseError);  // iter must be >= 1
    CHECK_THROWS_AS(parse_spec("operation a T<1>(e0)"), ParseError);    // T needs two children
    CHECK_THROWS_AS(parse_spec("constraint a.e0 == 1"), ValidationError);
}

TEST_CASE("model invariants are enforced") {
    // Duplicate operation name.
    CHECK_THROWS_AS(parse_spec("operation a e0\noperation a e0\n"), ValidationError);
    // Unknown operation in a constraint.
    CHECK_THROWS_AS(parse_spec("operation a e0\nconstraint b.e0 == a.e0\n"), ValidationError);
    // Event ordinal out of range.
    CHECK_THROWS_AS(parse_spec("operation a e0\nconstraint a.e1 == a.e0\n"), ValidationError);
    // Index count must match the Repeat nesting depth.
    CHECK_THROWS_AS(parse_spec("operation a R<2,0>(e0)\nconstraint a.e0 == 3\n"), ValidationError);
    CHECK_THROWS_AS(parse_spec("operation a e0\nconstraint a.e0[0] == 3\n"), ValidationError);
    // Index must stay below its Repeat's iteration count.
    CHECK_THROWS_AS(parse_spec("operation a R<2,0>(e0)\nconstraint a.e0[2] == 3\n"),
                    ValidationError);
    // Two operations must not share a (slot, fsm) pair.
    CHECK_THROWS_AS(parse_spec("operation a e0\noperation b e0\n"
                               "bind a 0:0 @I \"x\"\nbind b 0:0 @C \"ADD\"\n"),
                    ValidationError);
}

TEST_CASE("anchors inside expressions decompose back out") {
    Model m = parse_spec(kToy);
    const ConstraintStmt& c = m.constraints[3];
    auto lhs = anchors_in(c.lhs);
    REQUIRE(lhs.size() == 2);
    CHECK(lhs[0].op == "S_RD");
    CHECK(lhs[0].indices == std::vector<int>{0});
    CHECK(lhs[1].indices == std::vector<int>{1});
}
