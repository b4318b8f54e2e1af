#include "cis/parser.hpp"

#include <cctype>
#include <map>
#include <set>
#include <vector>

#include "cis/error.hpp"

namespace cis {
namespace {

struct Pos {
    int line = 1;
    int col = 1;
};

// One logical statement: comment-stripped, continuation-joined source text
// plus the original (line, col) of every character for error reporting.
struct Statement {
    std::string text;
    std::vector<Pos> pos;

    Pos at(size_t i) const {
        if (pos.empty()) return Pos{};
        return i < pos.size() ? pos[i] : pos.back();
    }
};

std::vector<Statement> split_statements(const std::string& src) {
    std::vector<Statement> stmts;
    Statement cur;
    bool joining = false;

    int line = 1;
    size_t i = 0;
    while (i <= src.size()) {
        // Grab one physical line.
        size_t eol = src.find('\n', i);
        std::string raw = src.substr(i, (eol == std::string::npos ? src.size() : eol) - i);
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();

        // Strip comment, respecting quoted strings.
        bool quoted = false;
        size_t len = raw.size();
        for (size_t k = 0; k < raw.size(); ++k) {
            if (raw[k] == '"') quoted = !quoted;
            if (raw[k] == '#' && !quoted) {
                len = k;
                break;
            }
        }
        // Trailing backslash (ignoring spaces after it) continues the statement.
        size_t end = len;
        while (end > 0 && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
        bool cont = end > 0 && raw[end - 1] == '\\';
        size_t copy_to = cont ? end - 1 : len;

        if (!joining && !cur.text.empty()) {
            stmts.push_back(std::move(cur));
            cur = Statement{};
        }
        for (size_t k = 0; k < copy_to; ++k) {
            cur.text += raw[k];
            cur.pos.push_back(Pos{line, static_cast<int>(k + 1)});
        }
        if (cont) {
            cur.text += ' ';
            cur.pos.push_back(Pos{line, static_cast<int>(end)});
        }
        joining = cont;

        if (eol == std::string::npos) break;
        i = eol + 1;
        ++line;
    }
    if (!cur.text.empty()) stmts.push_back(std::move(cur));

    // Drop blank statements.
    std::vector<Statement> out;
    for (auto& s : stmts) {
        bool blank = true;
        for (char c : s.text)
            if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
        if (!blank) out.push_back(std::move(s));
    }
    return out;
}

struct Token {
    enum class Kind { Ident, Int, Punct, Str, End };
    Kind kind = Kind::End;
    std::string text;
    std::int64_t value = 0;
    Pos pos;
};

class Lexer {
public:
    explicit Lexer(const Statement& s) : s_(s) { advance(); }

    const Token& cur() const { return cur_; }

    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(cur_.pos.line, cur_.pos.col, msg);
    }

    Token expect_punct(const std::string& p) {
        if (cur_.kind != Token::Kind::Punct || cur_.text != p)
            fail("expected '" + p + "', got '" + shown() + "'");
        return take();
    }

    Token expect_ident(const char* what) {
        if (cur_.kind != Token::Kind::Ident)
            fail(std::string("expected ") + what + ", got '" + shown() + "'");
        return take();
    }

    std::int64_t expect_int(const char* what) {
        if (cur_.kind != Token::Kind::Int)
            fail(std::string("expected ") + what + ", got '" + shown() + "'");
        return take().value;
    }

    bool at_punct(const std::string& p) const {
        return cur_.kind == Token::Kind::Punct && cur_.text == p;
    }

    bool at_end() const { return cur_.kind == Token::Kind::End; }

    std::string shown() const {
        return cur_.kind == Token::Kind::End ? "end of statement" : cur_.text;
    }

private:
    void advance() {
        while (i_ < s_.text.size() && std::isspace(static_cast<unsigned char>(s_.text[i_]))) ++i_;
        cur_ = Token{};
        cur_.pos = s_.at(i_);
        if (i_ >= s_.text.size()) {
            cur_.kind = Token::Kind::End;
            return;
        }
        char c = s_.text[i_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i_;
            while (j < s_.text.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_.text[j])) || s_.text[j] == '_'))
                ++j;
            cur_.kind = Token::Kind::Ident;
            cur_.text = s_.text.substr(i_, j - i_);
            i_ = j;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i_;
            while (j < s_.text.size() && std::isdigit(static_cast<unsigned char>(s_.text[j]))) ++j;
            cur_.kind = Token::Kind::Int;
            cur_.text = s_.text.substr(i_, j - i_);
            try {
                cur_.value = std::stoll(cur_.text);
            } catch (const std::out_of_range&) {
                throw ParseError(cur_.pos.line, cur_.pos.col, "integer literal out of range");
            }
            i_ = j;
            return;
        }
        if (c == '"') {
            size_t j = s_.text.find('"', i_ + 1);
            if (j == std::string::npos)
                throw ParseError(cur_.pos.line, cur_.pos.col, "unterminated string");
            cur_.kind = Token::Kind::Str;
            cur_.text = s_.text.substr(i_ + 1, j - i_ - 1);
            i_ = j + 1;
            return;
        }
        // Multi-char relations first.
        for (const char* p : {"<=", ">=", "=="}) {
            if (s_.text.compare(i_, 2, p) == 0) {
                cur_.kind = Token::Kind::Punct;
                cur_.text = p;
                i_ += 2;
                return;
            }
        }
        cur_.kind = Token::Kind::Punct;
        cur_.text = std::string(1, c);
        ++i_;
    }

    const Statement& s_;
    size_t i_ = 0;
    Token cur_;
};

// "e<INT>" arrives as one identifier token; split the ordinal out of it.
int event_ordinal(Lexer& lx) {
    Token t = lx.expect_ident("event (e<N>)");
    if (t.text.size() < 2 || t.text[0] != 'e')
        throw ParseError(t.pos.line, t.pos.col, "expected event (e<N>), got '" + t.text + "'");
    for (size_t k = 1; k < t.text.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(t.text[k])))
            throw ParseError(t.pos.line, t.pos.col, "expected event (e<N>), got '" + t.text + "'");
    return static_cast<int>(std::stoll(t.text.substr(1)));
}

DelayTerm parse_delay(Lexer& lx) {
    if (lx.cur().kind == Token::Kind::Int) return DelayTerm::constant(lx.take().value);
    if (lx.cur().kind == Token::Kind::Ident) return DelayTerm::symbol(lx.take().text);
    lx.fail("expected delay (integer or symbol), got '" + lx.shown() + "'");
}

std::shared_ptr<OpExpr> parse_expr(Lexer& lx) {
    const Token& t = lx.cur();
    if (t.kind != Token::Kind::Ident) lx.fail("expected expression, got '" + lx.shown() + "'");
    if (t.text == "R") {
        Token rt = lx.take();
        lx.expect_punct("<");
        std::int64_t iter = lx.expect_int("iteration count");
        if (iter < 1)
            throw ParseError(rt.pos.line, rt.pos.col, "R iteration count must be >= 1");
        lx.expect_punct(",");
        DelayTerm d = parse_delay(lx);
        lx.expect_punct(">");
        lx.expect_punct("(");
        auto child = parse_expr(lx);
        lx.expect_punct(")");
        return OpExpr::make_repeat(iter, std::move(d), std::move(child));
    }
    if (t.text == "T") {
        lx.take();
        lx.expect_punct("<");
        DelayTerm d = parse_delay(lx);
        lx.expect_punct(">");
        lx.expect_punct("(");
        auto left = parse_expr(lx);
        lx.expect_punct(",");
        auto right = parse_expr(lx);
        lx.expect_punct(")");
        return OpExpr::make_transit(std::move(d), std::move(left), std::move(right));
    }
    return OpExpr::make_event(event_ordinal(lx));
}

void collect_leaf_events(const OpExpr& n, std::vector<int>& out) {
    switch (n.kind) {
        case OpExpr::Kind::Event:
            out.push_back(n.event);
            return;
        case OpExpr::Kind::Repeat:
            collect_leaf_events(*n.left, out);
            return;
        case OpExpr::Kind::Transit:
            collect_leaf_events(*n.left, out);
            collect_leaf_events(*n.right, out);
            return;
    }
}

Anchor parse_anchor(Lexer& lx) {
    Anchor a;
    Token name = lx.expect_ident("operation name");
    a.op = name.text;
    lx.expect_punct(".");
    a.event = event_ordinal(lx);
    while (lx.at_punct("[")) {
        lx.take();
        a.indices.push_back(static_cast<int>(lx.expect_int("anchor index")));
        lx.expect_punct("]");
    }
    return a;
}

// lin := term { (+|-) term } ; term := INT | [INT "*"] anchor
LinExpr parse_lin(Lexer& lx) {
    LinExpr acc;
    std::int64_t sign = 1;
    for (;;) {
        if (lx.cur().kind == Token::Kind::Int) {
            std::int64_t n = lx.take().value;
            if (lx.at_punct("*")) {
                lx.take();
                acc += LinExpr::var(parse_anchor(lx).var(), checked_mul(sign, n));
            } else {
                acc += LinExpr(checked_mul(sign, n));
            }
        } else {
            acc += LinExpr::var(parse_anchor(lx).var(), sign);
        }
        if (lx.at_punct("+")) {
            lx.take();
            sign = 1;
        } else if (lx.at_punct("-")) {
            lx.take();
            sign = -1;
        } else {
            break;
        }
    }
    return acc;
}

Rel parse_rel(Lexer& lx) {
    static const std::map<std::string, Rel> rels = {
        {"<", Rel::LT}, {"<=", Rel::LE}, {"==", Rel::EQ}, {">=", Rel::GE}, {">", Rel::GT}};
    if (lx.cur().kind == Token::Kind::Punct) {
        auto it = rels.find(lx.cur().text);
        if (it != rels.end()) {
            lx.take();
            return it->second;
        }
    }
    lx.fail("expected relation (< <= == >= >), got '" + lx.shown() + "'");
}

struct BindStmt {
    std::string op;
    ResourceBinding binding;
    Pos pos;
};

}  // namespace

Model parse_spec(const std::string& text) {
    Model model;
    std::vector<BindStmt> binds;

    for (const Statement& stmt : split_statements(text)) {
        Lexer lx(stmt);
        Token head = lx.expect_ident("statement keyword (operation/constraint/bind)");
        if (head.text == "operation") {
            OperationDef op;
            op.name = lx.expect_ident("operation name").text;
            op.expr = parse_expr(lx);
            if (!lx.at_end()) lx.fail("trailing input after operation expression");

            std::vector<int> leaves;
            collect_leaf_events(*op.expr, leaves);
            for (size_t k = 0; k < leaves.size(); ++k) {
                if (leaves[k] != static_cast<int>(k))
                    throw ParseError(head.pos.line, head.pos.col,
                                     "operation '" + op.name +
                                         "': event ids must be dense left-to-right (leaf " +
                                         std::to_string(k) + " is e" + std::to_string(leaves[k]) +
                                         ")");
            }
            if (model.find_op(op.name))
                throw ParseError(head.pos.line, head.pos.col,
                                 "duplicate operation name '" + op.name + "'");
            model.operations.push_back(std::move(op));
        } else if (head.text == "constraint") {
            ConstraintStmt c;
            c.lhs = parse_lin(lx);
            c.rel = parse_rel(lx);
            c.rhs = parse_lin(lx);
            if (!lx.at_end()) lx.fail("trailing input after constraint");
            model.constraints.push_back(std::move(c));
        } else if (head.text == "bind") {
            BindStmt b;
            b.pos = head.pos;
            b.op = lx.expect_ident("operation name").text;
            b.binding.slot = static_cast<int>(lx.expect_int("slot ordinal"));
            lx.expect_punct(":");
            b.binding.fsm = static_cast<int>(lx.expect_int("fsm ordinal"));
            lx.expect_punct("@");
            Token kind = lx.expect_ident("binding kind (I/C/S)");
            if (kind.text == "I")
                b.binding.kind = ResourceBinding::Kind::I;
            else if (kind.text == "C")
                b.binding.kind = ResourceBinding::Kind::C;
            else if (kind.text == "S")
                b.binding.kind = ResourceBinding::Kind::S;
            else
                throw ParseError(kind.pos.line, kind.pos.col,
                                 "binding kind must be @I, @C or @S");
            if (lx.cur().kind != Token::Kind::Str) lx.fail("expected quoted payload");
            b.binding.payload = lx.take().text;
            if (!lx.at_end()) lx.fail("trailing input after bind");
            binds.push_back(std::move(b));
        } else {
            throw ParseError(head.pos.line, head.pos.col,
                             "expected operation/constraint/bind, got '" + head.text + "'");
        }
    }

    if (model.operations.empty()) throw ValidationError("empty model: no operations defined");

    for (auto& b : binds) {
        bool found = false;
        for (auto& op : model.operations) {
            if (op.name != b.op) continue;
            if (op.binding)
                throw ParseError(b.pos.line, b.pos.col,
                                 "operation '" + b.op + "' bound twice");
            op.binding = b.binding;
            found = true;
        }
        if (!found)
            throw ParseError(b.pos.line, b.pos.col, "bind references unknown operation '" + b.op + "'");
    }

    model.validate();
    return model;
}

namespace {

// Constraint sides rendered back into the statement grammar: no leading
// minus (a zero term is prepended instead), constant last.
std::string render_side(const LinExpr& e) {
    if (e.terms().empty()) return std::to_string(e.constant());
    std::string s;
    for (const auto& [v, c] : e.terms()) {
        if (s.empty() && c < 0) s = "0";
        if (!s.empty()) s += c < 0 ? "-" : "+";
        std::int64_t m = c < 0 ? -c : c;
        if (m != 1) s += std::to_string(m) + "*";
        s += v.text();
    }
    if (e.constant() > 0)
        s += "+" + std::to_string(e.constant());
    else if (e.constant() < 0)
        s += "-" + std::to_string(-e.constant());
    return s;
}

}  // namespace

std::string emit_text(const Model& model) {
    std::string out;
    for (const auto& op : model.operations) {
        out += "operation " + op.name + " " + op.expr->text() + "\n";
        if (op.binding) {
            const auto& b = *op.binding;
            out += "bind " + op.name + " " + std::to_string(b.slot) + ":" +
                   std::to_string(b.fsm) + " " + b.kind_text() + " \"" + b.payload + "\"\n";
        }
    }
    for (const auto& c : model.constraints)
        out += "constraint " + render_side(c.lhs) + " " + rel_text(c.rel) + " " +
               render_side(c.rhs) + "\n";
    return out;
}

}  // namespace cis
