#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "elbx/kb.hpp"

namespace elbx {

// Line-oriented S-expression format, one axiom per line, '#' comments:
//   SubClassOf(<C> <C>)
//   ClassAssertion(<ConceptName> <Individual>)
//   PropertyAssertion(<RoleName> <Individual> <Individual>)
// with concepts Top | Bottom | <Name> | and(<C> <C> ...) | some(<Role> <C>)
// and or(<C> ...) allowed only as the whole left side of a SubClassOf, where
// it is normalized into one GCI per disjunct.

namespace detail {

struct Token {
    enum class Kind { Name, LParen, RParen, End };
    Kind kind;
    std::string text;
    int column;
};

class LineLexer {
public:
    LineLexer(std::string_view line, int line_no) : line_(line), line_no_(line_no) {}

    Token next() {
        while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r'))
            ++pos_;
        int col = static_cast<int>(pos_) + 1;
        if (pos_ >= line_.size() || line_[pos_] == '#') return {Token::Kind::End, "", col};
        char c = line_[pos_];
        if (c == '(') {
            ++pos_;
            return {Token::Kind::LParen, "(", col};
        }
        if (c == ')') {
            ++pos_;
            return {Token::Kind::RParen, ")", col};
        }
        if (!std::isalpha(static_cast<unsigned char>(c)))
            throw ParseError(ParseError::Kind::Syntax, line_no_, col,
                             std::string("unexpected character '") + c + "'");
        size_t start = pos_;
        while (pos_ < line_.size()) {
            char d = line_[pos_];
            if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.' || d == '/' || d == '-')
                ++pos_;
            else
                break;
        }
        return {Token::Kind::Name, std::string(line_.substr(start, pos_ - start)), col};
    }

    Token peek() {
        size_t save = pos_;
        Token t = next();
        pos_ = save;
        return t;
    }

    int line_no() const { return line_no_; }

private:
    std::string_view line_;
    size_t pos_ = 0;
    int line_no_;
};

inline bool is_rejected_operator(const std::string& name) {
    return name == "not" || name == "all" || name == "only" || name == "inverse" ||
           name == "min" || name == "max" || name == "or";
}

class AxiomParser {
public:
    AxiomParser(LineLexer& lex, Vocabulary& voc) : lex_(lex), voc_(voc) {}

    void parse_into(KnowledgeBase& kb) {
        Token head = lex_.next();
        if (head.kind == Token::Kind::End) return;
        if (head.kind != Token::Kind::Name) fail(head, "expected axiom keyword");
        if (head.text == "SubClassOf") {
            expect(Token::Kind::LParen);
            // or(...) may appear as the entire LHS and is split right here.
            std::vector<Concept> lhs_disjuncts = parse_lhs();
            Concept rhs = parse_concept(false);
            expect(Token::Kind::RParen);
            expect_end();
            for (auto& d : lhs_disjuncts) kb.add(Gci{std::move(d), rhs});
        } else if (head.text == "ClassAssertion") {
            expect(Token::Kind::LParen);
            Token cls = expect(Token::Kind::Name);
            if (cls.text == "and" || cls.text == "some" || is_rejected_operator(cls.text) ||
                cls.text == "Top" || cls.text == "Bottom")
                fail(cls, "class assertions use concept names only");
            Token ind = expect(Token::Kind::Name);
            expect(Token::Kind::RParen);
            expect_end();
            kb.add(Assertion::clazz(voc_.concept_name(cls.text), Ind::named(voc_.individual_name(ind.text))));
        } else if (head.text == "PropertyAssertion") {
            expect(Token::Kind::LParen);
            Token role = expect(Token::Kind::Name);
            Token s = expect(Token::Kind::Name);
            Token o = expect(Token::Kind::Name);
            expect(Token::Kind::RParen);
            expect_end();
            kb.add(Assertion::rel(voc_.role_name(role.text), Ind::named(voc_.individual_name(s.text)),
                                  Ind::named(voc_.individual_name(o.text))));
        } else {
            fail(head, "unknown axiom keyword '" + head.text + "'");
        }
    }

    Concept parse_single_concept() {
        Concept c = parse_concept(false);
        expect_end();
        return c;
    }

private:
    std::vector<Concept> parse_lhs() {
        Token t = lex_.peek();
        if (t.kind == Token::Kind::Name && t.text == "or") {
            lex_.next();
            expect(Token::Kind::LParen);
            std::vector<Concept> out;
            while (lex_.peek().kind != Token::Kind::RParen) out.push_back(parse_concept(false));
            expect(Token::Kind::RParen);
            if (out.size() < 2) fail(t, "or() needs at least two disjuncts");
            return out;
        }
        return {parse_concept(false)};
    }

    Concept parse_concept(bool /*unused*/) {
        Token t = lex_.next();
        if (t.kind != Token::Kind::Name) fail(t, "expected a concept");
        if (t.text == "Top") return Concept::top();
        if (t.text == "Bottom") return Concept::bottom();
        if (t.text == "and") {
            expect(Token::Kind::LParen);
            std::vector<Concept> parts;
            while (lex_.peek().kind != Token::Kind::RParen) parts.push_back(parse_concept(false));
            expect(Token::Kind::RParen);
            if (parts.size() < 2) fail(t, "and() needs at least two conjuncts");
            return Concept::conjunction(std::move(parts));
        }
        if (t.text == "some") {
            expect(Token::Kind::LParen);
            Token role = expect(Token::Kind::Name);
            if (is_rejected_operator(role.text) && lex_.peek().kind == Token::Kind::LParen)
                throw ParseError(ParseError::Kind::RejectedConstruct, lex_.line_no(), role.column,
                                 "operator '" + role.text + "' is outside EL-bottom");
            Concept filler = parse_concept(false);
            expect(Token::Kind::RParen);
            return Concept::exists(voc_.role_name(role.text), std::move(filler));
        }
        if (is_rejected_operator(t.text))
            throw ParseError(ParseError::Kind::RejectedConstruct, lex_.line_no(), t.column,
                             "operator '" + t.text + "' is outside EL-bottom");
        if (lex_.peek().kind == Token::Kind::LParen)
            fail(t, "unknown concept operator '" + t.text + "'");
        return Concept::atomic(voc_.concept_name(t.text));
    }

    Token expect(Token::Kind kind) {
        Token t = lex_.next();
        if (t.kind != kind) fail(t, "unexpected token '" + t.text + "'");
        return t;
    }

    void expect_end() {
        Token t = lex_.next();
        if (t.kind != Token::Kind::End) fail(t, "trailing input '" + t.text + "'");
    }

    [[noreturn]] void fail(const Token& t, const std::string& msg) {
        throw ParseError(ParseError::Kind::Syntax, lex_.line_no(), t.column, msg);
    }

    LineLexer& lex_;
    Vocabulary& voc_;
};

} // namespace detail

inline KnowledgeBase parse_kb(std::string_view text) {
    KnowledgeBase kb;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        ++line_no;
        detail::LineLexer lex(line, line_no);
        detail::AxiomParser(lex, kb.vocab_mut()).parse_into(kb);
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return kb;
}

// Parses a concept written in the same grammar as in KB files, interning
// names into the given vocabulary.
inline Concept parse_concept(std::string_view text, Vocabulary& voc) {
    detail::LineLexer lex(text, 1);
    return detail::AxiomParser(lex, voc).parse_single_concept();
}

// Parses "A(a)" or "r(a,b)" (comma or space separated arguments).
inline Assertion parse_assertion(std::string_view text, Vocabulary& voc) {
    std::string buf(text);
    for (auto& c : buf)
        if (c == ',') c = ' ';
    detail::LineLexer lex(buf, 1);
    detail::Token name = lex.next();
    if (name.kind != detail::Token::Kind::Name)
        throw ParseError(ParseError::Kind::Syntax, 1, name.column, "expected assertion");
    detail::Token lp = lex.next();
    if (lp.kind != detail::Token::Kind::LParen)
        throw ParseError(ParseError::Kind::Syntax, 1, lp.column, "expected '('");
    std::vector<std::string> args;
    for (;;) {
        detail::Token t = lex.next();
        if (t.kind == detail::Token::Kind::RParen) break;
        if (t.kind != detail::Token::Kind::Name)
            throw ParseError(ParseError::Kind::Syntax, 1, t.column, "expected individual name");
        args.push_back(t.text);
    }
    if (args.size() == 1)
        return Assertion::clazz(voc.concept_name(name.text), Ind::named(voc.individual_name(args[0])));
    if (args.size() == 2)
        return Assertion::rel(voc.role_name(name.text), Ind::named(voc.individual_name(args[0])),
                              Ind::named(voc.individual_name(args[1])));
    throw ParseError(ParseError::Kind::Syntax, 1, 1, "assertions take one or two individuals");
}

inline std::string render_concept(const Concept& c, const Vocabulary& voc) {
    switch (c.kind()) {
    case Concept::Kind::Top:
        return "Top";
    case Concept::Kind::Bottom:
        return "Bottom";
    case Concept::Kind::Atomic:
        return voc.text(c.name());
    case Concept::Kind::Existential:
        return "some(" + voc.text(c.role()) + " " + render_concept(c.filler(), voc) + ")";
    case Concept::Kind::Conjunction: {
        std::string out = "and(";
        bool first = true;
        for (const auto& d : c.conjuncts()) {
            if (!first) out += " ";
            first = false;
            out += render_concept(d, voc);
        }
        return out + ")";
    }
    }
    return "Top";
}

inline std::string serialize_kb(const KnowledgeBase& kb) {
    for (const auto& a : kb.abox()) {
        if (a.subject.is_fresh() || (a.kind == Assertion::Kind::Role && a.object.is_fresh()))
            throw SerializationError("fresh individuals cannot be serialized: " + kb.render(a));
    }
    std::ostringstream out;
    out << "# kb 1\n";
    for (const auto& g : kb.tbox())
        out << "SubClassOf(" << render_concept(g.lhs, kb.vocab()) << " " << render_concept(g.rhs, kb.vocab())
            << ")\n";
    std::vector<Assertion> abox = kb.abox();
    std::sort(abox.begin(), abox.end(), AssertionTextLess{&kb.vocab()});
    for (const auto& a : abox) {
        if (a.kind == Assertion::Kind::Class)
            out << "ClassAssertion(" << kb.vocab().text(a.cls) << " " << kb.vocab().text(a.subject) << ")\n";
        else
            out << "PropertyAssertion(" << kb.vocab().text(a.role) << " " << kb.vocab().text(a.subject) << " "
                << kb.vocab().text(a.object) << ")\n";
    }
    return out.str();
}

} // namespace elbx
