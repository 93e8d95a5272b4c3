#include <doctest.h>

#include "corex/kb.hpp"
#include "corex/prolog_text.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace corex;

namespace {

const SignedConcept p30{30, Sign::pos}, p9{9, Sign::pos}, n7{7, Sign::neg};

Dataset samples(std::initializer_list<std::pair<const char*, Label>> ids)
{
    Dataset d;
    for (auto [id, label] : ids) {
        SampleRecord s;
        s.sample_id = id;
        s.model_truth = label;
        d.samples.push_back(s);
    }
    return d;
}

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::config;
}

}  // namespace

TEST_CASE("facts render with the sample constant")
{
    CHECK(render_literal({Relation::present, p30, std::nullopt}, "s1") == "contains(s1, pos(s1,c30))");
    CHECK(render_literal({Relation::right_of, p30, p9}, "s1") == "right_of(s1, pos(s1,c30), pos(s1,c9))");
    CHECK(render_literal({Relation::contains, n7, p9}, "A") == "contains(A, neg(A,c7), pos(A,c9))");
    CHECK_THROWS_AS(render_literal({Relation::present, {1, Sign::null}, std::nullopt}, "s"), Error);
}

TEST_CASE("build_kb splits examples by model truth")
{
    const Dataset d = samples({{"s2", Label::negative}, {"s1", Label::positive}, {"s3", Label::positive}});
    FactsBySample facts;
    facts["s1"] = {{Relation::present, p30, std::nullopt}, {Relation::right_of, p30, p9}};
    const KnowledgeBase kb = build_kb(d, facts);
    CHECK(kb.positives == std::vector<std::string>{"s1", "s3"});
    CHECK(kb.negatives == std::vector<std::string>{"s2"});
    CHECK(kb.facts_of("s1").size() == 2);
    CHECK(kb.facts_of("s3").empty());
    CHECK(kb.facts.size() == 3);
    CHECK(kb.declarations.front() == "modeh(1, is_class(+sample))");
}

TEST_CASE("render and parse a small kb")
{
    const Dataset d = samples({{"s1", Label::positive}, {"s2", Label::negative}});
    FactsBySample facts;
    facts["s1"] = {{Relation::present, p30, std::nullopt}};
    const KnowledgeBase kb = build_kb(d, facts);
    const KbText text = render_kb(kb);
    CHECK(text.background.find("contains(s1, pos(s1,c30)).\n") != std::string::npos);
    CHECK(text.positives == "is_class(s1).\n");
    CHECK(text.negatives == "is_class(s2).\n");
    CHECK(parse_kb(text.background, text.positives, text.negatives) == kb);

    const KbText empty = render_kb(KnowledgeBase{});
    CHECK(empty == KbText{});
    CHECK(parse_kb("", "", "") == KnowledgeBase{});
}

TEST_CASE("three facts render in canonical order")
{
    KnowledgeBase kb;
    kb.positives = {"s1"};
    kb.facts["s1"] = {{Relation::right_of, p30, p9}, {Relation::present, p9, std::nullopt},
                      {Relation::above_of, p9, p30}};
    const auto text = render_kb(kb).background;
    CHECK(text ==
          "above_of(s1, pos(s1,c9), pos(s1,c30)).\n"
          "contains(s1, pos(s1,c9)).\n"
          "right_of(s1, pos(s1,c30), pos(s1,c9)).\n");
}

TEST_CASE("render refuses ids that need quoting")
{
    KnowledgeBase kb;
    kb.positives = {"Bad-Id"};
    kb.facts["Bad-Id"];
    CHECK(code_of([&] { render_kb(kb); }) == ErrorCode::render);
}

TEST_CASE("parse errors carry positions")
{
    CHECK(code_of([] { parse_kb("contains(s1, pos(s1,c30))", "is_class(s1).", ""); }) == ErrorCode::parse);
    try {
        parse_kb("frobnicate(s1, pos(s1,c1), pos(s1,c2)).", "is_class(s1).", "");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse);
        CHECK(std::string(e.what()).find("frobnicate") != std::string::npos);
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    try {
        parse_kb("contains(s1, pos(s1,c1)).\ncontains(s1, pos(s1 c2)).", "is_class(s1).", "");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK(code_of([] { parse_kb("contains(s9, pos(s9,c1)).", "is_class(s1).", ""); }) == ErrorCode::parse);
    CHECK(code_of([] { parse_kb("contains(s1, pos(s2,c1)).", "is_class(s1).", ""); }) == ErrorCode::parse);
    CHECK(code_of([] { parse_kb("contains(s1, pos(s1,x1)).", "is_class(s1).", ""); }) == ErrorCode::parse);
}

TEST_CASE("property: render then parse is the identity on random kbs")
{
    std::mt19937_64 rng(77);
    for (int round = 0; round < 100; ++round) {
        KnowledgeBase kb = oracle::random_kb(rng, 1 + rng() % 30, 3 + rng() % 20, 0.4, round % 2 == 0);
        kb.declarations = mode_declarations(kb);
        const KbText text = render_kb(kb);
        const KnowledgeBase back = parse_kb(text.background, text.positives, text.negatives);
        CHECK(back == kb);
        CHECK(render_kb(back) == text);
        std::set<std::string> pos(kb.positives.begin(), kb.positives.end());
        for (const auto& n : kb.negatives) CHECK_FALSE(pos.contains(n));
    }
}

TEST_CASE("property: every relation and sign survives the text form")
{
    KnowledgeBase kb;
    kb.positives = {"s_1"};
    auto& facts = kb.facts["s_1"];
    for (std::size_t i = 0; i < kRelationCount; ++i) {
        const auto r = static_cast<Relation>(i);
        if (arity(r) == 2) facts.insert({r, n7, std::nullopt});
        else facts.insert({r, n7, SignedConcept{4000000000u, Sign::pos}});
    }
    const KbText text = render_kb(kb);
    CHECK(parse_kb(text.background, text.positives, text.negatives) == kb);
}

TEST_CASE("term parser basics")
{
    const auto prog = text::parse_program(":- modeh(1, is_class(+sample)).\nfoo(a, B).\nbar(x) :- baz(x), qux(Y).\n");
    CHECK(prog.directives.size() == 1);
    REQUIRE(prog.clauses.size() == 2);
    CHECK(prog.clauses[0].head.args[1].is_variable());
    CHECK(prog.clauses[1].body.size() == 2);
    CHECK(prog.clauses[1].line == 3);
    CHECK(code_of([] { text::parse_program("foo(a"); }) == ErrorCode::parse);
    CHECK(code_of([] { text::parse_program("foo(a) bar(b)."); }) == ErrorCode::parse);
}
