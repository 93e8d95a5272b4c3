#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace corex::text {

/// Minimal term syntax for the fixed predicate vocabulary: identifiers,
/// variables and compound terms. No operators, numbers or quoting.
struct Term {
    std::string functor;
    std::vector<Term> args;
    int line = 0;
    int column = 0;

    bool is_variable() const { return args.empty() && !functor.empty() && functor[0] >= 'A' && functor[0] <= 'Z'; }
};

struct ParsedClause {
    Term head;
    std::vector<Term> body;  // empty for facts
    int line = 0;
};

struct ParsedProgram {
    std::vector<std::string> directives;  // body text of ":- ... ." lines, verbatim
    std::vector<ParsedClause> clauses;
};

/// Throws Error(parse) carrying "line L, column C" on malformed input.
ParsedProgram parse_program(std::string_view source);

[[noreturn]] void fail_at(const Term& where, const std::string& message);

}  // namespace corex::text
