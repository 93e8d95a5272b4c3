#include "corex/prolog_text.hpp"

#include <cctype>

#include "corex/error.hpp"

namespace corex::text {

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ParsedProgram run()
    {
        ParsedProgram program;
        while (true) {
            skip_space();
            if (at_end()) break;
            if (peek() == ':' && peek(1) == '-') {
                program.directives.push_back(directive());
                continue;
            }
            ParsedClause clause;
            clause.line = line_;
            clause.head = term();
            skip_space();
            if (peek() == ':' && peek(1) == '-') {
                advance(2);
                clause.body.push_back(term());
                skip_space();
                while (peek() == ',') {
                    advance(1);
                    clause.body.push_back(term());
                    skip_space();
                }
            }
            expect('.', "expected '.' terminating the clause");
            program.clauses.push_back(std::move(clause));
        }
        return program;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;

    bool at_end() const { return pos_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

    void advance(std::size_t n)
    {
        for (std::size_t i = 0; i < n && !at_end(); ++i) {
            if (src_[pos_] == '\n') {
                ++line_;
                column_ = 1;
            } else {
                ++column_;
            }
            ++pos_;
        }
    }

    void skip_space()
    {
        while (!at_end()) {
            if (std::isspace(static_cast<unsigned char>(peek()))) {
                advance(1);
            } else if (peek() == '%') {
                while (!at_end() && peek() != '\n') advance(1);
            } else {
                break;
            }
        }
    }

    [[noreturn]] void fail(const std::string& message) const
    {
        throw Error(ErrorCode::parse,
                    "line " + std::to_string(line_) + ", column " + std::to_string(column_) + ": " + message);
    }

    void expect(char c, const std::string& message)
    {
        skip_space();
        if (peek() != c) fail(message);
        advance(1);
    }

    std::string directive()
    {
        advance(2);
        const std::size_t begin = pos_;
        while (!at_end() && !(peek() == '.' && (peek(1) == '\n' || peek(1) == '\0' || peek(1) == ' ')))
            advance(1);
        if (at_end()) fail("unterminated directive");
        std::string body(src_.substr(begin, pos_ - begin));
        advance(1);
        const auto first = body.find_first_not_of(' ');
        return first == std::string::npos ? std::string{} : body.substr(first);
    }

    Term term()
    {
        skip_space();
        Term t;
        t.line = line_;
        t.column = column_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
            t.functor.push_back(peek());
            advance(1);
        }
        if (t.functor.empty()) fail(at_end() ? "unexpected end of input" : std::string("unexpected character '") + peek() + "'");
        skip_space();
        if (peek() == '(') {
            advance(1);
            t.args.push_back(term());
            skip_space();
            while (peek() == ',') {
                advance(1);
                t.args.push_back(term());
                skip_space();
            }
            expect(')', "expected ')' closing '" + t.functor + "('");
        }
        return t;
    }
};

}  // namespace

ParsedProgram parse_program(std::string_view source)
{
    return Parser(source).run();
}

void fail_at(const Term& where, const std::string& message)
{
    throw Error(ErrorCode::parse,
                "line " + std::to_string(where.line) + ", column " + std::to_string(where.column) + ": " + message);
}

}  // namespace corex::text
