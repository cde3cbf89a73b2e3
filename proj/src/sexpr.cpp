#include "gpi/sexpr.hpp"

#include "gpi/errors.hpp"

#include <fstream>
#include <sstream>

namespace gpi {

std::string SourcePos::to_string() const {
    return std::to_string(line) + ":" + std::to_string(col);
}

const Sexpr &Sexpr::at(std::size_t i) const {
    if (kind != Kind::LIST || i >= items.size())
        raise(ErrorCode::SYNTAX, "missing form at " + pos.to_string());
    return items[i];
}

const std::string &Sexpr::head() const {
    static const std::string empty;
    if (kind != Kind::LIST || items.empty() || !items[0].is_atom()) return empty;
    return items[0].atom;
}

namespace {

struct Lexer {
    const std::string &text;
    std::size_t i = 0;
    int line = 1;
    int col = 1;

    explicit Lexer(const std::string &t) : text(t) {}

    bool eof() const { return i >= text.size(); }
    char peek() const { return text[i]; }

    void advance() {
        if (text[i] == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
        i++;
    }

    void skip_blank() {
        while (!eof()) {
            char c = peek();
            if (c == ';') {
                while (!eof() && peek() != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    static bool atom_char(char c) {
        return c != '(' && c != ')' && c != ';' && c != ' ' && c != '\t' && c != '\r' &&
               c != '\n';
    }

    Sexpr parse_one() {
        skip_blank();
        if (eof()) raise(ErrorCode::SYNTAX, "unexpected end of input at " +
                                                SourcePos{line, col}.to_string());
        SourcePos here{line, col};
        char c = peek();
        if (c == '(') {
            advance();
            Sexpr list;
            list.kind = Sexpr::Kind::LIST;
            list.pos = here;
            while (true) {
                skip_blank();
                if (eof())
                    raise(ErrorCode::SYNTAX,
                          "unclosed '(' opened at " + here.to_string());
                if (peek() == ')') {
                    advance();
                    return list;
                }
                list.items.push_back(parse_one());
            }
        }
        if (c == ')')
            raise(ErrorCode::SYNTAX, "unmatched ')' at " + here.to_string());
        Sexpr atom;
        atom.kind = Sexpr::Kind::ATOM;
        atom.pos = here;
        while (!eof() && atom_char(peek())) {
            atom.atom.push_back(peek());
            advance();
        }
        return atom;
    }
};

void print_rec(const Sexpr &s, std::string &out) {
    if (s.is_atom()) {
        out += s.atom;
        return;
    }
    out += '(';
    for (std::size_t i = 0; i < s.items.size(); i++) {
        if (i) out += ' ';
        print_rec(s.items[i], out);
    }
    out += ')';
}

}

std::vector<Sexpr> parse_sexprs(const std::string &text) {
    Lexer lex(text);
    std::vector<Sexpr> result;
    while (true) {
        lex.skip_blank();
        if (lex.eof()) break;
        result.push_back(lex.parse_one());
    }
    return result;
}

std::string print_sexpr(const Sexpr &s) {
    std::string out;
    print_rec(s, out);
    return out;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IO, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IO, "cannot write " + path);
    out << content;
    if (!out) raise(ErrorCode::IO, "write failed for " + path);
}

}
