#ifndef GPI_SEXPR_HPP
#define GPI_SEXPR_HPP

#include <string>
#include <vector>

namespace gpi {

struct SourcePos {
    int line = 0;
    int col = 0;
    std::string to_string() const;
};

struct Sexpr {
    enum class Kind { ATOM, LIST };

    Kind kind = Kind::LIST;
    std::string atom;          // ATOM only
    std::vector<Sexpr> items;  // LIST only
    SourcePos pos;

    bool is_atom() const { return kind == Kind::ATOM; }
    bool is_list() const { return kind == Kind::LIST; }
    std::size_t size() const { return items.size(); }
    const Sexpr &at(std::size_t i) const;

    // Head atom of a list, or "" when not a list / empty / non-atom head.
    const std::string &head() const;
};

// Parses a sequence of s-expressions. Comments run from ';' to end of line.
std::vector<Sexpr> parse_sexprs(const std::string &text);

std::string print_sexpr(const Sexpr &s);

std::string read_file(const std::string &path);
void write_file(const std::string &path, const std::string &content);

}

#endif
