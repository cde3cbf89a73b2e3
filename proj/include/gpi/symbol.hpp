#ifndef GPI_SYMBOL_HPP
#define GPI_SYMBOL_HPP

#include <cstddef>
#include <string>

namespace gpi {

/*
  Interned string. Equality is pointer comparison; ordering always compares
  the underlying strings so that every ordering in the system is independent
  of interning order.
*/
class Symbol {
public:
    Symbol() : str_(nullptr) {}
    explicit Symbol(const std::string &name);

    bool valid() const { return str_ != nullptr; }
    const std::string &str() const;

    bool operator==(const Symbol &other) const { return str_ == other.str_; }
    bool operator!=(const Symbol &other) const { return str_ != other.str_; }
    bool operator<(const Symbol &other) const;

private:
    const std::string *str_;
};

struct SymbolHash {
    std::size_t operator()(const Symbol &s) const;
};

}

#endif
