#include "gpi/symbol.hpp"

#include <functional>
#include <mutex>
#include <unordered_set>

namespace gpi {

namespace {

// Node-based set: element addresses are stable for the life of the process.
std::unordered_set<std::string> &intern_table() {
    static std::unordered_set<std::string> table;
    return table;
}

std::mutex &intern_mutex() {
    static std::mutex m;
    return m;
}

}

Symbol::Symbol(const std::string &name) {
    std::lock_guard<std::mutex> lock(intern_mutex());
    str_ = &*intern_table().insert(name).first;
}

const std::string &Symbol::str() const {
    static const std::string empty;
    return str_ ? *str_ : empty;
}

bool Symbol::operator<(const Symbol &other) const {
    if (str_ == other.str_) return false;
    if (!str_) return true;
    if (!other.str_) return false;
    return *str_ < *other.str_;
}

std::size_t SymbolHash::operator()(const Symbol &s) const {
    return std::hash<const std::string *>()(s.valid() ? &s.str() : nullptr);
}

}
