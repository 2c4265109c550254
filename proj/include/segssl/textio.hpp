#ifndef SEGSSL_TEXTIO_HPP
#define SEGSSL_TEXTIO_HPP

#include <cstdio>
#include <string>

namespace segssl {

// Shortest representation that round-trips a double exactly. Used for every
// machine-read CSV so downstream means can be checked at 1e-9.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace segssl

#endif
