#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace scatret::detail {

// Little-endian primitives for the binary file formats.

inline void write_bytes(std::ostream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    auto u = static_cast<std::make_unsigned_t<T>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    write_bytes(out, buf, sizeof(T));
}

inline void write_f64(std::ostream& out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    write_le(out, bits);
}

inline void read_bytes(std::istream& in, void* data, std::size_t n, const char* what) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw std::runtime_error(std::string("truncated file while reading ") + what);
}

template <typename T>
T read_le(std::istream& in, const char* what) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    read_bytes(in, buf, sizeof(T), what);
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        u |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
    return static_cast<T>(u);
}

inline double read_f64(std::istream& in, const char* what) {
    const std::uint64_t bits = read_le<std::uint64_t>(in, what);
    double value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    write_bytes(out, s.data(), s.size());
}

inline std::string read_string(std::istream& in, const char* what) {
    const auto len = read_le<std::uint32_t>(in, what);
    std::string s(len, '\0');
    read_bytes(in, s.data(), len, what);
    return s;
}

}  // namespace scatret::detail
