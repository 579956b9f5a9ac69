#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "varskip/error.hpp"

namespace varskip {

// Little-endian binary writer/reader for the versioned cache and checkpoint
// files. Deliberately dumb: fixed-width fields, length-prefixed strings, no
// seeking. Readers fail loudly on truncation or magic/version mismatch.
class BinWriter {
public:
    explicit BinWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) fail_io("cannot open '" + path + "' for writing");
    }

    void u8(uint8_t v) { raw(&v, 1); }
    void u32(uint32_t v) { raw(&v, 4); }
    void u64(uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void str(const std::string& s) {
        u64(s.size());
        raw(s.data(), s.size());
    }
    void f64_array(const double* p, size_t n) { raw(p, n * sizeof(double)); }
    void u32_array(const uint32_t* p, size_t n) { raw(p, n * sizeof(uint32_t)); }
    void u8_array(const uint8_t* p, size_t n) { raw(p, n); }

    void finish() {
        out_.flush();
        if (!out_) fail_io("write to '" + path_ + "' failed");
        out_.close();
    }

private:
    void raw(const void* p, size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!out_) fail_io("write to '" + path_ + "' failed");
    }
    std::string path_;
    std::ofstream out_;
};

class BinReader {
public:
    explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) fail_io("cannot open '" + path + "' for reading");
    }

    uint8_t u8() {
        uint8_t v;
        raw(&v, 1);
        return v;
    }
    uint32_t u32() {
        uint32_t v;
        raw(&v, 4);
        return v;
    }
    uint64_t u64() {
        uint64_t v;
        raw(&v, 8);
        return v;
    }
    double f64() {
        double v;
        raw(&v, 8);
        return v;
    }
    std::string str() {
        uint64_t n = u64();
        if (n > (1ULL << 32)) fail_io("corrupt string length in '" + path_ + "'");
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
    void f64_array(double* p, size_t n) { raw(p, n * sizeof(double)); }
    void u32_array(uint32_t* p, size_t n) { raw(p, n * sizeof(uint32_t)); }
    void u8_array(uint8_t* p, size_t n) { raw(p, n); }

    void expect_magic(const char magic[4], uint32_t version, const std::string& what) {
        char m[4];
        raw(m, 4);
        if (std::string(m, 4) != std::string(magic, 4))
            fail_io("'" + path_ + "' is not a " + what + " file");
        uint32_t v = u32();
        if (v != version)
            fail_io("unsupported " + what + " version " + std::to_string(v) + " in '" + path_ + "'");
    }

private:
    void raw(void* p, size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in_.gcount()) != n) fail_io("'" + path_ + "' is truncated");
    }
    std::string path_;
    std::ifstream in_;
};

inline void write_magic(BinWriter& w, const char magic[4], uint32_t version) {
    w.u8_array(reinterpret_cast<const uint8_t*>(magic), 4);
    w.u32(version);
}

}  // namespace varskip
