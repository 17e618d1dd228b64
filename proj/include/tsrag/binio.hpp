#ifndef TSRAG_BINIO_HPP
#define TSRAG_BINIO_HPP

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "tsrag/error.hpp"
#include "tsrag/linalg.hpp"

namespace tsrag {

// Little-endian binary encoding shared by every artifact file (series store,
// backbone checkpoint, knowledge base, engine checkpoint). Writers append to
// an in-memory buffer so hashing and atomic file writes stay trivial.

class BinWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void str(const std::string& s); // u64 length + bytes
    void vec(const Vec& v);         // u64 length + doubles
    void mat(const Mat& m);         // u64 rows, u64 cols, doubles
    void magic(const char m[4]) { buf_.insert(buf_.end(), m, m + 4); }

    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    void write_file(const std::string& path) const;

private:
    std::vector<std::uint8_t> buf_;
};

class BinReader {
public:
    explicit BinReader(std::vector<std::uint8_t> bytes) : buf_(std::move(bytes)) {}
    static BinReader from_file(const std::string& path);

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::string str();
    Vec vec();
    Mat mat();
    // Consumes 4 bytes and checks them against the expected magic.
    void expect_magic(const char m[4], const std::string& what);
    bool at_end() const { return pos_ == buf_.size(); }

private:
    void need(std::size_t n);
    std::vector<std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::string& path);

// FNV-1a 64-bit over a byte buffer; used for encoder/config fingerprints.
std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n);
std::uint64_t fnv1a64(const std::string& s);

std::string hash_hex(std::uint64_t h);

} // namespace tsrag

#endif
