#include "tsrag/binio.hpp"

#include <cstdio>
#include <fstream>

namespace tsrag {

namespace {

// Portable little-endian scalar encoding, independent of host byte order.
template <typename T>
void put_le(std::vector<std::uint8_t>& buf, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf.push_back(static_cast<std::uint8_t>(v & 0xffu));
        v >>= 8;
    }
}

} // namespace

void BinWriter::u32(std::uint32_t v) { put_le(buf_, v); }
void BinWriter::u64(std::uint64_t v) { put_le(buf_, v); }

void BinWriter::f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    u64(bits);
}

void BinWriter::str(const std::string& s) {
    u64(s.size());
    buf_.insert(buf_.end(), s.begin(), s.end());
}

void BinWriter::vec(const Vec& v) {
    u64(v.size());
    for (double x : v) f64(x);
}

void BinWriter::mat(const Mat& m) {
    u64(m.rows);
    u64(m.cols);
    for (double x : m.data) f64(x);
}

void BinWriter::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw TsragError(ErrorCategory::IO, "cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(buf_.data()),
              static_cast<std::streamsize>(buf_.size()));
    if (!out) throw TsragError(ErrorCategory::IO, "write failed: " + path);
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw TsragError(ErrorCategory::IO, "cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw TsragError(ErrorCategory::IO, "write failed: " + path);
}

BinReader BinReader::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TsragError(ErrorCategory::IO, "cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return BinReader(std::move(bytes));
}

void BinReader::need(std::size_t n) {
    if (pos_ + n > buf_.size()) {
        throw TsragError(ErrorCategory::FORMAT, "truncated file: needed " + std::to_string(n) +
                                                    " bytes at offset " + std::to_string(pos_));
    }
}

std::uint8_t BinReader::u8() {
    need(1);
    return buf_[pos_++];
}

std::uint32_t BinReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

std::uint64_t BinReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

double BinReader::f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

std::string BinReader::str() {
    std::uint64_t n = u64();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
}

Vec BinReader::vec() {
    std::uint64_t n = u64();
    Vec v(n);
    for (std::uint64_t i = 0; i < n; ++i) v[i] = f64();
    return v;
}

Mat BinReader::mat() {
    std::uint64_t r = u64();
    std::uint64_t c = u64();
    Mat m(r, c);
    for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = f64();
    return m;
}

void BinReader::expect_magic(const char m[4], const std::string& what) {
    need(4);
    if (std::memcmp(buf_.data() + pos_, m, 4) != 0) {
        throw TsragError(ErrorCategory::FORMAT,
                         what + ": bad magic, expected \"" + std::string(m, 4) + "\"");
    }
    pos_ += 4;
}

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace tsrag
