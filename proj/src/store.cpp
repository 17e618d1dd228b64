#include "tsrag/store.hpp"

#include "tsrag/binio.hpp"
#include "tsrag/error.hpp"

namespace tsrag {

namespace {
constexpr std::uint32_t kStoreVersion = 1;
const char kStoreMagic[4] = {'T', 'S', 'S', 'T'};
} // namespace

void save_store(const std::vector<Series>& series, const std::string& path) {
    BinWriter w;
    w.magic(kStoreMagic);
    w.u32(kStoreVersion);
    w.u64(series.size());
    for (const auto& s : series) {
        w.str(s.id);
        w.str(s.source_tag);
        w.u64(s.offset);
        w.vec(s.values);
    }
    w.write_file(path);
}

std::vector<Series> load_store(const std::string& path) {
    BinReader r = BinReader::from_file(path);
    r.expect_magic(kStoreMagic, "series store");
    const std::uint32_t version = r.u32();
    if (version != kStoreVersion) {
        throw TsragError(ErrorCategory::FORMAT,
                         "series store: unsupported version " + std::to_string(version));
    }
    const std::uint64_t n = r.u64();
    std::vector<Series> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        out[i].id = r.str();
        out[i].source_tag = r.str();
        out[i].offset = r.u64();
        out[i].values = r.vec();
    }
    if (!r.at_end()) throw TsragError(ErrorCategory::FORMAT, "series store: trailing bytes");
    return out;
}

} // namespace tsrag
