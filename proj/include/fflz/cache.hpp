#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include "fflz/algebra.hpp"
#include "fflz/characters.hpp"
#include "fflz/errors.hpp"
#include "fflz/lfunction.hpp"

namespace fflz {

// Cache file layout (native byte order):
//   magic[8] | u32 version | u64 key hash | u32 key length | key text
//   | u64 payload length | u64 payload FNV-1a | payload
// A version mismatch means "recompute"; anything else that fails to check out
// raises CacheCorruption.

inline constexpr std::uint32_t kUnitsCacheVersion = 1;
inline constexpr std::uint32_t kZerosCacheVersion = 1;
inline constexpr char kUnitsMagic[9] = "FFLZUNIT";
inline constexpr char kZerosMagic[9] = "FFLZZERO";

inline std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Content key of the algebra/characters inputs: p, e, ext_modulus and Q.
struct CacheKey {
    std::string text;
    std::uint64_t hash = 0;

    [[nodiscard]] std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string s(16, '0');
        for (int i = 0; i < 16; ++i) s[static_cast<std::size_t>(15 - i)] = digits[(hash >> (4 * i)) & 0xF];
        return s;
    }
};

inline CacheKey cache_key(const Field& F, const Poly& Q) {
    std::string ext;
    if (!F.is_prime_field()) ext = poly_to_string(Poly(F.ext_modulus()));
    CacheKey k;
    k.text = "p=" + std::to_string(F.p()) + ";e=" + std::to_string(F.e()) + ";ext=" + ext + ";Q=" + poly_to_string(Q);
    k.hash = fnv1a(k.text);
    return k;
}

namespace detail {

class ByteWriter {
public:
    template <class T>
    void put(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void put_bytes(std::string_view s) { buf_.append(s.data(), s.size()); }
    void put_cplx_vec(const std::vector<cplx>& v) {
        put<std::uint64_t>(v.size());
        for (const cplx& z : v) put(z.real()), put(z.imag());
    }
    void put_double_vec(const std::vector<double>& v) {
        put<std::uint64_t>(v.size());
        for (double x : v) put(x);
    }
    [[nodiscard]] const std::string& bytes() const noexcept { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}
    template <class T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string_view get_bytes(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    double get_finite() {
        const double v = get<double>();
        if (!std::isfinite(v)) throw CacheCorruption("cache: non-finite value");
        return v;
    }
    std::vector<cplx> get_cplx_vec(std::size_t max_len) {
        const auto n = get<std::uint64_t>();
        if (n > max_len) throw CacheCorruption("cache: vector length out of range");
        std::vector<cplx> v;
        v.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            const double re = get_finite();
            v.emplace_back(re, get_finite());
        }
        return v;
    }
    std::vector<double> get_double_vec(std::size_t max_len) {
        const auto n = get<std::uint64_t>();
        if (n > max_len) throw CacheCorruption("cache: vector length out of range");
        std::vector<double> v;
        v.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) v.push_back(get_finite());
        return v;
    }
    [[nodiscard]] bool at_end() const noexcept { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw CacheCorruption("cache: truncated file");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw CacheCorruption("cache: cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to a sibling temporary file, then renames over the target.
inline void atomic_write(const std::filesystem::path& p, std::string_view bytes) {
    std::filesystem::create_directories(p.parent_path());
    const auto tmp = p.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cache: cannot write " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("cache: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, p);
}

inline std::string frame(const char* magic, std::uint32_t version, const CacheKey& key, const std::string& payload) {
    ByteWriter w;
    w.put_bytes(std::string_view(magic, 8));
    w.put(version);
    w.put(key.hash);
    w.put(static_cast<std::uint32_t>(key.text.size()));
    w.put_bytes(key.text);
    w.put(static_cast<std::uint64_t>(payload.size()));
    w.put(fnv1a(payload));
    w.put_bytes(payload);
    return w.bytes();
}

struct Header {
    std::uint32_t version = 0;
    std::uint64_t key_hash = 0;
    std::string key_text;
};

inline Header read_header(ByteReader& r, const char* magic) {
    if (r.get_bytes(8) != std::string_view(magic, 8)) throw CacheCorruption("cache: bad magic");
    Header h;
    h.version = r.get<std::uint32_t>();
    h.key_hash = r.get<std::uint64_t>();
    const auto len = r.get<std::uint32_t>();
    if (len > 4096) throw CacheCorruption("cache: key too long");
    h.key_text = std::string(r.get_bytes(len));
    return h;
}

/// Payload of a current-version file for `key`; nullopt when the file is
/// absent or was written by another format version.
inline std::optional<std::string> unframe(const std::filesystem::path& p, const char* magic, std::uint32_t version, const CacheKey& key) {
    if (!std::filesystem::exists(p)) return std::nullopt;
    const std::string data = read_file(p);
    ByteReader r(data);
    const Header h = read_header(r, magic);
    if (h.version != version) return std::nullopt;
    if (h.key_hash != key.hash || h.key_text != key.text) throw CacheCorruption("cache: key mismatch in " + p.string());
    const auto len = r.get<std::uint64_t>();
    const auto sum = r.get<std::uint64_t>();
    const std::string payload(r.get_bytes(len));
    if (!r.at_end()) throw CacheCorruption("cache: trailing bytes in " + p.string());
    if (fnv1a(payload) != sum) throw CacheCorruption("cache: payload checksum mismatch in " + p.string());
    return payload;
}

}  // namespace detail

/// Unit-group and eigenangle caches under one directory, one file of each kind
/// per (field, modulus).
class Cache {
public:
    explicit Cache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }
    [[nodiscard]] std::filesystem::path units_path(const CacheKey& k) const { return dir_ / ("units-" + k.hex() + ".bin"); }
    [[nodiscard]] std::filesystem::path zeros_path(const CacheKey& k) const { return dir_ / ("zeros-" + k.hex() + ".bin"); }

    [[nodiscard]] std::optional<UnitGroupTable> load_units(const Field& F, const Modulus& mod, const CacheKey& key) const {
        const auto payload = detail::unframe(units_path(key), kUnitsMagic, kUnitsCacheVersion, key);
        if (!payload) return std::nullopt;
        detail::ByteReader r(*payload);
        const auto glen = r.get<std::uint32_t>();
        if (glen > static_cast<std::uint32_t>(mod.d)) throw CacheCorruption("cache: generator too long");
        std::vector<Elem> g;
        for (std::uint32_t i = 0; i < glen; ++i) {
            const auto c = r.get<std::uint32_t>();
            if (c >= F.q()) throw CacheCorruption("cache: generator coefficient outside the field");
            g.push_back(static_cast<Elem>(c));
        }
        const auto n = r.get<std::uint64_t>();
        if (n != mod.group_order + 1) throw CacheCorruption("cache: dlog table has wrong size");
        std::vector<std::int32_t> dlog(n);
        for (auto& v : dlog) v = r.get<std::int32_t>();
        if (!r.at_end()) throw CacheCorruption("cache: trailing payload bytes");
        return UnitGroupTable::from_parts(F, mod, Poly(std::move(g)), std::move(dlog));
    }

    void store_units(const UnitGroupTable& t, const CacheKey& key) const {
        detail::ByteWriter w;
        const Poly& g = t.generator();
        w.put(static_cast<std::uint32_t>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) w.put(static_cast<std::uint32_t>(g[i]));
        w.put(static_cast<std::uint64_t>(t.dlog_table().size()));
        for (std::int32_t v : t.dlog_table()) w.put(v);
        detail::atomic_write(units_path(key), detail::frame(kUnitsMagic, kUnitsCacheVersion, key, w.bytes()));
    }

    /// Family L-data in ascending character order, validated against `table`.
    [[nodiscard]] std::optional<std::vector<LData>> load_zeros(const UnitGroupTable& table, const CacheKey& key) const {
        const auto payload = detail::unframe(zeros_path(key), kZerosMagic, kZerosCacheVersion, key);
        if (!payload) return std::nullopt;
        detail::ByteReader r(*payload);
        const auto count = r.get<std::uint64_t>();
        if (count + 1 != table.order()) throw CacheCorruption("cache: family size mismatch");
        const auto d = static_cast<std::size_t>(table.modulus().d);
        std::vector<LData> fam(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            LData& L = fam[i];
            L.chi_index = r.get<std::uint64_t>();
            const auto even = r.get<std::uint8_t>();
            if (L.chi_index != i + 1 || even > 1 || (even == 1) != table.character(L.chi_index).even) throw CacheCorruption("cache: character record out of order");
            L.even = even == 1;
            L.coeffs = r.get_cplx_vec(d);
            L.completed = r.get_cplx_vec(d);
            L.inv_roots = r.get_cplx_vec(d);
            L.eigenangles = r.get_double_vec(d);
            const std::size_t N = d - 1 - static_cast<std::size_t>(L.lambda_inf());
            if (L.coeffs.size() != d || L.completed.size() != N + 1 || L.inv_roots.size() != N || L.eigenangles.size() != N)
                throw CacheCorruption("cache: L-data record has wrong shape");
            const double re = r.get_finite();
            L.root_number = {re, r.get_finite()};
            L.rh_residual = r.get_finite();
        }
        if (!r.at_end()) throw CacheCorruption("cache: trailing payload bytes");
        return fam;
    }

    void store_zeros(const std::vector<LData>& fam, const CacheKey& key) const {
        detail::ByteWriter w;
        w.put(static_cast<std::uint64_t>(fam.size()));
        for (const LData& L : fam) {
            w.put(L.chi_index);
            w.put(static_cast<std::uint8_t>(L.even ? 1 : 0));
            w.put_cplx_vec(L.coeffs);
            w.put_cplx_vec(L.completed);
            w.put_cplx_vec(L.inv_roots);
            w.put_double_vec(L.eigenangles);
            w.put(L.root_number.real());
            w.put(L.root_number.imag());
            w.put(L.rh_residual);
        }
        detail::atomic_write(zeros_path(key), detail::frame(kZerosMagic, kZerosCacheVersion, key, w.bytes()));
    }

private:
    std::filesystem::path dir_;
};

/// Header-level state of one cache file, for cache-info.
struct CacheFileInfo {
    std::filesystem::path path;
    std::string status;  // absent | current | stale-version | corrupt: <reason>
    std::uint32_t version = 0;
    std::uintmax_t bytes = 0;
};

inline CacheFileInfo inspect_cache_file(const std::filesystem::path& p, const char* magic, std::uint32_t version, const CacheKey& key) {
    CacheFileInfo info;
    info.path = p;
    if (!std::filesystem::exists(p)) {
        info.status = "absent";
        return info;
    }
    info.bytes = std::filesystem::file_size(p);
    try {
        const std::string data = detail::read_file(p);
        detail::ByteReader r(data);
        info.version = detail::read_header(r, magic).version;
        if (info.version != version) {
            info.status = "stale-version";
            return info;
        }
        detail::unframe(p, magic, version, key);
        info.status = "current";
    } catch (const CacheCorruption& e) {
        info.status = std::string("corrupt: ") + e.what();
    }
    return info;
}

}  // namespace fflz
