#include "stcw/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace stcw {

namespace {

static_assert(std::endian::native == std::endian::little,
              "big-endian hosts must byte-swap checkpoint I/O");

constexpr char kMagic[4] = {'S', 'T', 'C', 'W'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kMaxRank = 8;

void put_u32(std::string& buf, std::uint32_t v) {
    buf.append(reinterpret_cast<const char*>(&v), 4);
}
void put_u64(std::string& buf, std::uint64_t v) {
    buf.append(reinterpret_cast<const char*>(&v), 8);
}

struct Reader {
    const std::string& buf;
    const std::string& path;
    std::size_t off = 0;

    void need(std::size_t n, const std::string& what) {
        if (off + n > buf.size())
            throw ValidationError(path + ": truncated checkpoint while reading " + what);
    }
    std::uint32_t u32(const std::string& what) {
        need(4, what);
        std::uint32_t v;
        std::memcpy(&v, buf.data() + off, 4);
        off += 4;
        return v;
    }
    std::uint64_t u64(const std::string& what) {
        need(8, what);
        std::uint64_t v;
        std::memcpy(&v, buf.data() + off, 8);
        off += 8;
        return v;
    }
    std::uint8_t u8(const std::string& what) {
        need(1, what);
        return static_cast<std::uint8_t>(buf[off++]);
    }
    std::string bytes(std::size_t n, const std::string& what) {
        need(n, what);
        std::string s = buf.substr(off, n);
        off += n;
        return s;
    }
};

template <typename S>
void put_tensor_data(std::string& buf, const Tensor<S>& t) {
    buf.append(reinterpret_cast<const char*>(t.raw()), t.size() * sizeof(S));
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    if (ckpt.spec_text.size() > 0xFFFFFFFFull)
        throw ValidationError("checkpoint: spec text too large");
    put_u32(buf, static_cast<std::uint32_t>(ckpt.spec_text.size()));
    buf += ckpt.spec_text;
    put_u32(buf, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, any] : ckpt.tensors) {
        if (name.empty()) throw ValidationError("checkpoint: tensor with empty name");
        put_u32(buf, static_cast<std::uint32_t>(name.size()));
        buf += name;
        const bool is_f64 = std::holds_alternative<Tensor<double>>(any);
        buf.push_back(is_f64 ? 1 : 0);
        std::visit(
            [&](const auto& t) {
                if (t.rank() > kMaxRank) throw ValidationError("checkpoint: tensor rank too large");
                buf.push_back(static_cast<char>(t.rank()));
                for (std::size_t d : t.shape()) put_u64(buf, d);
                put_tensor_data(buf, t);
            },
            any);
    }

    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError(path + ": cannot open for writing");
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw ValidationError(path + ": write failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ValidationError(path + ": rename failed: " + ec.message());
    }
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path + ": cannot open");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    Reader r{buf, path};
    std::string magic = r.bytes(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw ValidationError(path + ": bad magic");
    std::uint32_t version = r.u32("version");
    if (version != kVersion)
        throw ValidationError(path + ": unsupported version " + std::to_string(version));

    Checkpoint ckpt;
    std::uint32_t spec_len = r.u32("spec length");
    ckpt.spec_text = r.bytes(spec_len, "spec text");
    if (!ckpt.spec_text.empty()) parse_spec(ckpt.spec_text);  // reject corrupted specs early

    std::uint32_t count = r.u32("tensor count");
    for (std::uint32_t ti = 0; ti < count; ++ti) {
        std::string ctx = "tensor " + std::to_string(ti);
        std::uint32_t name_len = r.u32(ctx + " name length");
        if (name_len == 0) throw ValidationError(path + ": " + ctx + " has empty name");
        std::string name = r.bytes(name_len, ctx + " name");
        ctx = "tensor '" + name + "'";
        std::uint8_t dtype = r.u8(ctx + " dtype");
        if (dtype > 1)
            throw ValidationError(path + ": " + ctx + " has unknown dtype " + std::to_string(dtype));
        std::uint8_t rank = r.u8(ctx + " rank");
        if (rank == 0 || rank > kMaxRank)
            throw ValidationError(path + ": " + ctx + " has invalid rank " + std::to_string(rank));
        Shape shape(rank);
        std::uint64_t numel = 1;
        for (std::uint8_t d = 0; d < rank; ++d) {
            std::uint64_t dim = r.u64(ctx + " dims");
            if (dim == 0) throw ValidationError(path + ": " + ctx + " has zero-sized dimension");
            if (numel > (std::uint64_t(1) << 48) / dim)
                throw ValidationError(path + ": " + ctx + " dimension product overflows");
            numel *= dim;
            shape[d] = static_cast<std::size_t>(dim);
        }
        const std::size_t elem = dtype == 0 ? 4 : 8;
        std::string raw = r.bytes(static_cast<std::size_t>(numel) * elem, ctx + " data");
        if (dtype == 0) {
            std::vector<float> data(numel);
            std::memcpy(data.data(), raw.data(), raw.size());
            ckpt.tensors.emplace_back(name, Tensor<float>(shape, std::move(data)));
        } else {
            std::vector<double> data(numel);
            std::memcpy(data.data(), raw.data(), raw.size());
            ckpt.tensors.emplace_back(name, Tensor<double>(shape, std::move(data)));
        }
    }
    if (r.off != buf.size())
        throw ValidationError(path + ": trailing bytes after declared payload");
    return ckpt;
}

}  // namespace stcw
