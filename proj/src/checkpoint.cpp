#include "idfd/checkpoint.hpp"

#include <cstring>

#include "idfd/binary_io.hpp"

namespace idfd {

namespace {

constexpr char kMagic[8] = {'I', 'D', 'F', 'D', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_doubles(binary::Writer& w, std::span<const double> xs) {
    for (double x : xs) w.put_f64(x);
}

std::vector<double> get_doubles(binary::Reader& r, std::size_t n) {
    if (r.remaining() / 8 < n) {
        throw TruncatedFile("checkpoint payload shorter than its header declares");
    }
    std::vector<double> out(n);
    for (double& x : out) x = r.get_f64();
    return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
    binary::Writer w;
    w.put_tag(kMagic, sizeof kMagic);
    w.put<std::uint32_t>(kVersion);
    w.put<std::uint64_t>(state.epoch);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(state.params.layers.size()));
    for (const auto& l : state.params.layers) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(l.in_dim()));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(l.out_dim()));
        put_doubles(w, l.weight.data());
        put_doubles(w, l.bias);
    }
    for (const auto& l : state.velocity.layers) {
        put_doubles(w, l.weight.data());
        put_doubles(w, l.bias);
    }
    w.put<std::uint32_t>(static_cast<std::uint32_t>(state.bank.size()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(state.bank.dim()));
    w.put_f64(state.bank.momentum());
    put_doubles(w, state.bank.vectors().data());
    const auto snap = state.rng.snapshot();
    w.put<std::uint64_t>(snap.seed);
    for (auto s : snap.state) w.put<std::uint64_t>(s);
    w.put<std::uint8_t>(snap.has_spare ? 1 : 0);
    w.put_f64(snap.spare);
    binary::write_file(path, w.bytes());
}

TrainState load_checkpoint(const std::filesystem::path& path) {
    const auto bytes = binary::read_file(path);
    binary::Reader r(bytes);
    const auto magic = r.get_bytes(sizeof kMagic);
    if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) {
        throw BadMagic(path.string() + " is not a checkpoint");
    }
    if (r.get<std::uint32_t>() != kVersion) {
        throw BadMagic(path.string() + ": unsupported checkpoint version");
    }
    TrainState state{{}, {}, {}, SeededRng(0), 0};
    state.epoch = r.get<std::uint64_t>();
    const auto layers = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < layers; ++i) {
        const std::size_t in = r.get<std::uint32_t>();
        const std::size_t out = r.get<std::uint32_t>();
        Matrix weight(in, out, get_doubles(r, in * out));
        state.params.layers.push_back({std::move(weight), get_doubles(r, out)});
    }
    validate(state.params);
    for (const auto& l : state.params.layers) {
        Matrix weight(l.in_dim(), l.out_dim(), get_doubles(r, l.weight.size()));
        state.velocity.layers.push_back({std::move(weight), get_doubles(r, l.out_dim())});
    }
    const std::size_t n = r.get<std::uint32_t>();
    const std::size_t d = r.get<std::uint32_t>();
    const double momentum = r.get_f64();
    Matrix rows(n, d, get_doubles(r, n * d));
    state.bank = MemoryBank(std::move(rows), momentum);
    SeededRng::Snapshot snap;
    snap.seed = r.get<std::uint64_t>();
    for (auto& s : snap.state) s = r.get<std::uint64_t>();
    snap.has_spare = r.get<std::uint8_t>() != 0;
    snap.spare = r.get_f64();
    state.rng = SeededRng::restore(snap);
    if (r.remaining() != 0) {
        throw DimensionMismatch(path.string() + ": trailing bytes after checkpoint payload");
    }
    return state;
}

}  // namespace idfd
