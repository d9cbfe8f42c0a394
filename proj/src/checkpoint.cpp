#include "resave/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "resave/error.hpp"

namespace resave {

namespace {

constexpr char magic[8] = {'R', 'S', 'A', 'V', 'E', 'C', 'K', 'P'};
// guards against absurd allocations when reading a corrupted size field
constexpr std::uint64_t max_count = std::uint64_t{1} << 36;

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 4);
    }
    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 8);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void reals(std::span<const double> v) {
        for (double x : v) f64(x);
    }
    const std::vector<unsigned char>& buffer() const { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const unsigned char> data) : data_(data) {}

    void bytes(void* p, std::size_t n) {
        require(n <= data_.size() - pos_, ErrorCode::schema_error, "checkpoint is truncated");
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() {
        std::uint8_t v = 0;
        bytes(&v, 1);
        return v;
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::vector<double> reals(std::uint64_t n) {
        require(n <= max_count && n * 8 <= data_.size() - pos_, ErrorCode::schema_error, "checkpoint is truncated");
        std::vector<double> v(static_cast<std::size_t>(n));
        for (double& x : v) x = f64();
        return v;
    }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::span<const unsigned char> data_;
    std::size_t pos_ = 0;
};

std::uint64_t fnv1a(std::span<const unsigned char> data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

StreamingFit decode(Reader& r) {
    RecursiveState::Parts parts;
    parts.plan.gamma_scale = r.f64();
    parts.plan.gamma_exponent = r.f64();
    parts.plan.c1 = r.f64();
    parts.plan.c2 = r.f64();
    parts.plan.epsilon_trunc = r.f64();
    parts.plan.strict_assumptions = r.u8() != 0;
    const bool has_h = r.u8() != 0;
    const double h = r.f64();
    if (has_h) parts.plan.fixed_bandwidth = h;

    const std::uint8_t kid = r.u8();
    require(kid <= static_cast<std::uint8_t>(KernelId::quartic4), ErrorCode::schema_error, "unknown kernel id");
    parts.kernel = Kernel::with_constant(static_cast<KernelId>(kid), r.f64());

    const std::uint64_t d = r.u64();
    const std::uint64_t N = r.u64();
    require(d >= 1 && d <= 4096, ErrorCode::schema_error, "implausible dimension in checkpoint");
    parts.d = static_cast<std::size_t>(d);
    auto read_sym = [&] {
        SymMatrix m(parts.d);
        const std::vector<double> packed = r.reals(SymMatrix::packed_size(parts.d));
        std::copy(packed.begin(), packed.end(), m.packed().begin());
        return m;
    };
    Vector shift = r.reals(d);
    std::optional<SymMatrix> fixed;
    RunningCovariance running(parts.d);
    if (r.u8() != 0) {
        fixed = read_sym();
    } else {
        const std::uint64_t count = r.u64();
        Vector mean = r.reals(d);
        running = RunningCovariance::from_parts(static_cast<std::size_t>(count), std::move(mean), read_sym());
    }

    const std::uint64_t n = r.u64();
    require(n <= max_count, ErrorCode::schema_error, "implausible sample size in checkpoint");
    const double ledger_scale = r.f64();
    const double ledger_pi = r.f64();
    parts.ledger = WeightLedger::from_parts(r.reals(n), ledger_scale, ledger_pi);
    parts.row_scale = r.f64();
    parts.ys = r.reals(n);
    parts.hs = r.reals(n);
    const std::uint64_t width = moment_width(parts.d);
    parts.features = r.reals(n * width);
    parts.moments = r.reals(n * width);
    require(r.remaining() == 0, ErrorCode::schema_error, "trailing bytes in checkpoint");

    return StreamingFit::from_parts(StreamingFit::Parts{RecursiveState::from_parts(std::move(parts)), std::move(shift),
                                                        std::move(fixed), std::move(running),
                                                        static_cast<std::size_t>(N)});
}

}  // namespace

void write_checkpoint(std::ostream& out, const StreamingFit& fit) {
    const RecursiveState::Parts parts = fit.state().parts();
    const SequencePlan& plan = parts.plan;
    Writer w;
    w.bytes(magic, sizeof magic);
    w.u32(checkpoint_version);
    w.f64(plan.gamma_scale);
    w.f64(plan.gamma_exponent);
    w.f64(plan.c1);
    w.f64(plan.c2);
    w.f64(plan.epsilon_trunc);
    w.u8(plan.strict_assumptions ? 1 : 0);
    w.u8(plan.fixed_bandwidth ? 1 : 0);
    w.f64(plan.fixed_bandwidth.value_or(0.0));
    w.u8(static_cast<std::uint8_t>(parts.kernel.id()));
    w.f64(parts.kernel.constant());
    w.u64(parts.d);
    const StreamingFit::Parts& fp = fit.parts();
    w.u64(fp.N);
    w.reals(fp.shift);
    w.u8(fp.fixed_inv_sqrt ? 1 : 0);
    if (fp.fixed_inv_sqrt) {
        w.reals(fp.fixed_inv_sqrt->packed());
    } else {
        w.u64(fp.running.count());
        w.reals(fp.running.mean());
        w.reals(fp.running.scatter().packed());
    }
    w.u64(parts.ys.size());
    w.f64(parts.ledger.scale());
    w.f64(parts.ledger.pi());
    w.reals(parts.ledger.raw_weights());
    w.f64(parts.row_scale);
    w.reals(parts.ys);
    w.reals(parts.hs);
    w.reals(parts.features);
    w.reals(parts.moments);
    w.u64(fnv1a(w.buffer()));

    const auto& buf = w.buffer();
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    require(out.good(), ErrorCode::io_error, "failed to write checkpoint");
}

StreamingFit read_checkpoint(std::istream& in) {
    const std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(!in.bad(), ErrorCode::io_error, "failed to read checkpoint");
    require(data.size() >= sizeof magic + 4 + 8, ErrorCode::schema_error, "checkpoint is truncated");
    const std::span<const unsigned char> all(data);
    require(std::memcmp(data.data(), magic, sizeof magic) == 0, ErrorCode::schema_error, "not a checkpoint file");

    Reader tail(all.last(8));
    require(tail.u64() == fnv1a(all.first(all.size() - 8)), ErrorCode::schema_error, "checkpoint checksum mismatch");

    Reader r(all.first(all.size() - 8));
    char tag[sizeof magic];
    r.bytes(tag, sizeof tag);
    const std::uint32_t version = r.u32();
    require(version == checkpoint_version, ErrorCode::schema_error,
            "unsupported checkpoint version " + std::to_string(version));

    try {
        return decode(r);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::invalid_argument) throw;
        fail(ErrorCode::schema_error, std::string("inconsistent checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::string& path, const StreamingFit& fit) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::io_error, "cannot write '" + path + "'");
    write_checkpoint(out, fit);
    out.close();
    require(!out.fail(), ErrorCode::io_error, "cannot write '" + path + "'");
}

StreamingFit load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::io_error, "cannot open '" + path + "'");
    return read_checkpoint(in);
}

}  // namespace resave
