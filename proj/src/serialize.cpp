#include "toplora/serialize.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

namespace toplora {

namespace {

constexpr char kMagic[5] = {'T', 'P', 'L', 'W', '1'};

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
public:
    explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ >= bytes_.size(); }

    void need(std::size_t count, const char* what) {
        if (pos_ + count > bytes_.size()) {
            throw FormatError(std::string("truncated ") + what, pos_);
        }
    }

    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = static_cast<std::uint8_t>(bytes_[pos_]) |
                          (static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes_[pos_ + 1])) << 8);
        pos_ += 2;
        return v;
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    double f64(const char* what) {
        need(8, what);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        double d;
        std::memcpy(&d, &bits, sizeof(d));
        return d;
    }

    std::string str(std::size_t len, const char* what) {
        need(len, what);
        std::string s = bytes_.substr(pos_, len);
        pos_ += len;
        return s;
    }

private:
    std::string bytes_;
    std::size_t pos_ = 0;
};

Matrix scalar_matrix(double v) { return Matrix(1, 1, {v}); }

const Matrix* find(const NamedMatrices& entries, const std::string& name) {
    for (const auto& [n, m] : entries) {
        if (n == name) return &m;
    }
    return nullptr;
}

const Matrix& require(const NamedMatrices& entries, const std::string& name) {
    const Matrix* m = find(entries, name);
    if (!m) throw FormatError("missing required entry '" + name + "'", 0);
    return *m;
}

double scalar_or(const NamedMatrices& entries, const std::string& name, double fallback) {
    const Matrix* m = find(entries, name);
    return m ? m->data()[0] : fallback;
}

NamedMatrices config_entries(const AdapterConfig& cfg) {
    return {
        {"cfg.alpha", scalar_matrix(cfg.effective_alpha())},
        {"cfg.dropout_rate", scalar_matrix(cfg.dropout_rate)},
        {"cfg.rmsnorm_eps", scalar_matrix(cfg.rmsnorm_eps)},
        {"cfg.use_exp", scalar_matrix(cfg.use_exp ? 1.0 : 0.0)},
        {"cfg.use_rmsnorm", scalar_matrix(cfg.use_rmsnorm ? 1.0 : 0.0)},
        {"cfg.clamp_bound", scalar_matrix(cfg.clamp_bound)},
    };
}

AdapterConfig config_from(const NamedMatrices& entries, std::size_t rank) {
    AdapterConfig cfg;
    cfg.rank = rank;
    cfg.alpha = scalar_or(entries, "cfg.alpha", 2.0 * static_cast<double>(rank));
    cfg.dropout_rate = scalar_or(entries, "cfg.dropout_rate", 0.0);
    cfg.rmsnorm_eps = scalar_or(entries, "cfg.rmsnorm_eps", 1e-6);
    cfg.use_exp = scalar_or(entries, "cfg.use_exp", 1.0) != 0.0;
    cfg.use_rmsnorm = scalar_or(entries, "cfg.use_rmsnorm", 1.0) != 0.0;
    cfg.clamp_bound = scalar_or(entries, "cfg.clamp_bound", 30.0);
    return cfg;
}

}  // namespace

void write_weights(const std::string& path, const NamedMatrices& entries) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    for (const auto& [name, m] : entries) {
        if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw ConfigError("matrix name too long for TPLW1: " + name);
        }
        put_u16(out, static_cast<std::uint16_t>(name.size()));
        out += name;
        put_u32(out, static_cast<std::uint32_t>(m.rows()));
        put_u32(out, static_cast<std::uint32_t>(m.cols()));
        for (double v : m.data()) put_f64(out, v);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw ConfigError("write failed: " + path);
}

NamedMatrices read_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r(std::move(bytes));
    std::string head = r.str(sizeof(kMagic), "magic");
    if (head != std::string(kMagic, sizeof(kMagic))) {
        throw FormatError("bad magic, expected TPLW1", 0);
    }

    NamedMatrices entries;
    while (!r.at_end()) {
        const std::uint16_t name_len = r.u16("name length");
        std::string name = r.str(name_len, "name");
        const std::uint32_t rows = r.u32("rows");
        const std::uint32_t cols = r.u32("cols");
        if (rows == 0 || cols == 0) {
            throw FormatError("zero dimension in entry '" + name + "'", r.offset() - 8);
        }
        std::vector<double> data(static_cast<std::size_t>(rows) * cols);
        for (double& v : data) v = r.f64("matrix payload");
        entries.emplace_back(std::move(name), Matrix(rows, cols, std::move(data)));
    }
    return entries;
}

void save_adapter(const std::string& path, const LoRAAdapter& adapter) {
    NamedMatrices entries = {{"W", adapter.W}, {"A", adapter.A}, {"B", adapter.B}};
    for (auto& e : config_entries(adapter.config)) entries.push_back(std::move(e));
    write_weights(path, entries);
}

void save_adapter(const std::string& path, const TopLoRAAdapter& adapter) {
    NamedMatrices entries = {
        {"W", adapter.W}, {"A", adapter.A}, {"B", adapter.B}, {"Theta", adapter.Theta}};
    for (auto& e : config_entries(adapter.config)) entries.push_back(std::move(e));
    write_weights(path, entries);
}

std::variant<LoRAAdapter, TopLoRAAdapter> load_adapter(const std::string& path) {
    NamedMatrices entries = read_weights(path);
    const Matrix& W = require(entries, "W");
    const Matrix& A = require(entries, "A");
    const Matrix& B = require(entries, "B");
    AdapterConfig cfg = config_from(entries, A.rows());
    if (const Matrix* theta = find(entries, "Theta")) {
        TopLoRAAdapter adapter{W, A, B, *theta, cfg};
        return adapter;
    }
    LoRAAdapter adapter{W, A, B, cfg};
    return adapter;
}

}  // namespace toplora
