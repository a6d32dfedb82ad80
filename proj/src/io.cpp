#include "biphoton/io.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace biphoton {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
    std::array<unsigned char, 4> b{static_cast<unsigned char>(v),
                                   static_cast<unsigned char>(v >> 8),
                                   static_cast<unsigned char>(v >> 16),
                                   static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
    std::array<unsigned char, 2> b{static_cast<unsigned char>(v),
                                   static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b.data()), 2);
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    std::array<unsigned char, 8> b;
    for (int k = 0; k < 8; ++k) b[static_cast<size_t>(k)] = static_cast<unsigned char>(bits >> (8 * k));
    out.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint32_t read_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
    std::array<unsigned char, 2> b{};
    in.read(reinterpret_cast<char*>(b.data()), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

double read_f64(std::istream& in) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), 8);
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[static_cast<size_t>(k)]) << (8 * k);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void check_magic(std::istream& in, const char* magic, const std::string& path) {
    char buf[4];
    in.read(buf, 4);
    if (!in || std::memcmp(buf, magic, 4) != 0)
        throw std::runtime_error(path + ": bad magic, expected " + magic);
}

// The grid format stores complex pairs and phase arrays under the same magic;
// payload size tells them apart, so a loader must consume the file exactly.
void check_exhausted(std::istream& in, const std::string& path) {
    if (!in) throw std::runtime_error(path + ": truncated payload");
    in.peek();
    if (!in.eof()) throw std::runtime_error(path + ": payload size does not match its type");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    return in;
}

void write_grid_header(std::ostream& out, const char* magic, const GridSpec& spec) {
    out.write(magic, 4);
    write_u32(out, static_cast<std::uint32_t>(spec.n));
    write_f64(out, spec.pitch);
    write_f64(out, spec.wavelength);
    write_f64(out, spec.focal_eff);
}

GridSpec read_grid_header(std::istream& in, const char* magic, const std::string& path) {
    check_magic(in, magic, path);
    const int n = static_cast<int>(read_u32(in));
    const double pitch = read_f64(in);
    const double wavelength = read_f64(in);
    const double focal = read_f64(in);
    if (!in) throw std::runtime_error(path + ": truncated header");
    return GridSpec(n, pitch, wavelength, focal);
}

}  // namespace

void save_complex_grid(const std::string& path, const ComplexGrid& grid) {
    auto out = open_out(path);
    write_grid_header(out, "BPG1", grid.spec);
    for (int i = 0; i < grid.spec.n; ++i)
        for (int j = 0; j < grid.spec.n; ++j) {
            write_f64(out, grid.data(i, j).real());
            write_f64(out, grid.data(i, j).imag());
        }
}

ComplexGrid load_complex_grid(const std::string& path) {
    auto in = open_in(path);
    const GridSpec spec = read_grid_header(in, "BPG1", path);
    Eigen::MatrixXcd data(spec.n, spec.n);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            const double re = read_f64(in);
            const double im = read_f64(in);
            data(i, j) = {re, im};
        }
    check_exhausted(in, path);
    return ComplexGrid(spec, std::move(data));
}

void save_phase_mask(const std::string& path, const PhaseMask& mask) {
    auto out = open_out(path);
    write_grid_header(out, "BPG1", mask.spec);
    for (int i = 0; i < mask.spec.n; ++i)
        for (int j = 0; j < mask.spec.n; ++j) write_f64(out, mask.theta(i, j));
}

PhaseMask load_phase_mask(const std::string& path) {
    auto in = open_in(path);
    const GridSpec spec = read_grid_header(in, "BPG1", path);
    Eigen::MatrixXd theta(spec.n, spec.n);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) theta(i, j) = read_f64(in);
    check_exhausted(in, path);
    return PhaseMask(spec, std::move(theta));
}

void save_g2(const std::string& path, const G2Tensor& g2) {
    auto out = open_out(path);
    out.write("BPG2", 4);
    write_u32(out, static_cast<std::uint32_t>(g2.spec.n));
    const long p = g2.data.rows();
    for (long i = 0; i < p; ++i)
        for (long j = 0; j < p; ++j) write_f64(out, g2.data(i, j));
}

G2Tensor load_g2(const std::string& path) {
    auto in = open_in(path);
    check_magic(in, "BPG2", path);
    const int n = static_cast<int>(read_u32(in));
    if (n < 2 || n > 256) throw std::runtime_error(path + ": implausible tensor side");
    const long p = static_cast<long>(n) * n;
    Eigen::MatrixXd data(p, p);
    for (long i = 0; i < p; ++i)
        for (long j = 0; j < p; ++j) data(i, j) = read_f64(in);
    check_exhausted(in, path);
    // Pixel units; the estimator does not carry optical parameters.
    return G2Tensor(GridSpec(n, 1.0, 1.0, 1.0), std::move(data));
}

void save_frames(const std::string& path, const FrameBlock& block) {
    auto out = open_out(path);
    out.write("BPF1", 4);
    write_u32(out, static_cast<std::uint32_t>(block.n));
    write_u32(out, static_cast<std::uint32_t>(block.m));
    write_u16(out, 0);  // dtype 0 = u16
    for (std::uint16_t v : block.data) write_u16(out, v);
}

FrameBlock load_frames(const std::string& path) {
    auto in = open_in(path);
    check_magic(in, "BPF1", path);
    const int n = static_cast<int>(read_u32(in));
    const int m = static_cast<int>(read_u32(in));
    const std::uint16_t dtype = read_u16(in);
    if (dtype != 0) throw std::runtime_error(path + ": unsupported frame dtype");
    FrameBlock block(n, m);
    for (auto& v : block.data) v = read_u16(in);
    check_exhausted(in, path);
    return block;
}

void append_frames(const std::string& path, const FrameBlock& block) {
    std::fstream io(path, std::ios::binary | std::ios::in | std::ios::out);
    if (!io) throw std::runtime_error(path + ": cannot open for appending");
    check_magic(io, "BPF1", path);
    const int n = static_cast<int>(read_u32(io));
    const int m = static_cast<int>(read_u32(io));
    if (n != block.n) throw std::runtime_error(path + ": frame side mismatch on append");
    io.seekp(0, std::ios::end);
    for (std::uint16_t v : block.data) write_u16(io, v);
    io.seekp(8, std::ios::beg);
    write_u32(io, static_cast<std::uint32_t>(m + block.m));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void save_projection_csv(const std::string& path, const Projection& proj, bool clip_negative) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "di,dj,value\n";
    const int size = proj.size();
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) {
            double v = proj.data(i, j);
            if (clip_negative && v < 0.0) v = 0.0;
            out << (i - proj.origin) << ',' << (j - proj.origin) << ',' << format_double(v)
                << '\n';
        }
}

}  // namespace biphoton
