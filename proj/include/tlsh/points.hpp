#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tlsh {

/// Dense row-major set of points in R^d.
class PointSet {
  public:
    PointSet() = default;
    PointSet(std::size_t n, std::size_t dim) : dim_(dim), data_(n * dim, 0.0) {
        if (dim == 0) throw std::invalid_argument("PointSet: dim must be positive");
    }

    std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return data_.empty(); }

    const double* operator[](std::size_t i) const { return data_.data() + i * dim_; }
    double* operator[](std::size_t i) { return data_.data() + i * dim_; }

    const std::vector<double>& data() const { return data_; }

    void append(const double* p) { data_.insert(data_.end(), p, p + dim_); }
    void append(const std::vector<double>& p) {
        if (p.size() != dim_) throw std::invalid_argument("PointSet: dimension mismatch");
        append(p.data());
    }

    /// Binary layout: u64 count, u64 dim, then count*dim little-endian
    /// IEEE doubles in row-major order.
    void write_binary(std::ostream& out) const {
        write_u64(out, size());
        write_u64(out, dim_);
        for (double v : data_) write_f64(out, v);
    }

    static PointSet read_binary(std::istream& in) {
        std::uint64_t n = read_u64(in);
        std::uint64_t dim = read_u64(in);
        if (dim == 0) throw std::runtime_error("PointSet: zero dimension in stream");
        PointSet ps(static_cast<std::size_t>(n), static_cast<std::size_t>(dim));
        for (auto& v : ps.data_) v = read_f64(in);
        return ps;
    }

    /// CSV: one point per line, full round-trip precision, no header.
    void write_csv(std::ostream& out) const {
        out.precision(17);
        for (std::size_t i = 0; i < size(); ++i) {
            const double* row = (*this)[i];
            for (std::size_t j = 0; j < dim_; ++j) {
                if (j) out << ',';
                out << row[j];
            }
            out << '\n';
        }
    }

    static PointSet read_csv(std::istream& in) {
        PointSet ps;
        std::string line;
        std::vector<double> row;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            row.clear();
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
            if (ps.dim_ == 0) ps.dim_ = row.size();
            if (row.size() != ps.dim_)
                throw std::runtime_error("PointSet: ragged CSV row");
            ps.append(row.data());
        }
        if (ps.dim_ == 0) throw std::runtime_error("PointSet: empty CSV");
        return ps;
    }

  private:
    static void write_u64(std::ostream& out, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    static std::uint64_t read_u64(std::istream& in) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            int byte = in.get();
            if (byte == std::istream::traits_type::eof())
                throw std::runtime_error("PointSet: truncated stream");
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(byte)) << (8 * i);
        }
        return v;
    }

    static void write_f64(std::ostream& out, double d) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(d));
        std::memcpy(&bits, &d, sizeof(bits));
        write_u64(out, bits);
    }

    static double read_f64(std::istream& in) {
        std::uint64_t bits = read_u64(in);
        double d;
        std::memcpy(&d, &bits, sizeof(d));
        return d;
    }

    std::size_t dim_ = 0;
    std::vector<double> data_;
};

inline double euclidean(const double* a, const double* b, std::size_t dim) {
    double sum = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

struct Neighbor {
    std::uint64_t id = 0;
    double distance = std::numeric_limits<double>::infinity();
};

/// Exact nearest neighbor by linear scan; ties go to the lower id.
inline Neighbor brute_force_nn(const PointSet& points, const double* q) {
    Neighbor best;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double d = euclidean(points[i], q, points.dim());
        if (d < best.distance) best = Neighbor{i, d};
    }
    return best;
}

} // namespace tlsh
