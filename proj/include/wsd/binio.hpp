#pragma once

// Raw little-endian binary I/O helpers shared by the model file formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>

#include <Eigen/Dense>

#include "wsd/errors.hpp"

namespace wsd::detail {

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError("truncated model file");
    return v;
}

inline void put_vec(std::ostream& out, const Eigen::VectorXd& v) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(v.size())));
}

inline Eigen::VectorXd get_vec(std::istream& in) {
    auto n = get<std::uint64_t>(in);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * n));
    if (!in) throw DataError("truncated model file");
    return v;
}

inline void put_mat(std::ostream& out, const Eigen::MatrixXd& m) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(out, m(i, j));
}

inline Eigen::MatrixXd get_mat(std::istream& in) {
    auto rows = get<std::uint64_t>(in);
    auto cols = get<std::uint64_t>(in);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get<double>(in);
    return m;
}

}  // namespace wsd::detail
