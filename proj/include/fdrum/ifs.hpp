#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdrum/errors.hpp"

namespace fdrum {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Affine map x -> linear * x + translation whose linear part is ratio times an
/// orthogonal matrix. Produced by compose_word; the empty word yields the
/// ratio-1 identity, flagged as the initiator.
template <typename Scalar>
class AffineSimilarity {
 public:
  AffineSimilarity(MatrixX<Scalar> linear, VectorX<Scalar> translation, Scalar ratio,
                   bool initiator = false)
      : linear_(std::move(linear)),
        translation_(std::move(translation)),
        ratio_(ratio),
        initiator_(initiator) {}

  static AffineSimilarity identity(Eigen::Index dim) {
    return AffineSimilarity(MatrixX<Scalar>::Identity(dim, dim), VectorX<Scalar>::Zero(dim),
                            Scalar(1), true);
  }

  const MatrixX<Scalar>& linear() const { return linear_; }
  const VectorX<Scalar>& translation() const { return translation_; }
  Scalar ratio() const { return ratio_; }
  Eigen::Index dim() const { return translation_.size(); }
  bool is_initiator() const { return initiator_; }

 private:
  MatrixX<Scalar> linear_;
  VectorX<Scalar> translation_;
  Scalar ratio_;
  bool initiator_;
};

/// One contraction w_j of an ISS. Construction enforces ratio in (0,1) and
/// linear = ratio * orthogonal to 1e-12.
template <typename Scalar>
class SimilarityMap {
 public:
  SimilarityMap(MatrixX<Scalar> linear, VectorX<Scalar> translation, Scalar ratio)
      : linear_(std::move(linear)), translation_(std::move(translation)), ratio_(ratio) {
    using std::abs;
    const auto d = translation_.size();
    if (d == 0) throw ArgumentError("SimilarityMap: dimension must be positive");
    if (linear_.rows() != d || linear_.cols() != d)
      throw ArgumentError("SimilarityMap: linear part must be " + std::to_string(d) + "x" +
                          std::to_string(d));
    if (!(ratio_ > Scalar(0) && ratio_ < Scalar(1)))
      throw ArgumentError("SimilarityMap: ratio must lie strictly inside (0,1)");
    const MatrixX<Scalar> gram = linear_.transpose() * linear_;
    const MatrixX<Scalar> target = ratio_ * ratio_ * MatrixX<Scalar>::Identity(d, d);
    if ((gram - target).cwiseAbs().maxCoeff() > Scalar(1e-12))
      throw ArgumentError("SimilarityMap: linear part is not ratio times an orthogonal matrix");
  }

  /// Ratio is taken from the linear part (its operator norm).
  static SimilarityMap from_linear(MatrixX<Scalar> linear, VectorX<Scalar> translation) {
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(linear);
    const Scalar ratio = svd.singularValues()(0);
    return SimilarityMap(std::move(linear), std::move(translation), ratio);
  }

  /// Homothety x -> ratio * x + translation.
  static SimilarityMap homothety(Scalar ratio, VectorX<Scalar> translation) {
    const auto d = translation.size();
    return SimilarityMap(ratio * MatrixX<Scalar>::Identity(d, d), std::move(translation), ratio);
  }

  const MatrixX<Scalar>& linear() const { return linear_; }
  const VectorX<Scalar>& translation() const { return translation_; }
  Scalar ratio() const { return ratio_; }
  Eigen::Index dim() const { return translation_.size(); }

  operator AffineSimilarity<Scalar>() const {
    return AffineSimilarity<Scalar>(linear_, translation_, ratio_);
  }

 private:
  MatrixX<Scalar> linear_;
  VectorX<Scalar> translation_;
  Scalar ratio_;
};

enum class OverlapClass { disconnected, just_touching, overlapping, unknown };

inline std::string to_string(OverlapClass c) {
  switch (c) {
    case OverlapClass::disconnected: return "disconnected";
    case OverlapClass::just_touching: return "just_touching";
    case OverlapClass::overlapping: return "overlapping";
    case OverlapClass::unknown: break;
  }
  return "unknown";
}

/// Word over {1..p}; the empty word addresses the initiator E_0.
struct Address {
  std::vector<int> word;

  std::size_t level() const { return word.size(); }
  bool is_initiator() const { return word.empty(); }
};

template <typename Scalar>
class IteratedFunctionSystem {
 public:
  explicit IteratedFunctionSystem(std::vector<SimilarityMap<Scalar>> maps)
      : maps_(std::move(maps)) {
    if (maps_.size() < 2) throw ArgumentError("IteratedFunctionSystem: need at least two maps");
    dim_ = maps_.front().dim();
    for (const auto& m : maps_)
      if (m.dim() != dim_) throw ArgumentError("IteratedFunctionSystem: maps differ in dimension");
  }

  const std::vector<SimilarityMap<Scalar>>& maps() const { return maps_; }
  const SimilarityMap<Scalar>& map(std::size_t j) const { return maps_.at(j); }
  std::size_t size() const { return maps_.size(); }
  Eigen::Index dim() const { return dim_; }

  std::vector<Scalar> ratios() const {
    std::vector<Scalar> r;
    r.reserve(maps_.size());
    for (const auto& m : maps_) r.push_back(m.ratio());
    return r;
  }

  OverlapClass overlap_class() const { return overlap_; }
  /// Rasterization depth at which overlap_class() was established.
  std::optional<int> overlap_depth() const { return overlap_depth_; }

  IteratedFunctionSystem with_overlap(OverlapClass c, int depth) const {
    IteratedFunctionSystem copy = *this;
    copy.overlap_ = c;
    copy.overlap_depth_ = depth;
    return copy;
  }

 private:
  std::vector<SimilarityMap<Scalar>> maps_;
  Eigen::Index dim_ = 0;
  OverlapClass overlap_ = OverlapClass::unknown;
  std::optional<int> overlap_depth_;
};

template <typename Map, typename Derived>
auto apply_map(const Map& m, const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() != m.dim())
    throw ArgumentError("apply_map: point has dimension " + std::to_string(x.size()) +
                        ", map has " + std::to_string(m.dim()));
  return VectorX<Scalar>(m.linear() * x + m.translation());
}

template <typename Map, typename Derived>
auto invert_map(const Map& m, const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  if (y.size() != m.dim())
    throw ArgumentError("invert_map: point has dimension " + std::to_string(y.size()) +
                        ", map has " + std::to_string(m.dim()));
  // linear = ratio * Q with Q orthogonal, so linear^-1 = Q^T / ratio.
  const Scalar r2 = m.ratio() * m.ratio();
  if (!(r2 > Scalar(0))) throw std::logic_error("invert_map: singular linear part");
  return VectorX<Scalar>(m.linear().transpose() * (y - m.translation()) / r2);
}

/// w_{a1} o w_{a2} o ... o w_{aN}.
template <typename Scalar>
AffineSimilarity<Scalar> compose_word(const IteratedFunctionSystem<Scalar>& ifs,
                                      const Address& a) {
  const int p = static_cast<int>(ifs.size());
  for (int letter : a.word)
    if (letter < 1 || letter > p)
      throw ArgumentError("compose_word: letter " + std::to_string(letter) + " outside [1," +
                          std::to_string(p) + "]");
  if (a.is_initiator()) return AffineSimilarity<Scalar>::identity(ifs.dim());

  MatrixX<Scalar> linear = MatrixX<Scalar>::Identity(ifs.dim(), ifs.dim());
  VectorX<Scalar> translation = VectorX<Scalar>::Zero(ifs.dim());
  Scalar ratio(1);
  for (int letter : a.word) {
    const auto& w = ifs.map(static_cast<std::size_t>(letter - 1));
    // current o w: x -> L (A x + t) + b
    translation += linear * w.translation();
    linear = linear * w.linear();
    ratio *= w.ratio();
  }
  return AffineSimilarity<Scalar>(std::move(linear), std::move(translation), ratio);
}

namespace detail {

// Pulled-back coordinates u = w^-1(x) classified against the unit cube.
template <typename Scalar>
bool in_open_cube(const VectorX<Scalar>& u, Scalar tol) {
  return (u.array() > tol).all() && (u.array() < Scalar(1) - tol).all();
}

template <typename Scalar>
bool in_closed_cube(const VectorX<Scalar>& u, Scalar tol) {
  return (u.array() >= -tol).all() && (u.array() <= Scalar(1) + tol).all();
}

// Calls f(u) for every point of the (cells+1)^d lattice on [0,1]^d with
// half-offsets when `centers` is set.
template <typename Scalar, typename F>
void for_each_lattice_point(Eigen::Index dim, int cells, bool centers, F&& f) {
  const int n = centers ? cells : cells + 1;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  VectorX<Scalar> u(dim);
  while (true) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      const Scalar i = static_cast<Scalar>(idx[static_cast<std::size_t>(k)]);
      u(k) = centers ? (i + Scalar(0.5)) / Scalar(cells) : i / Scalar(cells);
    }
    if (!f(u)) return;
    Eigen::Index k = 0;
    for (; k < dim; ++k) {
      if (++idx[static_cast<std::size_t>(k)] < n) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
    if (k == dim) return;
  }
}

}  // namespace detail

/// Classifies copies w_j([0,1]^d) of the reference cube, each rasterized at
/// 2^depth cells per side. Cell centers of one copy inside another copy's
/// interior mean overlap; boundary lattice points of one copy inside another
/// copy's closure mean the copies touch.
template <typename Scalar>
OverlapClass classify_overlap(const IteratedFunctionSystem<Scalar>& ifs, int depth) {
  if (depth < 1) throw ArgumentError("classify_overlap: depth must be >= 1");
  if (depth > 16) throw ArgumentError("classify_overlap: depth must be <= 16");
  const Scalar tol(1e-9);
  const int cells = 1 << depth;
  const auto d = ifs.dim();
  const auto& maps = ifs.maps();

  bool touching = false;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    for (std::size_t j = 0; j < maps.size(); ++j) {
      if (i == j) continue;
      bool overlap = false;
      detail::for_each_lattice_point<Scalar>(d, cells, true, [&](const VectorX<Scalar>& u) {
        const VectorX<Scalar> x = apply_map(maps[i], u);
        if (detail::in_open_cube<Scalar>(invert_map(maps[j], x), tol)) overlap = true;
        return !overlap;
      });
      if (overlap) return OverlapClass::overlapping;
      if (touching) continue;
      detail::for_each_lattice_point<Scalar>(d, cells, false, [&](const VectorX<Scalar>& u) {
        const bool on_boundary = ((u.array() == Scalar(0)) || (u.array() == Scalar(1))).any();
        if (!on_boundary) return true;
        const VectorX<Scalar> x = apply_map(maps[i], u);
        if (detail::in_closed_cube<Scalar>(invert_map(maps[j], x), tol)) touching = true;
        return !touching;
      });
    }
  }
  return touching ? OverlapClass::just_touching : OverlapClass::disconnected;
}

/// Root s >= 0 of sum_j c_j^s = 1 (similarity dimension).
template <typename Scalar>
Scalar moran_dimension(std::span<const Scalar> ratios) {
  using std::log;
  using std::pow;
  if (ratios.empty()) throw ArgumentError("moran_dimension: no ratios given");
  for (Scalar c : ratios)
    if (!(c > Scalar(0) && c < Scalar(1)))
      throw ArgumentError("moran_dimension: ratios must lie strictly inside (0,1)");

  auto excess = [&](Scalar s) {
    Scalar sum(0);
    for (Scalar c : ratios) sum += pow(c, s);
    return sum - Scalar(1);
  };
  auto slope = [&](Scalar s) {
    Scalar sum(0);
    for (Scalar c : ratios) sum += pow(c, s) * log(c);
    return sum;
  };

  // excess() is strictly decreasing with excess(0) = p - 1 >= 0.
  Scalar lo(0);
  Scalar hi(10);
  while (excess(hi) > Scalar(0)) {
    lo = hi;
    hi *= Scalar(2);
  }
  while (hi - lo > Scalar(1e-13)) {
    const Scalar mid = (lo + hi) / Scalar(2);
    if (excess(mid) > Scalar(0))
      lo = mid;
    else
      hi = mid;
  }
  Scalar s = (lo + hi) / Scalar(2);
  const Scalar df = slope(s);
  if (df != Scalar(0)) s -= excess(s) / df;
  return std::max(s, Scalar(0));
}

template <typename Scalar>
Scalar moran_dimension(const std::vector<Scalar>& ratios) {
  return moran_dimension(std::span<const Scalar>(ratios));
}

}  // namespace fdrum
