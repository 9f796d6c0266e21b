#include "vorb/loops.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace vorb {

Loop::Loop(int n, int modes) : n_(n), modes_(modes) {
  if (n < 1 || modes < 0) throw InvalidArgument("loop needs n >= 1 and modes >= 0");
  coeffs_ = Mat::Zero(2 * n, 2 * modes + 1);
}

Loop::Loop(Mat coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.rows() < 2 || coeffs_.rows() % 2 != 0 || coeffs_.cols() % 2 != 1) {
    throw DimensionMismatch("loop coefficients must be 2N x (2M+1)");
  }
  n_ = static_cast<int>(coeffs_.rows() / 2);
  modes_ = static_cast<int>((coeffs_.cols() - 1) / 2);
}

Loop Loop::constant(const Vec& value, int modes) {
  if (value.size() < 2 || value.size() % 2 != 0) throw DimensionMismatch("constant loop needs a 2N-vector");
  Loop u(static_cast<int>(value.size() / 2), modes);
  u.coeffs_.col(0) = value;
  return u;
}

Loop Loop::from_equilibrium(const RelativeEquilibrium& eq, int modes) {
  if (std::abs(std::abs(eq.omega) - 1.0) > 1e-12) {
    throw InvalidArgument("loop seed must be 2pi-periodic (|omega| = 1)");
  }
  if (modes < 1) throw InvalidArgument("loop seed needs at least one mode");
  Loop u(eq.sys.n(), modes);
  u.coeffs_.col(1) = eq.z;
  u.coeffs_.col(2) = -eq.omega * (eq.sys.symplectic() * eq.z);
  return u;
}

Vec Loop::flat() const { return Eigen::Map<const Vec>(coeffs_.data(), coeffs_.size()); }

Loop Loop::from_flat(const Vec& flat, int n, int modes) {
  if (flat.size() != 2 * n * (2 * modes + 1)) throw DimensionMismatch("flat loop vector has the wrong length");
  return Loop(Mat(Eigen::Map<const Mat>(flat.data(), 2 * n, 2 * modes + 1)));
}

Vec Loop::eval(double t) const {
  Vec out = coeffs_.col(0);
  for (int k = 1; k <= modes_; ++k) {
    out += std::cos(k * t) * coeffs_.col(2 * k - 1) + std::sin(k * t) * coeffs_.col(2 * k);
  }
  return out;
}

Loop Loop::with_modes(int modes) const {
  Loop out(n_, modes);
  const int cols = std::min(columns(), out.columns());
  out.coeffs_.leftCols(cols) = coeffs_.leftCols(cols);
  return out;
}

namespace {

void require_same_shape(const Loop& a, const Loop& b) {
  if (a.n() != b.n() || a.modes() != b.modes()) {
    std::ostringstream msg;
    msg << "loop shapes differ: (n=" << a.n() << ", M=" << a.modes() << ") vs (n=" << b.n()
        << ", M=" << b.modes() << ")";
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

Loop& Loop::operator+=(const Loop& other) {
  require_same_shape(*this, other);
  coeffs_ += other.coeffs_;
  return *this;
}

Loop& Loop::operator-=(const Loop& other) {
  require_same_shape(*this, other);
  coeffs_ -= other.coeffs_;
  return *this;
}

Loop& Loop::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

Loop operator+(Loop a, const Loop& b) { return a += b; }
Loop operator-(Loop a, const Loop& b) { return a -= b; }
Loop operator*(double s, Loop a) { return a *= s; }

// ---------------------------------------------------------------------------

namespace {

template <typename Weight>
double weighted_inner(const Loop& u, const Loop& v, Weight weight) {
  if (u.n() != v.n()) throw DimensionMismatch("inner product of loops with different vortex counts");
  const int cols = std::min(u.columns(), v.columns());
  double sum = 0.0;
  for (int c = 0; c < cols; ++c) {
    sum += weight(c) * u.coeffs().col(c).dot(v.coeffs().col(c));
  }
  return sum;
}

double l2_weight(int col) { return col == 0 ? kTwoPi : kPi; }

double h1_weight(int col) {
  if (col == 0) return kTwoPi;
  const double k = mode_of_column(col);
  return kPi * (1.0 + k * k);
}

}  // namespace

double l2_inner(const Loop& u, const Loop& v) { return weighted_inner(u, v, l2_weight); }
double h1_inner(const Loop& u, const Loop& v) { return weighted_inner(u, v, h1_weight); }
double h1_norm(const Loop& u) { return std::sqrt(h1_inner(u, u)); }

Vec h1_weights(int n, int modes) {
  Vec w(2 * n * (2 * modes + 1));
  for (int c = 0; c < 2 * modes + 1; ++c) w.segment(2 * n * c, 2 * n).setConstant(h1_weight(c));
  return w;
}

Vec l2_weights(int n, int modes) {
  Vec w(2 * n * (2 * modes + 1));
  for (int c = 0; c < 2 * modes + 1; ++c) w.segment(2 * n * c, 2 * n).setConstant(l2_weight(c));
  return w;
}

Loop differentiate(const Loop& u) {
  Loop out(u.n(), u.modes());
  for (int k = 1; k <= u.modes(); ++k) {
    out.coeffs().col(2 * k - 1) = k * u.coeffs().col(2 * k);
    out.coeffs().col(2 * k) = -k * u.coeffs().col(2 * k - 1);
  }
  return out;
}

Loop id_minus_laplace(const Loop& u) {
  Loop out = u;
  for (int c = 1; c < u.columns(); ++c) {
    const double k = mode_of_column(c);
    out.coeffs().col(c) *= 1.0 + k * k;
  }
  return out;
}

Loop inv_id_minus_laplace(const Loop& u) {
  Loop out = u;
  for (int c = 1; c < u.columns(); ++c) {
    const double k = mode_of_column(c);
    out.coeffs().col(c) /= 1.0 + k * k;
  }
  return out;
}

Loop time_shift(double theta, const Loop& u) {
  Loop out = u;
  for (int k = 1; k <= u.modes(); ++k) {
    const double c = std::cos(k * theta);
    const double s = std::sin(k * theta);
    const Vec a = u.coeffs().col(2 * k - 1);
    const Vec b = u.coeffs().col(2 * k);
    out.coeffs().col(2 * k - 1) = c * a + s * b;
    out.coeffs().col(2 * k) = -s * a + c * b;
  }
  return out;
}

// ---------------------------------------------------------------------------

LoopFrame make_frame(const Loop& Z) {
  LoopFrame frame;
  frame.Z = Z;
  frame.Zdot = differentiate(Z);
  frame.zdot_norm2 = h1_inner(frame.Zdot, frame.Zdot);
  if (std::sqrt(frame.zdot_norm2) < 1e-12) throw DegenerateFrame("|Zdot| vanishes; the seed is not a rotating loop");
  Vec e1 = Vec::Zero(Z.dim());
  Vec e2 = Vec::Zero(Z.dim());
  for (int k = 0; k < Z.n(); ++k) {
    e1(2 * k) = 1.0;
    e2(2 * k + 1) = 1.0;
  }
  frame.e1 = Loop::constant(e1, Z.modes());
  frame.e2 = Loop::constant(e2, Z.modes());
  return frame;
}

LoopFrame make_frame(const RelativeEquilibrium& normalized, int modes) {
  return make_frame(Loop::from_equilibrium(normalized, modes));
}

LoopFrame shifted_frame(const LoopFrame& frame, double theta) {
  return make_frame(time_shift(theta, frame.Z));
}

Loop project_D(const Loop& u) {
  // H1 projection onto constant loops with equal blocks: average the blocks of
  // the mean coefficient.
  Vec2 c = Vec2::Zero();
  for (int k = 0; k < u.n(); ++k) c += u.coeffs().col(0).segment<2>(2 * k);
  c /= u.n();
  return Loop::constant(lifted(u.n(), c), u.modes());
}

Loop project_phase(const Loop& u, const LoopFrame& frame) {
  return (h1_inner(u, frame.Zdot) / frame.zdot_norm2) * frame.Zdot.with_modes(u.modes());
}

Loop project_X(const Loop& u, const LoopFrame& frame) { return u - project_phase(u, frame); }

Loop project_NZ(const Loop& u, const LoopFrame& frame) {
  return u - project_phase(u, frame) - project_D(u);
}

// ---------------------------------------------------------------------------

int permutation_order(const std::vector<int>& sigma) {
  const int n = static_cast<int>(sigma.size());
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    if (sigma[i] < 0 || sigma[i] >= n || seen[sigma[i]]) throw InvalidArgument("sigma is not a permutation");
    seen[sigma[i]] = true;
  }
  std::vector<int> power = sigma;
  int order = 1;
  auto is_identity = [&] {
    for (int i = 0; i < n; ++i)
      if (power[i] != i) return false;
    return true;
  };
  while (!is_identity()) {
    std::vector<int> next(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) next[i] = sigma[power[i]];
    power = std::move(next);
    ++order;
  }
  return order;
}

namespace {

void require_symmetry(const VortexSystem& sys, const std::vector<int>& sigma, const Loop& u) {
  if (static_cast<int>(sigma.size()) != sys.n() || u.n() != sys.n()) {
    throw DimensionMismatch("permutation, system and loop must agree on N");
  }
  permutation_order(sigma);
  for (int i = 0; i < sys.n(); ++i) {
    if (sys.gamma(sigma[i]) != sys.gamma(i)) throw VorticityMismatch("sigma does not preserve the vorticities");
  }
}

}  // namespace

Loop sigma_apply(const VortexSystem& sys, const std::vector<int>& sigma, const Loop& u) {
  require_symmetry(sys, sigma, u);
  const int order = permutation_order(sigma);
  const Loop shifted = time_shift(kTwoPi / order, u);
  Loop out(u.n(), u.modes());
  // Block sigma(i) of the result is block i of the shifted loop.
  for (int i = 0; i < u.n(); ++i) {
    out.coeffs().middleRows(2 * sigma[i], 2) = shifted.coeffs().middleRows(2 * i, 2);
  }
  return out;
}

Loop sigma_project(const VortexSystem& sys, const std::vector<int>& sigma, const Loop& u) {
  require_symmetry(sys, sigma, u);
  const int order = permutation_order(sigma);
  Loop acc = u;
  Loop power = u;
  for (int i = 1; i < order; ++i) {
    power = sigma_apply(sys, sigma, power);
    acc += power;
  }
  return (1.0 / order) * acc;
}

// ---------------------------------------------------------------------------

std::vector<double> nodes(int m) {
  std::vector<double> t(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) t[j] = kTwoPi * j / m;
  return t;
}

const Mat& fourier_table(int modes, int m) {
  thread_local std::map<std::pair<int, int>, Mat> cache;
  auto it = cache.find({modes, m});
  if (it != cache.end()) return it->second;
  Mat B(2 * modes + 1, m);
  for (int j = 0; j < m; ++j) {
    const double t = kTwoPi * j / m;
    B(0, j) = 1.0;
    for (int k = 1; k <= modes; ++k) {
      B(2 * k - 1, j) = std::cos(k * t);
      B(2 * k, j) = std::sin(k * t);
    }
  }
  return cache.emplace(std::make_pair(modes, m), std::move(B)).first->second;
}

Mat sample(const Loop& u, int m) {
  if (m < 1) throw InvalidArgument("need at least one sample");
  return u.coeffs() * fourier_table(u.modes(), m);
}

Loop from_samples(const Mat& values, int modes) {
  const int m = static_cast<int>(values.cols());
  if (m < 2 * modes + 1) {
    std::ostringstream msg;
    msg << m << " samples cannot resolve " << modes << " modes (need " << 2 * modes + 1 << ")";
    throw DimensionMismatch(msg.str());
  }
  Mat coeffs = values * fourier_table(modes, m).transpose() * (2.0 / m);
  coeffs.col(0) *= 0.5;
  return Loop(std::move(coeffs));
}

void require_dealiased(int m, int modes) {
  if (m < 2 * (2 * modes) + 1) {
    std::ostringstream msg;
    msg << m << " nodes alias nonlinear terms of a " << modes << "-mode loop";
    throw AliasWarning(msg.str());
  }
}

double spectral_tail(const Loop& u, double fraction) {
  const int tail_modes = static_cast<int>(std::ceil(fraction * u.modes()));
  const int first = u.modes() - tail_modes + 1;
  double tail = 0.0;
  for (int k = std::max(first, 1); k <= u.modes(); ++k) {
    const double w = kPi * (1.0 + double(k) * k);
    tail += w * (u.cos_coeff(k).squaredNorm() + u.sin_coeff(k).squaredNorm());
  }
  const double total = h1_inner(u, u);
  return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

}  // namespace vorb
