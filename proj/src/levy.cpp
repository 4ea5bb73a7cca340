#include "fracavg/levy.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "quadrature.hpp"

namespace fracavg {

static_assert(std::endian::native == std::endian::little,
              "noise sidecar I/O assumes a little-endian host");

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kBrownianStream = 0;
constexpr std::uint64_t kJumpStream = 1;

void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument("JumpMeasureSpec." + field + ": " + why);
}

}  // namespace

JumpMeasureSpec JumpMeasureSpec::with_default_delta(double gamma, double alpha, double cutoff_c) {
  return JumpMeasureSpec{gamma, alpha, cutoff_c, cutoff_c * 1e-3};
}

void JumpMeasureSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail("gamma", "must be positive");
  if (!(alpha > 0.0 && alpha < 2.0)) fail("alpha", "must lie in (0, 2)");
  if (!(cutoff_c > 0.0) || !std::isfinite(cutoff_c)) fail("cutoff_c", "must be positive");
  if (!(cutoff_delta > 0.0 && cutoff_delta < cutoff_c)) {
    fail("cutoff_delta", "must lie in (0, cutoff_c)");
  }
}

double JumpMeasureSpec::intensity() const {
  return gamma / alpha * (std::pow(cutoff_delta, -alpha) - std::pow(cutoff_c, -alpha));
}

double JumpMeasureSpec::density(double x) const { return gamma * std::pow(x, -1.0 - alpha); }

double JumpMeasureSpec::mark_cdf(double x) const {
  if (x <= cutoff_delta) return 0.0;
  if (x >= cutoff_c) return 1.0;
  const double lo = std::pow(cutoff_delta, -alpha);
  const double hi = std::pow(cutoff_c, -alpha);
  return (lo - std::pow(x, -alpha)) / (lo - hi);
}

double JumpMeasureSpec::mark_quantile(double u) const {
  const double lo = std::pow(cutoff_delta, -alpha);
  const double hi = std::pow(cutoff_c, -alpha);
  const double x = std::pow(lo - u * (lo - hi), -1.0 / alpha);
  // Guard the half-open interval against rounding at either end.
  if (x < cutoff_delta) return cutoff_delta;
  if (x >= cutoff_c) return std::nextafter(cutoff_c, 0.0);
  return x;
}

TimeGrid TimeGrid::from_horizon(double horizon, double step) {
  if (!(step > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("TimeGrid: horizon and step must be positive");
  }
  const double ratio = horizon / step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio) || rounded < 1.0) {
    std::ostringstream os;
    os << "TimeGrid: step " << step << " does not divide horizon " << horizon;
    throw std::invalid_argument(os.str());
  }
  return TimeGrid{step, static_cast<std::size_t>(rounded)};
}

NoiseRealization NoiseRealization::zero(const TimeGrid& grid, std::size_t dim) {
  NoiseRealization out;
  out.grid = grid;
  out.dim = dim;
  out.brownian.assign(grid.n_steps * dim, 0.0);
  return out;
}

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(mix64(master_seed + kGolden) ^ (index * kGolden + 0x632be59bd9b4e019ULL));
}

double RandomStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomStream::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  return u * scale;
}

double RandomStream::exponential() { return -std::log1p(-uniform()); }

NoiseRealization sample_brownian_noise(const TimeGrid& grid, std::size_t dim, std::uint64_t seed) {
  if (!(grid.step > 0.0)) throw std::invalid_argument("sample_noise: grid step must be positive");
  if (dim < 1) throw std::invalid_argument("sample_noise: dim must be at least 1");
  NoiseRealization out;
  out.grid = grid;
  out.dim = dim;
  out.seed = seed;
  out.brownian.resize(grid.n_steps * dim);
  RandomStream rng(derive_stream_seed(seed, kBrownianStream));
  const double sd = std::sqrt(grid.step);
  for (double& db : out.brownian) db = sd * rng.normal();
  return out;
}

NoiseRealization sample_noise(const JumpMeasureSpec& spec, const TimeGrid& grid, std::size_t dim,
                              std::uint64_t seed) {
  spec.validate();
  NoiseRealization out = sample_brownian_noise(grid, dim, seed);
  out.jump_measure = spec;

  RandomStream rng(derive_stream_seed(seed, kJumpStream));
  const double rate = spec.intensity();
  const double horizon = grid.horizon();
  double t = rng.exponential() / rate;
  while (t < horizon) {
    out.jumps.push_back(JumpEvent{t, spec.mark_quantile(rng.uniform())});
    t += rng.exponential() / rate;
  }
  return out;
}

Eigen::VectorXd nu_integral_vector(const JumpMeasureSpec& spec,
                                   const std::function<Eigen::VectorXd(double)>& integrand,
                                   bool use_delta, double rel_tol) {
  spec.validate();
  if (!(rel_tol > 0.0)) throw std::invalid_argument("nu_integral: rel_tol must be positive");

  const detail::VectorFn weighted = [&](double x) -> Eigen::VectorXd {
    return integrand(x) * spec.density(x);
  };
  // Walk dyadic pieces [hi/2, hi] towards the origin. For integrands behaving
  // like x^p near 0 successive pieces shrink by the fixed ratio 2^(alpha-p),
  // so once the ratio settles the remaining tail is summed geometrically.
  constexpr std::size_t kMaxPieces = 200;
  constexpr std::size_t kZeroRun = 8;
  constexpr std::size_t kGrowthRun = 8;
  const double piece_tol = std::min(1e-12, 1e-2 * rel_tol);

  double hi = spec.cutoff_c;
  Eigen::VectorXd sum;
  Eigen::VectorXd piece;
  double prev_norm = 0.0;
  double prev_ratio = -1.0;
  std::size_t zero_run = 0;
  std::size_t growth_run = 0;

  for (std::size_t m = 0; m < kMaxPieces; ++m) {
    double lo = 0.5 * hi;
    const bool last = use_delta && lo <= spec.cutoff_delta;
    if (last) lo = spec.cutoff_delta;

    auto q = detail::gauss_kronrod(weighted, lo, hi, piece_tol, 0.0);
    piece = std::move(q.value);
    if (m == 0) {
      sum = piece;
    } else {
      sum += piece;
    }
    if (last) return sum;

    const double norm = piece.cwiseAbs().maxCoeff();
    const double total = sum.cwiseAbs().maxCoeff();
    hi = lo;

    if (!use_delta) {
      if (norm == 0.0 && total == 0.0) {
        if (++zero_run >= kZeroRun) return sum;
        continue;
      }
      zero_run = 0;
      if (m > 0 && prev_norm > 0.0) {
        const double ratio = norm / prev_norm;
        growth_run = ratio >= 1.0 ? growth_run + 1 : 0;
        if (growth_run >= kGrowthRun) {
          throw DivergenceError(
              "nu_integral: integrand does not vanish fast enough at the origin");
        }
        if (ratio < 1.0 && prev_ratio >= 0.0) {
          const double tail = norm * ratio / (1.0 - ratio);
          const bool settled = std::abs(ratio - prev_ratio) <= 1e-9 * ratio;
          if (tail <= rel_tol * 1e-2 * total || settled) {
            return sum + piece * (ratio / (1.0 - ratio));
          }
        }
        prev_ratio = ratio;
      }
      prev_norm = norm;
    }
  }
  throw DivergenceError("nu_integral: no convergence within " + std::to_string(kMaxPieces) +
                        " dyadic pieces");
}

double nu_integral(const JumpMeasureSpec& spec, const std::function<double(double)>& integrand,
                   bool use_delta, double rel_tol) {
  const auto wrapped = [&](double x) {
    Eigen::VectorXd v(1);
    v[0] = integrand(x);
    return v;
  };
  return nu_integral_vector(spec, wrapped, use_delta, rel_tol)[0];
}

Eigen::VectorXd compensator_increment(const JumpMeasureSpec& spec, const JumpCoefficientFn& h,
                                      double t, const Eigen::VectorXd& state, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("compensator_increment: dt must be positive");
  return dt * nu_integral_vector(
                  spec, [&](double x) { return h(t, state, x); }, /*use_delta=*/true);
}

namespace {

constexpr char kMagic[8] = {'F', 'R', 'A', 'C', 'N', 'O', 'I', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("read_noise: truncated sidecar");
  return value;
}

}  // namespace

void write_noise(std::ostream& out, const NoiseRealization& noise) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, noise.jump_measure ? 1u : 0u);
  put<std::uint64_t>(out, noise.seed);
  put<double>(out, noise.grid.step);
  put<std::uint64_t>(out, noise.grid.n_steps);
  put<std::uint64_t>(out, noise.dim);
  const JumpMeasureSpec spec = noise.jump_measure.value_or(JumpMeasureSpec{0, 0, 0, 0});
  put<double>(out, spec.gamma);
  put<double>(out, spec.alpha);
  put<double>(out, spec.cutoff_c);
  put<double>(out, spec.cutoff_delta);
  put<std::uint64_t>(out, noise.jumps.size());
  out.write(reinterpret_cast<const char*>(noise.brownian.data()),
            static_cast<std::streamsize>(noise.brownian.size() * sizeof(double)));
  for (const auto& jump : noise.jumps) {
    put<double>(out, jump.time);
    put<double>(out, jump.mark);
  }
  if (!out) throw std::runtime_error("write_noise: stream error");
}

NoiseRealization read_noise(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("read_noise: not a noise sidecar");
  }
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("read_noise: unknown version");
  const auto flags = get<std::uint32_t>(in);

  NoiseRealization out;
  out.seed = get<std::uint64_t>(in);
  out.grid.step = get<double>(in);
  out.grid.n_steps = get<std::uint64_t>(in);
  out.dim = get<std::uint64_t>(in);
  JumpMeasureSpec spec;
  spec.gamma = get<double>(in);
  spec.alpha = get<double>(in);
  spec.cutoff_c = get<double>(in);
  spec.cutoff_delta = get<double>(in);
  if (flags & 1u) out.jump_measure = spec;
  const auto n_jumps = get<std::uint64_t>(in);

  out.brownian.resize(out.grid.n_steps * out.dim);
  in.read(reinterpret_cast<char*>(out.brownian.data()),
          static_cast<std::streamsize>(out.brownian.size() * sizeof(double)));
  if (!in) throw std::runtime_error("read_noise: truncated increments");
  out.jumps.resize(n_jumps);
  for (auto& jump : out.jumps) {
    jump.time = get<double>(in);
    jump.mark = get<double>(in);
  }
  return out;
}

}  // namespace fracavg
