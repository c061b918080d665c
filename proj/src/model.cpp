#include "rdc/model.hpp"

#include "rdc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace rdc {

namespace {

std::string cell_name(int x, int y) {
  return "(" + std::to_string(x) + ", " + std::to_string(y) + ")";
}

template <typename T>
void require_finite_field(const BasicField<T>& f, const char* name) {
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      if (!std::isfinite(f(x, y))) {
        throw NumericalError(std::string("non-finite ") + name + " at cell " + cell_name(x, y),
                             x, y);
      }
    }
  }
}

// Kinetic residual on the u = v manifold, without the 1/epsilon factor.
double rest_residual(double u, double f, double phi, double q) {
  return u - u * u - (f * u + phi) * (u - q) / (u + q);
}

}  // namespace

template <typename T>
void BasicSimState<T>::check_extents() const {
  if (!u.same_extent(v) || !u.same_extent(phi)) {
    throw ValidationError("state: u, v and phi must share one extent");
  }
}

template <typename T>
BasicField<T> laplacian(const BasicField<T>& field, double dx) {
  if (!(dx > 0.0)) throw ValidationError("laplacian: dx must be > 0");
  require_finite_field(field, "value");
  const T inv_dx2 = static_cast<T>(1.0 / (dx * dx));
  const int w = field.width();
  const int h = field.height();
  BasicField<T> out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const T n = field(x, std::max(y - 1, 0));
      const T s = field(x, std::min(y + 1, h - 1));
      const T e = field(std::min(x + 1, w - 1), y);
      const T west = field(std::max(x - 1, 0), y);
      out(x, y) = five_point(field(x, y), n, s, e, west, inv_dx2);
    }
  }
  return out;
}

SteadyState steady_state(const OregonatorParams& params, double phi) {
  params.validate();
  const double f = params.f;
  const double q = params.q;
  const auto g = [&](double u) { return rest_residual(u, f, phi, q); };

  // g(0+) = phi > 0; walk up to the first sign change.
  constexpr int kScan = 10000;
  double lo = 0.0;
  double hi = -1.0;
  for (int i = 1; i <= kScan; ++i) {
    const double u = static_cast<double>(i) / kScan;
    if (g(u) <= 0.0) {
      hi = u;
      break;
    }
    lo = u;
  }
  if (hi < 0.0) {
    throw ValidationError("steady_state: kinetics have no rest state in (0, 1) for phi=" +
                          std::to_string(phi) + "; review parameters");
  }
  if (g(hi) == 0.0) return {hi, hi};
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) {
      lo = hi = mid;
      break;
    }
    (gm > 0.0 ? lo : hi) = mid;
  }
  const double root = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
  return {root, root};
}

template <typename T>
BasicSimState<T> quiescent_state(const BasicField<T>& phi, const OregonatorParams& params) {
  const SteadyState rest = steady_state(params, params.phi_active);
  BasicSimState<T> s{BasicField<T>(phi.width(), phi.height(), static_cast<T>(rest.u)),
                     BasicField<T>(phi.width(), phi.height(), static_cast<T>(rest.v)), phi, 0};
  return s;
}

template <typename T>
void apply_stimulus(BasicSimState<T>& state, Pixel centre, int radius) {
  if (radius < 0) throw ValidationError("stimulus: radius must be >= 0");
  const long long r2 = static_cast<long long>(radius) * radius;
  const int x0 = std::max(centre.x - radius, 0);
  const int x1 = std::min(centre.x + radius, state.width() - 1);
  const int y0 = std::max(centre.y - radius, 0);
  const int y1 = std::min(centre.y + radius, state.height() - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const long long dx = x - centre.x;
      const long long dy = y - centre.y;
      if (dx * dx + dy * dy <= r2) state.u(x, y) = T(1);
    }
  }
}

template <typename T>
void require_finite(const BasicSimState<T>& state) {
  require_finite_field(state.u, "u");
  require_finite_field(state.v, "v");
}

template <typename T>
Integrator<T>::Integrator(BasicSimState<T> initial, const OregonatorParams& params,
                          KernelKind kernel, int threads)
    : state_(std::move(initial)),
      scratch_(state_),
      params_(params),
      coeffs_(ModelCoefficients<T>::from(params)),
      kernel_(kernel),
      threads_(threads) {
  params_.validate();
  state_.check_extents();
}

template <typename T>
void Integrator<T>::set_params(const OregonatorParams& params) {
  params.validate();
  params_ = params;
  coeffs_ = ModelCoefficients<T>::from(params);
}

template <typename T>
void Integrator<T>::step_once() {
  if (!scratch_.u.same_extent(state_.u)) scratch_ = state_;
  const bool finite = kernel_ == KernelKind::reference
                          ? kernels::step_reference(state_, scratch_, coeffs_)
                          : kernels::step_parallel(state_, scratch_, coeffs_, threads_);
  std::swap(state_.u, scratch_.u);
  std::swap(state_.v, scratch_.v);
  state_.step = scratch_.step;
  if (!finite) {
    const std::int64_t at = state_.step;
    try {
      require_finite(state_);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " after step " + std::to_string(at), e.x(),
                           e.y());
    }
  }
}

template <typename T>
void Integrator<T>::advance(std::int64_t n_steps) {
  if (n_steps < 0) throw ValidationError("run: n_steps must be >= 0");
  for (std::int64_t i = 0; i < n_steps; ++i) step_once();
}

template <typename T>
void Integrator<T>::advance(std::int64_t n_steps,
                            const std::function<void(const BasicSimState<T>&)>& observer,
                            std::int64_t observer_stride) {
  if (n_steps < 0) throw ValidationError("run: n_steps must be >= 0");
  for (std::int64_t i = 0; i < n_steps; ++i) {
    step_once();
    if (observer && observer_stride > 0 && state_.step % observer_stride == 0) observer(state_);
  }
}

template <typename T>
BasicSimState<T> step(const BasicSimState<T>& state, const OregonatorParams& params,
                      KernelKind kernel, int threads) {
  Integrator<T> integrator(state, params, kernel, threads);
  integrator.advance(1);
  return integrator.state();
}

template <typename T>
BasicSimState<T> run(BasicSimState<T> state, const OregonatorParams& params,
                     std::int64_t n_steps, const RunOptions<T>& options) {
  if (n_steps < 0) throw ValidationError("run: n_steps must be >= 0");
  Integrator<T> integrator(std::move(state), params, options.kernel, options.threads);
  integrator.advance(n_steps, options.observer, options.observer_stride);
  return integrator.state();
}

#define RDC_INSTANTIATE(T)                                                                  \
  template struct BasicSimState<T>;                                                         \
  template BasicField<T> laplacian(const BasicField<T>&, double);                           \
  template BasicSimState<T> quiescent_state(const BasicField<T>&, const OregonatorParams&); \
  template void apply_stimulus(BasicSimState<T>&, Pixel, int);                              \
  template void require_finite(const BasicSimState<T>&);                                    \
  template class Integrator<T>;                                                             \
  template BasicSimState<T> step(const BasicSimState<T>&, const OregonatorParams&,          \
                                 KernelKind, int);                                          \
  template BasicSimState<T> run(BasicSimState<T>, const OregonatorParams&, std::int64_t,    \
                                const RunOptions<T>&);

RDC_INSTANTIATE(float)
RDC_INSTANTIATE(double)

#undef RDC_INSTANTIATE

}  // namespace rdc
