#pragma once

#include "rdc/field.hpp"
#include "rdc/params.hpp"

#include <cstdint>
#include <functional>

namespace rdc {

/// u, v and the per-pixel excitability they evolve over.
template <typename T>
struct BasicSimState {
  BasicField<T> u;
  BasicField<T> v;
  BasicField<T> phi;
  std::int64_t step = 0;

  int width() const { return u.width(); }
  int height() const { return u.height(); }
  double time(const OregonatorParams& p) const { return static_cast<double>(step) * p.dt; }

  /// Throws ValidationError unless u, v, phi share one extent.
  void check_extents() const;

  bool operator==(const BasicSimState&) const = default;
};

using SimState32 = BasicSimState<float>;
using SimState64 = BasicSimState<double>;

/// Parameters pre-cast to the working precision. Every kernel reads these.
template <typename T>
struct ModelCoefficients {
  T inv_epsilon;
  T f;
  T q;
  T d_u;
  T dt;
  T inv_dx2;

  static ModelCoefficients from(const OregonatorParams& p) {
    return {static_cast<T>(1.0 / p.epsilon), static_cast<T>(p.f),
            static_cast<T>(p.q),             static_cast<T>(p.d_u),
            static_cast<T>(p.dt),            static_cast<T>(1.0 / (p.dx * p.dx))};
  }
};

template <typename T>
struct ReactionRates {
  T du_dt;
  T dv_dt;
};

/// Pointwise Oregonator kinetics, no diffusion.
template <typename T>
inline ReactionRates<T> reaction_terms(T u, T v, T phi, const ModelCoefficients<T>& c) {
  const T du = c.inv_epsilon * (u - u * u - (c.f * v + phi) * (u - c.q) / (u + c.q));
  return {du, u - v};
}

inline ReactionRates<double> reaction_terms(double u, double v, double phi,
                                            const OregonatorParams& p) {
  return reaction_terms(u, v, phi, ModelCoefficients<double>::from(p));
}

/// Five-point stencil value; n/s/e/w already mirrored at the boundary.
template <typename T>
inline T five_point(T centre, T n, T s, T e, T w, T inv_dx2) {
  return (n + s + e + w - T(4) * centre) * inv_dx2;
}

/// Zero-flux five-point Laplacian. Throws NumericalError on non-finite input.
template <typename T>
BasicField<T> laplacian(const BasicField<T>& field, double dx);

/// Homogeneous rest state (u*, v*), v* = u*.
struct SteadyState {
  double u;
  double v;
};

/// Smallest positive root of the kinetics on u = v, by scan plus bisection.
/// Throws ValidationError when (0, 1) holds no sign change.
SteadyState steady_state(const OregonatorParams& params, double phi);

/// Uniform (u*, v*) medium over `phi`, rest state taken at phi_active.
template <typename T>
BasicSimState<T> quiescent_state(const BasicField<T>& phi, const OregonatorParams& params);

/// Sets u = 1 on every pixel within Euclidean `radius` of `centre`; clipped to the grid.
template <typename T>
void apply_stimulus(BasicSimState<T>& state, Pixel centre, int radius);

enum class KernelKind {
  reference,  // serial composition of laplacian() and reaction_terms()
  parallel,   // fused OpenMP row-band kernel
};

namespace kernels {

/// One forward-Euler step from `in` into `out` (u and v only; phi untouched).
/// Returns false when any produced value is non-finite.
template <typename T>
bool step_reference(const BasicSimState<T>& in, BasicSimState<T>& out,
                    const ModelCoefficients<T>& c);

/// `threads` <= 0 uses the OpenMP default.
template <typename T>
bool step_parallel(const BasicSimState<T>& in, BasicSimState<T>& out,
                   const ModelCoefficients<T>& c, int threads);

}  // namespace kernels

template <typename T>
struct RunOptions {
  KernelKind kernel = KernelKind::parallel;
  int threads = 0;
  /// Called after every step whose counter is a multiple of observer_stride.
  std::function<void(const BasicSimState<T>&)> observer;
  std::int64_t observer_stride = 0;
};

/// Owns a state plus its scratch buffer and steps it in place.
template <typename T>
class Integrator {
public:
  Integrator(BasicSimState<T> initial, const OregonatorParams& params,
             KernelKind kernel = KernelKind::parallel, int threads = 0);

  /// Throws NumericalError naming the first non-finite cell.
  void advance(std::int64_t n_steps);
  void advance(std::int64_t n_steps, const std::function<void(const BasicSimState<T>&)>& observer,
               std::int64_t observer_stride);

  const BasicSimState<T>& state() const { return state_; }
  /// Mutable access between steps (stimuli, substrate edits).
  BasicSimState<T>& state() { return state_; }

  const OregonatorParams& params() const { return params_; }
  void set_params(const OregonatorParams& params);
  void set_threads(int threads) { threads_ = threads; }

private:
  void step_once();

  BasicSimState<T> state_;
  BasicSimState<T> scratch_;
  OregonatorParams params_;
  ModelCoefficients<T> coeffs_;
  KernelKind kernel_;
  int threads_;
};

/// Pure single step.
template <typename T>
BasicSimState<T> step(const BasicSimState<T>& state, const OregonatorParams& params,
                      KernelKind kernel = KernelKind::parallel, int threads = 0);

/// `n_steps` applications of step().
template <typename T>
BasicSimState<T> run(BasicSimState<T> state, const OregonatorParams& params,
                     std::int64_t n_steps, const RunOptions<T>& options = {});

/// Locates the first non-finite cell of u or v; throws NumericalError if any.
template <typename T>
void require_finite(const BasicSimState<T>& state);

}  // namespace rdc
