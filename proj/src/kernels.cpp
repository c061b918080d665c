// Forward-Euler step kernels. Both kernels evaluate the same per-cell
// expression in the same order, so their outputs are bit-identical; the
// reference exists to check the parallel kernel's indexing and banding.

#include "rdc/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rdc::kernels {

namespace {

template <typename T>
T mirrored(const BasicField<T>& f, int x, int y) {
  x = std::clamp(x, 0, f.width() - 1);
  y = std::clamp(y, 0, f.height() - 1);
  return f(x, y);
}

}  // namespace

template <typename T>
bool step_reference(const BasicSimState<T>& in, BasicSimState<T>& out,
                    const ModelCoefficients<T>& c) {
  const BasicField<T>& u = in.u;
  bool finite = true;
  for (int y = 0; y < u.height(); ++y) {
    for (int x = 0; x < u.width(); ++x) {
      const T lap = five_point(u(x, y), mirrored(u, x, y - 1), mirrored(u, x, y + 1),
                               mirrored(u, x + 1, y), mirrored(u, x - 1, y), c.inv_dx2);
      const auto rates = reaction_terms(u(x, y), in.v(x, y), in.phi(x, y), c);
      const T un = u(x, y) + c.dt * (rates.du_dt + c.d_u * lap);
      const T vn = in.v(x, y) + c.dt * rates.dv_dt;
      out.u(x, y) = un;
      out.v(x, y) = vn;
      finite = finite && std::isfinite(un) && std::isfinite(vn);
    }
  }
  out.step = in.step + 1;
  return finite;
}

namespace {

template <typename T>
inline void update_cell(const T* up, const T* uc, const T* ud, const T* vc, const T* pc,
                        T* uo, T* vo, int x, int xw, int xe, const ModelCoefficients<T>& c,
                        T& bad) {
  const T u = uc[x];
  const T v = vc[x];
  const T lap = five_point(u, up[x], ud[x], uc[xe], uc[xw], c.inv_dx2);
  const auto rates = reaction_terms(u, v, pc[x], c);
  const T un = u + c.dt * (rates.du_dt + c.d_u * lap);
  const T vn = v + c.dt * rates.dv_dt;
  uo[x] = un;
  vo[x] = vn;
  // x - x is 0 for finite x and NaN otherwise; keeps the loop vectorisable.
  bad += (un - un) + (vn - vn);
}

}  // namespace

template <typename T>
bool step_parallel(const BasicSimState<T>& in, BasicSimState<T>& out,
                   const ModelCoefficients<T>& c, int threads) {
  const int width = in.u.width();
  const int height = in.u.height();
  const T* u = in.u.values().data();
  const T* v = in.v.values().data();
  const T* phi = in.phi.values().data();
  T* uo = out.u.values().data();
  T* vo = out.v.values().data();
  T bad = 0;

#ifdef _OPENMP
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team) reduction(+ : bad)
#else
  (void)threads;
#endif
  for (int y = 0; y < height; ++y) {
    const std::ptrdiff_t row = static_cast<std::ptrdiff_t>(y) * width;
    const T* uc = u + row;
    const T* up = y > 0 ? uc - width : uc;
    const T* ud = y + 1 < height ? uc + width : uc;
    const T* vc = v + row;
    const T* pc = phi + row;
    T* urow = uo + row;
    T* vrow = vo + row;
    T local = 0;
    update_cell(up, uc, ud, vc, pc, urow, vrow, 0, 0, 1, c, local);
    for (int x = 1; x < width - 1; ++x) {
      update_cell(up, uc, ud, vc, pc, urow, vrow, x, x - 1, x + 1, c, local);
    }
    update_cell(up, uc, ud, vc, pc, urow, vrow, width - 1, width - 2, width - 1, c, local);
    bad += local;
  }
  out.step = in.step + 1;
  return bad == T(0);
}

template bool step_reference(const SimState32&, SimState32&, const ModelCoefficients<float>&);
template bool step_reference(const SimState64&, SimState64&, const ModelCoefficients<double>&);
template bool step_parallel(const SimState32&, SimState32&, const ModelCoefficients<float>&, int);
template bool step_parallel(const SimState64&, SimState64&, const ModelCoefficients<double>&, int);

}  // namespace rdc::kernels
