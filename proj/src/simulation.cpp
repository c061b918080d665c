#include "rdc/simulation.hpp"

#include "rdc/digest.hpp"
#include "rdc/errors.hpp"

#include <algorithm>
#include <limits>

namespace rdc {

namespace {

template <typename T>
BasicSimState<T> initial_state(const Scenario& s, const SubstrateMask& mask) {
  BasicField<T> phi = phi_field<T>(mask, s.params);
  if (s.initial_state == InitialState::zero) {
    return {BasicField<T>(s.width, s.height), BasicField<T>(s.width, s.height), std::move(phi), 0};
  }
  return quiescent_state(phi, s.params);
}

std::int64_t next_multiple(std::int64_t step, std::int64_t k) { return (step / k + 1) * k; }

}  // namespace

template <typename T>
BasicSimulation<T>::BasicSimulation(const Scenario& scenario, int threads, KernelKind kernel)
    : mask_(scenario.build_mask()),
      integrator_(initial_state<T>(scenario, mask_), scenario.params, kernel, threads),
      latch_(scenario.detectors, scenario.detector_stride) {
  if (scenario.timelapse_stride) timelapse_start(*scenario.timelapse_stride);
}

template <typename T>
void BasicSimulation<T>::stimulate(Pixel center, int radius) {
  apply_stimulus(integrator_.state(), center, radius);
}

template <typename T>
void BasicSimulation<T>::apply_stroke(const StrokeSpec& stroke) {
  const std::vector<Pixel> touched = mask_.apply_stroke(stroke);
  const T value = static_cast<T>(stroke.mode == StrokeMode::add ? params().phi_passive
                                                                : params().phi_active);
  BasicField<T>& phi = integrator_.state().phi;
  for (const Pixel& p : touched) phi(p.x, p.y) = value;
}

template <typename T>
void BasicSimulation<T>::set_param(std::string_view name, double value) {
  const OregonatorParams next = with_param(params(), name, value);
  integrator_.set_params(next);
  if (name == "phi_active" || name == "phi_passive") {
    integrator_.state().phi = phi_field<T>(mask_, next);
  }
}

template <typename T>
void BasicSimulation<T>::observe() {
  const std::int64_t s = step();
  if (s == observed_step_) return;
  observed_step_ = s;
  if (s % latch_.stride() == 0) latch_.sample(state());
  if (timelapse_ && s % timelapse_->sample_stride() == 0) timelapse_->record(state());
}

template <typename T>
void BasicSimulation<T>::advance_to(std::int64_t target) {
  if (target < step()) throw ValidationError("advance_to: target lies in the past");
  while (step() < target) {
    observe();
    std::int64_t next = std::min(target, next_multiple(step(), latch_.stride()));
    if (timelapse_) next = std::min(next, next_multiple(step(), timelapse_->sample_stride()));
    integrator_.advance(next - step());
  }
}

template <typename T>
void BasicSimulation<T>::timelapse_start(std::int64_t stride) {
  timelapse_.emplace(mask_.width(), mask_.height(), stride);
  // Re-arm observation so a start on a due boundary records it.
  if (observed_step_ == step() && step() % stride == 0) timelapse_->record(state());
}

template <typename T>
void BasicSimulation<T>::timelapse_stop() {
  timelapse_.reset();
}

template class BasicSimulation<float>;
template class BasicSimulation<double>;

std::variant<BasicSimulation<float>, BasicSimulation<double>> make_simulation(
    const Scenario& scenario, int threads, KernelKind kernel) {
  scenario.validate();
  if (scenario.precision == Precision::f64) {
    return BasicSimulation<double>(scenario, threads, kernel);
  }
  return BasicSimulation<float>(scenario, threads, kernel);
}

Simulation::Simulation(const Scenario& scenario, int threads, KernelKind kernel)
    : scenario_(scenario), impl_(make_simulation(scenario, threads, kernel)) {}

std::int64_t Simulation::step() const {
  return std::visit([](const auto& s) { return s.step(); }, impl_);
}

const SubstrateMask& Simulation::mask() const {
  return std::visit([](const auto& s) -> const SubstrateMask& { return s.mask(); }, impl_);
}

const OregonatorParams& Simulation::params() const {
  return std::visit([](const auto& s) -> const OregonatorParams& { return s.params(); }, impl_);
}

const DetectorOutcomes& Simulation::outcomes() const {
  return std::visit([](const auto& s) -> const DetectorOutcomes& { return s.outcomes(); }, impl_);
}

void Simulation::stimulate(Pixel center, int radius) {
  std::visit([&](auto& s) { s.stimulate(center, radius); }, impl_);
}

void Simulation::apply_stroke(const StrokeSpec& stroke) {
  std::visit([&](auto& s) { s.apply_stroke(stroke); }, impl_);
}

void Simulation::set_param(std::string_view name, double value) {
  std::visit([&](auto& s) { s.set_param(name, value); }, impl_);
}

void Simulation::advance_to(std::int64_t target) {
  std::visit([&](auto& s) { s.advance_to(target); }, impl_);
}

void Simulation::observe() {
  std::visit([](auto& s) { s.observe(); }, impl_);
}

void Simulation::timelapse_start(std::int64_t stride) {
  std::visit([&](auto& s) { s.timelapse_start(stride); }, impl_);
}

void Simulation::timelapse_stop() {
  std::visit([](auto& s) { s.timelapse_stop(); }, impl_);
}

bool Simulation::timelapse_active() const {
  return std::visit([](const auto& s) { return s.timelapse().has_value(); }, impl_);
}

RGBImage Simulation::timelapse_image() const {
  return std::visit(
      [](const auto& s) {
        if (!s.timelapse()) throw ValidationError("no timelapse is being recorded");
        return render_timelapse(*s.timelapse(), s.mask());
      },
      impl_);
}

RGBImage Simulation::snapshot() const {
  return std::visit([](const auto& s) { return s.snapshot(); }, impl_);
}

std::string Simulation::checksum() const {
  return std::visit([](const auto& s) { return s.checksum(); }, impl_);
}

Simulation::Extrema Simulation::extrema() const {
  return std::visit(
      [](const auto& s) {
        const auto u = s.state().u.values();
        const auto v = s.state().v.values();
        const auto [u0, u1] = std::minmax_element(u.begin(), u.end());
        const auto [v0, v1] = std::minmax_element(v.begin(), v.end());
        return Extrema{static_cast<double>(*u0), static_cast<double>(*u1),
                       static_cast<double>(*v0), static_cast<double>(*v1)};
      },
      impl_);
}

}  // namespace rdc
