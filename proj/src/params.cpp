#include "rdc/params.hpp"

#include "rdc/errors.hpp"

#include <cmath>
#include <string>

namespace rdc {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError("params: " + message);
}

}  // namespace

void OregonatorParams::validate() const {
  for (auto name : kParamNames) {
    const double value = this->*(*param_member(name));
    require(std::isfinite(value) && value > 0.0,
            std::string(name) + " must be finite and > 0 (got " +
                std::to_string(value) + ")");
  }
  require(phi_passive > phi_active, "phi_passive must exceed phi_active");
  require(q < 1.0, "q must be < 1");
  require(diffusion_number() < 0.25,
          "dt*d_u/dx^2 = " + std::to_string(diffusion_number()) +
              " violates the explicit stability bound 0.25");
}

std::optional<double OregonatorParams::*> param_member(std::string_view name) {
  if (name == "epsilon") return &OregonatorParams::epsilon;
  if (name == "f") return &OregonatorParams::f;
  if (name == "phi_active") return &OregonatorParams::phi_active;
  if (name == "phi_passive") return &OregonatorParams::phi_passive;
  if (name == "q") return &OregonatorParams::q;
  if (name == "d_u") return &OregonatorParams::d_u;
  if (name == "dt") return &OregonatorParams::dt;
  if (name == "dx") return &OregonatorParams::dx;
  return std::nullopt;
}

OregonatorParams with_param(const OregonatorParams& base, std::string_view name,
                            double value) {
  auto member = param_member(name);
  if (!member) throw ValidationError("params: unknown parameter '" + std::string(name) + "'");
  OregonatorParams out = base;
  out.*(*member) = value;
  out.validate();
  return out;
}

}  // namespace rdc
