#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace rdc {

/**
 * Two-variable Oregonator parameters plus the discretisation.
 *
 * Defaults are the excitable BZ regime: eps=0.0243, f=1.4, phi_active=0.054,
 * phi_passive=0.0975, q=0.002, D_u=0.45, dt=0.001, dx=0.25.
 */
struct OregonatorParams {
  double epsilon = 0.0243;
  double f = 1.4;
  double phi_active = 0.054;
  double phi_passive = 0.0975;
  double q = 0.002;
  double d_u = 0.45;
  double dt = 0.001;
  double dx = 0.25;

  /// dt * d_u / dx^2; must stay below 0.25 for the explicit scheme.
  double diffusion_number() const { return dt * d_u / (dx * dx); }

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  bool operator==(const OregonatorParams&) const = default;
};

/// Field names in canonical order, shared by serialisers and set_param.
inline constexpr std::array<std::string_view, 8> kParamNames = {
    "epsilon", "f", "phi_active", "phi_passive", "q", "d_u", "dt", "dx"};

/// Pointer-to-member lookup by name; nullopt for unknown names.
std::optional<double OregonatorParams::*> param_member(std::string_view name);

/// Validated construction: returns params with `name` replaced by `value`.
OregonatorParams with_param(const OregonatorParams& base, std::string_view name,
                            double value);

enum class Precision { f32 = 32, f64 = 64 };

}  // namespace rdc
