#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "bbpd/error.hpp"

namespace bbpd {

enum class DimensionMode { OneD, PlaneStress, PlaneStrain, ThreeD };

inline int spatial_dimension(DimensionMode mode) {
    switch (mode) {
        case DimensionMode::OneD: return 1;
        case DimensionMode::PlaneStress:
        case DimensionMode::PlaneStrain: return 2;
        case DimensionMode::ThreeD: return 3;
    }
    return 0;
}

inline std::string to_string(DimensionMode mode) {
    switch (mode) {
        case DimensionMode::OneD: return "1d";
        case DimensionMode::PlaneStress: return "plane_stress";
        case DimensionMode::PlaneStrain: return "plane_strain";
        case DimensionMode::ThreeD: return "3d";
    }
    return "?";
}

struct MaterialParams {
    double youngs_modulus = 0.0;  // Pa
    double density = 0.0;         // kg/m^3
    DimensionMode mode = DimensionMode::PlaneStress;
    double thickness = 0.0;       // m, 2D modes
    double cross_section = 0.0;   // m^2, 1D mode
    double horizon = 0.0;         // m

    bool operator==(const MaterialParams&) const = default;
};

/// Micromodulus of the bond-based model for the given dimension mode (Pa/m^4).
inline double bond_constant(const MaterialParams& mat) {
    if (!(mat.youngs_modulus > 0.0)) throw SetupError("Young's modulus must be positive");
    if (!(mat.horizon > 0.0)) throw SetupError("horizon must be positive");
    const double E = mat.youngs_modulus;
    const double d = mat.horizon;
    constexpr double pi = std::numbers::pi;
    switch (mat.mode) {
        case DimensionMode::OneD:
            if (!(mat.cross_section > 0.0)) throw SetupError("1D mode requires a cross-section area");
            return 2.0 * E / (pi * d * d * mat.cross_section);
        case DimensionMode::PlaneStress:
            if (!(mat.thickness > 0.0)) throw SetupError("plane stress requires a thickness");
            return 9.0 * E / (pi * d * d * d * mat.thickness);
        case DimensionMode::PlaneStrain:
            if (!(mat.thickness > 0.0)) throw SetupError("plane strain requires a thickness");
            return 48.0 * E / (5.0 * pi * d * d * d * mat.thickness);
        case DimensionMode::ThreeD:
            return 12.0 * E / (pi * d * d * d * d);
    }
    throw SetupError("unknown dimension mode");
}

/// Continuous bond degradation: full strength up to `onset`, smooth tanh
/// softening between `onset` and `critical`, zero beyond.
struct DamageLaw {
    double onset = 0.0;     // s_m
    double critical = 0.0;  // s_c
    double rate = 0.0;      // beta
    bool irreversible = true;

    bool operator==(const DamageLaw&) const = default;

    void validate() const {
        if (!(onset > 0.0) || !(critical > onset))
            throw SetupError("damage law requires 0 < onset stretch < critical stretch");
        if (!(rate >= 0.0)) throw SetupError("degradation rate must be non-negative");
    }

    double band_argument(double s) const {
        return rate * (onset + critical - 2.0 * s) / (onset - critical);
    }
};

/// Degradation factor T_s(s). Note the middle branch does not meet the outer
/// branches: the jump at each edge is (1 - tanh(rate)) / 2.
inline double degradation(double s, const DamageLaw& law) {
    if (s <= law.onset) return 1.0;
    if (s >= law.critical) return 0.0;
    return 0.5 * (1.0 - std::tanh(law.band_argument(s)));
}

/// dT_s/ds: nonzero only strictly inside the degradation band.
inline double degradation_slope(double s, const DamageLaw& law) {
    if (s <= law.onset || s >= law.critical) return 0.0;
    const double t = std::tanh(law.band_argument(s));
    return law.rate / (law.onset - law.critical) * (1.0 - t * t);
}

/// Degradation evaluated against the bond history. A null law means no damage.
inline double degradation(double s, double s_max, const std::optional<DamageLaw>& law) {
    if (!law) return 1.0;
    const double s_hat = law->irreversible ? std::max(s, s_max) : s;
    return degradation(s_hat, *law);
}

/// Slope used by the tangent: unloading bonds (s below their history maximum)
/// sit on a constant T_s and contribute no slope term.
inline double degradation_slope(double s, double s_max, const std::optional<DamageLaw>& law) {
    if (!law) return 0.0;
    if (law->irreversible && s < s_max) return 0.0;
    return degradation_slope(s, *law);
}

}  // namespace bbpd
