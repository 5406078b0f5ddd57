#pragma once

#include <string>

namespace thermobem {

// Physical constants of the isotropic thermoelastic medium. Immutable after
// construction; construction enforces the admissibility inequalities.
struct Material {
    double rho;    // mass density, > 0
    double lambda; // first Lame constant
    double mu;     // second Lame constant, > 0
    double gamma;  // thermo-mechanical coupling (stress per unit temperature)
    double eta;    // thermo-mechanical coupling in the energy equation
    double kappa;  // thermal diffusivity, > 0
};

struct DerivedConstants {
    double epsilon; // dimensionless coupling gamma*eta*kappa/(lambda+2 mu)
    double c_s;     // shear phase velocity sqrt(mu)
    double c_p;     // longitudinal phase velocity sqrt(lambda+2 mu)
    bool epsilon_warning; // set when epsilon >= 1 (unusual but allowed)
};

// Throws ConstraintViolation naming the first failed inequality.
Material validate_material(double rho, double lambda, double mu,
                           double gamma, double eta, double kappa);

DerivedConstants derive_constants(const Material& m);

Material material_from_json(const std::string& text);
std::string material_to_json(const Material& m);

} // namespace thermobem
