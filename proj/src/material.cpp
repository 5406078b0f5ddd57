#include "thermobem/material.hpp"

#include <cmath>
#include <sstream>

#include "thermobem/errors.hpp"
#include "json.hpp"

namespace thermobem {

Material validate_material(double rho, double lambda, double mu,
                           double gamma, double eta, double kappa) {
    const double vals[6] = {rho, lambda, mu, gamma, eta, kappa};
    for (double v : vals)
        if (!std::isfinite(v)) throw ConstraintViolation("non-finite material constant");
    if (!(rho > 0.0)) throw ConstraintViolation("rho > 0");
    if (!(mu > 0.0)) throw ConstraintViolation("mu > 0");
    if (!(3.0 * lambda + 2.0 * mu > 0.0)) throw ConstraintViolation("3*lambda + 2*mu > 0");
    if (!(gamma / eta > 0.0)) throw ConstraintViolation("gamma/eta > 0");
    if (!(kappa > 0.0)) throw ConstraintViolation("kappa > 0");
    return Material{rho, lambda, mu, gamma, eta, kappa};
}

DerivedConstants derive_constants(const Material& m) {
    DerivedConstants d;
    d.epsilon = m.gamma * m.eta * m.kappa / (m.lambda + 2.0 * m.mu);
    d.c_s = std::sqrt(m.mu);
    d.c_p = std::sqrt(m.lambda + 2.0 * m.mu);
    d.epsilon_warning = d.epsilon >= 1.0;
    return d;
}

Material material_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    for (const char* key : {"rho", "lambda", "mu", "gamma", "eta", "kappa"})
        if (!j.contains(key))
            throw ConstraintViolation(std::string("missing material field \"") + key + "\"");
    return validate_material(j["rho"].get<double>(), j["lambda"].get<double>(),
                             j["mu"].get<double>(), j["gamma"].get<double>(),
                             j["eta"].get<double>(), j["kappa"].get<double>());
}

std::string material_to_json(const Material& m) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"rho\":" << m.rho << ",\"lambda\":" << m.lambda << ",\"mu\":" << m.mu
       << ",\"gamma\":" << m.gamma << ",\"eta\":" << m.eta << ",\"kappa\":" << m.kappa << "}";
    return os.str();
}

} // namespace thermobem
