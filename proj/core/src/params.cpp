#include "unravel/params.hpp"

#include <cmath>
#include <string>

namespace unravel {

double SystemParams::drive_strength() const {
    return 2.0 * std::sqrt(2.0) * omega / gamma;
}

SystemParams SystemParams::from_drive_strength(double Y) {
    if (Y < 0.0) throw param_error("drive strength Y must be >= 0");
    SystemParams p;
    p.omega = Y / (2.0 * std::sqrt(2.0));
    return p;
}

void SystemParams::validate() const {
    if (!(gamma > 0.0)) throw param_error("gamma must be > 0");
    if (gamma != 1.0) throw param_error("internal units require gamma == 1");
    if (omega < 0.0) throw param_error("omega must be >= 0");
    if (efficiency < 0.0 || efficiency > 1.0)
        throw param_error("efficiency must lie in [0,1], got " + std::to_string(efficiency));
    if (nbar < 0.0) throw param_error("nbar must be >= 0");
    if (!(dt > 0.0)) throw param_error("dt must be > 0");
    if (t_max < dt) throw param_error("t_max must be >= dt");
    if (!std::isfinite(detuning)) throw param_error("detuning must be finite");
}

} // namespace unravel
