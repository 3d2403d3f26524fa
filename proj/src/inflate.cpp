#include "stcw/inflate.hpp"

#include <cmath>
#include <iomanip>

namespace stcw {

std::string method_name(InflateMethod m) {
    switch (m) {
        case InflateMethod::IA: return "ia";
        case InflateMethod::IS: return "is";
        case InflateMethod::ZWI: return "zwi";
        case InflateMethod::NWI: return "nwi";
    }
    throw ValidationError("unknown inflation method");
}

InflateMethod method_from_name(const std::string& name) {
    if (name == "ia") return InflateMethod::IA;
    if (name == "is") return InflateMethod::IS;
    if (name == "zwi") return InflateMethod::ZWI;
    if (name == "nwi") return InflateMethod::NWI;
    throw ValidationError("unknown inflation method '" + name + "' (expected ia|is|zwi|nwi)");
}

void AlphaProfile::validate() const {
    if (temporal_size == 0) throw ValidationError("alpha profile: T must be >= 1");
    if (alphas.size() != temporal_size)
        throw ValidationError("alpha profile: alpha count does not match T");
    if (positive_index < 1 || positive_index > temporal_size)
        throw ValidationError("alpha profile: t0 out of range");
    double sum = 0.0;
    for (double a : alphas) {
        if (!std::isfinite(a)) throw ValidationError("alpha profile: non-finite alpha");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ValidationError("alpha profile: alphas must sum to 1");
}

AlphaProfile make_alphas(InflateMethod method, std::size_t temporal_size, std::size_t t0,
                         Rng* rng) {
    if (temporal_size == 0) throw ValidationError("make_alphas: T must be >= 1");
    if (t0 < 1 || t0 > temporal_size) throw ValidationError("make_alphas: t0 out of range");
    AlphaProfile p;
    p.method = method;
    p.temporal_size = temporal_size;
    p.positive_index = t0;
    const double t_real = static_cast<double>(temporal_size);
    switch (method) {
        case InflateMethod::IA:
            p.alphas.assign(temporal_size, 1.0 / t_real);
            break;
        case InflateMethod::IS:
            if (temporal_size == 1) {
                p.alphas = {1.0};
            } else if (temporal_size == 2) {
                p.alphas = {0.5, 0.5};  // tuned preset
            } else if (temporal_size == 3) {
                p.alphas = {0.25, 0.5, 0.25};  // tuned preset
            } else {
                if (!rng) throw ValidationError("make_alphas: IS with T > 3 needs an rng");
                // Normalized i.i.d. exponentials (flat Dirichlet): positive, sum 1.
                double sum = 0.0;
                p.alphas.resize(temporal_size);
                for (double& a : p.alphas) {
                    double u = rng->next_unit();
                    while (u <= 0.0) u = rng->next_unit();
                    a = -std::log(u);
                    sum += a;
                }
                for (double& a : p.alphas) a /= sum;
                // Renormalize the residual rounding into the largest entry so the
                // sum is exact in f64.
                double s = 0.0;
                for (double a : p.alphas) s += a;
                std::size_t big = 0;
                for (std::size_t i = 1; i < temporal_size; ++i)
                    if (p.alphas[i] > p.alphas[big]) big = i;
                p.alphas[big] += 1.0 - s;
            }
            break;
        case InflateMethod::ZWI:
            p.alphas.assign(temporal_size, 0.0);
            p.alphas[t0 - 1] = 1.0;
            break;
        case InflateMethod::NWI:
            p.alphas.assign(temporal_size, -1.0 / t_real);
            p.alphas[t0 - 1] = (2.0 * t_real - 1.0) / t_real;
            break;
    }
    p.validate();
    return p;
}

std::string InflationReport::to_text() const {
    std::ostringstream os;
    for (const LayerInflationRecord& rec : conv_layers) {
        os << "layer=" << rec.layer << " method=" << method_name(rec.method)
           << " T=" << rec.temporal_size << " alphas=";
        os << std::fixed << std::setprecision(6);
        for (std::size_t i = 0; i < rec.alphas.size(); ++i) {
            if (i) os << ",";
            os << rec.alphas[i];
        }
        os << std::scientific << std::setprecision(3) << " residual=" << rec.residual << "\n";
        os.unsetf(std::ios::floatfield);
    }
    for (const std::string& name : reinitialized_layers)
        os << "reinitialized=" << name << "\n";
    return os.str();
}

std::map<std::string, ConvInflationPlan> default_plan(const NetSpec& spec2d, InflateMethod method,
                                                      std::size_t t0) {
    std::map<std::string, ConvInflationPlan> plan;
    bool first = true;
    for (const LayerSpec& layer : spec2d.layers) {
        if (layer.kind != LayerKind::Conv2d) continue;
        ConvInflationPlan p;
        p.method = method;
        p.temporal_size = first ? 3 : 2;
        p.t0 = std::min(t0, p.temporal_size);
        plan[layer.name] = p;
        first = false;
    }
    return plan;
}

}  // namespace stcw
