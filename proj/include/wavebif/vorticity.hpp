#pragma once

// Vorticity functions gamma(s) from the constant, affine and polynomial families.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "wavebif/error.hpp"

namespace wavebif {

enum class VorticityFamily { constant, affine, polynomial };

class VorticitySpec {
public:
    static VorticitySpec constant(double gamma) { return VorticitySpec(VorticityFamily::constant, {gamma}); }
    /// gamma(s) = a s + b.
    static VorticitySpec affine(double a, double b) { return VorticitySpec(VorticityFamily::affine, {b, a}); }
    /// gamma(s) = c0 + c1 s + c2 s^2 + ...
    static VorticitySpec polynomial(std::vector<double> coeffs) {
        require(!coeffs.empty(), "vorticity: polynomial needs at least one coefficient");
        return VorticitySpec(VorticityFamily::polynomial, std::move(coeffs));
    }

    /// Parses "constant:G", "affine:A,B" or "poly:c0,c1,...".
    static VorticitySpec parse(const std::string& text) {
        const auto colon = text.find(':');
        require(colon != std::string::npos, "vorticity: expected FAMILY:VALUES, got '" + text + "'");
        const std::string family = text.substr(0, colon);
        std::vector<double> values;
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(item, &used));
                require(item.find_first_not_of(" \t", used) == std::string::npos, "");
            } catch (const std::exception&) {
                throw InvalidInput("vorticity: cannot parse number '" + item + "' in '" + text + "'");
            }
            require(std::isfinite(values.back()), "vorticity: non-finite coefficient in '" + text + "'");
        }
        if (family == "constant") {
            require(values.size() == 1, "vorticity: constant takes exactly one value");
            return constant(values[0]);
        }
        if (family == "affine") {
            require(values.size() == 2, "vorticity: affine takes exactly two values A,B");
            return affine(values[0], values[1]);
        }
        if (family == "poly") return polynomial(values);
        throw InvalidInput("vorticity: unknown family '" + family + "'");
    }

    VorticityFamily family() const { return family_; }
    const std::vector<double>& coefficients() const { return c_; }

    /// Slope a and offset b for the affine view of the constant and affine families.
    double affine_a() const { return c_.size() > 1 ? c_[1] : 0.0; }
    double affine_b() const { return c_[0]; }

    bool is_identically_zero() const {
        for (double c : c_) if (c != 0.0) return false;
        return true;
    }
    bool has_zero_second_derivative() const {
        for (std::size_t i = 2; i < c_.size(); ++i) if (c_[i] != 0.0) return false;
        return true;
    }

    double gamma(double s) const { return horner(0, s); }
    double gamma_prime(double s) const { return horner(1, s); }
    double gamma_second(double s) const { return horner(2, s); }

    /// Antiderivative with value 0 at s = 0.
    double gamma_integral(double s) const {
        double r = 0.0;
        for (std::size_t i = c_.size(); i-- > 0;) r = r * s + c_[i] / static_cast<double>(i + 1);
        return r * s;
    }

    std::string to_string() const {
        std::ostringstream os;
        os.precision(17);
        switch (family_) {
            case VorticityFamily::constant: os << "constant:" << c_[0]; break;
            case VorticityFamily::affine: os << "affine:" << c_[1] << ',' << c_[0]; break;
            case VorticityFamily::polynomial:
                os << "poly:";
                for (std::size_t i = 0; i < c_.size(); ++i) os << (i ? "," : "") << c_[i];
                break;
        }
        return os.str();
    }

private:
    VorticitySpec(VorticityFamily family, std::vector<double> c) : family_(family), c_(std::move(c)) {}

    double horner(int order, double s) const {
        double r = 0.0;
        for (std::size_t i = c_.size(); i-- > static_cast<std::size_t>(order);) {
            double factor = 1.0;
            for (int d = 0; d < order; ++d) factor *= static_cast<double>(i - d);
            r = r * s + factor * c_[i];
        }
        return r;
    }

    VorticityFamily family_;
    std::vector<double> c_;
};

}  // namespace wavebif
