#pragma once

#include <span>
#include <sstream>
#include <stdexcept>
#include <string>

namespace clv {

// Invalid construction parameters or invalid run configuration.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A field produced NaN/Inf at a queried point, or a stencil left the domain.
class EvaluationError : public std::runtime_error {
  public:
    EvaluationError(const std::string& what, std::span<const double> point)
        : std::runtime_error(what + " at " + format_point(point)),
          point_(point.begin(), point.end()) {}

    const std::vector<double>& point() const { return point_; }

  private:
    static std::string format_point(std::span<const double> p) {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
        os << ")";
        return os.str();
    }

    std::vector<double> point_;
};

}  // namespace clv
