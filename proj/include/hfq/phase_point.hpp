#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "hfq/errors.hpp"

namespace hfq {

enum class Bundle { Tangent, Cotangent };

inline const char* bundle_name(Bundle b) { return b == Bundle::Tangent ? "tangent" : "cotangent"; }

// Fiber coordinate prefix: y on TM, p on T*M.
inline char fiber_letter(Bundle b) { return b == Bundle::Tangent ? 'y' : 'p'; }

struct PhasePoint {
  Eigen::VectorXd base;
  Eigen::VectorXd fiber;
  Bundle bundle = Bundle::Cotangent;

  PhasePoint() = default;
  PhasePoint(Eigen::VectorXd x, Eigen::VectorXd f, Bundle b) : base(std::move(x)), fiber(std::move(f)), bundle(b) {
    if (base.size() != fiber.size() || base.size() == 0)
      throw InputError("phase point needs equal, non-zero base and fiber dimensions");
  }

  int n() const { return static_cast<int>(base.size()); }
  int dim() const { return 2 * n(); }

  // (x^1..x^n, fiber_1..fiber_n)
  Eigen::VectorXd coords() const {
    Eigen::VectorXd u(dim());
    u << base, fiber;
    return u;
  }
  static PhasePoint from_coords(const Eigen::VectorXd& u, Bundle b) {
    const int n = static_cast<int>(u.size() / 2);
    return PhasePoint(u.head(n), u.tail(n), b);
  }
};

}  // namespace hfq
