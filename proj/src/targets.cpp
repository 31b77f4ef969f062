#include "chartnet/targets.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chartnet/errors.hpp"
#include "chartnet/expr.hpp"

namespace chartnet {

TargetFunction resolve_target(const std::string& id, const Manifold& manifold) {
  TargetFunction f;
  f.id = id;
  if (id == "x1" || id == "x2") {
    const int coord = id == "x1" ? 0 : 1;
    if (manifold.ambient_dim <= coord) throw PreconditionError("ambient dimension too small");
    f.evaluator = [coord](const Eigen::VectorXd& x) { return x[coord]; };
    f.smoothness_s = 1;
    f.alpha = 1.0;
    f.sup_norm = manifold.coord_bound();
    return f;
  }
  if (id == "x1x2") {
    if (manifold.ambient_dim < 2) throw PreconditionError("ambient dimension too small");
    f.evaluator = [](const Eigen::VectorXd& x) { return x[0] * x[1]; };
    f.smoothness_s = 1;
    f.alpha = 1.0;
    const double b = manifold.coord_bound();
    f.sup_norm = b * b;
    return f;
  }
  if (id == "sin_angle") {
    if (manifold.kind != ManifoldKind::Circle)
      throw PreconditionError("sin_angle target is defined on the circle");
    // Intrinsic angle of the canonical embedding; its sine equals x2 / radius
    // on the circle itself.
    f.evaluator = [](const Eigen::VectorXd& x) { return std::sin(std::atan2(x[1], x[0])); };
    f.smoothness_s = 1;
    f.alpha = 1.0;
    f.sup_norm = 1.0;
    return f;
  }
  if (id == "zero") {
    f.evaluator = [](const Eigen::VectorXd&) { return 0.0; };
    f.smoothness_s = 1;
    f.alpha = 1.0;
    f.sup_norm = 1e-12;
    return f;
  }

  std::ifstream in(id, std::ios::binary);
  if (!in) throw PreconditionError("unknown target '" + id + "' (not built in, not a file)");
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("target spec is not valid JSON: ") + e.what());
  }
  try {
    const Expression expr = Expression::parse(doc.at("expr").get<std::string>());
    if (expr.max_coordinate() > manifold.ambient_dim)
      throw PreconditionError("target expression references coordinates beyond ambient_dim");
    f.evaluator = [expr](const Eigen::VectorXd& x) { return expr.eval(x); };
    f.smoothness_s = doc.value("s", 1);
    f.alpha = doc.value("alpha", 1.0);
    f.sup_norm = doc.value("sup_norm", 1.0);
    f.holder_scale = doc.value("holder_scale", 0.0);
    if (f.smoothness_s < 1 || !(f.alpha > 0.0 && f.alpha <= 1.0))
      throw PreconditionError("target smoothness must satisfy s >= 1, alpha in (0,1]");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed target spec: ") + e.what());
  }
}

}  // namespace chartnet
