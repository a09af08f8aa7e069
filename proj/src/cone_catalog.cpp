#include "conic_lmcf/cone_catalog.hpp"

#include <cmath>

#include "conic_lmcf/errors.hpp"

namespace conic_lmcf {

SLCone make_catalog_cone(std::string_view name) {
  if (name == "hl-torus-3") {
    // (e^{i phi1}, e^{i phi2}, e^{-i (phi1 + phi2)}) / sqrt 3
    const double s = 1.0 / std::sqrt(3.0);
    using Term = TrigMonomialEmbedding::Term;
    std::vector<std::vector<Term>> coords{
        {{s, Eigen::Vector2i(1, 0)}},
        {{s, Eigen::Vector2i(0, 1)}},
        {{s, Eigen::Vector2i(-1, -1)}},
    };
    auto emb = std::make_shared<TrigMonomialEmbedding>(2, std::move(coords));
    SLCone cone;
    cone.name = "hl-torus-3";
    cone.m = 3;
    cone.link = FlatTorus{induced_torus_metric(*emb, 2)};
    cone.embedding = emb;
    cone.phase_theta = 0.0;
    cone.dim_G = 2;  // diagonal maximal torus of SU(3)
    return cone;
  }
  if (name == "plane-3") {
    SLCone cone;
    cone.name = "plane-3";
    cone.m = 3;
    cone.link = RoundSphere{2};
    cone.embedding = std::make_shared<RealPlaneEmbedding>(3);
    cone.phase_theta = 0.0;
    cone.dim_G = 3;  // SO(3)
    return cone;
  }
  throw InvalidInput("unknown cone '" + std::string(name) + "'");
}

std::vector<std::string> catalog_cone_names() { return {"hl-torus-3", "plane-3"}; }

SLCone cone_from_json(const nlohmann::json& spec) {
  try {
    const int m = spec.at("m").get<int>();
    const int link_dim = spec.value("link_dim", m - 1);
    if (m < 3) throw InvalidInput("custom cone needs m >= 3");
    if (link_dim != m - 1) throw InvalidInput("custom cone link must have dimension m - 1");
    using Term = TrigMonomialEmbedding::Term;
    std::vector<std::vector<Term>> coords;
    for (const auto& coord : spec.at("coordinates")) {
      std::vector<Term> terms;
      for (const auto& t : coord) {
        const auto freq = t.at("freq").get<std::vector<int>>();
        Eigen::VectorXi f(static_cast<Eigen::Index>(freq.size()));
        for (std::size_t a = 0; a < freq.size(); ++a) f[static_cast<Eigen::Index>(a)] = freq[a];
        terms.push_back({{t.value("re", 0.0), t.value("im", 0.0)}, f});
      }
      coords.push_back(std::move(terms));
    }
    if (static_cast<int>(coords.size()) != m) throw InvalidInput("custom cone needs exactly m coordinates");
    auto emb = std::make_shared<TrigMonomialEmbedding>(link_dim, std::move(coords));
    SLCone cone;
    cone.name = spec.value("name", std::string("custom"));
    cone.m = m;
    cone.link = FlatTorus{induced_torus_metric(*emb, link_dim)};
    cone.embedding = emb;
    cone.phase_theta = spec.value("phase_theta", 0.0);
    cone.dim_G = spec.at("dim_G").get<int>();
    validate_link(cone.link);
    const auto samples = sample_link_points(cone.link, 32, 5);
    const ConeChecks checks = check_cone(cone, samples);
    if (checks.norm_defect > 1e-10) throw InvalidInput("custom cone link does not lie on the unit sphere");
    if (checks.lagrangian_residual > 1e-10) throw InvalidInput("custom cone is not Lagrangian");
    if (checks.special_residual > 1e-10) throw InvalidInput("custom cone is not special for the given phase");
    return cone;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("custom cone JSON: ") + e.what());
  }
}

}  // namespace conic_lmcf
