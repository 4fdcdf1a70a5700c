// Sharp bounds for the catalog weights, then the regularised family for a
// bump approaching its bound.

#include <cstdio>

#include "cftqei/qei.hpp"
#include "cftqei/weights.hpp"

int main() {
  using namespace cftqei;
  std::printf("%-20s %-10s %14s\n", "weight", "decay", "bound (c=1)");
  for (const auto& name : weights::catalog_names()) {
    const auto G = weights::catalog(name);
    std::printf("%-20s %-10s %14.8g%s\n", name.c_str(), weights::to_string(G.decay()), weights::qei_functional(G, 1.0),
                G.within_hypotheses() ? "" : "  (outside hypotheses)");
  }

  const auto res = qei::sharpness_experiment(weights::catalog("bump"), 1.0, qei::default_eps_list());
  std::printf("\n%-8s %14s %14s %12s\n", "eps", "lhs", "bound", "gap");
  for (const auto& r : res.rows) std::printf("%-8.0e %14.8g %14.8g %12.4e\n", r.epsilon, r.lhs, r.bound, r.gap);
  return 0;
}
