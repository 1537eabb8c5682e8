// Compares the three sampling policies on one source/channel pair, then
// solves the budgeted randomized-stationary problem for the same cell.
//
//   single_cell [p q p_s [eta e_max]]

#include <cstdio>
#include <cstdlib>
#include <optional>

#include "via/via.hpp"

namespace {

double arg(int argc, char** argv, int i, double fallback) {
  return i < argc ? std::strtod(argv[i], nullptr) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  const via::SourceParams src(arg(argc, argv, 1, 0.3), arg(argc, argv, 2, 0.3));
  const via::ChannelParams ch(arg(argc, argv, 3, 0.7));
  const double eta = arg(argc, argv, 4, 0.5);
  const double e_max = arg(argc, argv, 5, 0.5);

  const via::PolicySpec policies[] = {via::PolicySpec::randomized_stationary(eta),
                                      via::PolicySpec::change_aware(),
                                      via::PolicySpec::semantics_aware()};

  std::printf("p=%g q=%g p_s=%g\n\n", src.p, src.q, ch.p_s);
  std::printf("%-24s %10s %10s %10s %10s %10s\n", "policy", "via", "via(sim)", "aoiv", "aoii",
              "rate");
  for (const auto& pol : policies) {
    via::SimulationConfig cfg{src, ch, pol};
    cfg.horizon = 2'000'000;
    cfg.seed = 11;
    const auto sim = via::run(cfg);

    std::optional<double> closed;
    try {
      closed = via::analytics::avg_via(pol, src, ch);
    } catch (const via::UnsupportedPolicy&) {
    }
    std::printf("%-24s ", via::to_string(pol.kind()).data());
    if (closed) std::printf("%10.5f ", *closed);
    else std::printf("%10s ", "-");
    std::printf("%10.5f %10.5f %10.5f %10.5f\n", sim.avg_via,
                via::analytics::avg_aoiv(pol, src, ch), via::analytics::avg_aoii(pol, src, ch),
                via::sampling_rate(pol, src, ch));
  }

  const double threshold = via::analytics::rs_ca_threshold(src, ch);
  std::printf("\nchange-aware beats rs on VIA when eta < %.6f\n", threshold);

  const via::OptimizationProblem prob(src, ch, 0.1, 0.1 * eta, e_max);
  const auto out = via::solve(prob);
  if (!out.optimal()) {
    std::printf("budgeted rs: infeasible (eta=%g e_max=%g)\n", eta, e_max);
    return 0;
  }
  std::printf("budgeted rs: p*=%.6f via=%.6f pe=%.6f cost=%.6f\n", *out.p_star, out.achieved_via,
              out.achieved_pe, out.achieved_cost);
}
