// Two-level system: the subspace speed bound is attained with equality.

#include "subspace_qsl/subspace_qsl.hpp"

#include <cstdio>
#include <numbers>

int main()
{
    using namespace subspace_qsl;
    const auto cfg = make_two_level(0.0, 1.0);
    const auto& h = cfg.hamiltonian;
    const Frame f = cfg.subspace();

    const double v = off_diagonal_speed(h, f);
    const double de = subspace_dispersion(h, f).value;
    const auto cross = first_crossing_time(h, f, std::numbers::pi / 2, default_horizon(h, v), 1e-12);

    std::printf("V = %.15g  dE_P0 = %.15g  (Emax-Emin)/2 = %.15g\n", v, de, spectral_halfwidth_bound(h));
    std::printf("T_perp measured = %.15g, bound (pi/2)/V = %.15g\n", *cross.t_theta,
                subspace_time_bound_v(v, std::numbers::pi / 2));

    const auto tr = angle_trajectory(h, f, 2 * std::numbers::pi, 9, v, de);
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        std::printf("t = %8.5f  theta = %8.5f  V t = %8.5f\n", tr.times[i], tr.theta[i], tr.v_bound[i]);
}
