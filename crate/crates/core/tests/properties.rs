use std::sync::Arc;

use proptest::prelude::*;

use ep_limit::models::{BepState, Bipolar, PlasmaParams};
use ep_limit::spectral::{
    divergence, grad_inv_laplacian, laplacian, make_grid, scalar_norm, solve_poisson_zero_mean,
    ScalarField, Spectrum, TorusGrid, VectorField,
};
use ep_limit::timestep::advance_fixed;

/// Grid plus up to six random modes (wavevector, cosine and sine amplitudes)
/// below the dealiasing cutoff.
fn field_case() -> impl Strategy<Value = (Arc<TorusGrid>, ScalarField)> {
    (1usize..=3, any::<bool>()).prop_flat_map(|(dim, fine)| {
        let n = match (dim, fine) {
            (3, _) => 8,
            (_, false) => 16,
            (_, true) => 32,
        };
        let kmax = (n / 3) as i32;
        let mode = (
            prop::collection::vec(-kmax..=kmax, dim),
            -1.0f64..1.0,
            -1.0f64..1.0,
        );
        prop::collection::vec(mode, 1..6).prop_map(move |modes| {
            let g = make_grid(dim, n).unwrap();
            let f = ScalarField::from_fn(&g, |x| {
                modes
                    .iter()
                    .map(|(k, a, b)| {
                        let phase: f64 = k.iter().zip(x.iter()).map(|(&k, &x)| k as f64 * x).sum();
                        a * phase.cos() + b * phase.sin()
                    })
                    .sum()
            });
            (g, f)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_round_trip((_g, f) in field_case()) {
        let back = Spectrum::of(&f).to_field();
        prop_assert!((&back - &f).max_abs() <= 1e-12 * (1.0 + f.max_abs()));
    }

    #[test]
    fn poisson_inverts_laplacian((_g, f) in field_case()) {
        let rhs = f.subtract_mean();
        let phi = solve_poisson_zero_mean(&rhs).unwrap();
        prop_assert!((&laplacian(&phi) - &rhs).max_abs() <= 1e-10 * (1.0 + rhs.max_abs()));
        prop_assert!(phi.mean().abs() < 1e-12);
        let psi = grad_inv_laplacian(&rhs).unwrap();
        prop_assert!((&divergence(&psi) - &rhs).max_abs() <= 1e-10 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn sobolev_norm_is_monotone_in_order((_g, f) in field_case()) {
        let norms: Vec<f64> = (0..4).map(|s| scalar_norm(&f, s)).collect();
        for w in norms.windows(2) {
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-12));
        }
        prop_assert!((norms[0] - f.l2_norm()).abs() <= 1e-12 * (1.0 + norms[0]));
    }

    #[test]
    fn rk4_conserves_mass_and_charge(
        amp_i in 0.0f64..0.1,
        amp_e in 0.0f64..0.1,
        vel in -0.2f64..0.2,
        k in 1i32..4,
        eps in 0.1f64..1.0,
    ) {
        let g = make_grid(1, 32).unwrap();
        let kf = k as f64;
        let init = BepState {
            rho_i: ScalarField::from_fn(&g, |x| 1.0 + amp_i * (kf * x[0]).sin()),
            u_i: VectorField::zeros(&g),
            rho_e: ScalarField::from_fn(&g, |x| 1.0 + amp_e * (kf * x[0]).cos()),
            u_e: VectorField::from_fn(&g, |x| [vel * x[0].sin(), 0.0, 0.0]),
        };
        let (m_i, m_e) = (init.rho_i.integral(), init.rho_e.integral());
        let model = Bipolar { params: PlasmaParams::default().with_epsilon(eps) };
        let end = BepState::try_from(advance_fixed(&model, &init.into(), 0.02, 25).unwrap()).unwrap();
        prop_assert!((end.rho_i.integral() - m_i).abs() / m_i < 1e-12);
        prop_assert!((end.rho_e.integral() - m_e).abs() / m_e < 1e-12);
        prop_assert!((&end.rho_i - &end.rho_e).integral().abs() < 1e-12);
    }
}
