use hypstab::lyapunov::{
    decay_rates, discrete_l2_norm, discrete_lyapunov, LyapunovSum, LyapunovWeights,
};
use hypstab::model::{Model, ModelKind};
use hypstab::scheme::{
    build_discretization, close_boundaries, diffusion_coefficients, FeedbackMatrix, Scheme,
    StateField,
};
use hypstab::simulate::{simulate, SimulationConfig};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = ModelKind> {
    prop::sample::select(vec![
        ModelKind::Wave,
        ModelKind::Euler,
        ModelKind::SaintVenant,
    ])
}

fn state(cells: usize) -> impl Strategy<Value = StateField> {
    (
        prop::collection::vec(-5.0f64..5.0, cells),
        prop::collection::vec(-5.0f64..5.0, cells),
    )
        .prop_map(move |(p, m)| {
            let mut s = StateField::zeros(cells);
            s.u_plus[1..=cells].copy_from_slice(&p);
            s.u_minus[1..=cells].copy_from_slice(&m);
            s
        })
}

fn sized_state() -> impl Strategy<Value = StateField> {
    (3usize..40).prop_flat_map(state)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closure_satisfies_feedback_laws(
        s in sized_state(),
        k in prop::array::uniform4(-2.0f64..2.0),
    ) {
        let k = FeedbackMatrix::new([[k[0], k[1]], [k[2], k[3]]]);
        prop_assume!(k.det().abs() > 0.1);
        let mut s = s;
        close_boundaries(&mut s, &k).unwrap();
        let j = s.cells();
        let value = k.apply([s.u_plus[j], s.u_minus[1]]);
        let grad = k.apply([s.u_plus[j + 1] - s.u_plus[j], s.u_minus[1] - s.u_minus[0]]);
        let scale = 1e-12 * (1.0 + s.u_plus.iter().chain(&s.u_minus).fold(0.0f64, |a, v| a.max(v.abs())));
        prop_assert!((s.u_plus[0] - value[0]).abs() <= scale);
        prop_assert!((s.u_minus[j + 1] - value[1]).abs() <= scale);
        prop_assert!((s.u_plus[1] - s.u_plus[0] - grad[0]).abs() <= scale * 10.0);
        prop_assert!((s.u_minus[j + 1] - s.u_minus[j] - grad[1]).abs() <= scale * 10.0);
    }

    #[test]
    fn norm_equivalence(s in sized_state(), mu in 0.01f64..6.0) {
        let spec = Model::new(ModelKind::Wave).system().unwrap();
        let d = build_discretization(&spec, s.cells(), 0.5, mu).unwrap();
        let l = discrete_lyapunov(&s, &LyapunovWeights::new(&d), &d);
        let n2 = discrete_l2_norm(&s, &d).powi(2);
        prop_assert!(l >= 0.0);
        prop_assert!((-mu).exp() * n2 <= l && l <= mu.exp() * n2);
    }

    #[test]
    fn weights_are_reciprocal(cells in 2usize..500, mu in 0.01f64..6.0) {
        let spec = Model::new(ModelKind::Wave).system().unwrap();
        let d = build_discretization(&spec, cells, 0.5, mu).unwrap();
        let w = LyapunovWeights::new(&d);
        for (p, m) in w.p_plus.iter().zip(&w.p_minus) {
            prop_assert!((p * m - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn decay_rates_are_ordered(kind in model(), cells in 2usize..2000, cfl in 0.01f64..=1.0, mu in 0.01f64..6.0) {
        let spec = Model::new(kind).system().unwrap();
        let d = build_discretization(&spec, cells, cfl, mu).unwrap();
        let r = decay_rates(&spec, &d, &diffusion_coefficients(&spec, &d));
        prop_assert!(r.eta_n <= r.eta_t && r.eta_t <= r.alpha_mu);
    }

    #[test]
    fn lyapunov_recursion_holds(
        kind in model(),
        s in (4usize..30).prop_flat_map(state),
        cfl in 0.05f64..=1.0,
        mu in 0.05f64..5.0,
        plain in any::<bool>(),
    ) {
        let spec = Model::new(kind).system().unwrap();
        let d = build_discretization(&spec, s.cells(), cfl, mu).unwrap();
        let rates = decay_rates(&spec, &d, &diffusion_coefficients(&spec, &d));
        prop_assume!(rates.mu_feasible);
        let cfg = SimulationConfig {
            scheme: if plain { Scheme::Plain } else { Scheme::Viscous },
            t_final: 200.0 * d.dt,
            tol: 0.0,
            stop_on: LyapunovSum::Interior,
            snapshot_every: 0,
        };
        let run = simulate(&s, &spec, &d, &FeedbackMatrix::for_mu(mu), &cfg).unwrap();
        let factor = 1.0 - d.dt * rates.eta_n;
        for w in run.interior.windows(2) {
            let bound = factor * w[0];
            prop_assert!(w[1] <= bound + bound.abs() * f64::EPSILON, "{} > {}", w[1], bound);
        }
    }
}
