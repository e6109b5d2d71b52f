use num_complex::Complex64;
use proptest::prelude::*;
use qslab_core::bounds::{
    energy_rate, energy_rate_closed_form, symmetric_fast_rate, symmetric_high_rate, AsymmetricConstants,
};
use qslab_core::model::{Symmetry, DELTA_MAX, DELTA_MIN};
use qslab_core::observables::{ab_rhs, observable_rhs, pushforward};
use qslab_core::spectral::{random_field, SpectralModel};
use qslab_core::{reduced_rhs, to_observables, ModeState, ModelParams};

fn amp() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

fn state() -> impl Strategy<Value = ModeState> {
    proptest::array::uniform8(amp()).prop_map(ModeState::from_reals)
}

fn nu() -> impl Strategy<Value = f64> {
    0.005..0.5f64
}

fn delta() -> impl Strategy<Value = f64> {
    (DELTA_MIN + 1e-3)..(DELTA_MAX - 1e-3)
}

fn max_gap(a: &ModeState, b: &ModeState) -> f64 {
    a.components().iter().zip(b.components()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn scale_of(a: &ModeState) -> f64 {
    a.components().iter().map(|x| x.norm()).fold(1.0, f64::max)
}

proptest! {
    #[test]
    fn real_states_have_real_velocity(re in proptest::array::uniform4(amp()), nu in nu(), d in delta()) {
        let s = ModeState::real(re[0], re[1], re[2], re[3]);
        let v = reduced_rhs(&s, &ModelParams::new(nu, d).unwrap()).unwrap();
        prop_assert!(v.is_real());
    }

    #[test]
    fn bars_are_invariant(a in amp(), b in amp(), nu in nu(), d in delta()) {
        let p = ModelParams::new(nu, d).unwrap();
        let x_bar = reduced_rhs(&ModeState::new(Complex64::new(a, b), Complex64::default(), Complex64::default(), Complex64::default()), &p).unwrap();
        prop_assert_eq!(x_bar.omega3, Complex64::default());
        prop_assert_eq!(x_bar.omega5, Complex64::default());
        prop_assert_eq!(x_bar.omega7, Complex64::default());
        let y_bar = reduced_rhs(&ModeState::new(Complex64::default(), Complex64::new(a, b), Complex64::default(), Complex64::default()), &p).unwrap();
        prop_assert_eq!(y_bar.omega1, Complex64::default());
        prop_assert_eq!(y_bar.omega5, Complex64::default());
        prop_assert_eq!(y_bar.omega7, Complex64::default());
    }

    #[test]
    fn dipoles_are_invariant_on_square_torus(w in proptest::array::uniform4(amp()), nu in nu()) {
        let s = ModeState::new(Complex64::new(w[0], w[1]), Complex64::new(w[2], w[3]), Complex64::default(), Complex64::default());
        let v = reduced_rhs(&s, &ModelParams::symmetric(nu).unwrap()).unwrap();
        prop_assert_eq!(v.omega5, Complex64::default());
        prop_assert_eq!(v.omega7, Complex64::default());
    }

    #[test]
    fn velocity_is_continuous_in_delta(s in state(), nu in 0.05..0.5f64, h in 1e-9..1e-6f64) {
        let at_one = reduced_rhs(&s, &ModelParams::symmetric(nu).unwrap()).unwrap();
        for side in [1.0, -1.0] {
            let near = reduced_rhs(&s, &ModelParams::new(nu, 1.0 + side * h).unwrap()).unwrap();
            prop_assert!(max_gap(&near, &at_one) <= 1e3 * h * scale_of(&at_one) / nu);
        }
    }

    #[test]
    fn symmetries_commute_with_flow(s in state(), nu in nu(), d in delta(), theta in 0.0..6.3f64, square in any::<bool>()) {
        let d = if square { 1.0 } else { d };
        let p = ModelParams::new(nu, d).unwrap();
        let all = [
            Symmetry::PointReflection,
            Symmetry::ReflectX,
            Symmetry::ReflectY,
            Symmetry::ShiftX(theta),
            Symmetry::ShiftY(theta),
            Symmetry::SwapXY,
        ];
        for g in all.iter().filter(|g| g.holds_at(d)) {
            let lhs = reduced_rhs(&g.apply(&s), &p).unwrap();
            let rhs = g.apply(&reduced_rhs(&s, &p).unwrap());
            prop_assert!(max_gap(&lhs, &rhs) <= 1e-12 * scale_of(&rhs), "{:?}", g);
        }
    }

    #[test]
    fn low_high_energies_close_on_square_torus(s in state(), nu in nu()) {
        let p = ModelParams::symmetric(nu).unwrap();
        let v = reduced_rhs(&s, &p).unwrap();
        let da: f64 = [(s.omega1, v.omega1), (s.omega3, v.omega3)].iter().map(|(w, dw)| 2.0 * (w.conj() * dw).re).sum();
        let db: f64 = [(s.omega5, v.omega5), (s.omega7, v.omega7)].iter().map(|(w, dw)| 2.0 * (w.conj() * dw).re).sum();
        let (ea, eb) = ab_rhs(s.low_energy(), s.high_energy(), &p).unwrap();
        prop_assert!((da - ea).abs() <= 1e-10 * ea.abs().max(1e-3));
        prop_assert!((db - eb).abs() <= 1e-10 * eb.abs().max(1e-3));
        prop_assert!(symmetric_high_rate(&s, &p).unwrap() <= 0.0);
    }

    #[test]
    fn energy_derivative_identity(s in state(), nu in nu(), d in delta()) {
        let p = ModelParams::new(nu, d).unwrap();
        let direct = energy_rate(&s, &p).unwrap();
        let closed = energy_rate_closed_form(&s, &p).unwrap();
        prop_assert!((direct - closed).abs() <= 1e-10 * closed.abs().max(1e-300));
        let k1 = 1.0f64.min(1.0 / (d * d));
        let e = 0.5 * (s.low_energy() + s.high_energy());
        prop_assert!(direct <= -2.0 * nu * k1 * e * (1.0 - 1e-12));
    }

    #[test]
    fn bound_exponents_are_monotone(a in 1e-4..1.0f64, bump in 1e-4..1.0f64, b in 1e-4..1.0f64, nu in nu()) {
        prop_assert!(symmetric_fast_rate(a + bump, nu) > symmetric_fast_rate(a, nu));
        let p = ModelParams::new(nu, 0.95).unwrap();
        let lo = AsymmetricConstants::evaluate(&p, 0.2, a, b).unwrap();
        let hi = AsymmetricConstants::evaluate(&p, 0.2, a, b + bump).unwrap();
        prop_assert!(hi.k2 > lo.k2);
        prop_assert_eq!(hi.b_star, lo.b_star);
    }

    #[test]
    fn observables_are_realizable_and_stay_so(s in state(), nu in nu()) {
        prop_assume!(s.omega3.norm_sqr() > 1e-3 && s.omega1.norm_sqr() > 1e-3);
        let o = to_observables(&s).unwrap();
        prop_assert!((o.p.norm_sqr() - o.r * o.z).abs() <= 1e-12 * (o.r * o.z).max(1.0));
        prop_assert!((o.q.norm_sqr() - o.r * o.w).abs() <= 1e-12 * (o.r * o.w).max(1.0));
        prop_assert!((o.a - (1.0 + o.r) * s.omega3.norm_sqr()).abs() <= 1e-12 * o.a.max(1.0));
        let p = ModelParams::symmetric(nu).unwrap();
        let v = observable_rhs(&o, &p).unwrap();
        let drift_p = 2.0 * (o.p.conj() * v.p).re - v.r * o.z - o.r * v.z;
        let drift_q = 2.0 * (o.q.conj() * v.q).re - v.r * o.w - o.r * v.w;
        let scale = v.to_array().iter().fold(1.0f64, |m, x| m.max(x.abs())) * o.to_array().iter().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(drift_p.abs() <= 1e-9 * scale, "{}", drift_p);
        prop_assert!(drift_q.abs() <= 1e-9 * scale, "{}", drift_q);
        let push = pushforward(&s, &reduced_rhs(&s, &p).unwrap()).unwrap();
        for (x, y) in push.to_array().iter().zip(v.to_array()) {
            prop_assert!((x - y).abs() <= 1e-9 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectral_velocity_keeps_fields_real(seed in any::<u64>(), k in 2usize..5, d in delta(), nu in 0.0..0.1f64) {
        let field = random_field(seed, k, d, 1.0).unwrap();
        prop_assert!(field.reality_defect() == 0.0);
        let model = SpectralModel::new(k, d, nu).unwrap();
        let v = model.rhs(&field);
        prop_assert!(v.reality_defect() <= 1e-14);
    }
}
