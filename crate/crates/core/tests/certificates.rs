use qslab_core::bounds::{asymmetric_certificates, default_eta, AsymmetricConstants};
use qslab_core::integrate::TimeGrid;
use qslab_core::{default_dt, simulate, ModeState, ModelParams};

fn run(delta: f64, s0: ModeState) -> Vec<qslab_core::DecayCertificate> {
    let nu = 0.005;
    let p = ModelParams::new(nu, delta).unwrap();
    let consts = AsymmetricConstants::evaluate(&p, default_eta(delta), s0.low_energy(), s0.high_energy()).unwrap();
    let grid = TimeGrid::fixed(0.0, 4.0 / nu, default_dt(nu)).unwrap().with_stride(20).unwrap();
    let traj = simulate(s0, &p, &grid).unwrap();
    asymmetric_certificates(&traj, &consts).unwrap()
}

#[test]
fn asymmetric_small_real_data() {
    let mut with_fast_phase = 0;
    for (delta, s0) in [
        (0.95, ModeState::real(0.03, -0.02, 0.01, 0.008)),
        (0.95, ModeState::real(-0.01, 0.04, -0.005, 0.012)),
        (1.05, ModeState::real(0.02, 0.03, 0.009, -0.01)),
        (0.95, ModeState::real(0.03, -0.02, 0.05, 0.04)),
        (1.05, ModeState::real(-0.02, 0.03, 0.06, -0.03)),
    ] {
        for c in run(delta, s0) {
            println!("{c}");
            assert!(c.pass, "{c}");
            if c.name == "asym_high_fast_decay" && !c.is_vacuous() {
                with_fast_phase += 1;
            }
        }
    }
    assert_eq!(with_fast_phase, 2);
}
