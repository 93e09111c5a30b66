use kdvgeo_core::integrators::{projection_step, rk_step};
use kdvgeo_core::kdv::{project_initial, two_soliton_initial};
use kdvgeo_core::spectral::basis_eval;
use kdvgeo_core::{
    BasisSpec, ButcherTableau, FunctionalKind, KdvModel, KdvParams, SolverSettings, SpectralField64,
    TwoSolitonParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn smooth(rng: &mut ChaCha8Rng, basis: BasisSpec<f64>) -> SpectralField64 {
    let c = (0..basis.dim())
        .map(|j| {
            let k = j.div_ceil(2) as f64;
            rng.gen_range(-1.0..1.0) / (1.0 + k * k)
        })
        .collect();
    SpectralField64::new(basis, c).unwrap()
}

fn rk4_substeps(m: &KdvModel<f64>, u: &SpectralField64, h: f64, n: usize) -> SpectralField64 {
    let tab = ButcherTableau::classical_rk4();
    let s = SolverSettings::default();
    (0..n).fold(u.clone(), |v, _| rk_step(&tab, m, &v, h / n as f64, &s).unwrap().0)
}

#[test]
fn rk4_step_agrees_with_fine_substeps() {
    let basis = BasisSpec::new(40.0, 8).unwrap();
    let m = KdvModel::new(KdvParams::new(-1.0, -1.0), basis);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let u = smooth(&mut rng, basis);
        let coarse = rk4_substeps(&m, &u, 1e-3, 1);
        let fine = rk4_substeps(&m, &u, 1e-3, 100);
        assert!(coarse.sub(&fine).norm() <= 1e-9);
    }
}

/// One projected step against a fine reference; the local error must fall like `h^5`.
#[test]
fn projected_rk4_has_local_order_five() {
    let basis = BasisSpec::new(40.0, 16).unwrap();
    let m = KdvModel::new(KdvParams::new(-1.0, -1.0), basis);
    let tab = ButcherTableau::classical_rk4();
    let s = SolverSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let u = smooth(&mut rng, basis).scale(2.0);
        let errors: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| {
                let (w, _) = projection_step(&tab, &m, &FunctionalKind::ALL, &u, h, &s).unwrap();
                w.sub(&rk4_substeps(&m, &u, h, 400)).norm()
            })
            .collect();
        for pair in errors.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!((4.6..=5.4).contains(&order), "{errors:?}");
        }
    }
}

fn max_fidelity_error(l: f64, cutoff: usize, samples: usize) -> f64 {
    let tp = TwoSolitonParams::reference();
    let basis = BasisSpec::new(l, cutoff).unwrap();
    let u = project_initial(&tp, basis, 8 * cutoff).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    (0..samples)
        .map(|_| {
            let x = rng.gen_range(-l..l);
            let s: f64 = u.coeffs().iter().enumerate().map(|(j, c)| c * basis_eval(&basis, j, x).unwrap()).sum();
            (s - two_soliton_initial(&tp, x)).abs()
        })
        .fold(0.0, f64::max)
}

/// On a domain wide enough for the profile to be periodic to round-off, the
/// truncated series reproduces it pointwise.
#[test]
fn projected_profile_matches_on_periodic_domain() {
    assert!(max_fidelity_error(80.0, 128, 1000) <= 1e-8);
}

/// On `[-40, 40]` the profile does not decay at the left end
/// (`u0(-40) = 5.4e-4`), so its periodic extension jumps and the truncated
/// series cannot reach 1e-8 near the boundary.
#[test]
#[ignore = "unattainable: the profile jumps by 5.4e-4 across the periodic boundary of [-40, 40]"]
fn projected_profile_matches_on_reference_domain() {
    assert!(max_fidelity_error(40.0, 64, 1000) <= 1e-8);
}

#[test]
fn reference_domain_error_is_set_by_boundary_jump() {
    let err = max_fidelity_error(40.0, 64, 1000);
    let tp = TwoSolitonParams::<f64>::reference();
    let jump = (two_soliton_initial(&tp, -40.0) - two_soliton_initial(&tp, 40.0)).abs();
    assert!(err <= jump, "{err} vs {jump}");
}
