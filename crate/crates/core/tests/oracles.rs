//! Independent checks of the closed-form matrix elements, the expectation
//! value and the integrator.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use rotwave::angular::{cos2_band, cos2_couple, cos2_diag, default_nodes, quadrature_element};
use rotwave::config::{MoleculeSpec, RunConfig};
use rotwave::observables::{angular_density, expectation_cos2};
use rotwave::quadrature::{gauss_legendre, normalized_legendre};
use rotwave::rotor::{initial_state, propagate_pulse, PulseKernel};
use rotwave::RotorState;

const REFERENCE_PEAK: f64 = 2e18; // W/m²

#[test]
fn closed_forms_match_quadrature() {
    let mut worst: f64 = 0.0;
    for j in 0..=20u32 {
        for m in -(j as i32)..=(j as i32) {
            let q = quadrature_element(j, j, m, default_nodes(j, j)).unwrap();
            worst = worst.max((cos2_diag(j, m).unwrap() - q).abs());
            let q = quadrature_element(j, j + 2, m, default_nodes(j, j + 2)).unwrap();
            worst = worst.max((cos2_couple(j, m).unwrap() - q).abs());
        }
    }
    assert!(worst <= 1e-10, "worst deviation {worst:e}");
}

#[test]
fn quadrature_rejects_too_few_nodes() {
    assert!(quadrature_element(5, 7, 2, 14).is_err());
    let exact = quadrature_element(5, 7, 2, 15).unwrap();
    assert!((exact - cos2_couple(5, 2).unwrap()).abs() < 1e-12);
}

fn random_state(rng: &mut StdRng) -> RotorState {
    let m: i32 = rng.gen_range(-4..=4);
    let offset = m.unsigned_abs() + rng.gen_range(0..=1u32);
    let mut coeffs: Vec<Complex64> = (0..5)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    coeffs.iter_mut().for_each(|c| *c /= norm);
    RotorState::new(m, offset, coeffs, 0.0).unwrap()
}

/// `∫|ψ(θ)|² g(cos θ) dΩ` straight from the Legendre recurrence.
fn direct_integral(state: &RotorState, g: impl Fn(f64) -> f64) -> f64 {
    let am = state.m().unsigned_abs();
    let (x, w) = gauss_legendre(40);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| {
            let p = normalized_legendre(am, state.top_j(), xi);
            let amp: Complex64 = state
                .j_values()
                .zip(state.coeffs())
                .map(|(j, c)| c * p[(j - am) as usize])
                .sum();
            wi * amp.norm_sqr() * g(xi)
        })
        .sum()
}

#[test]
fn expectation_matches_angular_quadrature() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let state = random_state(&mut rng);
        let band = cos2_band(state.m(), state.top_j()).unwrap();
        let fast = expectation_cos2(&state, &band).unwrap();
        let slow = direct_integral(&state, |x| x * x);
        assert!((fast - slow).abs() <= 1e-8, "{state:?}: {fast} vs {slow}");
        assert!((direct_integral(&state, |_| 1.0) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn density_integrates_to_one() {
    let mut rng = StdRng::seed_from_u64(7);
    let (x, w) = gauss_legendre(40);
    for _ in 0..20 {
        let state = random_state(&mut rng);
        let total: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| 2.0 * std::f64::consts::PI * wi * angular_density(&state, xi.acos()))
            .sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }
}

fn run_config(steps_per_fwhm: u32) -> RunConfig {
    RunConfig {
        steps_per_fwhm,
        norm_tolerance: 1e-2,
        ..RunConfig::default()
    }
}

fn pumped(j: u32, m: i32, peak: f64, config: &RunConfig) -> RotorState {
    let d2 = MoleculeSpec::deuterium();
    let pulse = PulseKernel::new(peak, 12.0, 3.0).unwrap();
    propagate_pulse(&initial_state(j, m, config.j_max).unwrap(), &pulse, &d2, config).unwrap()
}

fn distance(a: &RotorState, b: &RotorState) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[test]
fn fourth_order_convergence() {
    // Step-halving sequence from 48 to 384 steps per FWHM (0.25 to 0.03 fs).
    let states: Vec<RotorState> = [48, 96, 192, 384]
        .iter()
        .map(|&n| pumped(2, 1, REFERENCE_PEAK, &run_config(n)))
        .collect();
    let diffs: Vec<f64> = states.windows(2).map(|w| distance(&w[0], &w[1])).collect();
    for pair in diffs.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        // The Richardson estimate of a fourth-order method approaches 4 from
        // below; 3.95 is 4 at two significant figures.
        assert!(order >= 3.95, "observed order {order} from {diffs:?}");
    }
}

#[test]
fn norm_is_conserved() {
    for (j, m) in [(0, 0), (2, 1), (5, 3), (8, 0)] {
        let state = pumped(j, m, REFERENCE_PEAK, &RunConfig::default());
        assert!((state.norm_sqr() - 1.0).abs() <= 1e-8);
        let fine = pumped(
            j,
            m,
            REFERENCE_PEAK,
            &run_config(4 * RunConfig::default().steps_per_fwhm),
        );
        assert!((fine.norm_sqr() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn weak_field_transfer_is_quadratic() {
    let config = RunConfig::default();
    let peaks = [1e14, 2e14, 4e14, 8e14];
    let transfer: Vec<f64> = peaks
        .iter()
        .map(|&i| {
            pumped(0, 0, i, &config).coeffs()[1..]
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>()
        })
        .collect();
    let n = peaks.len() as f64;
    let xs: Vec<f64> = peaks.iter().map(|p| p.ln()).collect();
    let ys: Vec<f64> = transfer.iter().map(|p| p.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 2.0).abs() <= 0.1, "slope {slope}, transfer {transfer:?}");
}
