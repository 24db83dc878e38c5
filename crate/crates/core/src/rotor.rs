//! Single-rotor dynamics: impulsive excitation and field-free evolution.
//!
//! A linearly polarized field conserves `M` and couples `J` only to `J ± 2`,
//! so a state is stored as one parity ladder `J = j_offset, j_offset + 2, …`
//! at fixed `M`. Energies are carried as angular frequencies in rad/fs and
//! time is measured in fs from the pulse peak.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::angular::{cos2_couple, cos2_diag};
use crate::config::{MoleculeSpec, PulseSpec, RunConfig};
use crate::constants::{interaction_energy, joule_to_rad_per_fs, w_per_cm2_to_w_per_m2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RotorState {
    m: i32,
    j_offset: u32,
    coeffs: Vec<Complex64>,
    reference_time: f64,
}

impl RotorState {
    /// Builds a state from its coefficients on the ladder starting at `j_offset`.
    pub fn new(m: i32, j_offset: u32, coeffs: Vec<Complex64>, reference_time: f64) -> Result<Self> {
        let am = m.unsigned_abs();
        if j_offset < am || j_offset > am + 1 {
            return Err(Error::Domain(format!(
                "ladder for M = {m} must start at J = {am} or {}",
                am + 1
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::Domain("state needs at least one coefficient".into()));
        }
        Ok(RotorState {
            m,
            j_offset,
            coeffs,
            reference_time,
        })
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn j_offset(&self) -> u32 {
        self.j_offset
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn reference_time(&self) -> f64 {
        self.reference_time
    }

    /// Highest `J` on the ladder.
    pub fn top_j(&self) -> u32 {
        self.j_offset + 2 * (self.coeffs.len() as u32 - 1)
    }

    pub fn j_values(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.coeffs.len() as u32).map(move |k| self.j_offset + 2 * k)
    }

    /// Coefficient `F_J`; zero for `J` off the ladder.
    pub fn coefficient(&self, j: u32) -> Complex64 {
        if j < self.j_offset || !(j - self.j_offset).is_multiple_of(2) {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs
            .get(((j - self.j_offset) / 2) as usize)
            .copied()
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Population of the two highest ladder levels.
    pub fn top_occupancy(&self) -> f64 {
        self.coeffs.iter().rev().take(2).map(|c| c.norm_sqr()).sum()
    }

    /// `⟨H₀⟩/ħ = Σ ω_J |F_J|²` in rad/fs.
    pub fn mean_frequency(&self, molecule: &MoleculeSpec) -> f64 {
        self.j_values()
            .zip(&self.coeffs)
            .map(|(j, c)| rotational_frequency(j, molecule.rotational_constant) * c.norm_sqr())
            .sum()
    }

    /// Same state on a ladder reaching `j_max`, padded with zeros or cut.
    fn on_ladder_to(&self, j_max: u32) -> RotorState {
        let len = if j_max < self.j_offset {
            1
        } else {
            ((j_max - self.j_offset) / 2 + 1) as usize
        };
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len, Complex64::new(0.0, 0.0));
        RotorState { coeffs, ..self.clone() }
    }
}

/// `|J_i, M_i⟩` on the parity ladder of `J_i` up to `j_max`.
///
/// The state is stationary before the pulse, so its reference time is
/// arbitrary; it is set to zero and [`propagate_pulse`] rebases it to the
/// switch-on of the envelope.
pub fn initial_state(j_i: u32, m_i: i32, j_max: u32) -> Result<RotorState> {
    let am = m_i.unsigned_abs();
    if am > j_i {
        return Err(Error::Domain(format!("|M| = {am} exceeds J = {j_i}")));
    }
    if j_i > j_max {
        return Err(Error::Domain(format!("J = {j_i} exceeds j_max = {j_max}")));
    }
    let j_offset = if (j_i - am).is_multiple_of(2) { am } else { am + 1 };
    let len = ((j_max - j_offset) / 2 + 1) as usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
    coeffs[((j_i - j_offset) / 2) as usize] = Complex64::new(1.0, 0.0);
    RotorState::new(m_i, j_offset, coeffs, 0.0)
}

/// `E_J/ħ = 2πBc·J(J+1)` in rad/fs, for `B` in cm⁻¹.
pub fn rotational_frequency(j: u32, rotational_constant: f64) -> f64 {
    let jf = j as f64;
    crate::constants::wavenumber_to_rad_per_fs(rotational_constant) * jf * (jf + 1.0)
}

/// Gaussian intensity envelope, zero outside `±cutoff·FWHM`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseKernel {
    /// W/m²
    peak: f64,
    fwhm: f64,
    half_window: f64,
}

impl PulseKernel {
    pub fn new(peak_w_per_m2: f64, fwhm_fs: f64, cutoff: f64) -> Result<Self> {
        if !(peak_w_per_m2 >= 0.0) || !(fwhm_fs > 0.0) || !(cutoff > 0.0) {
            return Err(Error::Domain(
                "pulse needs nonnegative peak, positive FWHM and positive cutoff".into(),
            ));
        }
        Ok(PulseKernel {
            peak: peak_w_per_m2,
            fwhm: fwhm_fs,
            half_window: cutoff * fwhm_fs,
        })
    }

    pub fn from_spec(pulse: &PulseSpec) -> Result<Self> {
        Self::new(
            w_per_cm2_to_w_per_m2(pulse.peak_intensity),
            pulse.fwhm,
            pulse.envelope_cutoff,
        )
    }

    /// Intensity in W/m² at `t` fs from the peak.
    pub fn intensity(&self, t: f64) -> f64 {
        if t.abs() > self.half_window {
            return 0.0;
        }
        self.peak * (-4.0 * std::f64::consts::LN_2 * (t / self.fwhm).powi(2)).exp()
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }

    pub fn start(&self) -> f64 {
        -self.half_window
    }

    pub fn end(&self) -> f64 {
        self.half_window
    }

    pub fn is_field_free(&self) -> bool {
        self.peak == 0.0
    }

    /// Dimensionless kick `(Δα/4ħ)∫E₀²dt` over the simulated window.
    pub fn kick_strength(&self, molecule: &MoleculeSpec) -> f64 {
        // Simpson on 2000 panels; the envelope is smooth.
        let n = 2000;
        let h = 2.0 * self.half_window / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let t = self.start() + k as f64 * h;
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * self.coupling(molecule, t);
        }
        -(s * h / 3.0)
    }

    /// `U(t)/ħ` in rad/fs (negative).
    fn coupling(&self, molecule: &MoleculeSpec, t: f64) -> f64 {
        let i = self.intensity(t);
        if i == 0.0 {
            return 0.0;
        }
        // Inputs are validated upstream; the only failure mode is a negative argument.
        joule_to_rad_per_fs(interaction_energy(molecule.delta_alpha, i).unwrap_or(0.0))
    }
}

/// Free evolution: `F_J ← F_J·exp(−iω_J·Δt)`.
///
/// Phases are reduced modulo 2π through the exact integer `J(J+1)`, so
/// evolution by a full revival period returns the state to itself.
pub fn evolve_free(state: &RotorState, delta_t: f64, molecule: &MoleculeSpec) -> RotorState {
    let cycles = crate::constants::wavenumber_to_hz(molecule.rotational_constant) * 1e-15 * delta_t;
    let coeffs = state
        .j_values()
        .zip(&state.coeffs)
        .map(|(j, &c)| {
            let turns = (cycles * (j as u64 * (j as u64 + 1)) as f64).rem_euclid(1.0);
            c * Complex64::from_polar(1.0, -2.0 * PI * turns)
        })
        .collect();
    RotorState {
        coeffs,
        reference_time: state.reference_time + delta_t,
        ..state.clone()
    }
}

/// The coupled amplitude equations in the interaction picture.
///
/// With `a_J = F_J·exp(iω_J s)` and `s` measured from switch-on,
/// `da_J/ds = −i·u(s)·Σ_K c_JK·exp(i(ω_J − ω_K)s)·a_K`, where `u = U/ħ`.
struct Propagator<'a> {
    pulse: &'a PulseKernel,
    molecule: &'a MoleculeSpec,
    t0: f64,
    diag: Vec<f64>,
    couple: Vec<f64>,
    /// `ω_{k+1} − ω_k` along the ladder.
    gaps: Vec<f64>,
    omegas: Vec<f64>,
}

impl<'a> Propagator<'a> {
    fn new(state: &RotorState, pulse: &'a PulseKernel, molecule: &'a MoleculeSpec) -> Result<Self> {
        let m = state.m;
        let js: Vec<u32> = state.j_values().collect();
        let diag = js.iter().map(|&j| cos2_diag(j, m)).collect::<Result<Vec<_>>>()?;
        let couple = js
            .iter()
            .take(js.len().saturating_sub(1))
            .map(|&j| cos2_couple(j, m))
            .collect::<Result<Vec<_>>>()?;
        let omegas: Vec<f64> = js
            .iter()
            .map(|&j| rotational_frequency(j, molecule.rotational_constant))
            .collect();
        let gaps = omegas.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Propagator {
            pulse,
            molecule,
            t0: pulse.start(),
            diag,
            couple,
            gaps,
            omegas,
        })
    }

    fn derivative(&self, s: f64, a: &[Complex64], out: &mut [Complex64], phases: &mut [Complex64]) {
        let u = self.pulse.coupling(self.molecule, self.t0 + s);
        if u == 0.0 {
            out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
            return;
        }
        for (p, &g) in phases.iter_mut().zip(&self.gaps) {
            *p = Complex64::from_polar(1.0, -g * s);
        }
        let n = a.len();
        let mi = Complex64::new(0.0, -u);
        for k in 0..n {
            let mut acc = a[k] * self.diag[k];
            if k + 1 < n {
                acc += a[k + 1] * phases[k] * self.couple[k];
            }
            if k > 0 {
                acc += a[k - 1] * phases[k - 1].conj() * self.couple[k - 1];
            }
            out[k] = mi * acc;
        }
    }

    /// One classical RK4 step of length `h` from `s`.
    fn step(&self, s: f64, h: f64, a: &[Complex64], scratch: &mut Scratch) -> Vec<Complex64> {
        let n = a.len();
        let Scratch {
            k1,
            k2,
            k3,
            k4,
            tmp,
            phases,
        } = scratch;
        self.derivative(s, a, k1, phases);
        for i in 0..n {
            tmp[i] = a[i] + k1[i] * (0.5 * h);
        }
        self.derivative(s + 0.5 * h, tmp, k2, phases);
        for i in 0..n {
            tmp[i] = a[i] + k2[i] * (0.5 * h);
        }
        self.derivative(s + 0.5 * h, tmp, k3, phases);
        for i in 0..n {
            tmp[i] = a[i] + k3[i] * h;
        }
        self.derivative(s + h, tmp, k4, phases);
        (0..n)
            .map(|i| a[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
            .collect()
    }

    /// Back from interaction picture to Schrödinger coefficients at `s`.
    fn to_state(&self, template: &RotorState, a: &[Complex64], s: f64) -> RotorState {
        let coeffs = a
            .iter()
            .zip(&self.omegas)
            .map(|(&c, &w)| c * Complex64::from_polar(1.0, -w * s))
            .collect();
        RotorState {
            coeffs,
            reference_time: self.t0 + s,
            ..template.clone()
        }
    }
}

struct Scratch {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
    phases: Vec<Complex64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Scratch {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z.clone(),
            phases: vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)],
        }
    }
}

/// Nominal integrator step for a configuration, fs.
pub fn step_size(pulse: &PulseKernel, config: &RunConfig) -> f64 {
    pulse.fwhm() / config.steps_per_fwhm as f64
}

/// Propagate through the pulse, returning the state at the end of the
/// envelope window.
///
/// The input is taken as the state at switch-on. The basis is extended to
/// `config.j_max`; the run fails if the top two levels end up holding more
/// than `config.truncation_tolerance` or if the norm drifts by more than
/// `config.norm_tolerance`.
pub fn propagate_pulse(
    state: &RotorState,
    pulse: &PulseKernel,
    molecule: &MoleculeSpec,
    config: &RunConfig,
) -> Result<RotorState> {
    propagate_pulse_sampled(state, pulse, molecule, config, &[]).map(|(end, _)| end)
}

/// [`propagate_pulse`], also returning the state at each of `sample_times`
/// (fs from the peak; each must lie inside the envelope window).
///
/// Samples are branched off the main trajectory with a partial step, so
/// requesting them does not change the end state.
pub fn propagate_pulse_sampled(
    state: &RotorState,
    pulse: &PulseKernel,
    molecule: &MoleculeSpec,
    config: &RunConfig,
    sample_times: &[f64],
) -> Result<(RotorState, Vec<RotorState>)> {
    let norm0 = state.norm_sqr();
    if (norm0 - 1.0).abs() > config.norm_tolerance {
        return Err(Error::Domain(format!("input state is not normalized (|F|² = {norm0})")));
    }
    if state.j_offset > config.j_max {
        return Err(Error::Domain(format!(
            "state starts at J = {} above j_max = {}",
            state.j_offset, config.j_max
        )));
    }
    for &t in sample_times {
        if !(t >= pulse.start() && t <= pulse.end()) {
            return Err(Error::Grid(format!(
                "sample time {t} fs lies outside the pulse window [{}, {}]",
                pulse.start(),
                pulse.end()
            )));
        }
    }
    let mut start = state.on_ladder_to(config.j_max);
    start.reference_time = pulse.start();

    let prop = Propagator::new(&start, pulse, molecule)?;
    let window = pulse.end() - pulse.start();
    let nominal = step_size(pulse, config);
    let n_steps = (window / nominal).ceil().max(1.0) as usize;
    let h = window / n_steps as f64;

    let mut order: Vec<usize> = (0..sample_times.len()).collect();
    order.sort_by(|&a, &b| sample_times[a].total_cmp(&sample_times[b]));
    let mut samples: Vec<Option<RotorState>> = vec![None; sample_times.len()];
    let mut next = 0;

    let mut a = start.coeffs.clone();
    let mut scratch = Scratch::new(a.len());
    if pulse.is_field_free() {
        for &idx in &order {
            samples[idx] = Some(prop.to_state(&start, &a, sample_times[idx] - prop.t0));
        }
    } else {
        for step in 0..n_steps {
            let s = step as f64 * h;
            while next < order.len() {
                let idx = order[next];
                let ds = sample_times[idx] - prop.t0 - s;
                if ds > h && step + 1 < n_steps {
                    break;
                }
                let branch = if ds <= 0.0 {
                    a.clone()
                } else {
                    prop.step(s, ds, &a, &mut scratch)
                };
                samples[idx] = Some(prop.to_state(&start, &branch, s + ds.max(0.0)));
                next += 1;
            }
            a = prop.step(s, h, &a, &mut scratch);
        }
    }
    let end = prop.to_state(&start, &a, window);

    let drift = (end.norm_sqr() - norm0).abs();
    if drift > config.norm_tolerance {
        return Err(Error::NormDrift {
            drift,
            tolerance: config.norm_tolerance,
            step_fs: h,
        });
    }
    let occupancy = end.top_occupancy();
    if occupancy > config.truncation_tolerance {
        return Err(Error::Truncation {
            occupancy,
            tolerance: config.truncation_tolerance,
            j_max: config.j_max,
            suggested_j_max: config.j_max + 10,
        });
    }
    Ok((
        end,
        samples
            .into_iter()
            .map(|s| s.expect("every sample is visited"))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d2() -> MoleculeSpec {
        MoleculeSpec::deuterium()
    }

    fn reference_pulse() -> PulseKernel {
        PulseKernel::from_spec(&PulseSpec::default()).unwrap()
    }

    #[test]
    fn initial_state_bookkeeping() {
        let s = initial_state(0, 0, 20).unwrap();
        assert_eq!(s.j_offset(), 0);
        assert_eq!(s.coefficient(0), Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(s.top_j(), 20);

        let s = initial_state(2, -1, 20).unwrap();
        assert_eq!(s.j_offset(), 2);
        assert_eq!(s.coefficient(2), Complex64::new(1.0, 0.0));
        assert!(s.j_values().all(|j| j % 2 == 0));

        let s = initial_state(3, 2, 20).unwrap();
        assert_eq!(s.j_offset(), 3);
        assert_eq!(s.top_j(), 19);

        assert!(initial_state(3, 4, 20).is_err());
        assert!(initial_state(21, 0, 20).is_err());
    }

    #[test]
    fn frequencies() {
        assert_eq!(rotational_frequency(0, 30.4436), 0.0);
        let b = 30.4436;
        let bc_thz = crate::constants::wavenumber_to_hz(b) * 1e-12;
        let w2 = rotational_frequency(2, b);
        assert!((w2 / (2.0 * PI) * 1e3 - 6.0 * bc_thz).abs() < 1e-9);
        assert!((6.0 * bc_thz - 5.476).abs() < 1e-3);
        let beat = (rotational_frequency(3, b) - rotational_frequency(1, b)) / (2.0 * PI) * 1e3;
        assert!((beat - 9.127).abs() < 1e-3);
    }

    #[test]
    fn kernel_shape() {
        let k = reference_pulse();
        assert_eq!(k.intensity(0.0), 2e18);
        assert!((k.intensity(6.0) / 2e18 - 0.5).abs() < 1e-12);
        assert!((k.intensity(-6.0) / 2e18 - 0.5).abs() < 1e-12);
        assert_eq!(k.intensity(36.1), 0.0);
        assert!(k.intensity(36.0) / 2e18 < 1e-6 * 1.01);
        assert!((k.start() + 36.0).abs() < 1e-12 && (k.end() - 36.0).abs() < 1e-12);
        // 0.119 rad/fs × 12 fs × √(π/4ln2)
        assert!((k.kick_strength(&d2()) - 1.523).abs() < 2e-3);
    }

    #[test]
    fn free_evolution_identities() {
        let mol = d2();
        let mut s = initial_state(0, 0, 6).unwrap();
        s.coeffs = vec![
            Complex64::new(0.5, 0.1),
            Complex64::new(-0.3, 0.6),
            Complex64::new(0.2, -0.1),
            Complex64::new(0.0, 0.0),
        ];
        let n = s.norm_sqr().sqrt();
        s.coeffs.iter_mut().for_each(|c| *c /= n);

        let same = evolve_free(&s, 0.0, &mol);
        assert_eq!(same.coeffs, s.coeffs);

        let t_rev = mol.revival_period();
        let back = evolve_free(&s, t_rev, &mol);
        for (a, b) in back.coeffs.iter().zip(&s.coeffs) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((back.reference_time() - t_rev).abs() < 1e-12);

        let half = evolve_free(&s, 0.5 * t_rev, &mol);
        for (k, (a, b)) in half.coeffs.iter().zip(&s.coeffs).enumerate() {
            let j = 2 * k as u32;
            let sign = if (j * (j + 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            assert!((a - b * sign).norm() < 1e-12, "J = {j}");
            let direct =
                b * Complex64::from_polar(1.0, -rotational_frequency(j, mol.rotational_constant) * 0.5 * t_rev);
            assert!((a - direct).norm() < 1e-12);
        }

        let e0 = s.mean_frequency(&mol);
        let e1 = evolve_free(&s, 1234.5, &mol).mean_frequency(&mol);
        assert!(((e1 - e0) / e0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_leaves_populations() {
        let pulse = PulseKernel::new(0.0, 12.0, 3.0).unwrap();
        let cfg = RunConfig::default();
        let s = initial_state(2, 1, cfg.j_max).unwrap();
        let out = propagate_pulse(&s, &pulse, &d2(), &cfg).unwrap();
        for j in out.j_values() {
            assert_eq!(out.coefficient(j).norm_sqr(), s.coefficient(j).norm_sqr());
        }
        assert_eq!(out.reference_time(), 36.0);
    }

    #[test]
    fn reference_pulse_spreads_population() {
        let cfg = RunConfig::default();
        let s = initial_state(0, 0, cfg.j_max).unwrap();
        let out = propagate_pulse(&s, &reference_pulse(), &d2(), &cfg).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-8);
        assert!(out.coefficient(2).norm_sqr() > 0.1);
        assert!(out.coefficient(4).norm_sqr() > 1e-3);
        assert!(out.j_values().all(|j| j % 2 == 0));
    }

    #[test]
    fn truncation_is_reported() {
        let cfg = RunConfig {
            j_max: 4,
            j_init_cut: 0,
            ..RunConfig::default()
        };
        let s = initial_state(0, 0, cfg.j_max).unwrap();
        let err = propagate_pulse(&s, &reference_pulse(), &d2(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Truncation { j_max: 4, .. }), "{err:?}");
        assert!(err.is_convergence());
    }

    #[test]
    fn norm_drift_is_reported() {
        let cfg = RunConfig {
            steps_per_fwhm: 2,
            j_max: 120,
            truncation_tolerance: 1.0,
            ..RunConfig::default()
        };
        let strong = PulseKernel::new(2e20, 12.0, 3.0).unwrap();
        let s = initial_state(0, 0, cfg.j_max).unwrap();
        let err = propagate_pulse(&s, &strong, &d2(), &cfg).unwrap_err();
        assert!(matches!(err, Error::NormDrift { .. }), "{err:?}");
    }

    #[test]
    fn samples_do_not_perturb_trajectory() {
        let cfg = RunConfig::default();
        let pulse = reference_pulse();
        let s = initial_state(1, 0, cfg.j_max).unwrap();
        let plain = propagate_pulse(&s, &pulse, &d2(), &cfg).unwrap();
        let times = [10.0, -36.0, 0.0, 36.0, 17.3];
        let (end, samples) = propagate_pulse_sampled(&s, &pulse, &d2(), &cfg, &times).unwrap();
        assert_eq!(end, plain);
        assert_eq!(samples.len(), times.len());
        for (t, st) in times.iter().zip(&samples) {
            assert!((st.reference_time() - t).abs() < 1e-9);
            assert!((st.norm_sqr() - 1.0).abs() < 1e-9);
        }
        for (a, b) in samples[3].coeffs().iter().zip(end.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!(propagate_pulse_sampled(&s, &pulse, &d2(), &cfg, &[40.0]).is_err());
    }
}
