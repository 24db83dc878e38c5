//! Alignment traces, angular densities, quantum carpets and the detector
//! signal model.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::angular::{cos2_band, Cos2Band};
use crate::error::{Error, Result};
use crate::quadrature::{clenshaw_curtis_weights, gauss_legendre, normalized_legendre, ChebyshevSeries};
use crate::rotor::RotorState;
use crate::thermal::ThermalEnsemble;

/// Values on a strictly increasing time grid (fs).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Grid(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        check_times(&times)?;
        Ok(TimeSeries { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Indices whose time lies in `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.times.partition_point(|&t| t < lo);
        let b = self.times.partition_point(|&t| t <= hi);
        a..b.max(a)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Grid("non-finite time".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Where a trace came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMetadata {
    pub molecule: String,
    pub rotational_constant: f64,
    pub delta_alpha: f64,
    /// W/m²
    pub peak_intensity: f64,
    pub fwhm: f64,
    pub temperature: f64,
}

impl TraceMetadata {
    fn from_ensemble(ensemble: &ThermalEnsemble) -> Self {
        let m = ensemble.molecule();
        TraceMetadata {
            molecule: m.name.clone(),
            rotational_constant: m.rotational_constant,
            delta_alpha: m.delta_alpha,
            peak_intensity: ensemble.pulse().peak(),
            fwhm: ensemble.pulse().fwhm(),
            temperature: ensemble.temperature(),
        }
    }
}

/// Thermal ⟨cos²θ⟩ against delay.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentTrace {
    pub series: TimeSeries,
    pub metadata: TraceMetadata,
}

impl AlignmentTrace {
    pub fn times(&self) -> &[f64] {
        &self.series.times
    }

    pub fn values(&self) -> &[f64] {
        &self.series.values
    }
}

/// `⟨cos²θ⟩ = Σ c_JJ|F_J|² + 2·Re Σ c_{J,J+2}·F_J*·F_{J+2}`.
pub fn expectation_cos2(state: &RotorState, band: &Cos2Band) -> Result<f64> {
    if band.m().unsigned_abs() != state.m().unsigned_abs() {
        return Err(Error::Domain(format!(
            "band for M = {} applied to state with M = {}",
            band.m(),
            state.m()
        )));
    }
    if band.j_max() < state.top_j() {
        return Err(Error::Domain(format!(
            "band stops at J = {} but state reaches J = {}",
            band.j_max(),
            state.top_j()
        )));
    }
    let c = state.coeffs();
    let j0 = state.j_offset();
    let mut total = 0.0;
    for (k, f) in c.iter().enumerate() {
        let j = j0 + 2 * k as u32;
        total += band.diag_at(j).unwrap_or(0.0) * f.norm_sqr();
        if let Some(next) = c.get(k + 1) {
            total += 2.0 * band.couple_at(j).unwrap_or(0.0) * (f.conj() * next).re;
        }
    }
    Ok(total)
}

/// Per member, run `f` on its state at every time; sum with weights in
/// member order.
fn ensemble_reduce<F>(ensemble: &ThermalEnsemble, times: &[f64], width: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(usize, &RotorState, &mut [f64]) -> Result<()> + Sync,
{
    let per_member = (0..ensemble.members().len())
        .into_par_iter()
        .map(|idx| {
            let states = ensemble.states_at(idx, times)?;
            let mut out = vec![0.0; times.len() * width];
            for (state, row) in states.iter().zip(out.chunks_mut(width)) {
                f(idx, state, row)?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![0.0; times.len() * width];
    for (member, values) in ensemble.members().iter().zip(per_member) {
        for (t, v) in total.iter_mut().zip(values) {
            *t += member.weight * v;
        }
    }
    Ok(total)
}

/// Weighted ⟨cos²θ⟩ of the ensemble at each time.
///
/// Before the envelope switches on every member is an eigenstate and the
/// thermal value is the isotropic 1/3.
pub fn alignment_trace(ensemble: &ThermalEnsemble, times: &[f64]) -> Result<AlignmentTrace> {
    check_times(times)?;
    let bands = ensemble
        .members()
        .iter()
        .map(|m| cos2_band(m.m, m.state.top_j()))
        .collect::<Result<Vec<_>>>()?;
    let values = ensemble_reduce(ensemble, times, 1, |idx, state, row| {
        row[0] = expectation_cos2(state, &bands[idx])?;
        Ok(())
    })?;
    Ok(AlignmentTrace {
        series: TimeSeries {
            times: times.to_vec(),
            values,
        },
        metadata: TraceMetadata::from_ensemble(ensemble),
    })
}

/// `|Σ_J F_J·Θ_{JM}(θ)|² / 2π`, per steradian.
pub fn angular_density(state: &RotorState, theta: f64) -> f64 {
    let am = state.m().unsigned_abs();
    let p = normalized_legendre(am, state.top_j(), theta.cos());
    density_from_table(state, &p)
}

fn density_from_table(state: &RotorState, legendre: &[f64]) -> f64 {
    let skip = (state.j_offset() - state.m().unsigned_abs()) as usize;
    let amp = state
        .coeffs()
        .iter()
        .zip(legendre.iter().skip(skip).step_by(2))
        .fold(num_complex::Complex64::new(0.0, 0.0), |acc, (c, p)| acc + c * *p);
    amp.norm_sqr() / (2.0 * PI)
}

/// Periodic uniform grid `θ_k = −π + 2πk/n`, `k = 0..n`, with `n` even.
///
/// Reflections `θ → −θ` and `θ → π − θ` map grid points onto grid points,
/// and the points in [0, π] are Clenshaw–Curtis nodes in `cos θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaGrid {
    n: usize,
}

impl ThetaGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::Grid(format!("theta point count must be even, got {n}")));
        }
        Ok(ThetaGrid { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self, k: usize) -> f64 {
        -PI + 2.0 * PI * k as f64 / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.theta(k)).collect()
    }

    /// Index of the point with angle `θ`, if on the grid.
    pub fn index_of(&self, theta: f64) -> Option<usize> {
        let k = ((theta + PI) * self.n as f64 / (2.0 * PI)).round();
        let k = (k as i64).rem_euclid(self.n as i64) as usize;
        let wrapped = (self.theta(k) - theta).rem_euclid(2.0 * PI);
        (wrapped.min(2.0 * PI - wrapped) < 1e-9).then_some(k)
    }

    /// Clenshaw–Curtis order: grid points in [0, π] are `iπ/order`.
    fn order(&self) -> usize {
        self.n / 2
    }

    /// Folded index `r` with `θ = 2πr/n ∈ [0, π/2]` sharing the density of point `k`.
    fn fold(&self, k: usize) -> usize {
        let half = self.n / 2;
        let j = (k as i64 - half as i64).unsigned_abs() as usize;
        if 4 * j > self.n {
            half - j
        } else {
            j
        }
    }

    fn representatives(&self) -> usize {
        self.n / 4 + 1
    }
}

/// Thermal angular density on a (time, θ) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCarpet {
    pub times: Vec<f64>,
    pub grid: ThetaGrid,
    /// Row-major: `density[t * n_theta + k]`.
    pub density: Vec<f64>,
}

impl QuantumCarpet {
    pub fn thetas(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn at(&self, time_index: usize, theta_index: usize) -> f64 {
        self.density[time_index * self.grid.len() + theta_index]
    }

    pub fn column(&self, time_index: usize) -> &[f64] {
        let n = self.grid.len();
        &self.density[time_index * n..(time_index + 1) * n]
    }

    /// Density at the Clenshaw–Curtis nodes `θ_i = iπ/order`, `i = 0..=order`.
    fn cc_samples(&self, time_index: usize) -> Vec<f64> {
        let col = self.column(time_index);
        let half = self.grid.len() / 2;
        (0..=self.grid.order())
            .map(|i| col[(half + i) % self.grid.len()])
            .collect()
    }

    /// `2π∫₀^π ρ(θ)·g(θ)·sin θ dθ` by Clenshaw–Curtis on the grid.
    pub fn integrate_column<G: Fn(f64) -> f64>(&self, time_index: usize, g: G) -> f64 {
        let order = self.grid.order();
        let w = clenshaw_curtis_weights(order);
        self.cc_samples(time_index)
            .iter()
            .enumerate()
            .map(|(i, rho)| w[i] * rho * g(PI * i as f64 / order as f64))
            .sum::<f64>()
            * 2.0
            * PI
    }

    pub fn column_norm(&self, time_index: usize) -> f64 {
        self.integrate_column(time_index, |_| 1.0)
    }

    /// Interpolant of one column as a polynomial in `cos θ`.
    pub fn column_interpolant(&self, time_index: usize) -> ChebyshevSeries {
        ChebyshevSeries::from_samples(&self.cc_samples(time_index))
    }
}

/// `ρ(t, θ) = Σ_members w·|ψ(t, θ)|²`, computed on [0, π/2] and reflected.
pub fn quantum_carpet(ensemble: &ThermalEnsemble, times: &[f64], grid: ThetaGrid) -> Result<QuantumCarpet> {
    check_times(times)?;
    let reps = grid.representatives();
    let tables: Vec<Vec<Vec<f64>>> = ensemble
        .members()
        .iter()
        .map(|m| {
            let am = m.m.unsigned_abs();
            (0..reps)
                .map(|r| {
                    let theta = 2.0 * PI * r as f64 / grid.len() as f64;
                    normalized_legendre(am, m.state.top_j(), theta.cos())
                })
                .collect()
        })
        .collect();
    let folded = ensemble_reduce(ensemble, times, reps, |idx, state, row| {
        for (r, slot) in row.iter_mut().enumerate() {
            *slot = density_from_table(state, &tables[idx][r]);
        }
        Ok(())
    })?;
    let n = grid.len();
    let map: Vec<usize> = (0..n).map(|k| grid.fold(k)).collect();
    let mut density = vec![0.0; times.len() * n];
    for (ti, row) in density.chunks_mut(n).enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = folded[ti * reps + map[k]];
        }
    }
    Ok(QuantumCarpet {
        times: times.to_vec(),
        grid,
        density,
    })
}

/// Detector yield model: solid-angle mean of the carpet density over a cone
/// of `half_angle` about the direction at `theta_pump` from the pump
/// polarization, normalized to unit mean over the carpet's times.
pub fn detector_signal(carpet: &QuantumCarpet, theta_pump: f64, half_angle: f64) -> Result<TimeSeries> {
    if !(half_angle > 0.0 && half_angle <= PI) {
        return Err(Error::Domain(format!(
            "cone half-angle must lie in (0, π], got {half_angle}"
        )));
    }
    if !theta_pump.is_finite() {
        return Err(Error::Domain("pump angle must be finite".into()));
    }
    let order = carpet.grid.order();
    // Exact for the band-limited interpolant: degree `order` in cos θ.
    let (gx, gw) = gauss_legendre(order / 2 + 8);
    let n_azimuth = order + 8;
    let cos_a = half_angle.cos();
    let (st, ct) = theta_pump.sin_cos();
    let mut points = Vec::with_capacity(gx.len() * n_azimuth);
    for (&x, &w) in gx.iter().zip(&gw) {
        let u = 0.5 * (1.0 - cos_a) * x + 0.5 * (1.0 + cos_a);
        let s = (1.0 - u * u).max(0.0).sqrt();
        for c in 0..n_azimuth {
            let chi = 2.0 * PI * c as f64 / n_azimuth as f64;
            let cos_theta = (ct * u + st * s * chi.cos()).clamp(-1.0, 1.0);
            points.push((cos_theta, w));
        }
    }
    let weight_sum: f64 = points.iter().map(|p| p.1).sum();
    let raw: Vec<f64> = (0..carpet.times.len())
        .into_par_iter()
        .map(|ti| {
            let series = carpet.column_interpolant(ti);
            points.iter().map(|&(x, w)| w * series.eval(x)).sum::<f64>() / weight_sum
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Domain("detector signal has no positive mean".into()));
    }
    TimeSeries::new(carpet.times.clone(), raw.into_iter().map(|v| v / mean).collect())
}
