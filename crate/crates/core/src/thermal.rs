//! Thermal populations and the propagated ensemble.
//!
//! The thermal state is diagonal in `|J, M⟩`, so every initial state is
//! propagated on its own and observables are summed with Boltzmann and
//! nuclear-spin weights. `M` and `−M` give identical observables; only
//! `M ≥ 0` is propagated and `M > 0` carries double weight.

use rayon::prelude::*;

use crate::config::{Config, MoleculeSpec, RunConfig};
use crate::constants::{BOLTZMANN, PLANCK, SPEED_OF_LIGHT_CM};
use crate::error::{Error, Result};
use crate::rotor::{evolve_free, initial_state, propagate_pulse_sampled, PulseKernel, RotorState};

/// Room-temperature D₂ populations for J = 0..=6 used to pin the temperature.
pub const REFERENCE_ROOM_TEMPERATURE_POPULATIONS: [f64; 7] = [0.185, 0.208, 0.386, 0.112, 0.0899, 0.0128, 0.00522];

/// Temperature search range for [`tune_temperature`], K.
pub const ROOM_TEMPERATURE_RANGE: (f64, f64) = (290.0, 300.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationEntry {
    pub j: u32,
    pub population: f64,
    pub spin_weight: u32,
}

impl PopulationEntry {
    /// Weight of each of the `2J+1` degenerate `M` sublevels.
    pub fn per_m_weight(&self) -> f64 {
        self.population / (2 * self.j + 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTable {
    pub temperature: f64,
    pub entries: Vec<PopulationEntry>,
}

impl PopulationTable {
    pub fn population(&self, j: u32) -> f64 {
        self.entries.get(j as usize).map(|e| e.population).unwrap_or(0.0)
    }

    pub fn j_cut(&self) -> u32 {
        self.entries.len() as u32 - 1
    }

    /// Largest absolute deviation from `reference[J]`, J = 0, 1, ….
    pub fn max_deviation(&self, reference: &[f64]) -> f64 {
        reference
            .iter()
            .enumerate()
            .map(|(j, r)| (self.population(j as u32) - r).abs())
            .fold(0.0, f64::max)
    }
}

fn boltzmann_terms(temperature: f64, molecule: &MoleculeSpec, j_cut: u32) -> (Vec<f64>, f64) {
    let beta_e = PLANCK * SPEED_OF_LIGHT_CM * molecule.rotational_constant / (BOLTZMANN * temperature);
    let term = |j: u32| {
        let jf = j as f64;
        molecule.spin_weight(j) as f64 * (2.0 * jf + 1.0) * (-beta_e * jf * (jf + 1.0)).exp()
    };
    let kept: Vec<f64> = (0..=j_cut).map(term).collect();
    let mut tail = 0.0;
    let mut j = j_cut + 1;
    loop {
        let t = term(j);
        tail += t;
        if t < 1e-30 * kept[0] || j > j_cut + 100_000 {
            break;
        }
        j += 1;
    }
    (kept, tail)
}

/// `P(J) ∝ g_ns(J)·(2J+1)·exp(−hcB·J(J+1)/k_BT)` over `J ≤ j_cut`, with the
/// default tail tolerance of [`RunConfig`].
pub fn boltzmann_populations(temperature: f64, molecule: &MoleculeSpec, j_cut: u32) -> Result<PopulationTable> {
    boltzmann_populations_with_tail(
        temperature,
        molecule,
        j_cut,
        RunConfig::default().population_tail_tolerance,
    )
}

/// As [`boltzmann_populations`]; fails when the thermal weight above
/// `j_cut` exceeds `tail_tolerance`.
pub fn boltzmann_populations_with_tail(
    temperature: f64,
    molecule: &MoleculeSpec,
    j_cut: u32,
    tail_tolerance: f64,
) -> Result<PopulationTable> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    molecule.validate()?;
    let (kept, tail) = boltzmann_terms(temperature, molecule, j_cut);
    let kept_sum: f64 = kept.iter().sum();
    let tail_fraction = tail / (kept_sum + tail);
    if tail_fraction > tail_tolerance {
        return Err(Error::TailMass {
            j_cut,
            tail: tail_fraction,
            tolerance: tail_tolerance,
        });
    }
    let entries = kept
        .iter()
        .enumerate()
        .map(|(j, t)| PopulationEntry {
            j: j as u32,
            population: t / kept_sum,
            spin_weight: molecule.spin_weight(j as u32),
        })
        .collect();
    Ok(PopulationTable { temperature, entries })
}

/// Temperature in `range` whose populations best match `reference` in the
/// max-abs sense, scanned on a 0.01 K grid. Returns `(T, deviation)`.
pub fn tune_temperature(molecule: &MoleculeSpec, reference: &[f64], range: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = range;
    if !(hi >= lo && lo > 0.0) {
        return Err(Error::Domain(format!("bad temperature range [{lo}, {hi}]")));
    }
    let j_cut = reference.len() as u32 + 40;
    let steps = ((hi - lo) / 0.01).round() as usize;
    let mut best = (lo, f64::INFINITY);
    for k in 0..=steps {
        let t = lo + k as f64 * 0.01;
        let dev = boltzmann_populations_with_tail(t, molecule, j_cut, 1.0)?.max_deviation(reference);
        if dev < best.1 {
            best = (t, dev);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub j: u32,
    /// Nonnegative; `M > 0` stands for both signs.
    pub m: i32,
    pub weight: f64,
    /// Unperturbed `|J, M⟩`.
    pub initial: RotorState,
    /// State at the snapshot time.
    pub state: RotorState,
}

/// Weighted set of post-pulse rotor states sharing one snapshot time.
#[derive(Debug, Clone)]
pub struct ThermalEnsemble {
    members: Vec<EnsembleMember>,
    snapshot_time: f64,
    temperature: f64,
    pulse: PulseKernel,
    molecule: MoleculeSpec,
    config: RunConfig,
}

impl ThermalEnsemble {
    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn snapshot_time(&self) -> f64 {
        self.snapshot_time
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn molecule(&self) -> &MoleculeSpec {
        &self.molecule
    }

    pub fn pulse(&self) -> &PulseKernel {
        &self.pulse
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|m| m.weight).sum()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.members
            .iter()
            .map(|m| (m.state.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_top_occupancy(&self) -> f64 {
        self.members.iter().map(|m| m.state.top_occupancy()).fold(0.0, f64::max)
    }

    /// States of member `index` at each of `times`.
    ///
    /// Before switch-on the member is its unperturbed eigenstate, inside the
    /// envelope window it is re-propagated, and afterwards it evolves freely
    /// from the snapshot.
    pub fn states_at(&self, index: usize, times: &[f64]) -> Result<Vec<RotorState>> {
        let member = &self.members[index];
        let in_pulse: Vec<f64> = times
            .iter()
            .copied()
            .filter(|&t| t > self.pulse.start() && t < self.snapshot_time)
            .collect();
        let mut in_pulse_states = if in_pulse.is_empty() {
            Vec::new()
        } else {
            propagate_pulse_sampled(&member.initial, &self.pulse, &self.molecule, &self.config, &in_pulse)
                .map_err(|e| Error::Member {
                    j: member.j,
                    m: member.m,
                    source: Box::new(e),
                })?
                .1
        }
        .into_iter();
        Ok(times
            .iter()
            .map(|&t| {
                if t <= self.pulse.start() {
                    member.initial.clone()
                } else if t < self.snapshot_time {
                    in_pulse_states.next().expect("one sample per in-pulse time")
                } else {
                    evolve_free(&member.state, t - self.snapshot_time, &self.molecule)
                }
            })
            .collect())
    }
}

/// Propagate every `(J_i, M_i ≥ 0)` with `J_i ≤ config.j_init_cut` through
/// the pulse. Weights are `P(J)/(2J+1)`, doubled for `M > 0`, and
/// renormalized over the kept states.
pub fn build_ensemble(
    table: &PopulationTable,
    pulse: &PulseKernel,
    molecule: &MoleculeSpec,
    config: &RunConfig,
) -> Result<ThermalEnsemble> {
    let total: f64 = table.entries.iter().map(|e| e.population).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("population table sums to {total}")));
    }
    let mut jobs = Vec::new();
    for entry in table.entries.iter().filter(|e| e.j <= config.j_init_cut) {
        for m in 0..=entry.j as i32 {
            let mult = if m == 0 { 1.0 } else { 2.0 };
            jobs.push((entry.j, m, mult * entry.per_m_weight()));
        }
    }
    let norm: f64 = jobs.iter().map(|j| j.2).sum();
    if !(norm > 0.0) {
        return Err(Error::Domain("no thermal weight below j_init_cut".into()));
    }

    // Collecting a parallel iterator keeps input order, so results do not
    // depend on the thread count.
    let members = jobs
        .par_iter()
        .map(|&(j, m, w)| {
            let wrap = |e: Error| Error::Member {
                j,
                m,
                source: Box::new(e),
            };
            let initial = initial_state(j, m, config.j_max).map_err(wrap)?;
            let (state, _) = propagate_pulse_sampled(&initial, pulse, molecule, config, &[]).map_err(wrap)?;
            Ok(EnsembleMember {
                j,
                m,
                weight: w / norm,
                initial,
                state,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ThermalEnsemble {
        members,
        snapshot_time: pulse.end(),
        temperature: table.temperature,
        pulse: pulse.clone(),
        molecule: molecule.clone(),
        config: config.clone(),
    })
}

/// Populations for `config`: the configured temperature, or the tuned
/// room-temperature value when `run.tune_temperature` is set.
pub fn population_table(config: &Config) -> Result<PopulationTable> {
    let temperature = if config.run.tune_temperature {
        tune_temperature(
            &config.molecule,
            &REFERENCE_ROOM_TEMPERATURE_POPULATIONS,
            ROOM_TEMPERATURE_RANGE,
        )?
        .0
    } else {
        config.run.temperature
    };
    boltzmann_populations_with_tail(
        temperature,
        &config.molecule,
        config.run.j_init_cut,
        config.run.population_tail_tolerance,
    )
}

/// Pumped ensemble for a resolved configuration.
pub fn ensemble_from_config(config: &Config) -> Result<ThermalEnsemble> {
    let table = population_table(config)?;
    let pulse = PulseKernel::from_spec(&config.pulse)?;
    build_ensemble(&table, &pulse, &config.molecule, &config.run)
}
