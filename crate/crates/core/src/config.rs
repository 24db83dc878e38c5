//! Molecule, pulse and run configuration.
//!
//! Documents are flat `section.key = value` lines with `#` comments. Every
//! key has a default except `molecule.name`; unknown keys are rejected. The
//! `diagnostics` section is reserved for run manifests and ignored on load,
//! so a manifest can be fed back in to reproduce its run.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::constants::{wavenumber_to_hz, wavenumber_to_rad_per_fs};
use crate::error::{Error, Result};

/// Section of a config document that is never interpreted as configuration.
pub const DIAGNOSTICS_SECTION: &str = "diagnostics";

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeSpec {
    pub name: String,
    /// cm⁻¹
    pub rotational_constant: f64,
    /// Polarizability-volume anisotropy α∥ − α⊥, Å³.
    pub delta_alpha: f64,
    pub spin_weight_even: u32,
    pub spin_weight_odd: u32,
}

impl MoleculeSpec {
    /// Ground-state D₂ with ortho:para weights 6:3.
    pub fn deuterium() -> Self {
        MoleculeSpec {
            name: "D2".to_string(),
            rotational_constant: 30.4436,
            delta_alpha: 0.30,
            spin_weight_even: 6,
            spin_weight_odd: 3,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "D2" => Some(Self::deuterium()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rotational_constant > 0.0) || !self.rotational_constant.is_finite() {
            return Err(Error::validation(
                "molecule.rotational_constant",
                "must be a positive finite number",
            ));
        }
        if !(self.delta_alpha >= 0.0) || !self.delta_alpha.is_finite() {
            return Err(Error::validation(
                "molecule.delta_alpha",
                "must be nonnegative and finite",
            ));
        }
        if self.spin_weight_even == 0 {
            return Err(Error::validation(
                "molecule.spin_weight_even",
                "must be a positive integer",
            ));
        }
        if self.spin_weight_odd == 0 {
            return Err(Error::validation(
                "molecule.spin_weight_odd",
                "must be a positive integer",
            ));
        }
        Ok(())
    }

    pub fn spin_weight(&self, j: u32) -> u32 {
        if j.is_multiple_of(2) {
            self.spin_weight_even
        } else {
            self.spin_weight_odd
        }
    }

    /// `Bc` in THz.
    pub fn bc_thz(&self) -> f64 {
        wavenumber_to_hz(self.rotational_constant) * 1e-12
    }

    /// `2πBc` in rad/fs; level `J` sits at `J(J+1)` times this.
    pub fn angular_unit(&self) -> f64 {
        wavenumber_to_rad_per_fs(self.rotational_constant)
    }

    /// Full revival period `1/(2Bc)` in fs.
    pub fn revival_period(&self) -> f64 {
        1e15 / (2.0 * wavenumber_to_hz(self.rotational_constant))
    }

    /// Frequency of the `J ↔ J+2` beat, `Bc(4J+6)`, in THz.
    pub fn beat_frequency(&self, j: u32) -> f64 {
        self.bc_thz() * (4.0 * j as f64 + 6.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    /// nm; only the cycle-averaged field enters the dynamics.
    pub wavelength: f64,
    /// Intensity FWHM, fs.
    pub fwhm: f64,
    /// W/cm²
    pub peak_intensity: f64,
    /// Angle of the pump polarization to the detector axis, rad.
    pub polarization_angle: f64,
    /// Half-width of the simulated envelope in units of the FWHM.
    pub envelope_cutoff: f64,
}

impl Default for PulseSpec {
    fn default() -> Self {
        PulseSpec {
            wavelength: 800.0,
            fwhm: 12.0,
            peak_intensity: 2e14,
            polarization_angle: PI / 2.0,
            envelope_cutoff: 3.0,
        }
    }
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) || !self.wavelength.is_finite() {
            return Err(Error::validation("pulse.wavelength", "must be positive"));
        }
        if !(self.fwhm > 0.0) || !self.fwhm.is_finite() {
            return Err(Error::validation("pulse.fwhm_duration", "must be positive"));
        }
        if !(self.peak_intensity >= 0.0) || !self.peak_intensity.is_finite() {
            return Err(Error::validation("pulse.peak_intensity", "must be nonnegative"));
        }
        if !(self.polarization_angle.abs() <= PI) {
            return Err(Error::validation("pulse.polarization_angle", "must lie in [-pi, pi]"));
        }
        if !(self.envelope_cutoff > 0.0) || !self.envelope_cutoff.is_finite() {
            return Err(Error::validation("pulse.envelope_cutoff", "must be positive"));
        }
        Ok(())
    }

    /// Time at which the simulated envelope ends, fs after the peak.
    pub fn end_time(&self) -> f64 {
        self.envelope_cutoff * self.fwhm
    }
}

/// Uniform grid `start, start + step, …` up to and including `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Grid(format!("time step must be positive, got {step}")));
        }
        if !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::Grid(format!("empty time window [{start}, {stop}]")));
        }
        Ok(TimeGrid { start, stop, step })
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid points; computed as `start + k·step` so no error accumulates.
    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    /// Thermal ensemble driven by the configured pulse.
    Simulation,
    /// Field-free (|0,0⟩ + |2,0⟩)/√2, a single coherence.
    TwoLevel,
}

impl SpectrumSource {
    fn as_str(self) -> &'static str {
        match self {
            SpectrumSource::Simulation => "simulation",
            SpectrumSource::TwoLevel => "two_level",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSettings {
    pub t_start: f64,
    pub t_stop: f64,
    pub zero_padding: usize,
    /// Peak floor as a fraction of the largest amplitude.
    pub peak_floor: f64,
    pub source: SpectrumSource,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        SpectrumSettings {
            t_start: 200.0,
            t_stop: 3000.0,
            zero_padding: 8,
            peak_floor: 0.02,
            source: SpectrumSource::Simulation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// K
    pub temperature: f64,
    /// Replace `temperature` by the best match to the room-temperature
    /// reference populations within [290, 300] K.
    pub tune_temperature: bool,
    /// Highest J kept in any propagation basis.
    pub j_max: u32,
    /// Highest initial J in the thermal ensemble.
    pub j_init_cut: u32,
    pub time_grid: TimeGrid,
    /// Points on the periodic grid over [−π, π).
    pub theta_points: usize,
    pub norm_tolerance: f64,
    pub truncation_tolerance: f64,
    pub population_tail_tolerance: f64,
    pub smoothing_window: usize,
    /// rad
    pub detector_half_angle: f64,
    /// Integrator steps per pulse FWHM.
    pub steps_per_fwhm: u32,
    pub spectrum: SpectrumSettings,
    pub revival_count: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            temperature: 295.0,
            tune_temperature: false,
            j_max: 38,
            j_init_cut: 8,
            time_grid: TimeGrid {
                start: 0.0,
                stop: 800.0,
                step: 1.0,
            },
            theta_points: 128,
            norm_tolerance: 1e-8,
            truncation_tolerance: 1e-10,
            population_tail_tolerance: 1e-5,
            smoothing_window: 11,
            detector_half_angle: 2.0_f64.to_radians(),
            steps_per_fwhm: 1200,
            spectrum: SpectrumSettings::default(),
            revival_count: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::validation("run.temperature", "must be positive"));
        }
        if self.j_max < self.j_init_cut + 8 {
            return Err(Error::validation(
                "run.j_max",
                format!("must be at least j_init_cut + 8 = {}", self.j_init_cut + 8),
            ));
        }
        let g = &self.time_grid;
        if !(g.step > 0.0) || !g.step.is_finite() {
            return Err(Error::validation("run.time_step", "must be positive"));
        }
        if !(g.stop >= g.start) || !g.start.is_finite() || !g.stop.is_finite() {
            return Err(Error::validation("run.time_stop", "must not precede run.time_start"));
        }
        if self.theta_points < 64 || !self.theta_points.is_multiple_of(2) {
            return Err(Error::validation("run.theta_points", "must be even and at least 64"));
        }
        for (key, v) in [
            ("run.norm_tolerance", self.norm_tolerance),
            ("run.truncation_tolerance", self.truncation_tolerance),
            ("run.population_tail_tolerance", self.population_tail_tolerance),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(key, "must be positive"));
            }
        }
        if self.smoothing_window == 0 || self.smoothing_window.is_multiple_of(2) {
            return Err(Error::validation("run.smoothing_window", "must be odd and positive"));
        }
        if !(self.detector_half_angle > 0.0 && self.detector_half_angle <= PI) {
            return Err(Error::validation("run.detector_half_angle", "must lie in (0, pi]"));
        }
        if self.steps_per_fwhm == 0 {
            return Err(Error::validation("run.steps_per_fwhm", "must be positive"));
        }
        let s = &self.spectrum;
        if !(s.t_stop > s.t_start) || !s.t_start.is_finite() || !s.t_stop.is_finite() {
            return Err(Error::validation("spectrum.t_stop", "must exceed spectrum.t_start"));
        }
        if s.zero_padding == 0 {
            return Err(Error::validation("spectrum.zero_padding", "must be positive"));
        }
        if !(s.peak_floor > 0.0 && s.peak_floor < 1.0) {
            return Err(Error::validation("spectrum.peak_floor", "must lie in (0, 1)"));
        }
        if self.revival_count == 0 {
            return Err(Error::validation("revivals.count", "must be at least 1"));
        }
        Ok(())
    }
}

/// A fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub molecule: MoleculeSpec,
    pub pulse: PulseSpec,
    pub run: RunConfig,
}

impl Config {
    /// D₂ with every default applied.
    pub fn deuterium() -> Self {
        Config {
            molecule: MoleculeSpec::deuterium(),
            pulse: PulseSpec::default(),
            run: RunConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.molecule.validate()?;
        self.pulse.validate()?;
        self.run.validate()?;
        let field_free_from = self.pulse.end_time();
        if self.run.spectrum.t_start < field_free_from {
            return Err(Error::validation(
                "spectrum.t_start",
                format!("window must be field-free, i.e. start at or after {field_free_from} fs"),
            ));
        }
        Ok(())
    }

    /// Serialize every key in a fixed order. Floats use Rust's shortest
    /// round-trip form, so `load_config(to_document())` is the identity.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let m = &self.molecule;
        let p = &self.pulse;
        let r = &self.run;
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("molecule.name", m.name.clone());
        line("molecule.rotational_constant", fmt_f64(m.rotational_constant));
        line("molecule.delta_alpha", fmt_f64(m.delta_alpha));
        line("molecule.spin_weight_even", m.spin_weight_even.to_string());
        line("molecule.spin_weight_odd", m.spin_weight_odd.to_string());
        line("pulse.wavelength", fmt_f64(p.wavelength));
        line("pulse.fwhm_duration", fmt_f64(p.fwhm));
        line("pulse.peak_intensity", fmt_f64(p.peak_intensity));
        line("pulse.polarization_angle", fmt_f64(p.polarization_angle));
        line("pulse.envelope_cutoff", fmt_f64(p.envelope_cutoff));
        line("run.temperature", fmt_f64(r.temperature));
        line("run.tune_temperature", r.tune_temperature.to_string());
        line("run.j_max", r.j_max.to_string());
        line("run.j_init_cut", r.j_init_cut.to_string());
        line("run.time_start", fmt_f64(r.time_grid.start));
        line("run.time_stop", fmt_f64(r.time_grid.stop));
        line("run.time_step", fmt_f64(r.time_grid.step));
        line("run.theta_points", r.theta_points.to_string());
        line("run.norm_tolerance", fmt_f64(r.norm_tolerance));
        line("run.truncation_tolerance", fmt_f64(r.truncation_tolerance));
        line("run.population_tail_tolerance", fmt_f64(r.population_tail_tolerance));
        line("run.smoothing_window", r.smoothing_window.to_string());
        line("run.detector_half_angle", fmt_f64(r.detector_half_angle));
        line("run.steps_per_fwhm", r.steps_per_fwhm.to_string());
        line("spectrum.t_start", fmt_f64(r.spectrum.t_start));
        line("spectrum.t_stop", fmt_f64(r.spectrum.t_stop));
        line("spectrum.zero_padding", r.spectrum.zero_padding.to_string());
        line("spectrum.peak_floor", fmt_f64(r.spectrum.peak_floor));
        line("spectrum.source", r.spectrum.source.as_str().to_string());
        line("revivals.count", r.revival_count.to_string());
        out
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Raw `key → (value, line)` pairs of a document, before interpretation.
#[derive(Debug, Clone, Default)]
pub struct Document {
    entries: BTreeMap<String, (String, usize)>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `section.key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let (section, name) = key.split_once('.').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("key `{key}` lacks a section prefix"),
            })?;
            let valid_ident = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid_ident(section) || !valid_ident(name) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("malformed key `{key}`"),
                });
            }
            if value.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("missing value for `{key}`"),
                });
            }
            if entries.insert(key.to_string(), (value.to_string(), line_no)).is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Document { entries })
    }

    /// Apply a `key=value` override, replacing any existing entry.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let parsed = Document::parse(assignment)?;
        if parsed.entries.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: format!("empty override `{assignment}`"),
            });
        }
        for (k, (v, _)) in parsed.entries {
            self.entries.insert(k, (v, 0));
        }
        Ok(())
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(v, _)| v)
    }

    pub fn resolve(mut self) -> Result<Config> {
        self.entries
            .retain(|k, _| !k.starts_with(&format!("{DIAGNOSTICS_SECTION}.")));

        let name = self
            .take("molecule.name")
            .ok_or_else(|| Error::validation("molecule.name", "mandatory key is missing"))?;
        let preset = MoleculeSpec::preset(&name);
        let mut molecule = match &preset {
            Some(p) => p.clone(),
            None => MoleculeSpec {
                name: name.clone(),
                rotational_constant: f64::NAN,
                delta_alpha: f64::NAN,
                spin_weight_even: 0,
                spin_weight_odd: 0,
            },
        };
        let custom = preset.is_none();
        read_f64(
            &mut self,
            "molecule.rotational_constant",
            &mut molecule.rotational_constant,
            custom,
        )?;
        read_f64(&mut self, "molecule.delta_alpha", &mut molecule.delta_alpha, custom)?;
        read_u32(
            &mut self,
            "molecule.spin_weight_even",
            &mut molecule.spin_weight_even,
            custom,
        )?;
        read_u32(
            &mut self,
            "molecule.spin_weight_odd",
            &mut molecule.spin_weight_odd,
            custom,
        )?;

        let mut pulse = PulseSpec::default();
        read_f64(&mut self, "pulse.wavelength", &mut pulse.wavelength, false)?;
        read_f64(&mut self, "pulse.fwhm_duration", &mut pulse.fwhm, false)?;
        read_f64(&mut self, "pulse.peak_intensity", &mut pulse.peak_intensity, false)?;
        if let Some(v) = self.take("pulse.polarization_angle") {
            pulse.polarization_angle = parse_angle(&v)
                .ok_or_else(|| Error::validation("pulse.polarization_angle", format!("not an angle: `{v}`")))?;
        }
        read_f64(&mut self, "pulse.envelope_cutoff", &mut pulse.envelope_cutoff, false)?;

        let mut run = RunConfig::default();
        read_f64(&mut self, "run.temperature", &mut run.temperature, false)?;
        read_bool(&mut self, "run.tune_temperature", &mut run.tune_temperature)?;
        read_u32(&mut self, "run.j_init_cut", &mut run.j_init_cut, false)?;
        run.j_max = run.j_init_cut + 30;
        read_u32(&mut self, "run.j_max", &mut run.j_max, false)?;
        read_f64(&mut self, "run.time_start", &mut run.time_grid.start, false)?;
        read_f64(&mut self, "run.time_stop", &mut run.time_grid.stop, false)?;
        read_f64(&mut self, "run.time_step", &mut run.time_grid.step, false)?;
        read_usize(&mut self, "run.theta_points", &mut run.theta_points)?;
        read_f64(&mut self, "run.norm_tolerance", &mut run.norm_tolerance, false)?;
        read_f64(
            &mut self,
            "run.truncation_tolerance",
            &mut run.truncation_tolerance,
            false,
        )?;
        read_f64(
            &mut self,
            "run.population_tail_tolerance",
            &mut run.population_tail_tolerance,
            false,
        )?;
        read_usize(&mut self, "run.smoothing_window", &mut run.smoothing_window)?;
        if let Some(v) = self.take("run.detector_half_angle") {
            run.detector_half_angle = parse_angle(&v)
                .ok_or_else(|| Error::validation("run.detector_half_angle", format!("not an angle: `{v}`")))?;
        }
        read_u32(&mut self, "run.steps_per_fwhm", &mut run.steps_per_fwhm, false)?;
        read_f64(&mut self, "spectrum.t_start", &mut run.spectrum.t_start, false)?;
        read_f64(&mut self, "spectrum.t_stop", &mut run.spectrum.t_stop, false)?;
        read_usize(&mut self, "spectrum.zero_padding", &mut run.spectrum.zero_padding)?;
        read_f64(&mut self, "spectrum.peak_floor", &mut run.spectrum.peak_floor, false)?;
        if let Some(v) = self.take("spectrum.source") {
            run.spectrum.source = match v.as_str() {
                "simulation" => SpectrumSource::Simulation,
                "two_level" => SpectrumSource::TwoLevel,
                _ => {
                    return Err(Error::validation(
                        "spectrum.source",
                        format!("expected `simulation` or `two_level`, got `{v}`"),
                    ))
                }
            };
        }
        read_u32(&mut self, "revivals.count", &mut run.revival_count, false)?;

        if let Some((key, (_, line))) = self.entries.iter().next() {
            return Err(Error::Validation {
                key: key.clone(),
                message: if *line > 0 {
                    format!("unknown key (line {line})")
                } else {
                    "unknown key".to_string()
                },
            });
        }

        let config = Config { molecule, pulse, run };
        config.validate()?;
        Ok(config)
    }
}

fn missing(key: &str) -> Error {
    Error::validation(key, "required for molecules without a preset")
}

fn read_f64(doc: &mut Document, key: &str, slot: &mut f64, required: bool) -> Result<()> {
    match doc.take(key) {
        Some(v) => {
            *slot = v
                .parse::<f64>()
                .map_err(|_| Error::validation(key, format!("not a number: `{v}`")))?;
            Ok(())
        }
        None if required => Err(missing(key)),
        None => Ok(()),
    }
}

fn read_u32(doc: &mut Document, key: &str, slot: &mut u32, required: bool) -> Result<()> {
    match doc.take(key) {
        Some(v) => {
            *slot = v
                .parse::<u32>()
                .map_err(|_| Error::validation(key, format!("not a nonnegative integer: `{v}`")))?;
            Ok(())
        }
        None if required => Err(missing(key)),
        None => Ok(()),
    }
}

fn read_usize(doc: &mut Document, key: &str, slot: &mut usize) -> Result<()> {
    if let Some(v) = doc.take(key) {
        *slot = v
            .parse::<usize>()
            .map_err(|_| Error::validation(key, format!("not a nonnegative integer: `{v}`")))?;
    }
    Ok(())
}

fn read_bool(doc: &mut Document, key: &str, slot: &mut bool) -> Result<()> {
    if let Some(v) = doc.take(key) {
        *slot = match v.as_str() {
            "true" => true,
            "false" => false,
            _ => return Err(Error::validation(key, format!("expected true or false, got `{v}`"))),
        };
    }
    Ok(())
}

/// Angles may be plain radians, `<x>deg`, or multiples of pi such as
/// `pi/2`, `-pi`, `3*pi/4`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Some(deg) = t.strip_suffix("deg") {
        return deg.trim().parse::<f64>().ok().map(f64::to_radians);
    }
    if !t.contains("pi") {
        return t.parse::<f64>().ok();
    }
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r.trim()),
        None => (1.0, t),
    };
    let (numer, denom) = match rest.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (rest, 1.0),
    };
    let coeff = match numer.strip_suffix("pi").map(str::trim) {
        Some("") => 1.0,
        Some(c) => c.strip_suffix('*')?.trim().parse::<f64>().ok()?,
        None => return None,
    };
    Some(sign * coeff * PI / denom)
}

/// Parse and validate a configuration document.
pub fn load_config(text: &str) -> Result<Config> {
    Document::parse(text)?.resolve()
}

/// Like [`load_config`], with `key=value` overrides applied after parsing.
pub fn load_config_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<Config> {
    let mut doc = Document::parse(text)?;
    for o in overrides {
        doc.set(o.as_ref())?;
    }
    doc.resolve()
}
