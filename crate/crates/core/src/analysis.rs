//! Post-processing of traces: smoothing, beat spectra, revival times and
//! extremum location.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::config::{MoleculeSpec, SpectrumSettings};
use crate::error::{Error, Result};
use crate::observables::TimeSeries;

/// Centered moving average over `window` points. Near the ends the window
/// shrinks symmetrically to what is available.
pub fn smooth(series: &TimeSeries, window: usize) -> Result<TimeSeries> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::Domain(format!("smoothing window must be odd, got {window}")));
    }
    if window > series.len() {
        return Err(Error::Domain(format!(
            "smoothing window {window} exceeds trace length {}",
            series.len()
        )));
    }
    let n = series.len();
    let half = window / 2;
    let v = &series.values;
    let values = (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            v[i - h..=i + h].iter().sum::<f64>() / (2 * h + 1) as f64
        })
        .collect();
    Ok(TimeSeries {
        times: series.times.clone(),
        values,
    })
}

/// A spectral peak and, when one is near enough, the `J ↔ J+2` beat it
/// belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatPeak {
    /// THz
    pub frequency: f64,
    pub amplitude: f64,
    /// Lower level `J` of the assigned beat.
    pub lower_j: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeatSpectrum {
    /// THz
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Spacing of the zero-padded grid, THz.
    pub bin_width: f64,
    pub peaks: Vec<BeatPeak>,
    /// Set when the window spans fewer than two revival periods.
    pub short_window: bool,
}

impl BeatSpectrum {
    pub fn peak_for(&self, lower_j: u32) -> Option<&BeatPeak> {
        self.peaks.iter().find(|p| p.lower_j == Some(lower_j))
    }

    /// Summed peak amplitude of assigned beats starting from even and odd `J`.
    pub fn parity_sums(&self) -> (f64, f64) {
        let mut even = 0.0;
        let mut odd = 0.0;
        for p in &self.peaks {
            match p.lower_j {
                Some(j) if j % 2 == 0 => even += p.amplitude,
                Some(_) => odd += p.amplitude,
                None => {}
            }
        }
        (even, odd)
    }
}

/// Knobs for [`beat_spectrum_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub zero_padding: usize,
    pub peak_floor: f64,
    /// Half-width, in unpadded bins, of the neighbourhood a peak must
    /// dominate. Three bins clears the Hann main lobe and its first two
    /// sidelobes.
    pub guard_bins: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            zero_padding: 8,
            peak_floor: 0.02,
            guard_bins: 3,
        }
    }
}

impl From<&SpectrumSettings> for SpectrumOptions {
    fn from(settings: &SpectrumSettings) -> Self {
        SpectrumOptions {
            zero_padding: settings.zero_padding,
            peak_floor: settings.peak_floor,
            ..SpectrumOptions::default()
        }
    }
}

/// Mean-subtracted, Hann-windowed samples of `series` in `[t_start, t_stop]`.
pub(crate) fn conditioned_window(series: &TimeSeries, t_start: f64, t_stop: f64) -> Result<(Vec<f64>, f64)> {
    let range = series.window(t_start, t_stop);
    if range.len() < 4 {
        return Err(Error::Grid(format!(
            "spectral window [{t_start}, {t_stop}] fs holds {} samples",
            range.len()
        )));
    }
    let times = &series.times[range.clone()];
    let dt = times[1] - times[0];
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1.0))
    {
        return Err(Error::Grid("spectral window needs a uniform time grid".into()));
    }
    let values = &series.values[range];
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let n = values.len();
    let windowed = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos());
            (v - mean) * w
        })
        .collect();
    Ok((windowed, dt))
}

/// Full complex DFT of `signal` zero-padded to `padding × len`.
pub(crate) fn padded_transform(signal: &[f64], padding: usize) -> Vec<Complex64> {
    let n = signal.len() * padding;
    let mut buf: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// Fourier beat spectrum of the field-free stretch `[t_start, t_stop]` (fs)
/// with default conditioning, peaks assigned against `molecule`.
pub fn beat_spectrum(series: &TimeSeries, t_start: f64, t_stop: f64, molecule: &MoleculeSpec) -> Result<BeatSpectrum> {
    beat_spectrum_with(series, t_start, t_stop, molecule, SpectrumOptions::default())
}

pub fn beat_spectrum_with(
    series: &TimeSeries,
    t_start: f64,
    t_stop: f64,
    molecule: &MoleculeSpec,
    options: SpectrumOptions,
) -> Result<BeatSpectrum> {
    if options.zero_padding == 0 {
        return Err(Error::Domain("zero padding factor must be positive".into()));
    }
    let (signal, dt) = conditioned_window(series, t_start, t_stop)?;
    let span = dt * (signal.len() - 1) as f64;
    let short_window = span < 2.0 * molecule.revival_period();
    if short_window {
        log::warn!("spectral window of {span:.0} fs is shorter than two revival periods; beats may be unresolved");
    }
    let spectrum = padded_transform(&signal, options.zero_padding);
    let n = spectrum.len();
    // fs⁻¹ → THz
    let bin_width = 1e3 / (n as f64 * dt);
    let amplitudes: Vec<f64> = spectrum[..=n / 2].iter().map(|c| c.norm()).collect();
    let frequencies: Vec<f64> = (0..amplitudes.len()).map(|k| k as f64 * bin_width).collect();

    let guard = options.guard_bins * options.zero_padding;
    let max = amplitudes.iter().skip(guard).cloned().fold(0.0, f64::max);
    let floor = options.peak_floor * max;
    let mut peaks = Vec::new();
    for k in guard..amplitudes.len() {
        let a = amplitudes[k];
        if a < floor || a <= 0.0 {
            continue;
        }
        let lo = k.saturating_sub(guard);
        let hi = (k + guard).min(amplitudes.len() - 1);
        // Strictly above everything to the left, at least everything to the
        // right: plateaus resolve to their first bin.
        if amplitudes[lo..k].iter().any(|&b| b >= a) || amplitudes[k + 1..=hi].iter().any(|&b| b > a) {
            continue;
        }
        let (offset, height) = if k + 1 < amplitudes.len() {
            parabolic_vertex(amplitudes[k - 1], a, amplitudes[k + 1])
        } else {
            (0.0, a)
        };
        peaks.push(BeatPeak {
            frequency: (k as f64 + offset) * bin_width,
            amplitude: height,
            lower_j: None,
        });
    }
    let mut out = BeatSpectrum {
        frequencies,
        amplitudes,
        bin_width,
        peaks,
        short_window,
    };
    out.peaks = assign_beats(&out, molecule);
    Ok(out)
}

/// Label each peak with the nearest `Bc(4J+6)`; peaks farther than two
/// padded bins from every beat line stay unassigned.
pub fn assign_beats(spectrum: &BeatSpectrum, molecule: &MoleculeSpec) -> Vec<BeatPeak> {
    let bc = molecule.bc_thz();
    spectrum
        .peaks
        .iter()
        .map(|p| {
            let guess = ((p.frequency / bc - 6.0) / 4.0).round().max(0.0) as u32;
            let candidates = [guess.saturating_sub(1), guess, guess + 1];
            let best = candidates
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    let da = (p.frequency - molecule.beat_frequency(a)).abs();
                    let db = (p.frequency - molecule.beat_frequency(b)).abs();
                    da.total_cmp(&db)
                })
                .expect("three candidates");
            let distance = (p.frequency - molecule.beat_frequency(best)).abs();
            BeatPeak {
                lower_j: (distance <= 2.0 * spectrum.bin_width).then_some(best),
                ..*p
            }
        })
        .collect()
}

/// A fractional revival `numerator/denominator · T_rev`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Revival {
    pub numerator: u32,
    pub denominator: u32,
    /// fs
    pub time: f64,
}

impl Revival {
    pub fn fraction(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn label(&self) -> String {
        if self.denominator == 1 {
            self.numerator.to_string()
        } else {
            format!("{}/{}", self.numerator, self.denominator)
        }
    }
}

/// Quarter, half, three-quarter and full revivals for `count` periods.
pub fn revival_times(molecule: &MoleculeSpec, count: u32) -> Result<Vec<Revival>> {
    if count == 0 {
        return Err(Error::Domain("revival count must be at least 1".into()));
    }
    let period = molecule.revival_period();
    Ok((1..=4 * count)
        .map(|k| {
            let g = gcd(k, 4);
            Revival {
                numerator: k / g,
                denominator: 4 / g,
                time: k as f64 / 4.0 * period,
            }
        })
        .collect())
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub t_max: f64,
    pub v_max: f64,
    pub t_min: f64,
    pub v_min: f64,
}

/// Grid argmax/argmin in `[t_lo, t_hi]` with three-point parabolic
/// refinement; ties go to the earliest time.
pub fn find_extrema(series: &TimeSeries, t_lo: f64, t_hi: f64) -> Result<Extrema> {
    let range = series.window(t_lo, t_hi);
    if range.is_empty() {
        return Err(Error::Grid(format!("no samples in [{t_lo}, {t_hi}]")));
    }
    let (mut imax, mut imin) = (range.start, range.start);
    for i in range.clone() {
        if series.values[i] > series.values[imax] {
            imax = i;
        }
        if series.values[i] < series.values[imin] {
            imin = i;
        }
    }
    let refine = |i: usize| -> (f64, f64) {
        let v = series.values[i];
        if i == range.start || i + 1 >= range.end {
            return (series.times[i], v);
        }
        let (off, height) = parabolic_vertex(series.values[i - 1], v, series.values[i + 1]);
        let t = &series.times;
        let dt = if off >= 0.0 { t[i + 1] - t[i] } else { t[i] - t[i - 1] };
        (t[i] + off * dt, height)
    };
    let (t_max, v_max) = refine(imax);
    let (t_min, v_min) = refine(imin);
    Ok(Extrema {
        t_max,
        v_max,
        t_min,
        v_min,
    })
}

/// Vertex of the parabola through `(-1, a)`, `(0, b)`, `(1, c)`.
fn parabolic_vertex(a: f64, b: f64, c: f64) -> (f64, f64) {
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return (0.0, b);
    }
    let off = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    (off, b - 0.25 * (a - c) * off)
}
