//! Spectral post-processing of readout sequences.
//!
//! A sequence `x_m` sampled at `t_m = m·Δt`, `m = 1..M`, is expanded as
//! `x_m = Σ_l a_l exp(iω_l t_m)` with `ω_l = 2πl/T` and `T = MΔt`, so the
//! analysis coefficients are `a_l = (1/M) Σ_m x_m exp(−iω_l t_m)` and `a_0` is
//! the sample mean. Noise reduction multiplies the coefficients by Wiener
//! weights and then drops every harmonic above twice the main peak.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 4;

/// A main peak below this multiple of the median power is never significant.
pub const PEAK_SIGNIFICANCE: f64 = 3.0;

/// Probability that the largest of the one-sided bins of pure white noise
/// is flagged significant.
pub const PEAK_FALSE_ALARM: f64 = 0.01;

/// Spectra whose one-sided powers all lie within this band are flat.
const FLAT_TOLERANCE: f64 = 1e-15;

/// Noise floor never drops below this fraction of the largest non-DC power.
const RELATIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    /// Angular frequency `ω_l`.
    pub omega: f64,
    pub power: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub dt: f64,
    pub coefficients: Vec<Complex64>,
    /// `|a_l|²` of the current coefficients.
    pub power: Vec<f64>,
    /// Peak of the spectrum as first computed; filtering keeps it.
    pub main_peak: Option<Peak>,
    pub noise_floor: f64,
    pub wiener_weights: Vec<f64>,
    /// Highest harmonic kept by truncation, if truncation was applied.
    pub truncated_at: Option<usize>,
}

impl SpectrumRecord {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Total observation time `T = MΔt`.
    pub fn span(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    /// `ω_l = 2πl/T`
    pub fn omega(&self, l: usize) -> f64 {
        2.0 * PI * l as f64 / self.span()
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.len()).map(|l| self.omega(l)).collect()
    }

    /// Index of the last non-negative frequency, `⌊M/2⌋`.
    pub fn nyquist(&self) -> usize {
        self.len() / 2
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    fn refresh_power(&mut self) {
        self.power = self.coefficients.iter().map(|a| a.norm_sqr()).collect();
    }
}

/// Analysis coefficients and power spectrum of `sequence`.
pub fn power_spectrum(sequence: &[f64], dt: f64) -> Result<SpectrumRecord> {
    let m = sequence.len();
    if m < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_SAMPLES,
            got: m,
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::ParameterDomain {
            name: "dt",
            value: dt,
            expected: "> 0",
        });
    }
    let mut buffer: Vec<Complex64> = sequence.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buffer);
    let scale = 1.0 / m as f64;
    // Samples start at m = 1, which shifts every coefficient by exp(−2πil/M).
    let coefficients: Vec<Complex64> = buffer
        .into_iter()
        .enumerate()
        .map(|(l, x)| x * scale * Complex64::from_polar(1.0, -2.0 * PI * l as f64 / m as f64))
        .collect();
    let mut record = SpectrumRecord {
        dt,
        coefficients,
        power: Vec::new(),
        main_peak: None,
        noise_floor: 0.0,
        wiener_weights: vec![1.0; m],
        truncated_at: None,
    };
    record.refresh_power();
    record.main_peak = main_peak(&record);
    record.noise_floor = MedianFloorWiener.noise_floor(&record.power);
    Ok(record)
}

/// Reconstructs the real sequence `Σ_l a_l exp(iω_l t_m)`.
pub fn synthesize(spec: &SpectrumRecord) -> Vec<f64> {
    synthesize_complex(spec).into_iter().map(|z| z.re).collect()
}

/// Complex synthesis; the imaginary parts vanish for conjugate-symmetric spectra.
pub fn synthesize_complex(spec: &SpectrumRecord) -> Vec<Complex64> {
    let m = spec.len();
    let mut buffer: Vec<Complex64> = spec
        .coefficients
        .iter()
        .enumerate()
        .map(|(l, a)| a * Complex64::from_polar(1.0, 2.0 * PI * l as f64 / m as f64))
        .collect();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buffer);
    buffer
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Strongest component over `1 ≤ l ≤ ⌊M/2⌋`, ties going to the lower index.
/// `None` for a flat spectrum.
pub fn main_peak(spec: &SpectrumRecord) -> Option<Peak> {
    let one_sided = &spec.power[1..=spec.nyquist()];
    let (lo, hi) = one_sided
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
            (lo.min(p), hi.max(p))
        });
    if hi - lo <= FLAT_TOLERANCE {
        return None;
    }
    let mut best = 0;
    for (i, &p) in one_sided.iter().enumerate() {
        if p > one_sided[best] {
            best = i;
        }
    }
    let index = best + 1;
    let power = spec.power[index];
    let med = median(&mut one_sided.to_vec());
    Some(Peak {
        index,
        omega: spec.omega(index),
        power,
        significant: power >= significance_threshold(med, one_sided.len()),
    })
}

/// Power a peak must reach among `bins` one-sided bins with median power
/// `median`. White-noise powers are exponential with mean `median/ln 2`, so
/// their maximum exceeds `mean·ln(bins/α)` with probability about `α`.
pub fn significance_threshold(median: f64, bins: usize) -> f64 {
    let mean = median / std::f64::consts::LN_2;
    let extreme = mean * (bins as f64 / PEAK_FALSE_ALARM).ln();
    extreme.max(PEAK_SIGNIFICANCE * median)
}

/// Produces per-bin weights in `[0, 1]` from a power spectrum.
pub trait NoiseFilter {
    fn noise_floor(&self, power: &[f64]) -> f64;

    /// Weight for a bin of power `power` against `noise_floor`.
    fn weight(&self, power: f64, noise_floor: f64) -> f64;
}

/// `φ = S/(S + n̂)` with `S = max(P − n̂, 0)` and `n̂` the median power over
/// the highest quarter of the one-sided frequency bins.
#[derive(Debug, Clone, Copy, Default)]
pub struct MedianFloorWiener;

impl NoiseFilter for MedianFloorWiener {
    fn noise_floor(&self, power: &[f64]) -> f64 {
        let h = power.len() / 2;
        let quarter = (h / 4).max(1);
        let mut top: Vec<f64> = power[h + 1 - quarter..=h].to_vec();
        let peak = power[1..=h].iter().copied().fold(0.0, f64::max);
        median(&mut top).max(RELATIVE_FLOOR * peak)
    }

    fn weight(&self, power: f64, noise_floor: f64) -> f64 {
        let signal = (power - noise_floor).max(0.0);
        if signal == 0.0 {
            0.0
        } else {
            signal / (signal + noise_floor)
        }
    }
}

pub fn wiener_filter(spec: &SpectrumRecord) -> SpectrumRecord {
    wiener_filter_with(spec, &MedianFloorWiener)
}

/// Applies `filter` bin by bin. The mean (`l = 0`) passes untouched and
/// weights are mirrored so the filtered series stays real.
pub fn wiener_filter_with<F: NoiseFilter + ?Sized>(
    spec: &SpectrumRecord,
    filter: &F,
) -> SpectrumRecord {
    let m = spec.len();
    let floor = filter.noise_floor(&spec.power);
    let mut weights = vec![1.0; m];
    for l in 1..=spec.nyquist() {
        let w = filter.weight(spec.power[l], floor).clamp(0.0, 1.0);
        weights[l] = w;
        weights[m - l] = w;
    }
    let mut out = spec.clone();
    for (a, w) in out.coefficients.iter_mut().zip(&weights) {
        *a *= *w;
    }
    for (acc, w) in out.wiener_weights.iter_mut().zip(&weights) {
        *acc *= *w;
    }
    out.noise_floor = floor;
    out.refresh_power();
    out
}

/// Zeroes every harmonic above `2l*`, `l*` being the main peak. Without a
/// peak the spectrum passes through with `truncated_at = None`.
pub fn truncate_series(spec: &SpectrumRecord) -> SpectrumRecord {
    let mut out = spec.clone();
    let Some(peak) = spec.main_peak else {
        return out;
    };
    let m = spec.len();
    let cutoff = 2 * peak.index;
    for (l, a) in out.coefficients.iter_mut().enumerate() {
        if l.min(m - l) > cutoff {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    out.truncated_at = Some(cutoff.min(spec.nyquist()));
    out.refresh_power();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessOptions {
    pub wiener: bool,
    pub truncate: bool,
}

impl Default for ProcessOptions {
    fn default() -> Self {
        ProcessOptions {
            wiener: true,
            truncate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedReadout {
    /// Spectrum of the input sequence.
    pub spectrum: SpectrumRecord,
    /// Spectrum after filtering and truncation.
    pub filtered: SpectrumRecord,
    pub values: Vec<f64>,
}

/// Filtered and truncated readout.
pub fn process_readout(sequence: &[f64], dt: f64) -> Result<Vec<f64>> {
    Ok(process_readout_with(sequence, dt, ProcessOptions::default())?.values)
}

pub fn process_readout_with(
    sequence: &[f64],
    dt: f64,
    options: ProcessOptions,
) -> Result<ProcessedReadout> {
    let spectrum = power_spectrum(sequence, dt)?;
    let mut filtered = spectrum.clone();
    if options.wiener {
        filtered = wiener_filter(&filtered);
    }
    if options.truncate {
        filtered = truncate_series(&filtered);
    }
    let values = synthesize(&filtered);
    Ok(ProcessedReadout {
        spectrum,
        filtered,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    QuantumJump,
    Intermediate,
    Rabi,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::QuantumJump => "quantum_jump",
            Regime::Intermediate => "intermediate",
            Regime::Rabi => "rabi",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            f_lo: 0.3,
            f_hi: 5.0,
        }
    }
}

pub fn classify_regime(f: f64, thresholds: &RegimeThresholds) -> Regime {
    if f < thresholds.f_lo {
        Regime::QuantumJump
    } else if f > thresholds.f_hi {
        Regime::Rabi
    } else {
        Regime::Intermediate
    }
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len().min(b.len());
    if n < 2 {
        return None;
    }
    let (a, b) = (&a[..n], &b[..n]);
    let mean_a = a.iter().sum::<f64>() / n as f64;
    let mean_b = b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        None
    } else {
        Some(sab / (saa * sbb).sqrt())
    }
}
