//! Synthetic automotive temperature profiles built from exponential half-cycles.
//!
//! A half-cycle approaches its target temperature as
//! `T(t) = T_target - ΔT·exp(a·t)` with `ΔT = T_target - T_start`. The decay
//! exponent follows from the largest gradient at `t = 0`, and the dwell is the
//! time until the residual falls to 1 % of the target temperature.
//!
//! Profiles chain half-cycles: each target becomes the next start temperature.
//! Targets and gradients are drawn from truncated normal distributions with
//! rejection and redraw.

use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvio::{self, CsvError};

/// Admissible target temperatures in °C.
pub const TARGET_RANGE_C: (f64, f64) = (-40.0, 150.0);
/// Admissible maximum gradient magnitudes in K/min.
pub const GRADIENT_RANGE_K_PER_MIN: (f64, f64) = (0.5, 20.0);
/// Largest admissible temperature step in K.
pub const MAX_STEP_K: f64 = 130.0;
/// Dwell bounds in minutes; computed dwells are clamped into this interval.
pub const DWELL_RANGE_MIN: (f64, f64) = (1.0, 165.0);
/// Steps at or below this magnitude make the exponent singular and are rejected.
pub const MIN_STEP_K: f64 = 1.0;
/// Residual deviation from the target that ends a half-cycle.
pub const RESIDUAL_FRACTION: f64 = 0.01;
/// Consecutive failed draws tolerated before generation gives up.
pub const MAX_CONSECUTIVE_REDRAWS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("temperature step of {delta_t_k} K is at or below the {MIN_STEP_K} K threshold")]
    DegenerateStep { delta_t_k: f64 },
    #[error("maximum gradient must be positive, got {0} K/min")]
    NonPositiveGradient(f64),
    #[error("time {t_min} min lies outside the dwell [0, {dwell_min}] min")]
    OutOfDwell { t_min: f64, dwell_min: f64 },
    #[error("more than {MAX_CONSECUTIVE_REDRAWS} consecutive draws rejected after {accepted} accepted half-cycles")]
    RejectionOverflow { accepted: usize },
    #[error("invalid profile spec: {0}")]
    InvalidSpec(String),
    #[error("statistics of an empty set are undefined")]
    EmptyInput,
    #[error(transparent)]
    Csv(#[from] CsvError),
}

/// One exponential thermal half-cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfCycle {
    pub t_start_c: f64,
    pub t_target_c: f64,
    /// Positive gradient magnitude at `t = 0`, K/min.
    pub t_dot_max: f64,
    /// Signed step `t_target_c - t_start_c`, K.
    pub delta_t_k: f64,
    /// Decay exponent, always negative, 1/min.
    pub exponent_a: f64,
    /// Dwell after clamping into [`DWELL_RANGE_MIN`], min.
    pub dwell_min: f64,
}

impl HalfCycle {
    /// Dwell before clamping. May be negative, infinite, or above 165 min.
    pub fn raw_dwell_min(&self) -> f64 {
        raw_dwell(self.t_target_c, self.delta_t_k, self.exponent_a)
    }

    /// True when the computed dwell had to be clamped.
    pub fn dwell_clamped(&self) -> bool {
        let raw = self.raw_dwell_min();
        !(raw >= DWELL_RANGE_MIN.0 && raw <= DWELL_RANGE_MIN.1)
    }

    /// Temperature without the dwell bound check.
    pub(crate) fn eval(&self, t_min: f64) -> f64 {
        self.t_target_c - self.delta_t_k * (self.exponent_a * t_min).exp()
    }

    /// Time derivative of the temperature in K/min.
    pub fn rate_at(&self, t_min: f64) -> f64 {
        -self.exponent_a * self.delta_t_k * (self.exponent_a * t_min).exp()
    }
}

fn raw_dwell(t_target_c: f64, delta_t_k: f64, exponent_a: f64) -> f64 {
    (RESIDUAL_FRACTION * t_target_c / delta_t_k).abs().ln() / exponent_a
}

/// Builds a half-cycle from its start, target and maximum gradient.
///
/// The exponent is `-t_dot_max / |ΔT|`, so the curve always decays toward the
/// target regardless of the direction of the step.
pub fn derive_half_cycle(
    t_start_c: f64,
    t_target_c: f64,
    t_dot_max: f64,
) -> Result<HalfCycle, ProfileError> {
    if !(t_dot_max > 0.0) {
        return Err(ProfileError::NonPositiveGradient(t_dot_max));
    }
    let delta_t_k = t_target_c - t_start_c;
    if !(delta_t_k.abs() > MIN_STEP_K) {
        return Err(ProfileError::DegenerateStep { delta_t_k });
    }
    let exponent_a = -t_dot_max / delta_t_k.abs();
    // ln(0) for a 0 °C target gives +inf here; the clamp maps it to 165 min.
    let dwell_min = raw_dwell(t_target_c, delta_t_k, exponent_a)
        .clamp(DWELL_RANGE_MIN.0, DWELL_RANGE_MIN.1);
    Ok(HalfCycle {
        t_start_c,
        t_target_c,
        t_dot_max,
        delta_t_k,
        exponent_a,
        dwell_min,
    })
}

/// Evaluates the half-cycle temperature at `t_min` minutes after its start.
pub fn temperature_at(hc: &HalfCycle, t_min: f64) -> Result<f64, ProfileError> {
    if !(0.0..=hc.dwell_min).contains(&t_min) {
        return Err(ProfileError::OutOfDwell {
            t_min,
            dwell_min: hc.dwell_min,
        });
    }
    Ok(hc.eval(t_min))
}

/// Parameters for one synthetic profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    /// Number of accepted half-cycles.
    pub n_half_cycles: usize,
    pub seed: u64,
    pub target_mean_c: f64,
    pub target_sd_c: f64,
    pub gradient_mean: f64,
    pub gradient_sd: f64,
    pub sample_period_min: f64,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        Self {
            n_half_cycles: 10_000,
            seed: 0,
            target_mean_c: 25.0,
            target_sd_c: 17.5,
            gradient_mean: 7.5,
            gradient_sd: 3.25,
            sample_period_min: 1.0,
        }
    }
}

impl ProfileSpec {
    pub fn validate(&self) -> Result<(), ProfileError> {
        let bad = |msg: &str| Err(ProfileError::InvalidSpec(msg.to_string()));
        if self.n_half_cycles == 0 {
            return bad("n_half_cycles must be at least 1");
        }
        if !(self.target_sd_c > 0.0 && self.gradient_sd > 0.0) {
            return bad("standard deviations must be positive");
        }
        if !(self.target_mean_c.is_finite() && self.gradient_mean.is_finite()) {
            return bad("distribution means must be finite");
        }
        // every half-cycle must own at least one sample
        if !(self.sample_period_min > 0.0 && self.sample_period_min <= DWELL_RANGE_MIN.0) {
            return bad("sample_period_min must lie in (0, 1]");
        }
        Ok(())
    }
}

/// Uniformly sampled temperature history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureTrace {
    pub sample_period_min: f64,
    pub temps_c: Vec<f64>,
    /// Index of the first sample of every half-cycle.
    pub cycle_boundaries: Vec<usize>,
}

impl TemperatureTrace {
    pub fn len(&self) -> usize {
        self.temps_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temps_c.is_empty()
    }

    pub fn total_duration_h(&self) -> f64 {
        self.temps_c.len().saturating_sub(1) as f64 * self.sample_period_min / 60.0
    }

    pub fn time_min(&self, sample: usize) -> f64 {
        sample as f64 * self.sample_period_min
    }

    /// Half-cycle owning each sample.
    pub fn cycle_index_per_sample(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.temps_c.len());
        for (k, &start) in self.cycle_boundaries.iter().enumerate() {
            let end = self
                .cycle_boundaries
                .get(k + 1)
                .copied()
                .unwrap_or(self.temps_c.len());
            out.extend(std::iter::repeat_n(k, end - start));
        }
        out
    }
}

/// Chained half-cycles and their rendered trace.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedProfile {
    pub cycles: Vec<HalfCycle>,
    pub trace: TemperatureTrace,
}

/// Start time of every half-cycle in minutes, measured from the profile start.
pub fn cycle_start_times(cycles: &[HalfCycle]) -> Vec<f64> {
    let mut t = 0.0;
    cycles
        .iter()
        .map(|hc| {
            let start = t;
            t += hc.dwell_min;
            start
        })
        .collect()
}

fn within(value: f64, range: (f64, f64)) -> bool {
    value >= range.0 && value <= range.1
}

/// Draws and chains half-cycles, then renders them on the sample grid.
pub fn generate_profile(spec: &ProfileSpec) -> Result<GeneratedProfile, ProfileError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let target_dist = Normal::new(spec.target_mean_c, spec.target_sd_c)
        .map_err(|e| ProfileError::InvalidSpec(e.to_string()))?;
    let gradient_dist = Normal::new(spec.gradient_mean, spec.gradient_sd)
        .map_err(|e| ProfileError::InvalidSpec(e.to_string()))?;

    let mut cycles = Vec::with_capacity(spec.n_half_cycles);
    let mut start = spec.target_mean_c;
    while cycles.len() < spec.n_half_cycles {
        let mut redraws = 0;
        let hc = loop {
            let target = target_dist.sample(&mut rng);
            let gradient = gradient_dist.sample(&mut rng);
            let step = target - start;
            if within(target, TARGET_RANGE_C)
                && within(gradient, GRADIENT_RANGE_K_PER_MIN)
                && step.abs() <= MAX_STEP_K
            {
                if let Ok(hc) = derive_half_cycle(start, target, gradient) {
                    break hc;
                }
            }
            redraws += 1;
            if redraws > MAX_CONSECUTIVE_REDRAWS {
                return Err(ProfileError::RejectionOverflow {
                    accepted: cycles.len(),
                });
            }
        };
        start = hc.t_target_c;
        cycles.push(hc);
    }

    let trace = render_trace(&cycles, spec.sample_period_min);
    Ok(GeneratedProfile { cycles, trace })
}

/// Samples the chained half-cycles every `sample_period_min` minutes.
///
/// Samples past the end of the final dwell continue the last exponential, so
/// the final sample always sits at or beyond the end of the profile.
pub fn render_trace(cycles: &[HalfCycle], sample_period_min: f64) -> TemperatureTrace {
    if cycles.is_empty() {
        return TemperatureTrace {
            sample_period_min,
            temps_c: Vec::new(),
            cycle_boundaries: Vec::new(),
        };
    }
    let starts = cycle_start_times(cycles);
    let last = cycles.len() - 1;
    let total = starts[last] + cycles[last].dwell_min;
    let n_samples = (total / sample_period_min).ceil() as usize + 1;

    let mut temps_c = Vec::with_capacity(n_samples);
    let mut cycle_boundaries = Vec::with_capacity(cycles.len());
    let mut k = 0;
    for j in 0..n_samples {
        let t = j as f64 * sample_period_min;
        while k < last && t >= starts[k + 1] {
            k += 1;
        }
        if cycle_boundaries.len() == k {
            cycle_boundaries.push(j);
        }
        temps_c.push(cycles[k].eval(t - starts[k]));
    }
    TemperatureTrace {
        sample_period_min,
        temps_c,
        cycle_boundaries,
    }
}

/// Five-number style summary of one property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertySummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
}

impl PropertySummary {
    /// Percentiles use linear interpolation between closest ranks.
    pub fn from_values(values: &[f64]) -> Result<Self, ProfileError> {
        if values.is_empty() {
            return Err(ProfileError::EmptyInput);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(Self {
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            mean,
            median: percentile(&sorted, 0.5),
            p25: percentile(&sorted, 0.25),
            p75: percentile(&sorted, 0.75),
        })
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n_cycles: usize,
    pub t_target_c: PropertySummary,
    pub t_dot_max: PropertySummary,
    pub delta_t_k: PropertySummary,
    pub dwell_min: PropertySummary,
}

pub fn profile_statistics(cycles: &[HalfCycle]) -> Result<DistributionSummary, ProfileError> {
    let column = |f: fn(&HalfCycle) -> f64| -> Result<PropertySummary, ProfileError> {
        PropertySummary::from_values(&cycles.iter().map(f).collect::<Vec<_>>())
    };
    Ok(DistributionSummary {
        n_cycles: cycles.len(),
        t_target_c: column(|c| c.t_target_c)?,
        t_dot_max: column(|c| c.t_dot_max)?,
        delta_t_k: column(|c| c.delta_t_k)?,
        dwell_min: column(|c| c.dwell_min)?,
    })
}

pub const TRACE_HEADER: &str = "time_min,temp_C,cycle_index";
pub const CYCLES_HEADER: &str = "t_start_C,t_target_C,t_dot_max,delta_t_K,a_per_min,dwell_min";

pub fn write_trace_csv<W: Write>(trace: &TemperatureTrace, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for (j, (temp, k)) in trace
        .temps_c
        .iter()
        .zip(trace.cycle_index_per_sample())
        .enumerate()
    {
        writeln!(out, "{},{:.9e},{}", trace.time_min(j), temp, k)?;
    }
    Ok(())
}

pub fn write_cycles_csv<W: Write>(cycles: &[HalfCycle], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CYCLES_HEADER}")?;
    for c in cycles {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            c.t_start_c, c.t_target_c, c.t_dot_max, c.delta_t_k, c.exponent_a, c.dwell_min
        )?;
    }
    Ok(())
}

pub fn read_cycles_csv<R: BufRead>(input: R) -> Result<Vec<HalfCycle>, ProfileError> {
    let rows = csvio::read_numeric(input, CYCLES_HEADER)?;
    Ok(rows
        .into_iter()
        .map(|r| HalfCycle {
            t_start_c: r[0],
            t_target_c: r[1],
            t_dot_max: r[2],
            delta_t_k: r[3],
            exponent_a: r[4],
            dwell_min: r[5],
        })
        .collect())
}

pub fn read_trace_csv<R: BufRead>(input: R) -> Result<TemperatureTrace, ProfileError> {
    let rows = csvio::read_numeric(input, TRACE_HEADER)?;
    if rows.len() < 2 {
        return Err(ProfileError::InvalidSpec(
            "trace needs at least two samples".into(),
        ));
    }
    let sample_period_min = rows[1][0] - rows[0][0];
    let mut cycle_boundaries = Vec::new();
    let mut temps_c = Vec::with_capacity(rows.len());
    for (j, r) in rows.iter().enumerate() {
        let k = r[2] as usize;
        if k == cycle_boundaries.len() {
            cycle_boundaries.push(j);
        } else if k + 1 != cycle_boundaries.len() {
            return Err(ProfileError::InvalidSpec(format!(
                "cycle index jumps at sample {j}"
            )));
        }
        temps_c.push(r[1]);
    }
    Ok(TemperatureTrace {
        sample_period_min,
        temps_c,
        cycle_boundaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_half_cycle() {
        let hc = derive_half_cycle(20.0, 120.0, 10.0).unwrap();
        assert!((hc.exponent_a + 0.1).abs() < 1e-15);
        // ln(0.012) / -0.1
        assert!((hc.dwell_min - 44.228_486_291_7).abs() < 1e-6);
        assert_eq!(hc.delta_t_k, 100.0);
    }

    #[test]
    fn degenerate_and_bad_gradient() {
        assert!(matches!(
            derive_half_cycle(25.0, 25.0, 5.0),
            Err(ProfileError::DegenerateStep { .. })
        ));
        assert!(matches!(
            derive_half_cycle(25.0, 25.9, 5.0),
            Err(ProfileError::DegenerateStep { .. })
        ));
        assert!(matches!(
            derive_half_cycle(20.0, 60.0, 0.0),
            Err(ProfileError::NonPositiveGradient(_))
        ));
    }

    #[test]
    fn forced_large_step_has_decaying_exponent() {
        let hc = derive_half_cycle(150.0, -40.0, 20.0).unwrap();
        assert_eq!(hc.delta_t_k, -190.0);
        assert!((hc.exponent_a + 20.0 / 190.0).abs() < 1e-15);
    }

    #[test]
    fn zero_target_clamps_to_max_dwell() {
        let hc = derive_half_cycle(40.0, 0.0, 5.0).unwrap();
        assert_eq!(hc.dwell_min, 165.0);
        assert!(hc.dwell_clamped());
        // |ΔT| below 1 % of the target: negative raw dwell, clamped up
        let hc = derive_half_cycle(148.8, 150.0, 5.0).unwrap();
        assert!(hc.raw_dwell_min() < 0.0);
        assert_eq!(hc.dwell_min, 1.0);
    }

    #[test]
    fn temperature_values() {
        let hc = derive_half_cycle(20.0, 120.0, 10.0).unwrap();
        assert_eq!(temperature_at(&hc, 0.0).unwrap(), 20.0);
        let t10 = temperature_at(&hc, 10.0).unwrap();
        assert!((t10 - (120.0 - 100.0 * (-1.0f64).exp())).abs() < 1e-12);
        assert!((t10 - 83.212).abs() < 1e-3);
        let end = temperature_at(&hc, hc.dwell_min).unwrap();
        assert!((end - 120.0).abs() <= 0.01 * 120.0 * (1.0 + 1e-12));
        assert!(matches!(
            temperature_at(&hc, -0.1),
            Err(ProfileError::OutOfDwell { .. })
        ));
        assert!(temperature_at(&hc, hc.dwell_min + 1e-9).is_err());
    }

    #[test]
    fn max_gradient_at_origin() {
        for &(s, t, g) in &[(20.0, 120.0, 10.0), (100.0, -20.0, 3.3), (-30.0, 5.0, 0.7)] {
            let hc = derive_half_cycle(s, t, g).unwrap();
            let h = 1e-6;
            let fd = (hc.eval(h) - hc.eval(-h)) / (2.0 * h);
            assert!((fd.abs() - g).abs() / g < 1e-8, "fd {fd} vs {g}");
            assert!((hc.rate_at(0.0).abs() - g).abs() <= 1e-14 * g);
        }
    }

    #[test]
    fn single_cycle_profile() {
        let spec = ProfileSpec {
            n_half_cycles: 1,
            seed: 3,
            ..Default::default()
        };
        let p = generate_profile(&spec).unwrap();
        assert_eq!(p.cycles.len(), 1);
        let hc = p.cycles[0];
        let last = *p.trace.temps_c.last().unwrap();
        let allowance = if hc.dwell_clamped() { 1.0 } else { 0.0 };
        assert!((last - hc.t_target_c).abs() <= 0.01 * hc.t_target_c.abs() + allowance);
        assert_eq!(p.trace.cycle_boundaries, vec![0]);
        assert_eq!(p.trace.temps_c[0], hc.t_start_c);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        for spec in [
            ProfileSpec { n_half_cycles: 0, ..Default::default() },
            ProfileSpec { target_sd_c: 0.0, ..Default::default() },
            ProfileSpec { gradient_sd: -1.0, ..Default::default() },
            ProfileSpec { sample_period_min: 2.0, ..Default::default() },
        ] {
            assert!(matches!(generate_profile(&spec), Err(ProfileError::InvalidSpec(_))));
        }
    }

    #[test]
    fn inconsistent_spec_overflows() {
        // targets pinned far outside the admissible range
        let spec = ProfileSpec {
            target_mean_c: 1000.0,
            target_sd_c: 1.0,
            n_half_cycles: 5,
            ..Default::default()
        };
        assert!(matches!(
            generate_profile(&spec),
            Err(ProfileError::RejectionOverflow { accepted: 0 })
        ));
    }

    #[test]
    fn statistics_of_singleton_and_symmetric_pair() {
        let hc = derive_half_cycle(20.0, 120.0, 10.0).unwrap();
        let s = profile_statistics(&[hc]).unwrap();
        let p = s.t_target_c;
        assert_eq!((p.min, p.max, p.mean, p.median, p.p25, p.p75), (120.0, 120.0, 120.0, 120.0, 120.0, 120.0));
        assert_eq!(s.dwell_min.p75, hc.dwell_min);
        let back = derive_half_cycle(120.0, 20.0, 10.0).unwrap();
        let s = profile_statistics(&[hc, back]).unwrap();
        assert_eq!(s.delta_t_k.mean, 0.0);
        assert!(matches!(profile_statistics(&[]), Err(ProfileError::EmptyInput)));
    }

    #[test]
    fn percentiles_interpolate() {
        let s = PropertySummary::from_values(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.p25, 1.75);
        assert_eq!(s.p75, 3.25);
    }

    #[test]
    fn csv_roundtrip() {
        let spec = ProfileSpec { n_half_cycles: 20, seed: 9, ..Default::default() };
        let p = generate_profile(&spec).unwrap();
        let mut buf = Vec::new();
        write_cycles_csv(&p.cycles, &mut buf).unwrap();
        assert_eq!(read_cycles_csv(&buf[..]).unwrap(), p.cycles);

        let mut buf = Vec::new();
        write_trace_csv(&p.trace, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time_min,temp_C,cycle_index\n"));
        let back = read_trace_csv(&buf[..]).unwrap();
        assert_eq!(back.cycle_boundaries, p.trace.cycle_boundaries);
        assert_eq!(back.sample_period_min, 1.0);
        for (a, b) in back.temps_c.iter().zip(&p.trace.temps_c) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
    }
}
