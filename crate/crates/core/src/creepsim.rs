//! Lumped thermo-mechanical creep oracle.
//!
//! Each standoff "element" carries one equivalent stress. The thermal mismatch
//! between board and component, amplified by a lever ratio, drives a total
//! strain rate; the solder relaxes it through the hyperbolic-sine (Garofalo)
//! secondary creep law
//!
//! ```text
//! dε_creep/dt = c1 · |sinh(c2·σ)|^c3 · exp(c4 / T)
//! dσ/dt       = E(T) · (Δα · L · dT/dt − sign(σ) · dε_creep/dt)
//! ```
//!
//! The accumulated creep strain of every element is the time integral of the
//! creep-rate magnitude. Per half-cycle increments are reduced to a single
//! scalar by a volume-weighted mean over the elements.
//!
//! This is a stand-in for a finite element model. Default constants are
//! placeholders chosen to give increments spanning many decades; they are not
//! calibrated SnAg3.5 parameters.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvio::{self, CsvError};
use crate::profilegen::{HalfCycle, TemperatureTrace};

pub const KELVIN_OFFSET: f64 = 273.15;
/// Temperature at which `e_mod_cold_gpa` applies, °C.
pub const T_COLD_C: f64 = -40.0;
/// Temperature at which `e_mod_hot_gpa` applies, °C.
pub const T_HOT_C: f64 = 150.0;
/// Stress floor in the step-size guard, MPa.
pub const STRESS_FLOOR_MPA: f64 = 0.1;
/// Largest stress change allowed in one step, relative to `|σ| + STRESS_FLOOR_MPA`.
pub const MAX_RELATIVE_STRESS_STEP: f64 = 0.1;
/// Number of times a step may be halved before giving up.
pub const MAX_STEP_HALVINGS: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CreepError {
    #[error("stress change {delta_mpa:.3e} MPa exceeds the guard at t = {t_s:.3} s even after {MAX_STEP_HALVINGS} step halvings")]
    StepTooLarge { t_s: f64, delta_mpa: f64 },
    #[error("length mismatch: {left} values for {right} elements")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("trace has {boundaries} half-cycle boundaries but {cycles} half-cycles were given")]
    InconsistentTrace { boundaries: usize, cycles: usize },
    #[error(transparent)]
    Csv(#[from] CsvError),
}

/// Solder constitutive parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreepMaterial {
    /// Rate prefactor, 1/s.
    pub c1: f64,
    /// Stress coefficient, 1/MPa.
    pub c2: f64,
    /// Stress exponent.
    pub c3: f64,
    /// Temperature coefficient, K. Negative values give Arrhenius-type decay.
    pub c4: f64,
    pub e_mod_cold_gpa: f64,
    pub e_mod_hot_gpa: f64,
    /// Kept for completeness; the lumped kinematics only use the board/component mismatch.
    pub cte_solder_ppm_per_k: f64,
}

impl Default for CreepMaterial {
    fn default() -> Self {
        Self {
            c1: 1e-3,
            c2: 0.1,
            c3: 2.0,
            c4: -5000.0,
            e_mod_cold_gpa: 20.9,
            e_mod_hot_gpa: 11.8,
            cte_solder_ppm_per_k: 21.1,
        }
    }
}

impl CreepMaterial {
    pub fn validate(&self) -> Result<(), CreepError> {
        let bad = |m: &str| Err(CreepError::InvalidMaterial(m.to_string()));
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return bad("c1 and c2 must be positive");
        }
        if !(self.c3 >= 1.0) {
            return bad("c3 must be at least 1");
        }
        if !self.c4.is_finite() {
            return bad("c4 must be finite");
        }
        if !(self.e_mod_cold_gpa > 0.0 && self.e_mod_hot_gpa > 0.0) {
            return bad("elastic moduli must be positive");
        }
        Ok(())
    }

    /// Young's modulus in MPa, linear in temperature through the two endpoints.
    ///
    /// Outside [-40, 150] °C the interpolation is held at the nearer endpoint.
    pub fn modulus_mpa(&self, temp_c: f64) -> f64 {
        let s = ((temp_c - T_COLD_C) / (T_HOT_C - T_COLD_C)).clamp(0.0, 1.0);
        1e3 * (self.e_mod_cold_gpa + s * (self.e_mod_hot_gpa - self.e_mod_cold_gpa))
    }
}

/// Equivalent creep-rate magnitude in 1/s.
pub fn creep_rate(material: &CreepMaterial, stress_mpa: f64, temp_k: f64) -> f64 {
    debug_assert!(temp_k > 0.0);
    let s = (material.c2 * stress_mpa).sinh().abs();
    let p = if material.c3 == 2.0 {
        s * s
    } else {
        s.powf(material.c3)
    };
    material.c1 * p * (material.c4 / temp_k).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandoffElement {
    /// Relative element volume.
    pub volume: f64,
    /// Multiplier on the joint's lever ratio for this element.
    pub lever_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointGeometry {
    pub cte_component_ppm_per_k: f64,
    pub cte_board_ppm_per_k: f64,
    /// Converts the CTE mismatch into solder shear strain.
    pub length_scale_ratio: f64,
    pub elements: Vec<StandoffElement>,
}

impl Default for JointGeometry {
    fn default() -> Self {
        Self {
            cte_component_ppm_per_k: 7.0,
            cte_board_ppm_per_k: 14.5,
            length_scale_ratio: 10.0,
            elements: vec![
                StandoffElement { volume: 1.0, lever_scale: 0.9 },
                StandoffElement { volume: 2.0, lever_scale: 1.0 },
                StandoffElement { volume: 1.0, lever_scale: 1.1 },
            ],
        }
    }
}

impl JointGeometry {
    pub fn validate(&self) -> Result<(), CreepError> {
        let bad = |m: &str| Err(CreepError::InvalidGeometry(m.to_string()));
        if self.elements.is_empty() {
            return bad("at least one standoff element is required");
        }
        if self.elements.iter().any(|e| !(e.volume > 0.0)) {
            return bad("element volumes must be positive");
        }
        if self.elements.iter().any(|e| !(e.lever_scale > 0.0)) {
            return bad("lever scales must be positive");
        }
        if !(self.length_scale_ratio > 0.0) {
            return bad("length_scale_ratio must be positive");
        }
        Ok(())
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.volume).collect()
    }

    /// Mechanical strain per kelvin imposed on each element.
    fn strain_per_kelvin(&self) -> Vec<f64> {
        let mismatch = (self.cte_board_ppm_per_k - self.cte_component_ppm_per_k) * 1e-6;
        self.elements
            .iter()
            .map(|e| mismatch * self.length_scale_ratio * e.lever_scale)
            .collect()
    }
}

/// Mechanical state carried across half-cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub stress_mpa: Vec<f64>,
    /// Accumulated creep strain per element; never decreases.
    pub creep_acc: Vec<f64>,
    pub temp_c: f64,
}

impl JointState {
    /// Stress-free state at `temp_c`.
    pub fn virgin(geometry: &JointGeometry, temp_c: f64) -> Self {
        let n = geometry.elements.len();
        Self {
            stress_mpa: vec![0.0; n],
            creep_acc: vec![0.0; n],
            temp_c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreepRecord {
    pub cycle_index: usize,
    pub increment: f64,
    pub running_total: f64,
}

struct Integrator<'a> {
    hc: &'a HalfCycle,
    material: &'a CreepMaterial,
    strain_per_k: Vec<f64>,
}

/// Temperature (°C) and its rate (K/s) at `t_s` seconds into the half-cycle.
#[derive(Clone, Copy)]
struct Thermal {
    temp_c: f64,
    rate_k_per_s: f64,
}

impl Integrator<'_> {
    fn thermal(&self, t_s: f64) -> Thermal {
        let t_min = t_s / 60.0;
        Thermal {
            temp_c: self.hc.eval(t_min),
            rate_k_per_s: self.hc.rate_at(t_min) / 60.0,
        }
    }

    /// Writes dσ/dt into `dsigma` and the creep-rate magnitude into `dacc`.
    fn derivative(&self, th: Thermal, stress: &[f64], dsigma: &mut [f64], dacc: &mut [f64]) {
        let e_mod = self.material.modulus_mpa(th.temp_c);
        let temp_k = th.temp_c + KELVIN_OFFSET;
        for i in 0..stress.len() {
            let rate = creep_rate(self.material, stress[i], temp_k);
            let flow = if stress[i] == 0.0 { 0.0 } else { rate.copysign(stress[i]) };
            dsigma[i] = e_mod * (self.strain_per_k[i] * th.rate_k_per_s - flow);
            dacc[i] = rate;
        }
    }

    /// One classical Runge-Kutta step into `scratch.next` and `scratch.accrued`.
    fn rk4(&self, t_s: f64, h: f64, stress: &[f64], scratch: &mut Scratch) {
        let th0 = self.thermal(t_s);
        let th_mid = self.thermal(t_s + 0.5 * h);
        let th1 = self.thermal(t_s + h);
        let Scratch { k, a, tmp, next, accrued } = scratch;
        let [k1, k2, k3, k4] = k;
        let [a1, a2, a3, a4] = a;

        self.derivative(th0, stress, k1, a1);
        for i in 0..stress.len() {
            tmp[i] = stress[i] + 0.5 * h * k1[i];
        }
        self.derivative(th_mid, tmp, k2, a2);
        for i in 0..stress.len() {
            tmp[i] = stress[i] + 0.5 * h * k2[i];
        }
        self.derivative(th_mid, tmp, k3, a3);
        for i in 0..stress.len() {
            tmp[i] = stress[i] + h * k3[i];
        }
        self.derivative(th1, tmp, k4, a4);

        for i in 0..stress.len() {
            next[i] = stress[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            accrued[i] = h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
        }
    }

    /// Advances over `[t_s, t_s + h]`, halving the step while the stress guard is violated.
    fn advance(
        &self,
        t_s: f64,
        h: f64,
        stress: &mut [f64],
        acc: &mut [f64],
        scratch: &mut Scratch,
        halvings: u32,
    ) -> Result<(), CreepError> {
        self.rk4(t_s, h, stress, scratch);
        let violation = stress
            .iter()
            .zip(&scratch.next)
            .map(|(s, n)| (n - s).abs())
            .zip(stress.iter())
            .find(|(d, s)| !(*d <= MAX_RELATIVE_STRESS_STEP * (s.abs() + STRESS_FLOOR_MPA)))
            .map(|(d, _)| d);
        match violation {
            None => {
                stress.copy_from_slice(&scratch.next);
                for (a, d) in acc.iter_mut().zip(&scratch.accrued) {
                    *a += d;
                }
                Ok(())
            }
            Some(delta_mpa) if halvings >= MAX_STEP_HALVINGS => {
                Err(CreepError::StepTooLarge { t_s, delta_mpa })
            }
            Some(_) => {
                let half = 0.5 * h;
                self.advance(t_s, half, stress, acc, scratch, halvings + 1)?;
                self.advance(t_s + half, half, stress, acc, scratch, halvings + 1)
            }
        }
    }
}

struct Scratch {
    k: [Vec<f64>; 4],
    a: [Vec<f64>; 4],
    tmp: Vec<f64>,
    next: Vec<f64>,
    accrued: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        let z = || vec![0.0; n];
        Self {
            k: [z(), z(), z(), z()],
            a: [z(), z(), z(), z()],
            tmp: z(),
            next: z(),
            accrued: z(),
        }
    }
}

/// Integrates one half-cycle starting from `state`.
///
/// A temperature mismatch between `state.temp_c` and the half-cycle start is
/// applied as an instantaneous elastic load before the dwell is integrated
/// with steps no longer than `dt_s` seconds.
pub fn integrate_half_cycle(
    state: &JointState,
    hc: &HalfCycle,
    material: &CreepMaterial,
    geometry: &JointGeometry,
    dt_s: f64,
) -> Result<(JointState, Vec<f64>), CreepError> {
    if !(dt_s > 0.0 && dt_s.is_finite()) {
        return Err(CreepError::InvalidStep(dt_s));
    }
    let n = geometry.elements.len();
    if state.stress_mpa.len() != n || state.creep_acc.len() != n {
        return Err(CreepError::LengthMismatch {
            left: state.stress_mpa.len(),
            right: n,
        });
    }
    let integrator = Integrator {
        hc,
        material,
        strain_per_k: geometry.strain_per_kelvin(),
    };

    let mut stress = state.stress_mpa.clone();
    let jump = hc.t_start_c - state.temp_c;
    if jump != 0.0 {
        let e_mod = material.modulus_mpa(hc.t_start_c);
        for (s, m) in stress.iter_mut().zip(&integrator.strain_per_k) {
            *s += e_mod * m * jump;
        }
    }

    let span_s = hc.dwell_min * 60.0;
    let steps = (span_s / dt_s).ceil().max(1.0) as usize;
    let h = span_s / steps as f64;
    let mut acc = vec![0.0; n];
    let mut scratch = Scratch::new(n);
    for k in 0..steps {
        integrator.advance(k as f64 * h, h, &mut stress, &mut acc, &mut scratch, 0)?;
    }

    let creep_acc = state
        .creep_acc
        .iter()
        .zip(&acc)
        .map(|(a, d)| a + d)
        .collect();
    let next = JointState {
        stress_mpa: stress,
        creep_acc,
        temp_c: hc.eval(hc.dwell_min),
    };
    Ok((next, acc))
}

/// Volume-weighted mean of per-element values.
pub fn volume_average(per_element: &[f64], geometry: &JointGeometry) -> Result<f64, CreepError> {
    if per_element.len() != geometry.elements.len() {
        return Err(CreepError::LengthMismatch {
            left: per_element.len(),
            right: geometry.elements.len(),
        });
    }
    let total: f64 = geometry.elements.iter().map(|e| e.volume).sum();
    if !(total > 0.0) {
        return Err(CreepError::InvalidGeometry("total volume must be positive".into()));
    }
    let weighted: f64 = per_element
        .iter()
        .zip(&geometry.elements)
        .map(|(v, e)| v * e.volume)
        .sum();
    Ok(weighted / total)
}

/// Runs the oracle over a whole profile, one record per half-cycle.
pub fn simulate_profile(
    trace: &TemperatureTrace,
    cycles: &[HalfCycle],
    material: &CreepMaterial,
    geometry: &JointGeometry,
    dt_s: f64,
) -> Result<Vec<CreepRecord>, CreepError> {
    if trace.cycle_boundaries.len() != cycles.len() {
        return Err(CreepError::InconsistentTrace {
            boundaries: trace.cycle_boundaries.len(),
            cycles: cycles.len(),
        });
    }
    material.validate()?;
    geometry.validate()?;
    let Some(first) = cycles.first() else {
        return Ok(Vec::new());
    };
    let mut state = JointState::virgin(geometry, first.t_start_c);
    let mut running_total = 0.0;
    let mut records = Vec::with_capacity(cycles.len());
    for (cycle_index, hc) in cycles.iter().enumerate() {
        let (next, per_element) = integrate_half_cycle(&state, hc, material, geometry, dt_s)?;
        let increment = volume_average(&per_element, geometry)?;
        running_total += increment;
        records.push(CreepRecord {
            cycle_index,
            increment,
            running_total,
        });
        state = next;
    }
    Ok(records)
}

/// Orders of magnitude covered by the positive increments.
pub fn decade_span(records: &[CreepRecord]) -> f64 {
    let (lo, hi) = records
        .iter()
        .map(|r| r.increment)
        .filter(|&v| v > 0.0)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi > 0.0 {
        (hi / lo).log10()
    } else {
        0.0
    }
}

pub const CREEP_HEADER: &str = "cycle_index,increment,running_total";

pub fn write_creep_csv<W: Write>(records: &[CreepRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CREEP_HEADER}")?;
    for r in records {
        writeln!(out, "{},{:.16e},{:.16e}", r.cycle_index, r.increment, r.running_total)?;
    }
    Ok(())
}

pub fn read_creep_csv<R: BufRead>(input: R) -> Result<Vec<CreepRecord>, CreepError> {
    Ok(csvio::read_numeric(input, CREEP_HEADER)?
        .into_iter()
        .map(|r| CreepRecord {
            cycle_index: r[0] as usize,
            increment: r[1],
            running_total: r[2],
        })
        .collect())
}
