//! Phenomenological model of a molecular spin-valve synapse.
//!
//! The conductance state variable is bounded to `[g_min, g_max]` and moves
//! toward one of the bounds under super-threshold voltage pulses. Reading the
//! device in the antiparallel magnetization configuration boosts the
//! conductance by the magnetoconductance `MG(g)`, which vanishes at or below
//! `g_th` and follows a normalized 3/4 power law above it.

use crate::error::{Error, Result};
use crate::num::Float;

/// ON/OFF ratio of the measured 50-pulse potentiation train at 2.5 V, 5 ms.
pub const REFERENCE_POTENTIATION_ONOFF: f64 = 47.0;
/// ON/OFF ratio (initial/final) of the measured depression train at -2.35 V, 5 ms.
/// Reported for comparison only; the model does not calibrate against it.
pub const REFERENCE_DEPRESSION_ONOFF: f64 = 31.0;
pub const REFERENCE_PULSE_COUNT: usize = 50;
pub const REFERENCE_POTENTIATION_PULSE: PulseSpec<f64> = PulseSpec { voltage: 2.5, duration: 5e-3 };
pub const REFERENCE_DEPRESSION_PULSE: PulseSpec<f64> = PulseSpec { voltage: -2.35, duration: 5e-3 };

/// Relative magnetization of the two ferromagnetic electrodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Magnetization {
    #[default]
    Parallel,
    Antiparallel,
}

/// Device constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinValveParams<T = f64> {
    /// Lowest reachable conductance (S).
    pub g_min: T,
    /// Highest reachable conductance (S).
    pub g_max: T,
    /// Conductance below which magnetoconductance vanishes (S).
    pub g_th: T,
    /// Magnetoconductance at `g_max`.
    pub mg_max: T,
    pub mg_exponent: T,
    /// Pulses with `|V|` at or below this value leave the state unchanged (V).
    pub pulse_threshold_v: T,
    /// Pulse-response time constant (V·s).
    pub pulse_time_constant_tau: T,
}

impl<T: Float> SpinValveParams<T> {
    /// Measured device constants with `tau` calibrated so that the reference
    /// 50-pulse potentiation train gives an ON/OFF ratio of 47.
    pub fn measured() -> Self {
        let mut params = Self::measured_uncalibrated();
        params.pulse_time_constant_tau = params
            .calibrated_tau()
            .expect("reference calibration is within the achievable range");
        params
    }

    /// Measured constants with `tau = 1` as a placeholder.
    pub fn measured_uncalibrated() -> Self {
        Self {
            g_min: T::lit(6.4e-7),
            g_max: T::lit(8.9e-5),
            g_th: T::lit(1.13e-6),
            mg_max: T::lit(0.25),
            mg_exponent: T::lit(0.75),
            pulse_threshold_v: T::lit(1.2),
            pulse_time_constant_tau: T::ONE,
        }
    }

    /// Solves for the `tau` that reproduces the reference potentiation train
    /// with the current conductance bounds and threshold.
    pub fn calibrated_tau(&self) -> Result<T> {
        calibrate_pulse_tau(
            T::lit(REFERENCE_POTENTIATION_ONOFF),
            REFERENCE_PULSE_COUNT,
            REFERENCE_POTENTIATION_PULSE.cast(),
            self,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let ok_finite = [
            self.g_min,
            self.g_max,
            self.g_th,
            self.mg_max,
            self.mg_exponent,
            self.pulse_threshold_v,
            self.pulse_time_constant_tau,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !ok_finite {
            return Err(Error::InvalidParams("device parameters must be finite".into()));
        }
        if !(T::ZERO < self.g_min && self.g_min < self.g_th && self.g_th < self.g_max) {
            return Err(Error::InvalidParams(format!(
                "require 0 < g_min < g_th < g_max, got g_min={:e}, g_th={:e}, g_max={:e}",
                self.g_min, self.g_th, self.g_max
            )));
        }
        if self.mg_max < T::ZERO {
            return Err(Error::InvalidParams("mg_max must be >= 0".into()));
        }
        if self.mg_exponent <= T::ZERO {
            return Err(Error::InvalidParams("mg_exponent must be > 0".into()));
        }
        if self.pulse_threshold_v <= T::ZERO {
            return Err(Error::InvalidParams("pulse_threshold_v must be > 0".into()));
        }
        if self.pulse_time_constant_tau <= T::ZERO {
            return Err(Error::InvalidParams("pulse_time_constant_tau must be > 0".into()));
        }
        Ok(())
    }

    /// Fraction of the remaining distance to the bound covered by one pulse.
    /// Zero for sub-threshold or zero-length pulses.
    pub fn step_fraction(&self, pulse: PulseSpec<T>) -> T {
        let overdrive = pulse.voltage.abs() - self.pulse_threshold_v;
        if overdrive <= T::ZERO || pulse.duration <= T::ZERO {
            return T::ZERO;
        }
        -(-(overdrive * pulse.duration) / self.pulse_time_constant_tau).exp_m1()
    }

    fn check_conductance(&self, g: T) -> Result<()> {
        if g.is_nan() || g < self.g_min || g > self.g_max {
            return Err(Error::Domain(format!(
                "conductance {:e} S outside [{:e}, {:e}]",
                g, self.g_min, self.g_max
            )));
        }
        Ok(())
    }

    fn mg_unchecked(&self, g: T) -> T {
        if g <= self.g_th {
            return T::ZERO;
        }
        let x = (g - self.g_th) / (self.g_max - self.g_th);
        self.mg_max * x.powf(self.mg_exponent)
    }
}

impl<T: Float> Default for SpinValveParams<T> {
    fn default() -> Self {
        Self::measured()
    }
}

/// A voltage pulse. Positive voltages potentiate, negative ones depress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec<T = f64> {
    pub voltage: T,
    /// Seconds, non-negative.
    pub duration: T,
}

impl<T: Float> PulseSpec<T> {
    pub fn new(voltage: T, duration: T) -> Result<Self> {
        if !(duration >= T::ZERO) || !voltage.is_finite() || !duration.is_finite() {
            return Err(Error::Domain(format!(
                "pulse needs finite voltage and duration >= 0, got ({voltage}, {duration})"
            )));
        }
        Ok(Self { voltage, duration })
    }
}

impl PulseSpec<f64> {
    pub fn cast<T: Float>(self) -> PulseSpec<T> {
        PulseSpec { voltage: T::lit(self.voltage), duration: T::lit(self.duration) }
    }
}

/// Conductance state (parallel-configuration value) plus magnetization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceState<T = f64> {
    conductance: T,
    pub magnetization: Magnetization,
}

impl<T: Float> DeviceState<T> {
    pub fn new(conductance: T, magnetization: Magnetization, params: &SpinValveParams<T>) -> Result<Self> {
        params.check_conductance(conductance)?;
        Ok(Self { conductance, magnetization })
    }

    /// Fully depressed, parallel configuration.
    pub fn low(params: &SpinValveParams<T>) -> Self {
        Self { conductance: params.g_min, magnetization: Magnetization::Parallel }
    }

    /// Fully potentiated, parallel configuration.
    pub fn high(params: &SpinValveParams<T>) -> Self {
        Self { conductance: params.g_max, magnetization: Magnetization::Parallel }
    }

    #[inline]
    pub fn conductance(&self) -> T {
        self.conductance
    }
}

/// Magnetoconductance `(G_AP - G_P) / G_P` at parallel conductance `g`.
pub fn magnetoconductance<T: Float>(g: T, params: &SpinValveParams<T>) -> Result<T> {
    params.check_conductance(g)?;
    Ok(params.mg_unchecked(g))
}

/// Conductance read out in the state's magnetization configuration.
pub fn effective_conductance<T: Float>(state: &DeviceState<T>, params: &SpinValveParams<T>) -> T {
    let g = state.conductance;
    match state.magnetization {
        Magnetization::Parallel => g,
        Magnetization::Antiparallel => g * (T::ONE + params.mg_unchecked(g)),
    }
}

pub fn apply_pulse<T: Float>(state: DeviceState<T>, pulse: PulseSpec<T>, params: &SpinValveParams<T>) -> DeviceState<T> {
    let lambda = params.step_fraction(pulse);
    if lambda == T::ZERO {
        return state;
    }
    let target = if pulse.voltage > T::ZERO { params.g_max } else { params.g_min };
    let g = state.conductance + lambda * (target - state.conductance);
    // rounding can overshoot the bound by an ulp
    let g = g.max(params.g_min).min(params.g_max);
    DeviceState { conductance: g, magnetization: state.magnetization }
}

pub fn set_magnetization<T: Float>(state: DeviceState<T>, config: Magnetization) -> DeviceState<T> {
    DeviceState { magnetization: config, ..state }
}

/// Applies `n` identical pulses.
pub fn apply_train<T: Float>(
    state: DeviceState<T>,
    pulse: PulseSpec<T>,
    n: usize,
    params: &SpinValveParams<T>,
) -> DeviceState<T> {
    (0..n).fold(state, |s, _| apply_pulse(s, pulse, params))
}

/// Time constant for which `n_pulses` copies of `pulse`, starting from
/// `g_min`, end at `target_onoff * g_min`.
///
/// With `q = (g_max - target·g_min) / (g_max - g_min)` the train satisfies
/// `(1 - λ)^n = q`, and `λ = 1 - exp(-(|V| - V_th)·t / tau)`.
pub fn calibrate_pulse_tau<T: Float>(
    target_onoff: T,
    n_pulses: usize,
    pulse: PulseSpec<T>,
    params: &SpinValveParams<T>,
) -> Result<T> {
    let max_ratio = params.g_max / params.g_min;
    if !(target_onoff > T::ONE && target_onoff < max_ratio) {
        return Err(Error::Domain(format!(
            "target on/off {target_onoff} outside achievable range (1, {max_ratio})"
        )));
    }
    if n_pulses == 0 {
        return Err(Error::Domain("calibration needs at least one pulse".into()));
    }
    let overdrive = pulse.voltage.abs() - params.pulse_threshold_v;
    if pulse.voltage <= T::ZERO || overdrive <= T::ZERO || pulse.duration <= T::ZERO {
        return Err(Error::Domain("calibration pulse must be a super-threshold potentiation pulse".into()));
    }
    // ln q computed as ln(1 - (target - 1)·g_min / (g_max - g_min)) to keep
    // precision for targets close to 1.
    let ln_q = (-(target_onoff - T::ONE) * params.g_min / (params.g_max - params.g_min)).ln_1p();
    let n = T::from_usize(n_pulses).expect("pulse count fits the scalar type");
    let ln_keep = ln_q / n;
    Ok(-overdrive * pulse.duration / ln_keep)
}

/// Grid of ON/OFF ratios, one row per voltage, one column per duration.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseMap<T = f64> {
    pub voltages: Vec<T>,
    pub durations: Vec<T>,
    pub n_pulses: usize,
    /// `ratios[i][j]` is final/initial conductance for `voltages[i]`, `durations[j]`.
    pub ratios: Vec<Vec<T>>,
}

impl<T: Float> PulseMap<T> {
    pub fn get(&self, voltage_idx: usize, duration_idx: usize) -> T {
        self.ratios[voltage_idx][duration_idx]
    }

    /// `(voltage, duration, ratio)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.voltages.iter().zip(&self.ratios).flat_map(move |(&v, row)| {
            self.durations.iter().zip(row).map(move |(&d, &r)| (v, d, r))
        })
    }
}

/// Emulates the pulse-parameter characterization: each positive-voltage cell
/// starts from the fully depressed state, each negative-voltage cell from the
/// fully potentiated state, then receives `n_pulses` identical pulses.
pub fn pulse_map_sweep<T: Float>(
    voltages: &[T],
    durations: &[T],
    n_pulses: usize,
    params: &SpinValveParams<T>,
) -> Result<PulseMap<T>> {
    if voltages.is_empty() || durations.is_empty() {
        return Err(Error::Domain("pulse map axes must be non-empty".into()));
    }
    if n_pulses == 0 {
        return Err(Error::Domain("pulse map needs n_pulses >= 1".into()));
    }
    let mut ratios = Vec::with_capacity(voltages.len());
    for &v in voltages {
        let start = if v < T::ZERO { DeviceState::high(params) } else { DeviceState::low(params) };
        let mut row = Vec::with_capacity(durations.len());
        for &d in durations {
            let pulse = PulseSpec::new(v, d)?;
            let end = apply_train(start, pulse, n_pulses, params);
            row.push(end.conductance / start.conductance);
        }
        ratios.push(row);
    }
    Ok(PulseMap { voltages: voltages.to_vec(), durations: durations.to_vec(), n_pulses, ratios })
}

/// Default characterization grid: ±1.0..=±3.0 V in 0.25 V steps and
/// durations from 1 ms to 50 ms.
pub fn default_map_axes<T: Float>() -> (Vec<T>, Vec<T>) {
    let mut voltages: Vec<T> = (0..=8).rev().map(|k| T::lit(-(1.0 + 0.25 * k as f64))).collect();
    voltages.extend((0..=8).map(|k| T::lit(1.0 + 0.25 * k as f64)));
    let durations = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2].iter().map(|&d| T::lit(d)).collect();
    (voltages, durations)
}
