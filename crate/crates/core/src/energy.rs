//! Electrical power model, energy integration and the energy-time fit.
//!
//! Power is a two-level model: always-on electronics plus a fixed draw
//! per running motor. The ledger stores time-stamped power samples with
//! a running trapezoidal integral, loop-completion marks, and the motor
//! assist windows, from which per-loop and per-tack energies and the
//! long-horizon energy-time line are derived.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("motors_on must be 0, 1 or 2, got {0}")]
    MotorsOutOfRange(u8),
    #[error("requested range [{0}, {1}] lies outside the sampled span")]
    RangeOutsideSamples(f64, f64),
    #[error("ledger holds no samples")]
    NoSamples,
    #[error("ledger holds no loop marks")]
    NoLoopMarks,
    #[error("ledger holds no tack windows")]
    NoTackWindows,
    #[error("need at least two samples with distinct times to fit a line")]
    DegenerateFit,
}

/// Constant-voltage electrical model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerModel {
    /// Always-on electronics draw (W); the valley of the power trace.
    pub base_power_w: f64,
    /// Draw per running motor (W).
    pub motor_power_w: f64,
    /// Battery voltage, constant per run (V).
    pub battery_voltage: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            base_power_w: 2.5,
            motor_power_w: 8.0,
            battery_voltage: 8.1,
        }
    }
}

impl PowerModel {
    /// Battery current implied by a power draw (A).
    pub fn current(&self, power_w: f64) -> f64 {
        power_w / self.battery_voltage
    }
}

/// Total draw with `motors_on` motors running.
pub fn instant_power(pm: &PowerModel, motors_on: u8) -> Result<f64, EnergyError> {
    if motors_on > 2 {
        return Err(EnergyError::MotorsOutOfRange(motors_on));
    }
    Ok(pm.base_power_w + motors_on as f64 * pm.motor_power_w)
}

/// One power sample with the running energy integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub power_w: f64,
    pub cumulative_j: f64,
}

/// Motor-assist interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TackWindow {
    pub t_on: f64,
    pub t_off: f64,
}

/// Ordinary least-squares line through (t, cumulative energy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    /// J/s, i.e. the mean power of the run.
    pub slope_w: f64,
    pub intercept_j: f64,
    pub r_squared: f64,
}

impl LineFit {
    /// Predicted cumulative energy at time `t` (J).
    pub fn predict(&self, t: f64) -> f64 {
        self.slope_w * t + self.intercept_j
    }
}

/// Append-only record of a run's power history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    samples: Vec<EnergySample>,
    loop_marks: Vec<f64>,
    tack_windows: Vec<TackWindow>,
    open_window: Option<f64>,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn samples(&self) -> &[EnergySample] {
        &self.samples
    }

    pub fn loop_marks(&self) -> &[f64] {
        &self.loop_marks
    }

    pub fn tack_windows(&self) -> &[TackWindow] {
        &self.tack_windows
    }

    /// Total accumulated energy so far (J).
    pub fn total_energy(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.cumulative_j)
    }

    /// Duration covered by the samples (s).
    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Append a sample; times must be non-decreasing. The cumulative
    /// integral advances by the trapezoid over the new interval.
    pub fn push(&mut self, t: f64, power_w: f64) {
        let cumulative_j = match self.samples.last() {
            Some(prev) => {
                debug_assert!(t >= prev.t, "samples must be time ordered");
                prev.cumulative_j + 0.5 * (prev.power_w + power_w) * (t - prev.t)
            }
            None => 0.0,
        };
        self.samples.push(EnergySample {
            t,
            power_w,
            cumulative_j,
        });
    }

    /// Record a loop completion at time `t`.
    pub fn mark_loop(&mut self, t: f64) {
        self.loop_marks.push(t);
    }

    /// Begin a motor-assist window at time `t`.
    pub fn open_tack_window(&mut self, t: f64) {
        if self.open_window.is_none() {
            self.open_window = Some(t);
        }
    }

    /// Close the open motor-assist window at time `t`.
    pub fn close_tack_window(&mut self, t: f64) {
        if let Some(t_on) = self.open_window.take() {
            self.tack_windows.push(TackWindow { t_on, t_off: t });
        }
    }

    fn power_at(&self, t: f64) -> f64 {
        // Linear interpolation inside the sampled span; callers guarantee
        // t is within range.
        match self.samples.binary_search_by(|s| s.t.total_cmp(&t)) {
            Ok(i) => self.samples[i].power_w,
            Err(i) => {
                let a = &self.samples[i - 1];
                let b = &self.samples[i];
                let w = (t - a.t) / (b.t - a.t);
                a.power_w + w * (b.power_w - a.power_w)
            }
        }
    }

    /// Trapezoidal integral of power over [t0, t1] (J). Exact for the
    /// piecewise-linear power trace the ledger stores.
    pub fn integrate(&self, t0: f64, t1: f64) -> Result<f64, EnergyError> {
        let first = self.samples.first().ok_or(EnergyError::NoSamples)?;
        let last = *self.samples.last().unwrap();
        if t0 > t1 || t0 < first.t || t1 > last.t {
            return Err(EnergyError::RangeOutsideSamples(t0, t1));
        }
        if t0 == t1 {
            return Ok(0.0);
        }
        let mut sum = 0.0;
        let mut prev_t = t0;
        let mut prev_p = self.power_at(t0);
        let start = match self.samples.binary_search_by(|s| s.t.total_cmp(&t0)) {
            Ok(i) => i + 1,
            Err(i) => i,
        };
        for s in &self.samples[start..] {
            if s.t >= t1 {
                break;
            }
            sum += 0.5 * (prev_p + s.power_w) * (s.t - prev_t);
            prev_t = s.t;
            prev_p = s.power_w;
        }
        let end_p = self.power_at(t1);
        sum += 0.5 * (prev_p + end_p) * (t1 - prev_t);
        Ok(sum)
    }

    /// Energy of each completed loop: integrals between consecutive loop
    /// marks, starting from the first sample.
    pub fn per_loop_energy(&self) -> Result<Vec<f64>, EnergyError> {
        if self.loop_marks.is_empty() {
            return Err(EnergyError::NoLoopMarks);
        }
        let mut start = self.samples.first().ok_or(EnergyError::NoSamples)?.t;
        let mut out = Vec::with_capacity(self.loop_marks.len());
        for &m in &self.loop_marks {
            out.push(self.integrate(start, m)?);
            start = m;
        }
        Ok(out)
    }

    /// Mean motor energy per assist window: the integral of the draw
    /// above the electronics baseline over each window (J).
    pub fn tacking_energy(&self, pm: &PowerModel) -> Result<f64, EnergyError> {
        if self.tack_windows.is_empty() {
            return Err(EnergyError::NoTackWindows);
        }
        let mut total = 0.0;
        for w in &self.tack_windows {
            total += self.integrate(w.t_on, w.t_off)? - pm.base_power_w * (w.t_off - w.t_on);
        }
        Ok(total / self.tack_windows.len() as f64)
    }

    /// Least-squares line through (t, cumulative energy).
    pub fn fit_energy_line(&self) -> Result<LineFit, EnergyError> {
        fit_line(
            self.samples.iter().map(|s| s.t),
            self.samples.iter().map(|s| s.cumulative_j),
        )
    }
}

/// Ordinary least squares on paired iterators.
pub fn fit_line(
    xs: impl Iterator<Item = f64> + Clone,
    ys: impl Iterator<Item = f64> + Clone,
) -> Result<LineFit, EnergyError> {
    let n = xs.clone().count();
    if n < 2 {
        return Err(EnergyError::DegenerateFit);
    }
    let nf = n as f64;
    let mean_x = xs.clone().sum::<f64>() / nf;
    let mean_y = ys.clone().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.clone().zip(ys.clone()) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(EnergyError::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.zip(ys) {
        let e = y - (slope * x + intercept);
        ss_res += e * e;
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LineFit {
        slope_w: slope,
        intercept_j: intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pm() -> PowerModel {
        PowerModel::default()
    }

    #[test]
    fn instant_power_levels() {
        assert_eq!(instant_power(&pm(), 0).unwrap(), 2.5);
        assert_eq!(instant_power(&pm(), 1).unwrap(), 10.5);
        assert_eq!(instant_power(&pm(), 2).unwrap(), 18.5);
        assert_eq!(
            instant_power(&pm(), 3),
            Err(EnergyError::MotorsOutOfRange(3))
        );
    }

    #[test]
    fn current_is_positive_and_finite() {
        let p = pm();
        for motors in 0..=2 {
            let i = p.current(instant_power(&p, motors).unwrap());
            assert!(i.is_finite() && i > 0.0);
        }
    }

    #[test]
    fn constant_power_integrates_exactly() {
        let mut l = EnergyLedger::new();
        for k in 0..=100 {
            l.push(k as f64, 5.0);
        }
        assert_eq!(l.integrate(0.0, 100.0).unwrap(), 500.0);
        assert_eq!(l.integrate(12.5, 12.5).unwrap(), 0.0);
        assert_eq!(l.total_energy(), 500.0);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let mut l = EnergyLedger::new();
        l.push(1.0, 5.0);
        l.push(2.0, 5.0);
        assert!(l.integrate(0.5, 1.5).is_err());
        assert!(l.integrate(1.5, 2.5).is_err());
        assert!(l.integrate(1.8, 1.2).is_err());
        assert!(EnergyLedger::new().integrate(0.0, 1.0).is_err());
    }

    #[test]
    fn piecewise_linear_matches_analytic_integral() {
        // Power ramps 0->10 over [0,10], holds 10 over [10,20], ramps
        // down to 2 over [20,30]. Analytic: 50 + 100 + 60 = 210.
        let mut l = EnergyLedger::new();
        let f = |t: f64| {
            if t <= 10.0 {
                t
            } else if t <= 20.0 {
                10.0
            } else {
                10.0 - 0.8 * (t - 20.0)
            }
        };
        for k in 0..=300 {
            let t = k as f64 * 0.1;
            l.push(t, f(t));
        }
        let got = l.integrate(0.0, 30.0).unwrap();
        assert!((got - 210.0).abs() / 210.0 < 1e-9);
        // Off-grid endpoints stay exact for linear segments.
        let got = l.integrate(0.05, 9.95).unwrap();
        let want = 0.5 * (9.95 * 9.95 - 0.05 * 0.05);
        assert!((got - want).abs() / want < 1e-9);
    }

    #[test]
    fn per_loop_energies_split_the_total() {
        let mut l = EnergyLedger::new();
        for k in 0..=100 {
            l.push(k as f64, 4.0);
        }
        l.mark_loop(30.0);
        l.mark_loop(70.0);
        l.mark_loop(100.0);
        let loops = l.per_loop_energy().unwrap();
        assert_eq!(loops, vec![120.0, 160.0, 120.0]);
        assert_eq!(loops.iter().sum::<f64>(), l.integrate(0.0, 100.0).unwrap());
    }

    #[test]
    fn one_loop_constant_power_takes_the_total() {
        let mut l = EnergyLedger::new();
        for k in 0..=10 {
            l.push(k as f64, 3.0);
        }
        l.mark_loop(10.0);
        assert_eq!(l.per_loop_energy().unwrap(), vec![30.0]);
        let empty = EnergyLedger::new();
        assert_eq!(empty.per_loop_energy(), Err(EnergyError::NoLoopMarks));
    }

    #[test]
    fn tacking_energy_matches_hand_construction() {
        // Base 2.5 W, one motor (10.5 W) during [10,12] and [20,23].
        let mut l = EnergyLedger::new();
        for k in 0..=300 {
            let t = k as f64 * 0.1;
            let on = (10.0..12.0).contains(&t) || (20.0..23.0).contains(&t);
            l.push(t, if on { 10.5 } else { 2.5 });
        }
        l.open_tack_window(10.0);
        l.close_tack_window(12.0);
        l.open_tack_window(20.0);
        l.close_tack_window(23.0);
        let got = l.tacking_energy(&pm()).unwrap();
        // The trailing trapezoid ramps down over one 0.1 s sample, so
        // each window carries excess·(duration − dt/2) joules.
        let want = 0.5 * (8.0 * 1.95 + 8.0 * 2.95);
        assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
        assert_eq!(
            EnergyLedger::new().tacking_energy(&pm()),
            Err(EnergyError::NoTackWindows)
        );
    }

    #[test]
    fn exact_line_recovers_slope_intercept_r2() {
        let mut l = EnergyLedger::new();
        // Constant 3 W => cumulative = 3t exactly; shift by pushing a
        // synthetic first sample is not possible, so fit on raw pairs.
        let xs = (0..50).map(|k| k as f64);
        let ys = (0..50).map(|k| 3.0 * k as f64 + 7.0);
        let fit = fit_line(xs, ys).unwrap();
        assert!((fit.slope_w - 3.0).abs() < 1e-9);
        assert!((fit.intercept_j - 7.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.predict(10.0) - 37.0).abs() < 1e-9);
        assert!((fit.predict(0.0) - 7.0).abs() < 1e-9);

        for k in 0..=10 {
            l.push(k as f64, 3.0);
        }
        let fit = l.fit_energy_line().unwrap();
        assert!((fit.slope_w - 3.0).abs() < 1e-12);
        assert!(fit.intercept_j.abs() < 1e-12);
    }

    #[test]
    fn two_points_fit_passes_through_both() {
        let fit = fit_line([1.0, 3.0].into_iter(), [5.0, 9.0].into_iter()).unwrap();
        assert!((fit.predict(1.0) - 5.0).abs() < 1e-12);
        assert!((fit.predict(3.0) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fits_are_errors() {
        assert_eq!(
            fit_line([2.0, 2.0].into_iter(), [1.0, 5.0].into_iter()),
            Err(EnergyError::DegenerateFit)
        );
        let mut l = EnergyLedger::new();
        l.push(0.0, 1.0);
        assert_eq!(l.fit_energy_line(), Err(EnergyError::DegenerateFit));
    }

    proptest! {
        #[test]
        fn noisy_line_matches_normal_equations(
            slope in -10.0..10.0f64,
            intercept in -100.0..100.0f64,
            seed in 0u64..500,
        ) {
            // Deterministic pseudo-noise so the oracle sees identical data.
            let noise = |k: u64| {
                let h = (seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(k))
                    .wrapping_mul(0xbf58476d1ce4e5b9);
                ((h >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            let xs: Vec<f64> = (0..40).map(|k| k as f64 * 0.5).collect();
            let ys: Vec<f64> = (0..40)
                .map(|k| slope * (k as f64 * 0.5) + intercept + noise(k as u64))
                .collect();
            let fit = fit_line(xs.iter().copied(), ys.iter().copied()).unwrap();
            // Normal equations solved directly.
            let n = xs.len() as f64;
            let sx: f64 = xs.iter().sum();
            let sy: f64 = ys.iter().sum();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
            let det = n * sxx - sx * sx;
            let want_slope = (n * sxy - sx * sy) / det;
            let want_intercept = (sxx * sy - sx * sxy) / det;
            prop_assert!((fit.slope_w - want_slope).abs() < 1e-12 * want_slope.abs().max(1.0));
            prop_assert!(
                (fit.intercept_j - want_intercept).abs()
                    < 1e-12 * want_intercept.abs().max(1.0)
            );
        }

        #[test]
        fn integral_is_additive(split in 0.1..0.9f64) {
            let mut l = EnergyLedger::new();
            for k in 0..=200 {
                let t = k as f64 * 0.05;
                l.push(t, 2.0 + (t * 0.7).sin().abs());
            }
            let a = 0.0;
            let c = 10.0;
            let b = a + split * (c - a);
            let whole = l.integrate(a, c).unwrap();
            let parts = l.integrate(a, b).unwrap() + l.integrate(b, c).unwrap();
            prop_assert!((whole - parts).abs() < 1e-9);
        }

        #[test]
        fn cumulative_energy_is_non_decreasing(seed in 0u64..100) {
            let mut l = EnergyLedger::new();
            let mut prev = 0.0;
            for k in 0..500u64 {
                let h = splitmix_for_test(seed.wrapping_add(k * 7));
                let p = 2.5 + 16.0 * ((h >> 11) as f64 / (1u64 << 53) as f64);
                l.push(k as f64 * 0.05, p);
                let c = l.total_energy();
                prop_assert!(c >= prev);
                prev = c;
            }
        }
    }

    fn splitmix_for_test(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9e3779b97f4a7c15);
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
        x ^ (x >> 31)
    }
}
