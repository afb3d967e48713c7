//! Deterministic text renderings of run artifacts: the CSV files and
//! the human-readable summaries. Same inputs, same bytes.

use std::fmt::Write as _;

use windward_core::energy::PowerModel;
use windward_core::experiment::{box_stats, CruiseResult, SweepReport};
use windward_core::EnergyLedger;

pub fn trajectory_csv(result: &CruiseResult) -> String {
    let mut out =
        String::from("t,x,y,heading_deg,speed,rudder_deg,sail_phi_deg,motor_left,motor_right,phase\n");
    for r in &result.trajectory {
        let _ = writeln!(
            out,
            "{:.2},{:.4},{:.4},{:.3},{:.4},{:.3},{:.1},{},{},{}",
            r.t,
            r.x,
            r.y,
            r.heading_deg,
            r.speed,
            r.rudder_deg,
            r.sail_phi_deg,
            r.motor_left as u8,
            r.motor_right as u8,
            r.phase.as_str()
        );
    }
    out
}

pub fn energy_csv(ledger: &EnergyLedger, pm: &PowerModel) -> String {
    let mut out = String::from("t,power_w,cumulative_j,motors_on,loop_index\n");
    let marks = ledger.loop_marks();
    for s in ledger.samples() {
        let motors_on = if pm.motor_power_w > 0.0 {
            ((s.power_w - pm.base_power_w) / pm.motor_power_w).round() as i64
        } else {
            0
        };
        let loop_index = 1 + marks.iter().filter(|&&m| m < s.t).count();
        let _ = writeln!(
            out,
            "{:.2},{:.3},{:.6},{},{}",
            s.t, s.power_w, s.cumulative_j, motors_on, loop_index
        );
    }
    out
}

pub fn events_csv(result: &CruiseResult) -> String {
    let mut out = String::from("t,event,loop,tack_count,setting_deg\n");
    for e in &result.events {
        let _ = writeln!(
            out,
            "{:.2},{},{},{},{:.3}",
            e.t,
            e.event.as_str(),
            e.loop_count,
            e.tack_count,
            e.setting_deg
        );
    }
    out
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(
        "theta_deg,total_j,per_loop_mean_j,per_loop_var,tack_energy_j,tack_count,duration_s,fit_slope_w,fit_intercept_j\n",
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:.1},{:.3},{:.3},{:.4},{:.4},{:.2},{:.2},{:.6},{:.4}",
            r.theta_deg,
            r.total_j,
            r.per_loop_mean_j,
            r.per_loop_var,
            r.tack_energy_j,
            r.tacks_per_loop,
            r.duration_s,
            r.fit_slope_w,
            r.fit_intercept_j
        );
    }
    out
}

pub fn cruise_summary(result: &CruiseResult, pm: &PowerModel, loops_target: u32) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "cruise summary");
    let _ = writeln!(out, "==============");
    let _ = writeln!(out, "theta_setting_deg : {:.1}", result.theta_deg);
    let _ = writeln!(out, "seed              : {}", result.seed);
    let _ = writeln!(
        out,
        "loops completed   : {} / {}",
        result.completed_loops, loops_target
    );
    let _ = writeln!(out, "duration_s        : {:.2}", result.duration_s);
    let _ = writeln!(out, "total_energy_j    : {:.3}", result.total_energy_j());
    let per_loop: Vec<f64> = result.loops.iter().map(|l| l.energy_j).collect();
    if !per_loop.is_empty() {
        let joined = per_loop
            .iter()
            .map(|e| format!("{e:.2}"))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "per-loop energy J : {joined}");
        if let Ok(s) = box_stats(&per_loop) {
            let _ = writeln!(
                out,
                "per-loop box      : mean={:.2} var={:.3} min={:.2} q1={:.2} median={:.2} q3={:.2} max={:.2}",
                s.mean, s.variance, s.min, s.q1, s.median, s.q3, s.max
            );
        }
    }
    let _ = writeln!(
        out,
        "tack count        : {} ({:.2} per loop)",
        result.tack_count,
        result.tacks_per_loop()
    );
    if let Ok(te) = result.ledger.tacking_energy(pm) {
        let _ = writeln!(out, "tack energy J     : {te:.3} mean per tack");
    }
    if let Ok(fit) = result.ledger.fit_energy_line() {
        let _ = writeln!(
            out,
            "energy-time fit   : slope={:.4} W intercept={:.3} J r2={:.6}",
            fit.slope_w, fit.intercept_j, fit.r_squared
        );
    }
    let _ = writeln!(
        out,
        "timed out         : {}",
        if result.timed_out { "yes" } else { "no" }
    );
    out
}

pub fn sweep_summary(report: &SweepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sweep summary");
    let _ = writeln!(out, "=============");
    let _ = writeln!(
        out,
        "{:>9} {:>11} {:>12} {:>12} {:>10} {:>10} {:>11} {:>9}",
        "theta_deg",
        "total_j",
        "loop_mean_j",
        "tack_enrg_j",
        "tacks/loop",
        "duration_s",
        "fit_slope_w",
        "timeouts"
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:>9.1} {:>11.3} {:>12.3} {:>12.4} {:>10.2} {:>10.2} {:>11.4} {:>9}",
            r.theta_deg,
            r.total_j,
            r.per_loop_mean_j,
            r.tack_energy_j,
            r.tacks_per_loop,
            r.duration_s,
            r.fit_slope_w,
            r.timed_out_runs
        );
    }
    let _ = writeln!(
        out,
        "best heading      : {:.1} deg ({:.3} J)",
        report.argmin_theta_deg, report.best_total_j
    );
    for (theta, pct) in &report.savings_vs_best {
        let _ = writeln!(
            out,
            "vs {:>5.1} deg      : best saves {pct:.2}%",
            theta
        );
    }
    out
}
