//! CSV persistence of trajectories and iterate sequences.
//!
//! Floats are printed as `{:.16e}` (17 significant digits), which parses
//! back to the same `f64`.

use std::fmt::Write as _;

use crate::discrete::DiscreteRun;
use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::scalar::Scalar;

fn push<S: Scalar>(row: &mut String, v: S) {
    let _ = write!(row, ",{:.16e}", v.as_f64());
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |i| format!("{prefix}_{i}"))
}

/// Columns `t, x_*, [v_*], f_*, speed, crit_unscaled, crit_scaled, [W_*]`;
/// the bracketed groups appear for accelerated trajectories only.
pub fn trajectory_csv<S: Scalar>(traj: &Trajectory<S>) -> String {
    let first = traj.records.first();
    let n = first.map_or(0, |r| r.x.len());
    let m = first.map_or(0, |r| r.f.len());
    let accel = traj.is_accelerated();

    let mut header = vec!["t".to_string()];
    header.extend(indexed("x", n));
    if accel {
        header.extend(indexed("v", n));
    }
    header.extend(indexed("f", m));
    header.extend(["speed", "crit_unscaled", "crit_scaled"].map(String::from));
    if accel {
        header.extend(indexed("W", m));
    }

    let mut out = header.join(",");
    out.push('\n');
    for r in &traj.records {
        let mut row = format!("{:.16e}", r.t.as_f64());
        r.x.iter().for_each(|&v| push(&mut row, v));
        if let Some(v) = &r.v {
            v.iter().for_each(|&v| push(&mut row, v));
        }
        r.f.iter().for_each(|&v| push(&mut row, v));
        push(&mut row, r.speed);
        push(&mut row, r.crit_unscaled);
        push(&mut row, r.crit_scaled);
        if let Some(w) = &r.energies {
            w.iter().for_each(|&v| push(&mut row, v));
        }
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Columns `k, x_*, f_*, step, crit_unscaled, crit_scaled`.
pub fn iterates_csv<S: Scalar>(run: &DiscreteRun<S>) -> String {
    let first = run.iterates.first();
    let n = first.map_or(0, |it| it.x.len());
    let m = first.map_or(0, |it| it.f.len());

    let mut header = vec!["k".to_string()];
    header.extend(indexed("x", n));
    header.extend(indexed("f", m));
    header.extend(["step", "crit_unscaled", "crit_scaled"].map(String::from));

    let mut out = header.join(",");
    out.push('\n');
    for it in &run.iterates {
        let mut row = it.k.to_string();
        it.x.iter().for_each(|&v| push(&mut row, v));
        it.f.iter().for_each(|&v| push(&mut row, v));
        push(&mut row, it.step);
        push(&mut row, it.crit_unscaled);
        push(&mut row, it.crit_scaled);
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Header and numeric rows of a CSV written by this module.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("csv: empty input".into()))?
        .split(',')
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| {
                c.parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("csv: row {}: bad value `{c}`", n + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(Error::InvalidInput(format!(
                "csv: row {} has {} columns, header has {}",
                n + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{run_discrete, DiscreteConfig};
    use crate::flow::{integrate_accelerated, integrate_first_order, FlowConfig};
    use crate::problems::strongly_convex;
    use crate::scaling::ScalingRule;

    #[test]
    fn flow_columns_and_exact_parse_back() {
        let p = strongly_convex::<f64>();
        let cfg = FlowConfig::first_order(1.0, 1e-2).with_record_every(7);
        let traj = integrate_first_order(&p, &ScalingRule::unit(), &[0.5, 1.5], &cfg).unwrap();
        let (header, rows) = read_csv(&trajectory_csv(&traj)).unwrap();
        assert_eq!(
            header,
            [
                "t",
                "x_0",
                "x_1",
                "f_0",
                "f_1",
                "speed",
                "crit_unscaled",
                "crit_scaled"
            ]
        );
        assert_eq!(rows.len(), traj.records.len());
        for (row, rec) in rows.iter().zip(&traj.records) {
            assert_eq!(row[0], rec.t);
            assert_eq!(&row[1..3], rec.x.as_slice());
            assert_eq!(row[7], rec.crit_scaled);
        }
    }

    #[test]
    fn accelerated_columns() {
        let p = strongly_convex::<f64>();
        let cfg = FlowConfig::accelerated(0.5, 1e-2, 3.0, 1.0);
        let traj = integrate_accelerated(&p, &ScalingRule::unit(), &[3.0, 1.0], &cfg).unwrap();
        let (header, rows) = read_csv(&trajectory_csv(&traj)).unwrap();
        assert_eq!(
            header.join(","),
            "t,x_0,x_1,v_0,v_1,f_0,f_1,speed,crit_unscaled,crit_scaled,W_0,W_1"
        );
        let last = traj.last();
        assert_eq!(rows.last().unwrap()[3..5], last.v.clone().unwrap()[..]);
    }

    #[test]
    fn iterate_columns() {
        let p = strongly_convex::<f64>();
        let cfg = DiscreteConfig {
            max_iters: 3,
            ..Default::default()
        };
        let run = run_discrete(&p, &ScalingRule::unit(), &[3.0, 1.0], &cfg).unwrap();
        let text = iterates_csv(&run);
        assert!(text.starts_with("k,x_0,x_1,f_0,f_1,step,crit_unscaled,crit_scaled\n0,"));
        let (_, rows) = read_csv(&text).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[3][5], 0.0);
    }
}
