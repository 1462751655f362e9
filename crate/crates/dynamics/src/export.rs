use std::fmt::Write;

use carousel_core::ClusterIndex;

use crate::{PhaseState, Result, Trajectory};

/// CSV with a `t, x_1_1, y_1_1, ...` header; rows at `times` or at the
/// stored samples.
pub fn trajectory_csv(traj: &Trajectory, times: Option<&[f64]>) -> Result<String> {
    let states = match times {
        Some(ts) => ts.iter().map(|&t| traj.state_at(t)).collect::<Result<Vec<_>>>()?,
        None => traj.samples.clone(),
    };
    Ok(states_csv(&traj.index, &states))
}

/// Same layout as [`trajectory_csv`] for arbitrary states.
pub fn states_csv(index: &ClusterIndex, states: &[PhaseState]) -> String {
    let mut out = String::from("t");
    for j in 1..=index.n() {
        for k in 1..=index.size(j) {
            write!(out, ",x_{j}_{k},y_{j}_{k}").unwrap();
        }
    }
    for j in 1..=index.n() {
        for k in 1..=index.size(j) {
            write!(out, ",vx_{j}_{k},vy_{j}_{k}").unwrap();
        }
    }
    out.push('\n');
    for s in states {
        write!(out, "{:.17e}", s.t).unwrap();
        for x in s.q.iter().chain(&s.v) {
            write!(out, ",{:.17e},{:.17e}", x[0], x[1]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// First integrals at every stored sample.
pub fn ledger_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,energy,angular_momentum,px,py,cx,cy\n");
    for (s, l) in traj.samples.iter().zip(&traj.ledger) {
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            s.t, l.energy, l.angular_momentum, l.linear_momentum[0], l.linear_momentum[1], l.com[0], l.com[1]
        )
        .unwrap();
    }
    out
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// Inertial-frame orbit plot: one polyline per body, colored by cluster.
pub fn orbit_svg(traj: &Trajectory, points: usize) -> Result<String> {
    let points = points.max(2);
    let (t0, t1) = (traj.t_min(), traj.t_max());
    let states = if traj.has_dense_output() {
        (0..points)
            .map(|i| traj.state_at(t0 + (t1 - t0) * i as f64 / (points - 1) as f64))
            .collect::<Result<Vec<_>>>()?
    } else {
        traj.samples.clone()
    };
    Ok(states_svg(&traj.index, &states))
}

/// Orbit plot of a sequence of states.
pub fn states_svg(index: &ClusterIndex, states: &[PhaseState]) -> String {
    let mut r: f64 = 0.0;
    for s in states {
        for q in &s.q {
            r = r.max(q[0].abs()).max(q[1].abs());
        }
    }
    let r = 1.05 * r.max(f64::MIN_POSITIVE);
    let size = 800.0;
    let map = |x: f64, y: f64| ((x + r) / (2.0 * r) * size, (r - y) / (2.0 * r) * size);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for j in 1..=index.n() {
        let color = PALETTE[(j - 1) % PALETTE.len()];
        for i in index.range(j) {
            write!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="0.8" points=""#).unwrap();
            for s in states {
                let (x, y) = map(s.q[i][0], s.q[i][1]);
                write!(out, "{x:.2},{y:.2} ").unwrap();
            }
            writeln!(out, r#""/>"#).unwrap();
            let (x, y) = map(states[0].q[i][0], states[0].q[i][1]);
            writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#).unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}
