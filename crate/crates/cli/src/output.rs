use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use ness_core::gaussian::FigureTable;
use ness_core::response::ResponseCurve;

use crate::scenario::TrajectoryTable;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn table(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn response_csv(curves: &[ResponseCurve]) -> String {
    let mut header = vec!["tau".to_string()];
    header.extend(curves.iter().map(|c| c.label.id().to_string()));
    let tau = curves.first().map(|c| c.tau.clone()).unwrap_or_default();
    table(
        &header,
        tau.iter().enumerate().map(|(k, &t)| {
            let mut row = vec![t];
            row.extend(curves.iter().map(|c| c.values[k]));
            row
        }),
    )
}

pub fn trajectory_csv(traj: &TrajectoryTable) -> String {
    let mut header = vec!["t".to_string(), "linear_prediction".to_string()];
    if traj.nonlinear.is_some() {
        header.push("nonlinear_reference".into());
    }
    table(
        &header,
        traj.linear.t.iter().enumerate().map(|(k, &t)| {
            let mut row = vec![t, traj.linear.values[k]];
            if let Some(n) = &traj.nonlinear {
                row.push(n.values[k]);
            }
            row
        }),
    )
}

pub fn figure_csv(fig: &FigureTable) -> String {
    table(&fig.columns, fig.rows.iter().cloned())
}

pub fn meta_txt(entries: &[(String, String)]) -> String {
    let mut out = String::new();
    writeln!(out, "tool ness {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "vectorization column-stacking").unwrap();
    for (k, v) in entries {
        writeln!(out, "{k} {v}").unwrap();
    }
    out
}

pub fn write_all(dir: &Path, files: &[(&str, String)]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, body) in files {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}
