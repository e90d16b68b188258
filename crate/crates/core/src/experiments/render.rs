use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::run::{Report, ScenarioReport};
use super::SolverKind;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 8] = [
    "scenario_id",
    "solver",
    "cost",
    "pct_vs_centralized",
    "moves_type1",
    "moves_type2_single",
    "moves_type2_multi",
    "messages",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per scenario and solver.
pub fn report_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for sr in &report.scenarios {
        for row in &sr.rows {
            w.write_record([
                sr.id.clone(),
                row.solver.name().to_string(),
                opt(row.cost),
                opt(row.pct_vs_centralized),
                row.moves.type1.to_string(),
                row.moves.type2_single.to_string(),
                row.moves.type2_multi.to_string(),
                row.messages.to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn report_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Environment, samples, robot trails and final positions for one solver.
/// `None` for graph-only scenarios or when the solver did not run.
pub fn scenario_svg(sr: &ScenarioReport, solver: SolverKind) -> Option<String> {
    let env = sr.environment.as_ref()?;
    let coords = sr.sample_coords.as_ref()?;
    let row = sr.row(solver).filter(|r| r.cost.is_some())?;
    let [w, h] = env.bounds;
    let dot = 0.004 * w.max(h);
    let pt = |p: [f64; 2]| format!("{:.3},{:.3}", p[0], h - p[1]);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.3} {h:.3}" width="{:.0}" height="{:.0}">"#,
        800.0,
        800.0 * h / w
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{w:.3}" height="{h:.3}" fill="#ffffff" stroke="#000000"/>"##
    );
    for poly in &env.obstacles {
        let pts: Vec<String> = poly.iter().map(|&p| pt(p)).collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="#808080"/>"##, pts.join(" "));
    }
    for &p in coords {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="#c8c8c8"/>"##,
            p[0],
            h - p[1],
            dot
        );
    }
    for robot in 0..row.final_config.len() {
        let mut path: Vec<usize> = Vec::new();
        for config in &row.trajectory {
            let v = config[robot];
            if path.last() != Some(&v) {
                path.push(v);
            }
        }
        if path.len() > 1 {
            let pts: Vec<String> = path.iter().map(|&v| pt(coords[v])).collect();
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#cc3333" stroke-width="{:.3}"/>"##,
                pts.join(" "),
                dot * 0.6
            );
        }
    }
    for &v in &row.final_config {
        let p = coords[v];
        let _ = writeln!(
            s,
            r##"<circle class="robot" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="#0066cc"/>"##,
            p[0],
            h - p[1],
            dot * 2.5
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes `report.csv`, `report.json` and one SVG per environment scenario
/// (drawing the first distributed solver present) into `dir`.
pub fn render_report(report: &Report, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    if report.scenarios.is_empty() {
        return Err(Error::InvalidArgument("report has no scenarios".into()));
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for &f in formats {
        match f {
            Format::Csv => {
                let path = dir.join("report.csv");
                std::fs::write(&path, report_csv(report)?)?;
                written.push(path);
            }
            Format::Json => {
                let path = dir.join("report.json");
                std::fs::write(&path, report_json(report)?)?;
                written.push(path);
            }
            Format::Svg => {
                for sr in &report.scenarios {
                    let solver = [SolverKind::Distributed, SolverKind::Distributed4, SolverKind::Distributed2]
                        .into_iter()
                        .find(|&k| sr.row(k).is_some())
                        .or_else(|| sr.rows.first().map(|r| r.solver));
                    if let Some(svg) = solver.and_then(|k| scenario_svg(sr, k)) {
                        let path = dir.join(format!("{}.svg", file_stem(&sr.id)));
                        std::fs::write(&path, svg)?;
                        written.push(path);
                    }
                }
            }
        }
    }
    Ok(written)
}
