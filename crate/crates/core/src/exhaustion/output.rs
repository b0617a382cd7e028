use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::SweepConfig;
use super::sweep::{LimitVector, MassSweepRecord};
use crate::error::{Error, Result};
use crate::fit::FitMethod;
use crate::lorentz::MinkowskiVector;

fn vec_cells(v: Option<MinkowskiVector>) -> [String; 4] {
    match v {
        Some(v) => v.to_array().map(|c| format!("{c:.17e}")),
        None => Default::default(),
    }
}

fn num(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.17e}")).unwrap_or_default()
}

/// Per-ε table: masses, residuals and curvature ranges.
pub fn write_sweep_csv<W: Write>(record: &MassSweepRecord, out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record([
        "epsilon",
        "status",
        "mBY_x1",
        "mBY_x2",
        "mBY_x3",
        "mBY_t",
        "mhat_x1",
        "mhat_x2",
        "mhat_x3",
        "mhat_t",
        "malpha_x1",
        "malpha_x2",
        "malpha_x3",
        "malpha_t",
        "alpha",
        "gap",
        "isometry_residual",
        "hyperboloid_residual",
        "minkowski_identity",
        "funclim",
        "mainhyp",
        "area",
        "h_min",
        "h_max",
        "k_min",
        "k_max",
    ])?;
    for r in &record.records {
        let m = r.mass.as_ref();
        let d = r.diagnostics.as_ref();
        let mut row = vec![format!("{:.17e}", r.eps), r.error.clone().unwrap_or_else(|| "ok".into())];
        row.extend(vec_cells(m.map(|m| m.m_by)));
        row.extend(vec_cells(m.map(|m| m.m_hat)));
        row.extend(vec_cells(m.and_then(|m| m.m_alpha)));
        row.push(num(d.and_then(|d| d.alpha)));
        row.push(num(r.gap));
        let cols = d.map(|d| {
            [
                d.isometry_residual,
                d.hyperboloid_residual,
                d.minkowski_identity,
                d.funclim,
                d.mainhyp,
                d.area,
                d.h_min,
                d.h_max,
                d.k_min,
                d.k_max,
            ]
        });
        for k in 0..10 {
            row.push(num(cols.map(|c| c[k])));
        }
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(record: &MassSweepRecord, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, record)?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<MassSweepRecord> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes `<prefix>.csv` and `<prefix>.summary.json` into the output
/// directory and returns both paths.
pub fn write_outputs(cfg: &SweepConfig, record: &MassSweepRecord) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(&cfg.output.dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", cfg.output.dir.display())))?;
    let csv_path = cfg.output.dir.join(format!("{}.csv", cfg.output.prefix));
    let json_path = cfg.output.dir.join(format!("{}.summary.json", cfg.output.prefix));
    write_sweep_csv(record, std::fs::File::create(&csv_path)?)?;
    let mut f = std::fs::File::create(&json_path)?;
    write_summary(record, &mut f)?;
    f.write_all(b"\n")?;
    Ok((csv_path, json_path))
}

fn limit_line(out: &mut String, name: &str, l: &Option<LimitVector>) {
    match l {
        Some(l) => {
            let _ = writeln!(
                out,
                "{name:<6} limit {}  ± {}  tag {}  cone max {:.3e} ({})",
                l.value, l.std_error, l.tag, l.cone.max_pairing, l.cone.tag
            );
            for (c, f) in ["x1", "x2", "x3", "t"].iter().zip(&l.fits) {
                if f.method == FitMethod::Plateau {
                    let _ = writeln!(out, "         {c:<2}: v = {:+.10e}  plateau, spread {:.3e}", f.v_inf, f.se_v_inf);
                } else {
                    let _ = writeln!(
                        out,
                        "         {c:<2}: v = {:+.10e}  C = {:+.3e}  p = {:.3}{}",
                        f.v_inf,
                        f.c,
                        f.p,
                        if f.p_trusted { "" } else { " (untrusted)" }
                    );
                }
            }
        }
        None => {
            let _ = writeln!(out, "{name:<6} limit unavailable");
        }
    }
}

/// Human-readable summary of a sweep record.
pub fn render_report(record: &MassSweepRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "family {}  grid {}x{}",
        record.family_name, record.grid.n_theta, record.grid.n_phi
    );
    let _ = writeln!(out, "{:>12} {:>22} {:>22} {:>11} {:>16}", "epsilon", "mBY_t", "mhat_t", "gap", "tag(mBY)");
    for r in &record.records {
        match (&r.mass, &r.error) {
            (Some(m), _) => {
                let _ = writeln!(
                    out,
                    "{:>12.6e} {:>22.14e} {:>22.14e} {:>11.3e} {:>16}",
                    r.eps,
                    m.m_by.t,
                    m.m_hat.t,
                    r.gap.unwrap_or(f64::NAN),
                    m.tag_by.as_str()
                );
            }
            (None, Some(e)) => {
                let _ = writeln!(out, "{:>12.6e} failed: {e}", r.eps);
            }
            (None, None) => {}
        }
    }
    let _ = writeln!(out, "mass-aspect vector {}  tag {}", record.wang_mass, record.wang_tag);
    limit_line(&mut out, "m_BY", &record.limit_by);
    limit_line(&mut out, "m_hat", &record.limit_hat);
    if let Some(g) = &record.gap_fit {
        let _ = writeln!(
            out,
            "gap |m_hat - m_BY| ~ {:.3e} + {:.3e} eps^{:.3}  monotone: {}",
            g.v_inf, g.c, g.p, record.gap_monotone
        );
    }
    if record.passed {
        let _ = writeln!(out, "status: pass");
    } else {
        let _ = writeln!(out, "status: FAIL");
        for f in &record.failures {
            let _ = writeln!(out, "  {f}");
        }
    }
    out
}
