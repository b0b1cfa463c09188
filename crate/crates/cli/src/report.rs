//! Result rows, CSV round-tripping and the convergence-order report.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const CSV_COLUMNS: [&str; 15] = [
    "case", "scheme", "kind", "nx", "ny", "n_iter", "n_iter_avg", "pct_noconv", "converged",
    "f_min", "f_max", "r_under", "r_over", "err2_pct", "wall_s",
];

/// One benchmark result; steady rows fill `n_iter`, transient rows fill
/// `n_iter_avg` and `pct_noconv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub case: String,
    pub scheme: String,
    pub kind: String,
    pub nx: usize,
    pub ny: usize,
    pub n_iter: Option<usize>,
    pub n_iter_avg: Option<f64>,
    pub pct_noconv: Option<f64>,
    pub converged: bool,
    pub f_min: f64,
    pub f_max: f64,
    pub r_under: f64,
    pub r_over: f64,
    pub err2_pct: Option<f64>,
    pub wall_s: f64,
}

/// 17 significant digits: enough for an exact f64 round trip.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

impl ResultRow {
    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.case.clone(),
            self.scheme.clone(),
            self.kind.clone(),
            self.nx.to_string(),
            self.ny.to_string(),
            self.n_iter.map(|v| v.to_string()).unwrap_or_default(),
            fmt_opt(self.n_iter_avg),
            fmt_opt(self.pct_noconv),
            self.converged.to_string(),
            fmt(self.f_min),
            fmt(self.f_max),
            fmt(self.r_under),
            fmt(self.r_over),
            fmt_opt(self.err2_pct),
            fmt(self.wall_s),
        ]
    }

    pub fn from_record(rec: &csv::StringRecord) -> Result<ResultRow> {
        if rec.len() != CSV_COLUMNS.len() {
            bail!("expected {} columns, found {}", CSV_COLUMNS.len(), rec.len());
        }
        let opt_f = |s: &str| -> Result<Option<f64>> {
            Ok(if s.is_empty() { None } else { Some(s.parse()?) })
        };
        Ok(ResultRow {
            case: rec[0].to_string(),
            scheme: rec[1].to_string(),
            kind: rec[2].to_string(),
            nx: rec[3].parse()?,
            ny: rec[4].parse()?,
            n_iter: if rec[5].is_empty() { None } else { Some(rec[5].parse()?) },
            n_iter_avg: opt_f(&rec[6])?,
            pct_noconv: opt_f(&rec[7])?,
            converged: rec[8].parse()?,
            f_min: rec[9].parse()?,
            f_max: rec[10].parse()?,
            r_under: rec[11].parse()?,
            r_over: rec[12].parse()?,
            err2_pct: opt_f(&rec[13])?,
            wall_s: rec[14].parse()?,
        })
    }
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.write_record(row.to_record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(ResultRow::from_record(&rec?)?);
    }
    Ok(rows)
}

/// Observed convergence orders per (case, scheme) from the err2 column:
/// `log(e_coarse / e_fine) / log(nx_fine / nx_coarse)` between successive
/// grids (equals the log2 error ratio for a doubling refinement).
pub fn convergence_orders(rows: &[ResultRow]) -> Result<Vec<(String, String, Vec<f64>)>> {
    let mut groups: BTreeMap<(String, String), Vec<(usize, f64)>> = BTreeMap::new();
    for row in rows {
        if let Some(e) = row.err2_pct {
            groups
                .entry((row.case.clone(), row.scheme.clone()))
                .or_default()
                .push((row.nx, e));
        }
    }
    if groups.is_empty() {
        bail!("no rows with an err2 column; run a case with a reference solution");
    }
    let mut out = Vec::new();
    for ((case, scheme), mut pts) in groups {
        pts.sort_by_key(|p| p.0);
        pts.dedup_by_key(|p| p.0);
        if pts.len() < 2 {
            bail!("case {case}/{scheme}: need at least two grid sizes with err2, found {}", pts.len());
        }
        let orders = pts
            .windows(2)
            .map(|w| (w[0].1 / w[1].1).ln() / (w[1].0 as f64 / w[0].0 as f64).ln())
            .collect();
        out.push((case, scheme, orders));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ResultRow {
        ResultRow {
            case: "uniform".into(),
            scheme: "rnlmpfa".into(),
            kind: "steady".into(),
            nx: 20,
            ny: 20,
            n_iter: Some(4),
            n_iter_avg: None,
            pct_noconv: None,
            converged: true,
            f_min: 1.2345678901234567e-7,
            f_max: 0.987654321,
            r_under: 0.0,
            r_over: 0.0,
            err2_pct: Some(0.2658),
            wall_s: 0.0314159,
        }
    }

    #[test]
    fn csv_round_trip_is_identical() {
        let dir = std::env::temp_dir().join("nlfv-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rt.csv");
        let rows = vec![
            sample_row(),
            ResultRow {
                kind: "transient".into(),
                n_iter: None,
                n_iter_avg: Some(1.011),
                pct_noconv: Some(0.0),
                err2_pct: None,
                ..sample_row()
            },
        ];
        write_csv(&path, &rows).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn orders_from_fig4_data() {
        let errs = [0.2658, 0.0733, 0.0195];
        let rows: Vec<ResultRow> = errs
            .iter()
            .zip([20usize, 40, 80])
            .map(|(e, n)| ResultRow {
                nx: n,
                ny: n,
                err2_pct: Some(*e),
                ..sample_row()
            })
            .collect();
        let got = convergence_orders(&rows).unwrap();
        assert_eq!(got.len(), 1);
        let orders = &got[0].2;
        assert!((orders[0] - 1.8585).abs() < 5e-3, "{orders:?}");
        assert!((orders[1] - 1.9103).abs() < 5e-3, "{orders:?}");
    }

    #[test]
    fn exact_doubling_gives_order_two() {
        let rows: Vec<ResultRow> = [0.4, 0.1, 0.025]
            .iter()
            .zip([10usize, 20, 40])
            .map(|(e, n)| ResultRow {
                nx: n,
                ny: n,
                err2_pct: Some(*e),
                ..sample_row()
            })
            .collect();
        let got = convergence_orders(&rows).unwrap();
        for o in &got[0].2 {
            assert!((o - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_grid_size_is_an_error() {
        let rows = vec![sample_row()];
        assert!(convergence_orders(&rows).is_err());
    }
}
