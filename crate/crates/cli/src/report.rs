use crate::failure::{self, Failure};
use crate::simulate::{load_summary, Summary};
use mfd_sim::coupling::{relative_deviation, ProbeComparison, ProbeSample};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug)]
pub struct Report {
    pub case: String,
    pub rows: Vec<ProbeComparison>,
    pub cfd_seconds: f64,
    pub hybrid_seconds: f64,
    pub speedup: f64,
}

fn case_name(summary: &Summary) -> String {
    Path::new(&summary.network)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| summary.network.clone())
}

/// Pairs the probes of two summaries by label. Both must hold the same
/// labels at the same coordinates.
pub fn build(hybrid: &Summary, cfd: &Summary) -> Result<Report, Failure> {
    for s in [hybrid, cfd] {
        if s.status != "converged" {
            return Err(Failure::Invalid(format!(
                "summary of {} records a failed run ({})",
                s.network, s.status
            )));
        }
    }
    let mut rows = Vec::new();
    for h in &hybrid.probes {
        let c = cfd
            .probes
            .iter()
            .find(|c| c.label == h.label)
            .ok_or_else(|| {
                Failure::Probe(format!("probe {} missing from the reference run", h.label))
            })?;
        if (c.x, c.y) != (h.x, h.y) {
            return Err(Failure::Probe(format!(
                "probe {} sits at different points",
                h.label
            )));
        }
        let cs = ProbeSample {
            pressure: c.pressure_pa,
            velocity: c.velocity_m_per_s,
        };
        let hs = ProbeSample {
            pressure: h.pressure_pa,
            velocity: h.velocity_m_per_s,
        };
        rows.push(ProbeComparison {
            label: h.label.clone(),
            cfd: cs,
            hybrid: hs,
            pressure_deviation: relative_deviation(cs.pressure, hs.pressure),
            velocity_deviation: relative_deviation(cs.velocity, hs.velocity),
        });
    }
    if let Some(extra) = cfd
        .probes
        .iter()
        .find(|c| !hybrid.probes.iter().any(|h| h.label == c.label))
    {
        return Err(Failure::Probe(format!(
            "probe {} missing from the run under test",
            extra.label
        )));
    }
    Ok(Report {
        case: case_name(hybrid),
        rows,
        cfd_seconds: cfd.elapsed_seconds,
        hybrid_seconds: hybrid.elapsed_seconds,
        speedup: cfd.elapsed_seconds / hybrid.elapsed_seconds,
    })
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "case,probe,cfd_pressure_pa,hybrid_pressure_pa,pressure_deviation_pct,\
             cfd_velocity_m_per_s,hybrid_velocity_m_per_s,velocity_deviation_pct,\
             cfd_seconds,hybrid_seconds,speedup\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.5e},{:.5e},{:.5e},{:.5e},{:.5e},{:.5e},{:.5e},{:.5e},{:.5e}",
                self.case,
                r.label,
                r.cfd.pressure,
                r.hybrid.pressure,
                100.0 * r.pressure_deviation,
                r.cfd.velocity,
                r.hybrid.velocity,
                100.0 * r.velocity_deviation,
                self.cfd_seconds,
                self.hybrid_seconds,
                self.speedup
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<8} {:<12} {:>12} {:>12} {:>8} {:>12} {:>12} {:>8}\n",
            "probe", "case", "p CFD", "p hybrid", "dev %", "u CFD", "u hybrid", "dev %"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:<12} {:>12.1} {:>12.1} {:>8.3} {:>12.4e} {:>12.4e} {:>8.3}",
                r.label,
                self.case,
                r.cfd.pressure,
                r.hybrid.pressure,
                100.0 * r.pressure_deviation,
                r.cfd.velocity,
                r.hybrid.velocity,
                100.0 * r.velocity_deviation
            );
        }
        let _ = writeln!(
            out,
            "runtime CFD {:.3} s, hybrid {:.3} s, speed-up {:.2}",
            self.cfd_seconds, self.hybrid_seconds, self.speedup
        );
        out
    }
}

pub fn compare_runs(hybrid: &Path, cfd: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let report = build(&load_summary(hybrid)?, &load_summary(cfd)?)?;
    print!("{}", report.to_table());
    match out {
        Some(path) => failure::write(path, &report.to_csv()),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::ProbeRecord;
    use crate::Mode;
    use mfd_sim::coupling::HybridConfig;

    fn summary(p: f64, seconds: f64) -> Summary {
        Summary {
            network: "nets/cross.json".into(),
            mode: Mode::Hybrid,
            status: "converged".into(),
            exit_code: 0,
            message: None,
            config: HybridConfig::default(),
            regions: Some(1),
            exchanges: Some(10),
            final_residual: Some(1e-3),
            lattice_steps: Some(100),
            elapsed_seconds: seconds,
            probes: vec![ProbeRecord {
                label: "1a".into(),
                x: -2e-4,
                y: 0.0,
                pressure_pa: p,
                velocity_m_per_s: 0.02,
            }],
        }
    }

    #[test]
    fn identical_runs_have_no_deviation() {
        let s = summary(710.1, 2.0);
        let r = build(&s, &s).unwrap();
        assert_eq!(r.rows[0].pressure_deviation, 0.0);
        assert_eq!(r.rows[0].velocity_deviation, 0.0);
        assert_eq!(r.speedup, 1.0);
        assert_eq!(r.case, "cross");
    }

    #[test]
    fn table_row_shape() {
        let r = build(&summary(712.6, 0.5), &summary(710.1, 50.0)).unwrap();
        assert!((100.0 * r.rows[0].pressure_deviation - 0.352).abs() < 5e-4);
        assert_eq!(r.speedup, 100.0);
        let table = r.to_table();
        let row = table.lines().nth(1).unwrap();
        let cells: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(&cells[..5], ["1a", "cross", "710.1", "712.6", "0.352"]);
        assert_eq!(r.to_csv().lines().count(), 2);
    }

    #[test]
    fn mismatched_probes_are_rejected() {
        let a = summary(1.0, 1.0);
        let mut b = summary(1.0, 1.0);
        b.probes[0].label = "2b".into();
        assert_eq!(build(&a, &b).unwrap_err().code(), 8);
        let mut c = summary(1.0, 1.0);
        c.probes[0].x = 0.0;
        assert_eq!(build(&a, &c).unwrap_err().code(), 8);
        let mut failed = summary(1.0, 1.0);
        failed.status = "diverged".into();
        assert_eq!(build(&a, &failed).unwrap_err().code(), 5);
    }
}
