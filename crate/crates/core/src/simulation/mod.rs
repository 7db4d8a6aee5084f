//! Synthetic experiments: data generation, metrics and the Monte-Carlo runner.
//!
//! Replicate `i` draws its stream from ChaCha8 seeded with
//! `base_seed + i` (wrapping). Replicates run in parallel on the rayon pool;
//! their results are collected by index and reduced in index order, so a
//! report is bit-identical for any thread count.

pub mod dgp;
pub mod metrics;
pub mod rng;

use rayon::prelude::*;

pub use dgp::{generate, DgpConfig, DgpKind, GeneratedStream, PValueSource};
pub use metrics::{evaluate, Curves};

use crate::error::{Error, Result};
use crate::procedures::{run_stream, ProcedureConfig};

/// Monte-Carlo averages of FDP and power at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub procedure: ProcedureConfig,
    pub dgp: DgpConfig,
    pub replicates: usize,
    pub base_seed: u64,
    /// Steps `t` (1-based) at which the curves are sampled.
    pub checkpoints: Vec<u64>,
    pub fdr: Vec<f64>,
    pub fdr_se: Vec<f64>,
    pub power: Vec<f64>,
    pub power_se: Vec<f64>,
    /// Mean number of rejections at the horizon.
    pub mean_rejections: f64,
}

impl MetricsReport {
    /// FDR, its standard error, power and its standard error at the last checkpoint.
    pub fn last(&self) -> (f64, f64, f64, f64) {
        let i = self.checkpoints.len() - 1;
        (self.fdr[i], self.fdr_se[i], self.power[i], self.power_se[i])
    }
}

/// Every step for horizons up to 1000; otherwise a stride of `ceil(T/1000)`
/// unless given. The horizon is always included.
pub fn default_checkpoints(horizon: u64, stride: Option<u64>) -> Vec<u64> {
    let stride = stride
        .filter(|&s| s > 0)
        .unwrap_or(if horizon <= 1000 { 1 } else { horizon.div_ceil(1000) });
    let mut cps: Vec<u64> = (1..=horizon).filter(|t| t % stride == 0).collect();
    if cps.last() != Some(&horizon) {
        cps.push(horizon);
    }
    cps
}

fn check_checkpoints(cps: &[u64], horizon: u64) -> Result<()> {
    if cps.is_empty() {
        return Err(Error::invalid("checkpoints", "[]", "need at least one"));
    }
    if cps[0] == 0 || cps.windows(2).any(|w| w[0] >= w[1]) || *cps.last().unwrap() > horizon {
        return Err(Error::invalid(
            "checkpoints",
            format!("{cps:?}"),
            "must be strictly increasing steps in 1..=horizon",
        ));
    }
    Ok(())
}

struct ReplicateRow {
    fdp: Vec<f64>,
    power: Vec<f64>,
    rejections: u64,
}

fn mean_se(rows: &[ReplicateRow], pick: impl Fn(&ReplicateRow) -> &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; k];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(pick(r)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut ss = vec![0.0; k];
    for r in rows {
        for ((s, v), m) in ss.iter_mut().zip(pick(r)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let se = ss
        .iter()
        .map(|s| if rows.len() > 1 { (s / (n - 1.0)).sqrt() / n.sqrt() } else { 0.0 })
        .collect();
    (mean, se)
}

/// Runs several procedures on the same `n_reps` generated streams.
pub fn replicate_procedures(
    dgp: &DgpConfig,
    procs: &[ProcedureConfig],
    n_reps: usize,
    base_seed: u64,
    checkpoints: &[u64],
) -> Result<Vec<MetricsReport>> {
    if n_reps == 0 {
        return Err(Error::invalid("replicates", n_reps, "must be at least 1"));
    }
    dgp.validate()?;
    for p in procs {
        p.validate()?;
    }
    check_checkpoints(checkpoints, dgp.horizon)?;

    let per_rep: Vec<Vec<ReplicateRow>> = (0..n_reps)
        .into_par_iter()
        .map(|i| {
            let mut cfg = dgp.clone();
            cfg.seed = base_seed.wrapping_add(i as u64);
            let stream = generate(&cfg)?;
            procs
                .iter()
                .map(|p| {
                    let obs = stream.observations(p.kind.evidence_kind())?;
                    let tr = run_stream(p, &obs)?;
                    let c = evaluate(&tr)?;
                    let at = |v: &[f64]| checkpoints.iter().map(|&t| v[t as usize - 1]).collect();
                    Ok(ReplicateRow {
                        fdp: at(&c.fdp),
                        power: at(&c.power),
                        rejections: tr.rejections(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let k = checkpoints.len();
    let mut reports = Vec::with_capacity(procs.len());
    for (j, p) in procs.iter().enumerate() {
        let rows: Vec<ReplicateRow> = per_rep
            .iter()
            .map(|r| ReplicateRow {
                fdp: r[j].fdp.clone(),
                power: r[j].power.clone(),
                rejections: r[j].rejections,
            })
            .collect();
        let (fdr, fdr_se) = mean_se(&rows, |r| &r.fdp, k);
        let (power, power_se) = mean_se(&rows, |r| &r.power, k);
        let mut total = 0.0;
        for r in &rows {
            total += r.rejections as f64;
        }
        reports.push(MetricsReport {
            procedure: *p,
            dgp: dgp.clone(),
            replicates: n_reps,
            base_seed,
            checkpoints: checkpoints.to_vec(),
            fdr,
            fdr_se,
            power,
            power_se,
            mean_rejections: total / n_reps as f64,
        });
    }
    Ok(reports)
}

pub fn replicate(
    dgp: &DgpConfig,
    proc: &ProcedureConfig,
    n_reps: usize,
    base_seed: u64,
    checkpoints: &[u64],
) -> Result<MetricsReport> {
    replicate_procedures(dgp, std::slice::from_ref(proc), n_reps, base_seed, checkpoints)
        .map(|mut v| v.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procedures::ProcedureKind;

    fn small_dgp() -> DgpConfig {
        let mut d = DgpConfig::new(DgpKind::GaussianMixture);
        d.horizon = 200;
        d
    }

    #[test]
    fn single_replicate_matches_evaluate() {
        let d = small_dgp();
        let p = ProcedureConfig::new(ProcedureKind::ScoreLord, 0.05).unwrap();
        let cps = default_checkpoints(d.horizon, None);
        let rep = replicate(&d, &p, 1, 77, &cps).unwrap();

        let mut g = d.clone();
        g.seed = 77;
        let s = generate(&g).unwrap();
        let tr = run_stream(&p, &s.observations(p.kind.evidence_kind()).unwrap()).unwrap();
        let c = evaluate(&tr).unwrap();
        assert_eq!(rep.fdr, c.fdp);
        assert_eq!(rep.power, c.power);
        assert!(rep.fdr_se.iter().all(|&s| s == 0.0));
        assert_eq!(rep.mean_rejections, tr.rejections() as f64);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let d = small_dgp();
        let p = ProcedureConfig::new(ProcedureKind::ScorePlusSaffron, 0.05).unwrap();
        let cps = default_checkpoints(d.horizon, Some(10));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| replicate(&d, &p, 40, 3, &cps).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn report_ranges() {
        let d = small_dgp();
        let p = ProcedureConfig::new(ProcedureKind::ELord, 0.05).unwrap();
        let r = replicate(&d, &p, 20, 0, &[50, 100, 200]).unwrap();
        for v in r.fdr.iter().chain(&r.power) {
            assert!((0.0..=1.0).contains(v));
        }
        assert!(r.fdr_se.iter().chain(&r.power_se).all(|&s| s >= 0.0));
        assert_eq!(r.checkpoints, vec![50, 100, 200]);
    }

    #[test]
    fn checkpoint_rules() {
        assert_eq!(default_checkpoints(5, None), vec![1, 2, 3, 4, 5]);
        let c = default_checkpoints(2500, None);
        assert_eq!(c[0], 3);
        assert_eq!(*c.last().unwrap(), 2500);
        assert_eq!(default_checkpoints(10, Some(4)), vec![4, 8, 10]);
        let d = small_dgp();
        let p = ProcedureConfig::new(ProcedureKind::ELord, 0.05).unwrap();
        assert!(replicate(&d, &p, 1, 0, &[3, 2]).is_err());
        assert!(replicate(&d, &p, 1, 0, &[201]).is_err());
        assert!(replicate(&d, &p, 0, 0, &[1]).is_err());
    }
}
