//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use score_fdr::calibration::{
    ar1_conditional_pvalue, conformal_evalue, lr_evalue, vovk_p_to_e, CalibrationSet, LikelihoodRatioSpec,
};
use score_fdr::cli::report::read_decisions;
use score_fdr::procedures::{Procedure, ProcedureConfig, ProcedureKind, StepResult};
use score_fdr::reference::{bound_scan, compare, random_evidence, Divergence};
use score_fdr::schedule::Schedule;
use score_fdr::simulation::rng::{exponential, open_uniform, rng_for, std_normal};
use score_fdr::simulation::{default_checkpoints, replicate_procedures, DgpConfig, DgpKind, PValueSource};
use score_fdr::types::EvidenceKind;
use ProcedureKind::*;

const ALPHA: f64 = 0.05;
/// Slack allowed on algebraic bounds.
const ALGEBRA_TOL: f64 = 1e-12;
/// Equality tolerance for the refund inequality above one.
const BOUND_EQ_TOL: f64 = 1e-15;
/// Oracle agreement per field.
const ORACLE_TOL: f64 = 1e-10;
/// FDR tolerance in standard errors.
const FDR_SE_MULT: f64 = 3.0;
/// Power ordering tolerance in standard errors.
const POWER_SE_MULT: f64 = 2.0;
const VOVK_TOL: f64 = 1e-3;
const VOVK_LIMIT_TOL: f64 = 1e-6;
/// One-sample Kolmogorov-Smirnov critical value at 1%, times sqrt(n).
const KS_CRIT_1PCT: f64 = 1.628;

const E_PROCS: [ProcedureKind; 6] = [ELord, ScoreLord, ScorePlusLord, ESaffron, ScoreSaffron, ScorePlusSaffron];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(cfg: ProcedureConfig, xs: &[f64]) -> Vec<StepResult> {
    let mut p = Procedure::new(cfg).unwrap();
    xs.iter().map(|&x| p.step_value(x).unwrap()).collect()
}

fn within_budget(elapsed: Duration, limit: Option<Duration>) -> bool {
    limit.is_none_or(|l| elapsed <= l)
}

fn refund_bound() -> Outcome {
    let r = bound_scan(1e-3, 10.0).unwrap();
    outcome(
        r.points == 10_001 && r.violations == 0 && r.max_slack_above_one < BOUND_EQ_TOL,
        format!(
            "{} points, {} violations, max slack for y >= 1 = {:e}",
            r.points, r.violations, r.max_slack_above_one
        ),
    )
}

fn estimator_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    for kind in ProcedureKind::ALL {
        let cfg = ProcedureConfig::new(kind, ALPHA).unwrap();
        let mut kind_worst = f64::NEG_INFINITY;
        for _ in 0..1000 {
            let xs = random_evidence(kind.evidence_kind(), 500, &mut rng);
            for r in run(cfg, &xs) {
                kind_worst = kind_worst.max(r.fdp_hat - ALPHA);
            }
        }
        if kind_worst > ALGEBRA_TOL {
            bad.push(kind.name());
        }
        worst = worst.max(kind_worst);
    }
    outcome(
        bad.is_empty(),
        format!("11 procedures x 1000 streams x 500 steps, max fdp_hat - alpha = {worst:.3e}, failing: {bad:?}"),
    )
}

fn dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let streams: Vec<Vec<f64>> = (0..1000).map(|_| random_evidence(EvidenceKind::EValue, 500, &mut rng)).collect();
    let mut pass = true;
    let mut details = Vec::new();
    for (score, base) in [(ScoreLond, ELond), (ScoreLord, ELord), (ScoreSaffron, ESaffron)] {
        let (cs, cb) = (ProcedureConfig::new(score, ALPHA).unwrap(), ProcedureConfig::new(base, ALPHA).unwrap());
        let (mut violations, mut strict_alpha, mut strict_r) = (0usize, 0usize, 0usize);
        for xs in &streams {
            let (rs, rb) = (run(cs, xs), run(cb, xs));
            let mut sa = false;
            let mut sr = false;
            for (s, b) in rs.iter().zip(&rb) {
                if s.ledger.alpha_t < b.ledger.alpha_t || s.rejections < b.rejections {
                    violations += 1;
                }
                sa |= s.ledger.alpha_t > b.ledger.alpha_t;
                sr |= s.rejections > b.rejections;
            }
            strict_alpha += usize::from(sa);
            strict_r += usize::from(sr);
        }
        pass &= violations == 0 && strict_alpha > 0;
        details.push(format!(
            "{score}/{base}: {violations} violations, strict alpha in {strict_alpha}, strict R in {strict_r}"
        ));
    }
    outcome(pass, details.join("; "))
}

fn oracle() -> Outcome {
    let mut worst = Divergence::default();
    let mut bad = Vec::new();
    for kind in ProcedureKind::ALL {
        let cfg = ProcedureConfig::new(kind, ALPHA).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut d = Divergence::default();
        for _ in 0..1000 {
            d = d.merge(compare(&cfg, &random_evidence(kind.evidence_kind(), 200, &mut rng)).unwrap());
        }
        if !d.within(ORACLE_TOL) {
            bad.push(kind.name());
        }
        worst = worst.merge(d);
    }
    outcome(
        bad.is_empty(),
        format!(
            "1000 streams x 11 procedures, max |diff| = {:.3e}, decision mismatches = {}, failing: {bad:?}",
            worst.max_abs(),
            worst.decision_mismatches
        ),
    )
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = [0usize; 4];
    let kinds = [ScorePlusLord, ScorePlusSaffron, PLord, PSaffron];
    for _ in 0..500 {
        let es = random_evidence(EvidenceKind::EValue, 300, &mut rng);
        let ps = random_evidence(EvidenceKind::PValue, 300, &mut rng);
        let es2: Vec<f64> = es
            .iter()
            .map(|&e| if rng.gen_bool(0.3) { e * (1.0 + 20.0 * rng.gen::<f64>()) + rng.gen::<f64>() } else { e })
            .collect();
        let ps2: Vec<f64> = ps
            .iter()
            .map(|&p| if rng.gen_bool(0.3) { (p * rng.gen::<f64>()).max(1e-300) } else { p })
            .collect();
        for (k, kind) in kinds.into_iter().enumerate() {
            let (lo, hi) = if kind.evidence_kind() == EvidenceKind::EValue { (&es, &es2) } else { (&ps, &ps2) };
            let cfg = ProcedureConfig::new(kind, ALPHA).unwrap();
            for (a, b) in run(cfg, lo).iter().zip(&run(cfg, hi)) {
                if a.ledger.alpha_t > b.ledger.alpha_t || a.rejections > b.rejections {
                    violations[k] += 1;
                }
            }
        }
    }
    let detail: Vec<String> = kinds.iter().zip(violations).map(|(k, v)| format!("{k}: {v}")).collect();
    outcome(
        violations.iter().all(|&v| v == 0),
        format!("500 paired streams, violations {}", detail.join(", ")),
    )
}

struct Row {
    kind: ProcedureKind,
    fdr: f64,
    fdr_se: f64,
    power: f64,
    power_se: f64,
}

fn simulate(dgp: &DgpConfig, procs: &[ProcedureConfig], reps: usize, seed: u64) -> Vec<Row> {
    let cps = default_checkpoints(dgp.horizon, None);
    replicate_procedures(dgp, procs, reps, seed, &cps)
        .unwrap()
        .into_iter()
        .map(|r| {
            let (fdr, fdr_se, power, power_se) = r.last();
            Row {
                kind: r.procedure.kind,
                fdr,
                fdr_se,
                power,
                power_se,
            }
        })
        .collect()
}

fn row(rows: &[Row], kind: ProcedureKind) -> &Row {
    rows.iter().find(|r| r.kind == kind).unwrap()
}

/// `hi` power is at least `lo` power up to the larger of the two SEs.
fn power_at_least(rows: &[Row], hi: ProcedureKind, lo: ProcedureKind) -> bool {
    let (h, l) = (row(rows, hi), row(rows, lo));
    h.power >= l.power - POWER_SE_MULT * h.power_se.max(l.power_se)
}

fn fdr_ok(r: &Row) -> bool {
    r.fdr <= ALPHA + FDR_SE_MULT * r.fdr_se
}

fn describe(rows: &[Row]) -> String {
    rows.iter()
        .map(|r| format!("{} fdr {:.4}({:.4}) pow {:.4}({:.4})", r.kind, r.fdr, r.fdr_se, r.power, r.power_se))
        .collect::<Vec<_>>()
        .join(", ")
}

fn gaussian_mixture() -> Outcome {
    let procs: Vec<ProcedureConfig> = E_PROCS
        .iter()
        .map(|&k| {
            let c = ProcedureConfig::new(k, ALPHA).unwrap().with_omega(Schedule::Constant(0.05)).unwrap();
            if c.lambda.is_some() {
                c.with_lambda(Schedule::Constant(0.5)).unwrap()
            } else {
                c
            }
        })
        .collect();
    let mut pass = true;
    let mut details = Vec::new();
    for pi1 in [0.3, 0.8] {
        let mut dgp = DgpConfig::new(DgpKind::GaussianMixture);
        dgp.pi1 = pi1;
        dgp.horizon = 1000;
        let rows = simulate(&dgp, &procs, 500, 6);
        let fdr = rows.iter().all(fdr_ok);
        let order = power_at_least(&rows, ScorePlusLord, ScoreLord)
            && power_at_least(&rows, ScoreLord, ELord)
            && power_at_least(&rows, ScorePlusSaffron, ScoreSaffron)
            && power_at_least(&rows, ScoreSaffron, ESaffron);
        pass &= fdr && order;
        details.push(format!("pi1={pi1}: fdr ok={fdr} order ok={order} [{}]", describe(&rows)));
    }
    outcome(pass, details.join("; "))
}

fn ar_exponential() -> Outcome {
    let rai = Schedule::rai(0.05, 0.5, 0.5).unwrap();
    let procs: Vec<ProcedureConfig> = E_PROCS
        .iter()
        .map(|&k| ProcedureConfig::new(k, ALPHA).unwrap().with_omega(rai).unwrap())
        .collect();
    let mut dgp = DgpConfig::new(DgpKind::ArExponential);
    dgp.pi1 = 0.3;
    dgp.rho = 0.5;
    let rows = simulate(&dgp, &procs, 500, 7);
    let fdr = rows.iter().all(fdr_ok);
    let order = power_at_least(&rows, ScoreLord, ELord)
        && power_at_least(&rows, ScorePlusLord, ELord)
        && power_at_least(&rows, ScoreSaffron, ESaffron)
        && power_at_least(&rows, ScorePlusSaffron, ESaffron);
    outcome(fdr && order, format!("fdr ok={fdr} order ok={order} [{}]", describe(&rows)))
}

fn conditional_vs_marginal() -> Outcome {
    let procs = [ProcedureConfig::new(PLord, ALPHA).unwrap(), ProcedureConfig::new(PSaffron, ALPHA).unwrap()];
    let mut dgp = DgpConfig::new(DgpKind::Ar1Gaussian);
    dgp.phi0 = 0.5;
    dgp.phi1 = 3.0;
    dgp.pi1 = 0.3;
    dgp.horizon = 1000;
    dgp.pvalues = PValueSource::Conditional;
    let cond = simulate(&dgp, &procs, 300, 8);
    dgp.pvalues = PValueSource::Marginal;
    let marg = simulate(&dgp, &procs, 300, 8);
    let cond_ok = cond.iter().all(fdr_ok);
    let marg_breaks = marg.iter().all(|r| r.fdr > ALPHA + FDR_SE_MULT * r.fdr_se);
    outcome(
        cond_ok && marg_breaks,
        format!(
            "300 replicates; conditional [{}]; marginal [{}]",
            describe(&cond),
            describe(&marg)
        ),
    )
}

/// Mean and standard error.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn valid(xs: &[f64]) -> (bool, f64, f64) {
    let (m, se) = mean_se(xs);
    (m <= 1.0 + 3.0 * se, m, se)
}

fn calibrators() -> Outcome {
    let mut checks = Vec::new();
    let v05 = vovk_p_to_e(0.05).unwrap();
    checks.push(("vovk(0.05)", (v05 - 1.7833).abs() <= VOVK_TOL, format!("{v05:.6}")));
    let v1 = vovk_p_to_e(1.0).unwrap();
    let v_near = vovk_p_to_e(1.0 - 1e-9).unwrap();
    checks.push((
        "vovk(p->1)",
        (v1 - 0.5).abs() <= VOVK_LIMIT_TOL && (v_near - 0.5).abs() <= VOVK_LIMIT_TOL,
        format!("{v1}, {v_near:.9}"),
    ));

    let mut rng = rng_for(9);
    let vovk: Vec<f64> = (0..1_000_000).map(|_| vovk_p_to_e(open_uniform(&mut rng)).unwrap()).collect();
    let (ok, m, se) = valid(&vovk);
    checks.push(("vovk MC", ok, format!("{m:.4}({se:.4})")));

    // exchangeable scores: the test point is a uniformly chosen member of 21 iid draws
    let conf: Vec<f64> = (0..100_000)
        .map(|_| {
            let mut s: Vec<f64> = (0..21).map(|_| exponential(&mut rng, 1.0)).collect();
            let k = (open_uniform(&mut rng) * 21.0) as usize;
            let test = s.swap_remove(k.min(20));
            conformal_evalue(test, &CalibrationSet::new(s).unwrap()).unwrap()
        })
        .collect();
    let (ok, m, se) = valid(&conf);
    checks.push(("conformal MC", ok, format!("{m:.4}({se:.4})")));

    let gm = LikelihoodRatioSpec::gaussian_mixture_default();
    let lr_g: Vec<f64> = (0..200_000).map(|_| lr_evalue(&gm, std_normal(&mut rng), None).unwrap()).collect();
    let (ok, m, se) = valid(&lr_g);
    checks.push(("gaussian LR MC", ok, format!("{m:.4}({se:.4})")));

    let ex = LikelihoodRatioSpec::exponential_scale(3.0).unwrap();
    let mut prev = 0.0;
    let lr_e: Vec<f64> = (0..200_000)
        .map(|_| {
            let eta = 1.0 + 0.5 * prev;
            let x = exponential(&mut rng, eta);
            prev = x;
            lr_evalue(&ex, x, Some(eta)).unwrap()
        })
        .collect();
    let (ok, m, se) = valid(&lr_e);
    checks.push(("exponential LR MC", ok, format!("{m:.4}({se:.4})")));

    let ar = LikelihoodRatioSpec::ar1_gaussian(0.5, 3.0).unwrap();
    let mut prev = std_normal(&mut rng) * (1.0f64 / 0.75).sqrt();
    let mut pvals = Vec::with_capacity(100_000);
    let lr_a: Vec<f64> = (0..200_000)
        .map(|_| {
            let x = 0.5 * prev + std_normal(&mut rng);
            let e = lr_evalue(&ar, x, Some(prev)).unwrap();
            if pvals.len() < 100_000 {
                pvals.push(ar1_conditional_pvalue(x, prev, 0.5));
            }
            prev = x;
            e
        })
        .collect();
    let (ok, m, se) = valid(&lr_a);
    checks.push(("ar1 LR MC", ok, format!("{m:.4}({se:.4})")));

    pvals.sort_by(f64::total_cmp);
    let n = pvals.len() as f64;
    let ks = pvals
        .iter()
        .enumerate()
        .map(|(i, &p)| ((i as f64 + 1.0) / n - p).max(p - i as f64 / n))
        .fold(0.0, f64::max);
    let crit = KS_CRIT_1PCT / n.sqrt();
    checks.push(("ar1 conditional p KS", ks < crit, format!("{ks:.5} < {crit:.5}")));

    let pass = checks.iter().all(|c| c.1);
    let detail = checks
        .iter()
        .map(|(n, ok, d)| format!("{n} {} {d}", if *ok { "ok" } else { "FAILED" }))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

fn ingest_end_to_end() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/synthetic_pvalues.csv");
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_score-fdr"))
        .args(["ingest", "--calibrator", "vovk", "--procedure", "e-lord,score-lord,score-plus-lord", "--input"])
        .arg(&data)
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    if !out.status.success() {
        return outcome(false, format!("ingest failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let count = |kind: ProcedureKind| {
        let rows = read_decisions(&dir.path().join(format!("decisions_{kind}.csv"))).unwrap();
        (rows.iter().filter(|r| r.decision).count(), rows)
    };
    let (e_lord, _) = count(ELord);
    let (score_lord, rows) = count(ScoreLord);
    let (score_plus, _) = count(ScorePlusLord);

    // re-run in-process and compare the serialized fields bit for bit
    let raw = score_fdr::cli::ingest::read_stream(&data).unwrap();
    let es: Vec<f64> = raw.values.iter().map(|&p| vovk_p_to_e(p).unwrap()).collect();
    let direct = run(ProcedureConfig::new(ScoreLord, ALPHA).unwrap(), &es);
    let bit_exact = rows.len() == 10_000
        && rows.iter().zip(&direct).all(|(r, s)| {
            r.alpha.to_bits() == s.ledger.alpha_t.to_bits()
                && r.decision == s.ledger.decision
                && r.overshoot.to_bits() == s.ledger.overshoot.to_bits()
                && r.cost.to_bits() == s.ledger.cost.to_bits()
                && r.fdp_hat.to_bits() == s.fdp_hat.to_bits()
        });
    outcome(
        score_lord >= e_lord && score_plus >= score_lord && bit_exact,
        format!(
            "discoveries e-lord {e_lord}, score-lord {score_lord}, score-plus-lord {score_plus}; round trip bit-exact: {bit_exact}"
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome, Option<u64>);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "refund inequality on [0, 10]", refund_bound, Some(1)),
        (2, "estimator bound, all procedures", estimator_bound, Some(30)),
        (3, "threshold dominance", dominance, Some(30)),
        (4, "oracle equivalence", oracle, Some(60)),
        (5, "coordinate-wise monotonicity", monotonicity, Some(30)),
        (6, "FDR and power, Gaussian mixture", gaussian_mixture, None),
        (7, "FDR and power, AR-exponential", ar_exponential, None),
        (8, "conditional vs marginal p-values", conditional_vs_marginal, None),
        (9, "calibrators", calibrators, Some(30)),
        (10, "ingest end to end", ingest_end_to_end, None),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, f, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| s == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        let limit = limit.map(Duration::from_secs);
        let in_time = within_budget(elapsed, limit);
        let pass = o.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} {}: {name} ({:.2}s{}) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            match (limit, in_time) {
                (Some(l), false) => format!(", over {}s budget", l.as_secs()),
                _ => String::new(),
            },
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
