//! Acceptance suite. Runs every criterion in order inside one test so the
//! timing checks are not disturbed by concurrently running tests, prints one
//! PASS/FAIL line per criterion, and fails if any criterion fails.

use std::io::Write as _;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use cabinfare::cabin::parse_seatmap;
use cabinfare::data::{Column, Dataset};
use cabinfare::fixtures;
use cabinfare::lasso::{coordinate_descent, kkt_check, LassoConfig, PenaltyLoadings, Standardized};
use cabinfare::pds::{pds_estimate, ControlGroup, PdsSpec};
use cabinfare::regress::{cluster_cov, fit_stats, hc1_cov, ols_fit, ClusterAdjust, Clusters, DesignMatrix, Term};
use cabinfare::study::names::{COMFORT_PLACEBO, MIDDLE_ADV};
use cabinfare::study::{build_variables, run_ladder, SpecLadder, VariableOptions};
use cabinfare::synth::{gen_market, MarketConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

struct Outcome {
    pass: bool,
    detail: String,
}

/// Written straight to stderr so the lines show without `--nocapture`.
fn report(id: u32, o: &Outcome, elapsed: Duration) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {id}: {verdict} ({:.2} s) {}\n", elapsed.as_secs_f64(), o.detail);
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn seat_maps() -> Outcome {
    let expected = [177, 178, 68, 118, 132, 162, 156, 174];
    let mut pass = true;
    let mut counts = Vec::new();
    for (id, &want) in fixtures::SEATMAP_IDS.iter().zip(&expected) {
        let source = fixtures::seatmap_source(id).unwrap();
        let parsed = parse_seatmap(source).map(|m| m.seat_count());
        // Raw token count: every cell starting with `1` is a seat.
        let tokens = source
            .lines()
            .filter(|l| l.starts_with("row"))
            .filter_map(|l| l.split_once(':'))
            .flat_map(|(_, cells)| cells.split_whitespace())
            .filter(|t| t.starts_with('1'))
            .count();
        pass &= parsed.as_ref() == Ok(&want) && tokens == want;
        counts.push(format!("{id}={}", parsed.map_or_else(|e| e.to_string(), |c| c.to_string())));
    }
    let gol = fixtures::seatmap("gol_b738_177").unwrap();
    let comfort = gol.seats().filter(|(s, _)| gol.classify_seat(*s).unwrap().comfort).count();
    pass &= comfort == 42;
    Outcome { pass, detail: format!("{}; gol_b738_177 comfort seats {comfort}", counts.join(" ")) }
}

fn dispersion() -> Outcome {
    let t = fixtures::dispersion().unwrap();
    let (mut total, mut letter_a, mut row1, mut row1_d) = (0u64, 0u64, 0u64, 0u64);
    for line in fixtures::DISPERSION_CSV.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        let count: u64 = f[2].trim().parse().unwrap();
        total += count;
        if f[1] == "A" {
            letter_a += count;
        }
        if f[0] == "1" {
            row1 += count;
            if f[1] == "D" {
                row1_d += count;
            }
        }
    }
    let a_pct = t.letter_share_pct[t.letter_index('A').unwrap()];
    let d_pct = t.row_share_pct[t.row_index(1).unwrap()][t.letter_index('D').unwrap()];
    let a_oracle = (100.0 * letter_a as f64 / total as f64).round() as u64;
    let d_oracle = (100.0 * row1_d as f64 / row1 as f64).round() as u64;
    let pass =
        t.grand_total == 64_768 && total == 64_768 && a_pct == 26 && a_oracle == 26 && d_pct == 31 && d_oracle == 31;
    Outcome { pass, detail: format!("total {} A {a_pct}% row-1 D {d_pct}%", t.grand_total) }
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

fn random_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DesignMatrix {
    let cols: Vec<(String, Vec<f64>)> =
        (0..p).map(|j| (format!("x{j}"), (0..n).map(|_| normal(rng)).collect())).collect();
    let y = (0..n).map(|i| cols.iter().take(5).map(|(_, c)| c[i]).sum::<f64>() + normal(rng)).collect();
    DesignMatrix::from_dense("y", y, cols, true)
}

fn lasso_oracles() -> Outcome {
    let cfg = LassoConfig { cd_tolerance: 1e-12, ..LassoConfig::default() };

    // Orthonormal columns: Q from a QR of [1 | noise], so every column has
    // mean zero and (1/n) z'z = 1, and the solution is a soft threshold.
    let (n, p) = (50, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let raw = DMatrix::from_fn(n, p + 1, |_, j| if j == 0 { 1.0 } else { normal(&mut rng) });
    let q = raw.qr().q();
    let cols: Vec<(String, Vec<f64>)> =
        (0..p).map(|j| (format!("z{j}"), (0..n).map(|i| q[(i, j + 1)] * (n as f64).sqrt()).collect())).collect();
    let y: Vec<f64> =
        (0..n).map(|i| 2.0 + cols.iter().take(4).map(|(_, c)| c[i]).sum::<f64>() * 0.4 + normal(&mut rng)).collect();
    let dm = DesignMatrix::from_dense("y", y.clone(), cols.clone(), true);
    let x = Standardized::all(&dm, &[true; 10]).unwrap();
    let lambda = 12.0;
    let fit = coordinate_descent(&x, &y, lambda, &PenaltyLoadings { values: vec![1.0; p] }, &cfg, None);
    let orth_err = (0..p)
        .map(|j| {
            let zy = cols[j].1.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / n as f64;
            (fit.coefficients[j] - soft_threshold(zy, lambda / n as f64)).abs()
        })
        .fold(0.0, f64::max);
    let nonzero = fit.coefficients.iter().filter(|b| **b != 0.0).count();

    // Zero penalty against OLS.
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let dm = random_design(&mut rng, 200, 20);
    let x = Standardized::all(&dm, &[true; 20]).unwrap();
    let fit = coordinate_descent(&x, &dm.y, 0.0, &PenaltyLoadings { values: vec![1.0; 20] }, &cfg, None);
    let ols = ols_fit(&dm).unwrap();
    let ols_err = (0..20).map(|j| (fit.coefficients[j] - ols.coefficients[j + 1]).abs()).fold(0.0, f64::max);

    // KKT on random instances with random loadings and penalty levels.
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let mut kkt_worst = 0.0f64;
    for _ in 0..100 {
        let dm = random_design(&mut rng, 200, 20);
        let x = Standardized::all(&dm, &[true; 20]).unwrap();
        let psi = PenaltyLoadings { values: (0..20).map(|_| rng.random_range(0.5..2.0)).collect() };
        let lambda = rng.random_range(5.0..150.0);
        let fit = coordinate_descent(&x, &dm.y, lambda, &psi, &LassoConfig::default(), None);
        kkt_worst = kkt_worst.max(kkt_check(&fit, &x, &dm.y));
    }
    let pass = orth_err < 1e-8 && ols_err < 1e-6 && kkt_worst < 1e-6 && nonzero > 0 && nonzero < p;
    Outcome {
        pass,
        detail: format!(
            "orthonormal max err {orth_err:.1e} ({nonzero}/{p} active); lambda=0 vs OLS {ols_err:.1e}; worst KKT {kkt_worst:.1e}"
        ),
    }
}

/// Hand sandwich for y = b0 + b1 x with 2x2 algebra only.
fn hand_sandwich(x: &[f64], u: &[f64], ids: &[usize], g: usize, c: f64) -> [[f64; 2]; 2] {
    let n = x.len() as f64;
    let (sx, sxx) = (x.iter().sum::<f64>(), x.iter().map(|v| v * v).sum::<f64>());
    let det = n * sxx - sx * sx;
    let a = [[sxx / det, -sx / det], [-sx / det, n / det]];
    let mut m = [[0.0; 2]; 2];
    for cl in 0..g {
        let (mut s0, mut s1) = (0.0, 0.0);
        for i in (0..x.len()).filter(|&i| ids[i] == cl) {
            s0 += u[i];
            s1 += x[i] * u[i];
        }
        let s = [s0, s1];
        for r in 0..2 {
            for k in 0..2 {
                m[r][k] += s[r] * s[k];
            }
        }
    }
    let mut am = [[0.0; 2]; 2];
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            am[r][k] = (0..2).map(|t| a[r][t] * m[t][k]).sum();
        }
    }
    for r in 0..2 {
        for k in 0..2 {
            out[r][k] = c * (0..2).map(|t| am[r][t] * a[t][k]).sum::<f64>();
        }
    }
    out
}

fn cluster_oracle() -> Outcome {
    let x = [0.5, 1.2, -0.3, 2.2, 1.7, -1.1, 0.8, 0.1, -0.6, 1.9, 2.6, -0.4];
    let y = [1.3, 2.8, 0.2, 4.1, 3.0, -0.9, 1.1, 0.9, 0.4, 3.3, 5.2, -0.1];
    let ids = [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2];
    let dm = DesignMatrix::from_dense("y", y.to_vec(), vec![("x".into(), x.to_vec())], true);
    let fit = ols_fit(&dm).unwrap();

    // Residuals from the closed-form simple regression, not from the fit.
    let n = 12.0;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let b1 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
    let b0 = my - b1 * mx;
    let u: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - b0 - b1 * a).collect();
    let c = 3.0 / 2.0 * (11.0 / 10.0);
    let expected = hand_sandwich(&x, &u, &ids, 3, c);
    let v = cluster_cov(&dm, &fit, &Clusters::new(ids.to_vec(), 3).unwrap(), ClusterAdjust::Cr1).unwrap();
    let err = (0..2)
        .flat_map(|r| (0..2).map(move |k| (r, k)))
        .map(|(r, k)| (v[(r, k)] - expected[r][k]).abs())
        .fold(0.0, f64::max);

    let single = cluster_cov(&dm, &fit, &Clusters::singletons(12), ClusterAdjust::Cr1).unwrap();
    let exact = single == hc1_cov(&dm, &fit);
    Outcome {
        pass: err < 1e-10 && exact,
        detail: format!("max abs err {err:.1e}; singleton clusters equal HC1 bit for bit: {exact}"),
    }
}

/// y = 0.5 d + sum_k w_k + e, d = sum_k 0.5 w_k + v over five confounders
/// among 500 candidates; returns (PDS estimate, PDS covers, naive OLS).
fn pds_replication(seed: u64) -> (f64, bool, f64) {
    let (n, p, alpha) = (2000, 500, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| normal(&mut rng)).collect()).collect();
    let d: Vec<f64> = (0..n).map(|i| (0..5).map(|k| 0.5 * w[k][i]).sum::<f64>() + normal(&mut rng)).collect();
    let y: Vec<f64> = (0..n).map(|i| alpha * d[i] + (0..5).map(|k| w[k][i]).sum::<f64>() + normal(&mut rng)).collect();

    let (md, my) = (d.iter().sum::<f64>() / n as f64, y.iter().sum::<f64>() / n as f64);
    let naive = d.iter().zip(&y).map(|(a, b)| (a - md) * (b - my)).sum::<f64>()
        / d.iter().map(|a| (a - md).powi(2)).sum::<f64>();

    let mut ds = Dataset::new(n);
    ds.push("y", Column::Numeric(y)).unwrap();
    ds.push("d", Column::Numeric(d)).unwrap();
    for (j, col) in w.into_iter().enumerate() {
        ds.push(format!("w{j}"), Column::Numeric(col)).unwrap();
    }
    let group = ControlGroup { name: "w".into(), terms: (0..p).map(|j| Term::numeric(&format!("w{j}"))).collect() };
    let r = pds_estimate(&ds, &PdsSpec::new("y", vec![Term::numeric("d")], vec![group])).unwrap();
    let est = r.get("d").unwrap();
    let t = StudentsT::new(0.0, 1.0, r.fit.df).unwrap().inverse_cdf(0.975);
    ((est.estimate), (est.estimate - alpha).abs() <= t * est.se, naive)
}

fn pds_recovery() -> Outcome {
    let reps: Vec<(f64, bool, f64)> = (0..100u64).into_par_iter().map(|r| pds_replication(10_000 + r)).collect();
    let m = reps.len() as f64;
    let mae = reps.iter().map(|r| (r.0 - 0.5).abs()).sum::<f64>() / m;
    let pds_bias = (reps.iter().map(|r| r.0).sum::<f64>() / m - 0.5).abs();
    let naive_bias = (reps.iter().map(|r| r.2).sum::<f64>() / m - 0.5).abs();
    let coverage = reps.iter().filter(|r| r.1).count() as f64 / m;
    let pass = mae <= 0.02 && (0.90..=0.98).contains(&coverage) && naive_bias >= 5.0 * pds_bias;
    Outcome {
        pass,
        detail: format!(
            "mean |a-a*| {mae:.4}; |mean a - a*| {pds_bias:.4}; coverage {:.0}%; naive bias {naive_bias:.3} ({:.0}x)",
            coverage * 100.0,
            naive_bias / pds_bias
        ),
    }
}

struct SeedResult {
    middle_1w_pos_sig: bool,
    middle_gt3w_nonpositive: bool,
    placebo_significant: bool,
}

fn column_six(seed: u64) -> SeedResult {
    let cfg = MarketConfig { seed, ..MarketConfig::default() };
    assert_eq!(cfg.middle_seat_true_effect, 0.0);
    assert_eq!(cfg.comfort_true_effect, 0.0);
    let market = gen_market(&cfg).unwrap();
    let ds = build_variables(&market.records(), &fixtures::all_seatmaps(), &VariableOptions::default()).unwrap();
    let ladder = SpecLadder::standard().select(&[6]).unwrap();
    let (_, results) = run_ladder(&ds, &ladder, &LassoConfig::default()).unwrap();
    let r = &results[0];
    let m1 = r.get(MIDDLE_ADV[0]).unwrap();
    let m4 = r.get(MIDDLE_ADV[3]).unwrap();
    let placebo = r.get(COMFORT_PLACEBO).unwrap();
    SeedResult {
        middle_1w_pos_sig: m1.estimate > 0.0 && m1.p < 0.05,
        middle_gt3w_nonpositive: m4.estimate <= 0.0,
        placebo_significant: placebo.p < 0.05,
    }
}

fn aic_backsolve() -> Outcome {
    let (n, rmse, k) = (15_634usize, 0.7039f64, 8usize);
    let ssr = rmse * rmse * (n - k) as f64;
    let aic = fit_stats(ssr, 2.0 * ssr, n, k).unwrap().aic.unwrap();
    let nf = n as f64;
    let by_hand = nf * (2.0 * std::f64::consts::PI * ssr / nf).ln() + nf + 2.0 * (k as f64 + 1.0);
    let pass = (aic - 33_398.0).abs() <= 25.0 && (aic - by_hand).abs() < 1e-6;
    Outcome { pass, detail: format!("AIC {aic:.1} (target 33398 +/- 25)") }
}

fn full_ladder() -> Outcome {
    let cfg = MarketConfig { seed: 2024, survey_rate: 0.0451, ..MarketConfig::default() };
    let market = gen_market(&cfg).unwrap();
    let ds = build_variables(&market.records(), &fixtures::all_seatmaps(), &VariableOptions::default()).unwrap();
    let ladder = SpecLadder::standard();
    let start = Instant::now();
    let (table, results) = run_ladder(&ds, &ladder, &LassoConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let again = gen_market(&cfg).unwrap();
    let ds2 = build_variables(&again.records(), &fixtures::all_seatmaps(), &VariableOptions::default()).unwrap();
    let (table2, results2) = run_ladder(&ds2, &ladder, &LassoConfig::default()).unwrap();
    let identical = table.render_json() == table2.render_json()
        && serde_json::to_string(&results).unwrap() == serde_json::to_string(&results2).unwrap();
    let candidates: usize = results[6].group_counts.iter().map(|g| g.candidates).sum();
    let n = ds.n_rows();
    let pass = elapsed < Duration::from_secs(60) && identical && (14_000..=16_000).contains(&n) && candidates >= 1_500;
    Outcome {
        pass,
        detail: format!(
            "n {n}, {candidates} candidate controls, ladder {:.1} s on {} thread(s); identical rerun: {identical}",
            elapsed.as_secs_f64(),
            rayon::current_num_threads()
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    let mut run = |id: u32, limit: Option<Duration>, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let mut o = f();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed >= limit {
                o.pass = false;
                o.detail.push_str(&format!("; over the {} s limit", limit.as_secs()));
            }
        }
        report(id, &o, elapsed);
        if !o.pass {
            failed.push(id);
        }
    };

    run(1, Some(Duration::from_secs(1)), &seat_maps);
    run(2, None, &dispersion);
    run(3, Some(Duration::from_secs(5)), &lasso_oracles);
    run(4, None, &cluster_oracle);
    run(5, Some(Duration::from_secs(120)), &pds_recovery);

    // Criteria 6 and 8 share the same 50 markets; the run is timed under 6.
    let seeds: OnceLock<Vec<SeedResult>> = OnceLock::new();
    let seeds = || seeds.get_or_init(|| (1..=50u64).into_par_iter().map(column_six).collect());
    run(6, None, &|| {
        let s = seeds();
        let pos_sig = s.iter().filter(|r| r.middle_1w_pos_sig).count();
        let nonpos = s.iter().filter(|r| r.middle_gt3w_nonpositive).count();
        Outcome {
            pass: pos_sig * 100 >= 80 * s.len() && nonpos * 100 >= 60 * s.len(),
            detail: format!("MIDDLE x ADV(1w) positive and significant in {pos_sig}/50 seeds; >3w <= 0 in {nonpos}/50"),
        }
    });
    run(7, None, &aic_backsolve);
    run(8, None, &|| {
        let s = seeds();
        let quiet = s.iter().filter(|r| !r.placebo_significant).count();
        Outcome {
            pass: quiet * 100 >= 90 * s.len(),
            detail: format!("placebo insignificant at 5% in {quiet}/50 seeds"),
        }
    });
    run(9, None, &full_ladder);

    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
