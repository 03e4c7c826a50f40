//! Shared instance generators for the benchmarks.

use cabinfare::data::{Column, Dataset};
use cabinfare::fixtures;
use cabinfare::regress::DesignMatrix;
use cabinfare::study::{build_variables, VariableOptions};
use cabinfare::synth::{gen_market, MarketConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Gaussian `n x p` design whose response loads on the first five columns.
pub fn lasso_instance(n: usize, p: usize, seed: u64) -> DesignMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<(String, Vec<f64>)> =
        (0..p).map(|j| (format!("x{j}"), (0..n).map(|_| rng.sample(StandardNormal)).collect())).collect();
    let y = (0..n)
        .map(|i| cols.iter().take(5).map(|(_, c)| c[i]).sum::<f64>() + rng.sample::<f64, _>(StandardNormal))
        .collect();
    DesignMatrix::from_dense("y", y, cols, true)
}

/// `y`, treatment `d` and candidates `w0..w{p-1}`; the first five candidates
/// drive both `y` and `d`.
pub fn confounded_dataset(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || rng.sample::<f64, _>(StandardNormal);
    let w: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| normal()).collect()).collect();
    let d: Vec<f64> = (0..n).map(|i| (0..5).map(|k| 0.5 * w[k][i]).sum::<f64>() + normal()).collect();
    let y: Vec<f64> = (0..n).map(|i| 0.5 * d[i] + (0..5).map(|k| w[k][i]).sum::<f64>() + normal()).collect();
    let mut ds = Dataset::new(n);
    ds.push("y", Column::Numeric(y)).expect("fresh column");
    ds.push("d", Column::Numeric(d)).expect("fresh column");
    for (j, col) in w.into_iter().enumerate() {
        ds.push(format!("w{j}"), Column::Numeric(col)).expect("fresh column");
    }
    ds
}

/// Estimation dataset of a default synthetic market.
pub fn market_dataset(seed: u64) -> Dataset {
    let market = gen_market(&MarketConfig { seed, ..MarketConfig::default() }).expect("default config is valid");
    build_variables(&market.records(), &fixtures::all_seatmaps(), &VariableOptions::default())
        .expect("bundled maps cover the pool")
}
