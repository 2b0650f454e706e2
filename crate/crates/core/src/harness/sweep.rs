//! Horizon sweeps and log-log rate fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run, HarnessError, RunConfig};

/// Least-squares fit of `ln(mean regret)` against `ln T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub horizons: Vec<u64>,
    pub mean_regrets: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `ln y = intercept + slope·ln x`.
pub fn fit_power_law(horizons: &[u64], means: &[f64]) -> RateFit {
    assert_eq!(horizons.len(), means.len());
    assert!(horizons.len() >= 2, "a fit needs at least two horizons");
    let xs: Vec<f64> = horizons.iter().map(|&t| (t as f64).ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    RateFit { horizons: horizons.to_vec(), mean_regrets: means.to_vec(), slope, intercept, r_squared }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub horizon: u64,
    pub seed: u64,
    pub interval_len: Option<u64>,
    pub final_regret_dyn: f64,
    pub final_regret_comp: f64,
    pub min_query_margin: f64,
    pub min_meta_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonStat {
    pub horizon: u64,
    pub runs: usize,
    pub mean_regret_dyn: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub base: RunConfig,
    pub cells: Vec<SweepCell>,
    pub per_horizon: Vec<HorizonStat>,
    pub fit: RateFit,
}

/// Worker count from `BCO_THREADS`; unset, empty or 0 means automatic.
pub fn threads_from_env() -> usize {
    std::env::var("BCO_THREADS").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

/// Runs every `(horizon, seed)` cell of `base` on a pool of `threads`
/// workers (0 = automatic) and fits the growth of the mean dynamic regret.
/// Budgets in `base` are re-tuned per horizon; an explicit `B` is kept.
pub fn sweep(base: &RunConfig, horizons: &[u64], seeds: &[u64], threads: usize) -> Result<SweepResult, HarnessError> {
    if horizons.len() < 3 {
        return Err(HarnessError::config("horizons", "a sweep needs at least 3 horizons"));
    }
    if seeds.len() < 5 {
        return Err(HarnessError::config("seeds", "a sweep needs at least 5 seeds"));
    }
    let mut grid: Vec<(u64, u64)> = horizons.iter().flat_map(|&t| seeds.iter().map(move |&s| (t, s))).collect();
    grid.sort_unstable();
    grid.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::config("BCO_THREADS", e.to_string()))?;
    let results: Vec<Result<SweepCell, HarnessError>> = pool.install(|| {
        grid.par_iter()
            .map(|&(horizon, seed)| {
                let mut c = base.clone();
                c.horizon = horizon;
                c.seed = seed;
                let out = run(&c)?;
                Ok(SweepCell {
                    horizon,
                    seed,
                    interval_len: out.trace.meta.interval_len,
                    final_regret_dyn: out.trace.final_regret_dyn(),
                    final_regret_comp: out.trace.final_regret_comp(),
                    min_query_margin: out.trace.meta.min_query_margin,
                    min_meta_margin: out.trace.meta.min_meta_margin,
                })
            })
            .collect()
    });
    let cells = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut hs: Vec<u64> = cells.iter().map(|c| c.horizon).collect();
    hs.dedup();
    let per_horizon: Vec<HorizonStat> = hs
        .iter()
        .map(|&h| {
            let vals: Vec<f64> = cells.iter().filter(|c| c.horizon == h).map(|c| c.final_regret_dyn).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var =
                if vals.len() > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            HorizonStat { horizon: h, runs: vals.len(), mean_regret_dyn: mean, std_error: (var / n).sqrt() }
        })
        .collect();
    let means: Vec<f64> = per_horizon.iter().map(|s| s.mean_regret_dyn).collect();
    let fit = fit_power_law(&hs, &means);
    Ok(SweepResult { base: base.clone(), cells, per_horizon, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws_are_recovered() {
        let hs = [1024u64, 2048, 4096, 8192, 16384];
        for (c, k) in [(3.0, 0.5), (0.2, 0.75), (10.0, 1.0)] {
            let ys: Vec<f64> = hs.iter().map(|&t| c * (t as f64).powf(k)).collect();
            let fit = fit_power_law(&hs, &ys);
            assert!((fit.slope - k).abs() < 1e-9);
            assert!((fit.intercept - f64::ln(c)).abs() < 1e-9);
            assert!((fit.r_squared - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_fit_has_r_squared_below_one() {
        let fit = fit_power_law(&[10, 20, 40, 80], &[1.0, 3.0, 2.0, 5.0]);
        assert!(fit.r_squared > 0.0 && fit.r_squared < 1.0);
    }

    #[test]
    fn sweep_rejects_small_grids() {
        let c = RunConfig::default();
        assert!(sweep(&c, &[1, 2], &[0, 1, 2, 3, 4], 1).is_err());
        assert!(sweep(&c, &[1, 2, 3], &[0, 1], 1).is_err());
    }
}
