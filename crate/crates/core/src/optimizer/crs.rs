//! Controlled random search with local mutation (CRS2-LM).

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{OptimizeOutcome, OptimizerConfig, SearchSpace, Tracked};
use crate::error::{Error, Result};

/// Global search over the box of `space`.
///
/// The population holds the seed plus uniformly drawn points. Each step
/// reflects a random population member through the centroid of the best point
/// and `n - 1` others; when that fails to beat the worst member, a trial
/// obtained by mutating the best point towards/away from the reflected point
/// is tried instead. Improving trials replace the worst member.
pub fn crs_search<F>(objective: F, space: &SearchSpace, cfg: &OptimizerConfig) -> Result<OptimizeOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    space.validate()?;
    let dim = space.lower.len();
    cfg.validate(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(space.rng_seed);
    let mut obj = Tracked::new(objective);
    let n_pop = cfg.crs_population;
    let budget = cfg.crs_max_evals.max(1);

    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(n_pop);
    pop.push(space.seed.to_search_vector().to_vec());
    while pop.len() < n_pop {
        pop.push((0..dim).map(|i| rng.random_range(space.lower[i]..=space.upper[i])).collect());
    }
    let mut vals: Vec<f64> = Vec::with_capacity(n_pop);
    for p in &pop {
        if obj.evals >= budget {
            break;
        }
        vals.push(obj.eval(p));
    }
    pop.truncate(vals.len());
    if vals.iter().all(|v| !v.is_finite()) {
        return Err(Error::OptimizationFailed(format!(
            "all {} initial CRS evaluations were non-finite (first point {:?})",
            vals.len(),
            pop.first()
        )));
    }

    let mut attempts = 0usize;
    let max_attempts = 50 * budget + 1000;
    while obj.evals < budget && attempts < max_attempts && pop.len() > dim {
        attempts += 1;
        let (best, worst) = extremes(&vals);
        let (fb, fw) = (vals[best], vals[worst]);
        if fw.is_finite() && fw - fb <= cfg.crs_ftol * fb.abs() {
            break;
        }
        // n distinct members other than the best
        let others: Vec<usize> = sample(&mut rng, pop.len() - 1, dim)
            .into_iter()
            .map(|k| if k >= best { k + 1 } else { k })
            .collect();
        let mut centroid = pop[best].clone();
        for &k in &others[..dim - 1] {
            for (c, v) in centroid.iter_mut().zip(&pop[k]) {
                *c += v;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);
        let reflected: Vec<f64> = centroid.iter().zip(&pop[others[dim - 1]]).map(|(g, x)| 2.0 * g - x).collect();

        if space.contains(&reflected) {
            let f = obj.eval(&reflected);
            if f < fw {
                pop[worst] = reflected;
                vals[worst] = f;
                continue;
            }
            if obj.evals >= budget {
                break;
            }
        }
        let mutated: Vec<f64> = pop[best]
            .iter()
            .zip(&reflected)
            .map(|(b, r)| {
                let w: f64 = rng.random();
                (1.0 + w) * b - w * r
            })
            .collect();
        if space.contains(&mutated) {
            let f = obj.eval(&mutated);
            if f < fw {
                pop[worst] = mutated;
                vals[worst] = f;
            }
        }
    }
    let out = obj.outcome();
    debug_assert!(out.trace.iter().all(|t| t.cost >= out.f));
    Ok(out)
}

fn extremes(vals: &[f64]) -> (usize, usize) {
    let mut best = 0;
    let mut worst = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v < vals[best] {
            best = i;
        }
        if v > vals[worst] || (vals[worst].is_finite() && !v.is_finite()) {
            worst = i;
        }
    }
    (best, worst)
}
