//! Nelder-Mead downhill simplex.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{OptimizeOutcome, OptimizerConfig, SearchSpace, Tracked};
use crate::error::{Error, Result};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const MIN_VOLUME: f64 = 1e-300;

/// Local simplex search from `seed` (search coordinates).
///
/// The initial simplex places one vertex per axis at `nm_step_fraction` of the
/// bound width. Candidates outside the box count as +inf and are never passed
/// to the objective, so the simplex cannot flatten onto a bound face. Stops when every vertex is within `nm_xtol` of the best vertex,
/// when the relative cost spread drops below `nm_ftol`, or when the budget is
/// spent. A collapsed simplex is restarted once from a perturbed best point.
pub fn nelder_mead<F>(objective: F, seed: &[f64], space: &SearchSpace, cfg: &OptimizerConfig) -> Result<OptimizeOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = seed.len();
    if seed.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite Nelder-Mead seed {seed:?}")));
    }
    if cfg.nm_xtol.len() < n || !(cfg.nm_ftol > 0.0) {
        return Err(Error::Config("Nelder-Mead tolerances".into()));
    }
    let widths = space.widths();
    let steps: Vec<f64> = widths.iter().map(|w| w * cfg.nm_step_fraction).collect();
    let mut obj = Tracked::new(objective);
    let mut rng = ChaCha8Rng::seed_from_u64(space.rng_seed ^ 0x6e6d);

    let mut start = seed.to_vec();
    space.clamp(&mut start);
    let mut restarted = false;
    loop {
        match run(&mut obj, &start, &steps, space, cfg) {
            Ok(()) => break,
            Err(Degenerate) if !restarted => {
                restarted = true;
                start = obj.best_x.clone();
                for (x, s) in start.iter_mut().zip(&steps) {
                    *x += rng.random_range(-0.5..0.5) * s;
                }
                space.clamp(&mut start);
                log::debug!("Nelder-Mead simplex collapsed; restarting from perturbed best point");
            }
            Err(Degenerate) => {
                return Err(Error::OptimizationFailed(format!(
                    "Nelder-Mead simplex degenerate after restart (best cost {})",
                    obj.best_f
                )))
            }
        }
    }
    if !obj.best_f.is_finite() {
        return Err(Error::OptimizationFailed("Nelder-Mead found no finite cost".into()));
    }
    Ok(obj.outcome())
}

struct Degenerate;

fn run<F: FnMut(&[f64]) -> f64>(
    obj: &mut Tracked<F>,
    start: &[f64],
    steps: &[f64],
    space: &SearchSpace,
    cfg: &OptimizerConfig,
) -> Result<(), Degenerate> {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut v = start.to_vec();
        // step away from the nearer bound so the vertex stays distinct after projection
        let up = v[i] + steps[i] <= space.upper[i];
        v[i] += if up { steps[i] } else { -steps[i] };
        space.clamp(&mut v);
        simplex.push(v);
    }
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    for v in &simplex {
        if obj.evals >= cfg.nm_max_evals {
            return Ok(());
        }
        vals.push(obj.eval(v));
    }

    let feasible = |obj: &mut Tracked<F>, v: &[f64]| if space.contains(v) { obj.eval(v) } else { f64::INFINITY };

    while obj.evals < cfg.nm_max_evals {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();

        let best = &simplex[0];
        let x_conv = simplex[1..]
            .iter()
            .all(|v| v.iter().zip(best).enumerate().all(|(k, (a, b))| (a - b).abs() <= cfg.nm_xtol[k]));
        let f_spread = vals[n] - vals[0];
        let f_conv = vals[n].is_finite() && f_spread <= cfg.nm_ftol * vals[0].abs().max(f64::MIN_POSITIVE);
        if x_conv || f_conv {
            return Ok(());
        }
        if volume(&simplex) < MIN_VOLUME {
            return Err(Degenerate);
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, x)| c + t * (c - x)).collect()
        };

        let xr = along(REFLECT, &simplex[n]);
        let fr = feasible(obj, &xr);
        if fr < vals[0] {
            let xe = along(EXPAND, &simplex[n]);
            let fe = feasible(obj, &xe);
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, accept) = if fr < vals[n] {
            let xc = along(CONTRACT, &simplex[n]);
            let fc = feasible(obj, &xc);
            (xc, if fc <= fr { Some(fc) } else { None })
        } else {
            let xc = along(-CONTRACT, &simplex[n]);
            let fc = feasible(obj, &xc);
            (xc, if fc < vals[n] { Some(fc) } else { None })
        };
        if let Some(fc) = accept {
            simplex[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            if obj.evals >= cfg.nm_max_evals {
                return Ok(());
            }
            let shrunk: Vec<f64> = simplex[0].iter().zip(&simplex[i]).map(|(b, x)| b + SHRINK * (x - b)).collect();
            vals[i] = obj.eval(&shrunk);
            simplex[i] = shrunk;
        }
    }
    Ok(())
}

/// |det(edges)| / n!
fn volume(simplex: &[Vec<f64>]) -> f64 {
    let n = simplex.len() - 1;
    let m = DMatrix::from_fn(n, n, |r, c| simplex[c + 1][r] - simplex[0][r]);
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    m.determinant().abs() / fact
}
