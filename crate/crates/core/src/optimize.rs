//! Closed-form ridge solver and a seeded DE/rand/1/bin optimizer.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Differential-evolution settings. Defaults are the classical Storn-Price
/// values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeConfig {
    pub population_size: usize,
    /// Differential weight `F`.
    pub weight_f: f64,
    /// Binomial crossover rate `CR`.
    pub crossover_cr: f64,
    pub max_generations: usize,
    /// Stop once the best value improves by less than this over `patience`
    /// generations.
    pub tolerance: f64,
    pub patience: usize,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population_size: 40,
            weight_f: 0.8,
            crossover_cr: 0.9,
            max_generations: 300,
            tolerance: 1e-10,
            patience: 30,
        }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 {
            return Err(Error::InvalidArgument(format!(
                "population size must be >= 4, got {}",
                self.population_size
            )));
        }
        if !(self.weight_f > 0.0 && self.weight_f <= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "differential weight must be in (0, 2], got {}",
                self.weight_f
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_cr) {
            return Err(Error::InvalidArgument(format!(
                "crossover rate must be in [0, 1], got {}",
                self.crossover_cr
            )));
        }
        if self.max_generations < 1 {
            return Err(Error::InvalidArgument("max_generations must be >= 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument("tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Box constraints, one `(lower, upper)` pair per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds(Vec<(f64, f64)>);

impl Bounds {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("bounds must have at least one dimension".into()));
        }
        for (i, &(lo, hi)) in pairs.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "dimension {i}: need finite lower < upper, got ({lo}, {hi})"
                )));
            }
        }
        Ok(Self(pairs))
    }

    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.0).all(|(v, &(lo, hi))| lo <= *v && *v <= hi)
    }

    fn clip(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.0) {
            *v = v.clamp(lo, hi);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    /// Best value of the initial population.
    pub initial_best: f64,
    /// Best-so-far value after each generation (index 0 is the initial
    /// population).
    pub history: Vec<f64>,
    pub generations: usize,
    pub evaluations: usize,
}

// NaN never wins a comparison.
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimize `objective` over `bounds` with DE/rand/1/bin.
///
/// Selection is synchronous: every trial of a generation is built from the
/// previous generation's population. A trial replaces its target when its
/// value is less than or equal to the target's. Fixed `seed` gives a
/// bit-identical trajectory.
pub fn differential_evolution<F>(
    mut objective: F,
    bounds: &Bounds,
    cfg: &DeConfig,
    seed: u64,
) -> Result<DeResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let dim = bounds.dim();
    let np = cfg.population_size;
    let mut rng: ChaCha8Rng = rng::stream(seed, rng::Stream::Optimizer);

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| {
            bounds
                .pairs()
                .iter()
                .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let mut values: Vec<f64> = pop.iter().map(|x| sanitize(objective(x))).collect();
    let mut evaluations = np;

    let argmin = |values: &[f64]| {
        values
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if *v < values[best] { i } else { best })
    };
    let mut best = argmin(&values);
    let initial_best = values[best];
    let mut history = vec![initial_best];

    let mut trials = vec![vec![0.0; dim]; np];
    let mut generations = 0;
    while generations < cfg.max_generations {
        for (i, trial) in trials.iter_mut().enumerate() {
            let [a, b, c] = pick_three(&mut rng, np, i);
            let forced = rng.random_range(0..dim);
            for j in 0..dim {
                trial[j] = if j == forced || rng.random::<f64>() < cfg.crossover_cr {
                    pop[a][j] + cfg.weight_f * (pop[b][j] - pop[c][j])
                } else {
                    pop[i][j]
                };
            }
            bounds.clip(trial);
        }
        for (i, trial) in trials.iter().enumerate() {
            let v = sanitize(objective(trial));
            evaluations += 1;
            if v <= values[i] {
                pop[i].copy_from_slice(trial);
                values[i] = v;
            }
        }
        generations += 1;
        best = argmin(&values);
        history.push(values[best]);

        if generations >= cfg.patience {
            let earlier = history[generations - cfg.patience];
            if earlier - values[best] < cfg.tolerance {
                break;
            }
        }
    }

    Ok(DeResult {
        best_x: pop[best].clone(),
        best_value: values[best],
        initial_best,
        history,
        generations,
        evaluations,
    })
}

/// Three distinct population indices, all different from `exclude`.
fn pick_three(rng: &mut ChaCha8Rng, np: usize, exclude: usize) -> [usize; 3] {
    let mut out = [usize::MAX; 3];
    let mut k = 0;
    while k < 3 {
        let cand = rng.random_range(0..np);
        if cand != exclude && !out[..k].contains(&cand) {
            out[k] = cand;
            k += 1;
        }
    }
    out
}

/// Ridge weights for `Y ≈ [1 X]·W`.
///
/// `x` is `N×F` (rows are samples, columns already standardized by the
/// caller), `y` is `N×2`. Returns `(F+1)×2` weights with the bias in row 0.
/// The bias row is not penalized.
pub fn solve_ridge(x: &[Vec<f64>], y: &[[f64; 2]], lambda: f64) -> Result<Vec<[f64; 2]>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    if y.len() != n {
        return Err(Error::InvalidArgument(format!(
            "design has {n} rows but targets have {}",
            y.len()
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    let f = x[0].len();
    if x.iter().any(|row| row.len() != f) {
        return Err(Error::InvalidArgument("ragged design matrix".into()));
    }
    let p = f + 1;

    let augmented = |row: &[f64], j: usize| if j == 0 { 1.0 } else { row[j - 1] };
    let mut a = vec![vec![0.0; p]; p];
    let mut rhs = vec![vec![0.0; 2]; p];
    for (row, target) in x.iter().zip(y) {
        for i in 0..p {
            let xi = augmented(row, i);
            for j in 0..p {
                a[i][j] += xi * augmented(row, j);
            }
            rhs[i][0] += xi * target[0];
            rhs[i][1] += xi * target[1];
        }
    }
    for (i, row) in a.iter_mut().enumerate().skip(1) {
        row[i] += lambda;
    }

    let w = lu_solve(a, rhs).ok_or(Error::RankDeficient)?;
    Ok(w.into_iter().map(|r| [r[0], r[1]]).collect())
}

/// Gaussian elimination with partial pivoting for `A·X = B`. Returns `None`
/// when a pivot vanishes relative to the matrix scale.
pub(crate) fn lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let eps = scale * n as f64 * 1e3 * f64::EPSILON;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot_row][col].abs() <= eps {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            for k in 0..b[row].len() {
                b[row][k] -= factor * b[col][k];
            }
        }
    }
    let m = b[0].len();
    let mut x = vec![vec![0.0; m]; n];
    for row in (0..n).rev() {
        for k in 0..m {
            let tail: f64 = (row + 1..n).map(|j| a[row][j] * x[j][k]).sum();
            x[row][k] = (b[row][k] - tail) / a[row][row];
        }
    }
    Some(x)
}
