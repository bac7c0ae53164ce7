//! Differential evolution (DE/rand/1/bin) over a box.

use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeOptions {
    pub population: usize,
    pub generations: usize,
    pub differential_weight: f64,
    pub crossover: f64,
}

impl Default for DeOptions {
    fn default() -> Self {
        Self { population: 64, generations: 200, differential_weight: 0.7, crossover: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeOutcome {
    /// Final population sorted by cost, best first.
    pub ranked: Vec<(Vec<f64>, f64)>,
    pub evaluations: usize,
}

impl DeOutcome {
    pub fn best(&self) -> (&[f64], f64) {
        let (x, c) = &self.ranked[0];
        (x, *c)
    }
}

/// Minimise `cost` over `bounds`. Extra `seeds` replace the first members of
/// the random initial population.
pub fn differential_evolution(
    cost: &dyn Fn(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    seeds: &[Vec<f64>],
    opts: &DeOptions,
    rng: &mut ChaCha8Rng,
) -> DeOutcome {
    let dim = bounds.len();
    let np = opts.population.max(4);
    let sanitize = |c: f64| if c.is_finite() { c } else { f64::INFINITY };
    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|i| match seeds.get(i) {
            Some(s) if s.len() == dim => s.iter().zip(bounds).map(|(v, (lo, hi))| v.clamp(*lo, *hi)).collect(),
            _ => bounds.iter().map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect(),
        })
        .collect();
    let mut costs: Vec<f64> = pop.iter().map(|x| sanitize(cost(x))).collect();
    let mut evaluations = np;

    for _ in 0..opts.generations {
        for i in 0..np {
            let (a, b, c) = distinct_three(rng, np, i);
            let jrand = rng.random_range(0..dim);
            let trial: Vec<f64> = (0..dim)
                .map(|j| {
                    if j == jrand || rng.random::<f64>() < opts.crossover {
                        let v = pop[a][j] + opts.differential_weight * (pop[b][j] - pop[c][j]);
                        reflect(v, bounds[j], pop[i][j])
                    } else {
                        pop[i][j]
                    }
                })
                .collect();
            let tc = sanitize(cost(&trial));
            evaluations += 1;
            if tc <= costs[i] {
                pop[i] = trial;
                costs[i] = tc;
            }
        }
    }
    let mut ranked: Vec<(Vec<f64>, f64)> = pop.into_iter().zip(costs).collect();
    ranked.sort_by(|x, y| x.1.total_cmp(&y.1));
    DeOutcome { ranked, evaluations }
}

fn distinct_three(rng: &mut ChaCha8Rng, n: usize, exclude: usize) -> (usize, usize, usize) {
    let mut pick = |taken: &[usize]| loop {
        let k = rng.random_range(0..n);
        if !taken.contains(&k) {
            return k;
        }
    };
    let a = pick(&[exclude]);
    let b = pick(&[exclude, a]);
    let c = pick(&[exclude, a, b]);
    (a, b, c)
}

/// Bring a mutant coordinate back into bounds by moving halfway from the
/// parent towards the violated bound.
fn reflect(v: f64, (lo, hi): (f64, f64), parent: f64) -> f64 {
    if v < lo {
        (lo + parent) / 2.0
    } else if v > hi {
        (hi + parent) / 2.0
    } else {
        v
    }
}
