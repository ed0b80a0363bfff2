//! Seeded random inputs for property sweeps.
//!
//! Everything here draws from a [`ChaCha8Rng`], so a seed reproduces the
//! same matrices and panels on every platform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::delphi::{Barrier, LinguisticScale, RatingPanel};
use crate::error::Result;
use crate::fahp::PairwiseMatrix;
use crate::tfn::Tfn;
use crate::validation::ValidationMode;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ids `{prefix}1` to `{prefix}n`.
pub fn ids(prefix: &str, n: usize) -> Vec<Barrier> {
    (1..=n).map(|k| Barrier::bare(format!("{prefix}{k}"))).collect()
}

/// A positive ordered TFN with `l` in `[0.1, 9]` and spreads up to 2.
pub fn random_tfn(rng: &mut impl Rng) -> Tfn {
    let l = rng.gen_range(0.1..=9.0);
    let m = l + rng.gen_range(0.0..=2.0);
    let u = m + rng.gen_range(0.0..=2.0);
    Tfn::new(l, m, u).expect("ordered by construction")
}

/// Random upper triangle, unit diagonal, exact reciprocals below.
#[allow(clippy::needless_range_loop)]
pub fn reciprocal_matrix(rng: &mut impl Rng, n: usize) -> PairwiseMatrix {
    let mut rows = vec![vec![Tfn::ONE; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let t = random_tfn(rng);
            rows[i][j] = t;
            rows[j][i] = t.reciprocal().expect("positive by construction");
        }
    }
    PairwiseMatrix::new(ids("C", n), rows, ValidationMode::Strict).expect("valid by construction")
}

pub fn random_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.01..=10.0)).collect()
}

/// Crisp matrix with `a_ij = w_i / w_j`.
pub fn consistent_matrix(weights: &[f64]) -> Result<PairwiseMatrix> {
    let rows = weights
        .iter()
        .map(|wi| weights.iter().map(|wj| Tfn::crisp(wi / wj)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    PairwiseMatrix::new(ids("C", weights.len()), rows, ValidationMode::Strict)
}

/// Every cell multiplied by `c`. The diagonal is no longer one, so the
/// result is lenient.
pub fn scaled(m: &PairwiseMatrix, c: f64) -> Result<PairwiseMatrix> {
    let n = m.len();
    let rows = (0..n)
        .map(|i| {
            m.row(i)
                .iter()
                .map(|t| {
                    let [l, mm, u] = t.components();
                    Tfn::new(l * c, mm * c, u * c)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    PairwiseMatrix::new(m.criteria().to_vec(), rows, ValidationMode::Lenient)
}

pub fn permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Every expert gives every barrier a uniformly drawn integer rating.
pub fn integer_panel(
    rng: &mut impl Rng,
    barriers: usize,
    experts: usize,
    scale: &LinguisticScale,
) -> Result<RatingPanel> {
    let top = scale.len() as i64;
    let rows = (0..barriers)
        .map(|_| (0..experts).map(|_| scale.encode(rng.gen_range(1..=top))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let experts = (1..=experts).map(|k| format!("E{k}")).collect();
    RatingPanel::new(ids("B", barriers), experts, rows, ValidationMode::Strict)
}

/// The same panel with expert columns reordered: column `k` of the result
/// is column `order[k]` of `panel`.
pub fn permute_experts(panel: &RatingPanel, order: &[usize]) -> Result<RatingPanel> {
    let experts = order.iter().map(|&k| panel.experts()[k].clone()).collect();
    let rows = panel.rows().map(|(_, row)| order.iter().map(|&k| row[k]).collect()).collect();
    RatingPanel::new(panel.barriers().to_vec(), experts, rows, panel.mode())
}
