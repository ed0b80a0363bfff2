//! Buckley's fuzzy AHP over a triangular pairwise comparison matrix.
//!
//! Row geometric means `r_i` are normalized by the inverted column total to
//! give fuzzy weights `w_i`, which are defuzzified by their centroid (`M_i`)
//! and normalized to sum to one (`N_i`). Criteria are ranked by `N_i`.

use serde::{Deserialize, Serialize};

use crate::delphi::{ensure_unique_ids, Barrier};
use crate::error::{Error, Result};
use crate::tfn::{geometric_mean, Tfn};
use crate::validation::{ValidationMode, Warning, WarningKind};

/// Relative tolerance, per component, when checking that `cell(j, i)` is
/// the reciprocal of `cell(i, j)`.
pub const RECIPROCITY_TOLERANCE: f64 = 0.05;

/// Saaty's 1-9 importance levels as triangular numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct SaatyScale {
    levels: [(&'static str, Tfn); 9],
}

impl SaatyScale {
    pub const NAME: &'static str = "saaty-9";

    pub fn standard() -> Self {
        const INTERMEDIATE: &str = "Intermediate value between adjacent levels";
        SaatyScale {
            levels: [
                ("Equally important", Tfn::raw(1.0, 1.0, 1.0)),
                (INTERMEDIATE, Tfn::raw(1.0, 2.0, 3.0)),
                ("Weakly important", Tfn::raw(2.0, 3.0, 4.0)),
                (INTERMEDIATE, Tfn::raw(3.0, 4.0, 5.0)),
                ("Fairly important", Tfn::raw(4.0, 5.0, 6.0)),
                (INTERMEDIATE, Tfn::raw(5.0, 6.0, 7.0)),
                ("Strongly important", Tfn::raw(6.0, 7.0, 8.0)),
                (INTERMEDIATE, Tfn::raw(7.0, 8.0, 9.0)),
                ("Absolutely important", Tfn::raw(9.0, 9.0, 9.0)),
            ],
        }
    }

    fn level(&self, level: i64) -> Result<&(&'static str, Tfn)> {
        usize::try_from(level)
            .ok()
            .and_then(|l| l.checked_sub(1))
            .and_then(|i| self.levels.get(i))
            .ok_or_else(|| Error::UnknownRating { scale: Self::NAME.to_string(), rating: level })
    }

    pub fn tfn(&self, level: i64) -> Result<Tfn> {
        self.level(level).map(|(_, t)| *t)
    }

    /// The judgement "less important by `level`".
    pub fn reciprocal(&self, level: i64) -> Result<Tfn> {
        self.tfn(level)?.reciprocal()
    }

    pub fn label(&self, level: i64) -> Result<&'static str> {
        self.level(level).map(|(label, _)| *label)
    }
}

/// Square grid of fuzzy judgements: `cell(i, j)` is how much more important
/// criterion `i` is than criterion `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseMatrix {
    criteria: Vec<Barrier>,
    cells: Vec<Tfn>,
    mode: ValidationMode,
}

impl PairwiseMatrix {
    pub fn new(criteria: Vec<Barrier>, rows: Vec<Vec<Tfn>>, mode: ValidationMode) -> Result<Self> {
        if criteria.is_empty() {
            return Err(Error::Empty("criteria list"));
        }
        ensure_unique_ids(criteria.iter().map(|c| c.id.as_str()))?;
        let n = criteria.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("pairwise matrix over {n} criteria must be {n}x{n}")));
        }
        Ok(PairwiseMatrix { criteria, cells: rows.into_iter().flatten().collect(), mode })
    }

    /// Builds a matrix from `(row_id, col_id, judgement)` entries.
    ///
    /// A missing diagonal cell becomes `(1, 1, 1)` and a missing cell whose
    /// mirror was given becomes the mirror's reciprocal. Given cells are
    /// kept as they are.
    pub fn build(
        entries: impl IntoIterator<Item = (String, String, Tfn)>,
        criteria: Vec<Barrier>,
        mode: ValidationMode,
    ) -> Result<Self> {
        if criteria.is_empty() {
            return Err(Error::Empty("criteria list"));
        }
        ensure_unique_ids(criteria.iter().map(|c| c.id.as_str()))?;
        let n = criteria.len();
        let index =
            |id: &str| criteria.iter().position(|c| c.id == id).ok_or_else(|| Error::UnresolvedId(id.to_string()));
        let mut given: Vec<Option<Tfn>> = vec![None; n * n];
        for (row, col, t) in entries {
            let (i, j) = (index(&row)?, index(&col)?);
            if given[i * n + j].replace(t).is_some() {
                return Err(Error::DuplicateCell(row, col));
            }
        }
        let mut cells = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let cell = match (given[i * n + j], given[j * n + i]) {
                    (Some(t), _) => t,
                    (None, _) if i == j => Tfn::ONE,
                    (None, Some(mirror)) => mirror.reciprocal().map_err(|e| Error::InvalidCell {
                        row: criteria[j].id.clone(),
                        col: criteria[i].id.clone(),
                        reason: format!("cannot derive reciprocal: {e}"),
                    })?,
                    (None, None) => return Err(Error::MissingCell(criteria[i].id.clone(), criteria[j].id.clone())),
                };
                cells.push(cell);
            }
        }
        Ok(PairwiseMatrix { criteria, cells, mode })
    }

    pub fn criteria(&self) -> &[Barrier] {
        &self.criteria
    }

    pub fn len(&self) -> usize {
        self.criteria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.criteria.is_empty()
    }

    pub fn mode(&self) -> ValidationMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: ValidationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn cell(&self, i: usize, j: usize) -> Tfn {
        self.cells[i * self.len() + j]
    }

    pub fn set_cell(&mut self, i: usize, j: usize, value: Tfn) {
        let n = self.len();
        self.cells[i * n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Tfn] {
        let n = self.len();
        &self.cells[i * n..(i + 1) * n]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.criteria.iter().position(|c| c.id == id)
    }

    /// Relabels criteria: position `k` of the result is criterion `order[k]`
    /// of `self`, with rows and columns moved together.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Config(format!("{order:?} is not a permutation of 0..{n}")));
        }
        let criteria = order.iter().map(|&k| self.criteria[k].clone()).collect();
        let cells =
            order.iter().flat_map(|&i| order.iter().map(move |&j| (i, j))).map(|(i, j)| self.cell(i, j)).collect();
        Ok(PairwiseMatrix { criteria, cells, mode: self.mode })
    }

    fn pair(&self, i: usize, j: usize) -> (String, String) {
        (self.criteria[i].id.clone(), self.criteria[j].id.clone())
    }
}

/// Checks cell shape (row-major: positive, ordered, unit diagonal), then
/// reciprocity for each pair `i < j`.
///
/// Strict mode fails on the first violation; lenient mode returns one
/// warning per violation. Non-positive cells are an error in both modes.
pub fn validate_matrix(m: &PairwiseMatrix) -> Result<Vec<Warning>> {
    let n = m.len();
    let mut warnings = Vec::new();
    let mut flag = |i: usize, j: usize, kind: WarningKind, reason: String| -> Result<()> {
        let (row, col) = m.pair(i, j);
        match m.mode() {
            ValidationMode::Strict => Err(Error::InvalidCell { row, col, reason }),
            ValidationMode::Lenient => {
                warnings.push(Warning::new(kind, format!("({row}, {col})"), reason));
                Ok(())
            }
        }
    };

    for i in 0..n {
        for j in 0..n {
            let cell = m.cell(i, j);
            if !cell.is_positive() {
                let (row, col) = m.pair(i, j);
                return Err(Error::InvalidCell { row, col, reason: format!("{cell} has a non-positive component") });
            }
            if !cell.is_monotone() {
                flag(i, j, WarningKind::NonMonotone, format!("{cell} violates l <= m <= u"))?;
            }
            if i == j && cell != Tfn::ONE {
                flag(i, j, WarningKind::Diagonal, format!("diagonal cell is {cell}, expected (1, 1, 1)"))?;
            }
        }
    }

    for i in 0..n {
        for j in i + 1..n {
            let expected = m.cell(i, j).reciprocal()?;
            let actual = m.cell(j, i);
            let breach = expected
                .components()
                .iter()
                .zip(actual.components())
                .any(|(e, a)| (a - e).abs() > RECIPROCITY_TOLERANCE * e.abs());
            if breach {
                let (row, col) = m.pair(j, i);
                let (mrow, mcol) = m.pair(i, j);
                flag(
                    i,
                    j,
                    WarningKind::Reciprocity,
                    format!(
                        "({row}, {col}) = {actual} is not the reciprocal of ({mrow}, {mcol}) = {} within {}%",
                        m.cell(i, j),
                        RECIPROCITY_TOLERANCE * 100.0
                    ),
                )?;
            }
        }
    }
    Ok(warnings)
}

/// Componentwise geometric mean of every row.
pub fn row_geometric_means(m: &PairwiseMatrix) -> Result<Vec<Tfn>> {
    (0..m.len())
        .map(|i| {
            let row = m.row(i);
            let component = |k: usize| -> Result<f64> {
                let values: Vec<f64> = row.iter().map(|t| t.components()[k]).collect();
                geometric_mean(&values)
            };
            Tfn::lenient(component(0)?, component(1)?, component(2)?)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzyWeights {
    pub weights: Vec<Tfn>,
    /// Componentwise sum of the row geometric means.
    pub total: Tfn,
    /// `(1/u, 1/m, 1/l)` of the total.
    pub inverse: Tfn,
}

pub fn fuzzy_weights(means: &[Tfn]) -> Result<FuzzyWeights> {
    if means.is_empty() {
        return Err(Error::Empty("geometric mean list"));
    }
    let total: Tfn = means.iter().sum();
    let inverse = total.total_inverse()?;
    let weights = means.iter().map(|r| r.checked_mul(&inverse)).collect::<Result<_>>()?;
    Ok(FuzzyWeights { weights, total, inverse })
}

/// Centroid of each fuzzy weight (`M`) and the same values scaled to sum to
/// one (`N`).
pub fn crisp_weights(weights: &[Tfn]) -> Result<(Vec<f64>, Vec<f64>)> {
    if weights.is_empty() {
        return Err(Error::Empty("fuzzy weight list"));
    }
    let averaged: Vec<f64> = weights.iter().map(Tfn::centroid).collect();
    let sum: f64 = averaged.iter().sum();
    if sum == 0.0 || !sum.is_finite() {
        return Err(Error::ZeroTotal("averaged weights"));
    }
    let normalized = averaged.iter().map(|m| m / sum).collect();
    Ok((averaged, normalized))
}

/// 1-based ranks by descending weight; equal weights keep index order.
pub fn rank(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    let mut ranks = vec![0; weights.len()];
    for (position, &index) in order.iter().enumerate() {
        ranks[index] = position + 1;
    }
    ranks
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedCriterion {
    pub criterion: Barrier,
    pub geometric_mean: Tfn,
    pub fuzzy_weight: Tfn,
    pub averaged_weight: f64,
    pub normalized_weight: f64,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    /// In matrix order.
    pub criteria: Vec<RankedCriterion>,
    pub total: Tfn,
    pub inverse_total: Tfn,
    pub warnings: Vec<Warning>,
}

impl RankingResult {
    /// Criteria from rank 1 downwards.
    pub fn by_rank(&self) -> Vec<&RankedCriterion> {
        let mut v: Vec<&RankedCriterion> = self.criteria.iter().collect();
        v.sort_by_key(|c| c.rank);
        v
    }

    pub fn normalized_weights(&self) -> Vec<f64> {
        self.criteria.iter().map(|c| c.normalized_weight).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.criteria.iter().map(|c| c.rank).collect()
    }
}

pub fn run_fahp(m: &PairwiseMatrix) -> Result<RankingResult> {
    let warnings = validate_matrix(m)?;
    let means = row_geometric_means(m)?;
    let FuzzyWeights { weights, total, inverse } = fuzzy_weights(&means)?;
    let (averaged, normalized) = crisp_weights(&weights)?;
    let ranks = rank(&normalized);
    let criteria = m
        .criteria()
        .iter()
        .enumerate()
        .map(|(i, c)| RankedCriterion {
            criterion: c.clone(),
            geometric_mean: means[i],
            fuzzy_weight: weights[i],
            averaged_weight: averaged[i],
            normalized_weight: normalized[i],
            rank: ranks[i],
        })
        .collect();
    Ok(RankingResult { criteria, total, inverse_total: inverse, warnings })
}
