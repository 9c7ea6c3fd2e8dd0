//! Orthogonal matching pursuit.
//!
//! Each iteration picks the atom with the largest normalized correlation
//! `|⟨r, a⟩| / ‖a‖` with the current residual (lowest index wins ties), then
//! re-fits all selected coefficients jointly by least squares.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{column_space, min_norm_lstsq};

#[derive(Debug, Clone)]
pub struct OmpOutcome {
    /// Selected column indices in selection order.
    pub support: Vec<usize>,
    /// Least-squares coefficients, aligned with `support`.
    pub coefficients: Vec<Complex64>,
    pub residual: DVector<Complex64>,
    /// Residual norm after each iteration.
    pub residual_norms: Vec<f64>,
    /// Set when the selected atoms were linearly dependent; coefficients are
    /// then the minimum-norm fit.
    pub rank_deficient: bool,
}

impl OmpOutcome {
    pub fn residual_norm(&self) -> f64 {
        self.residual.norm()
    }
}

pub(crate) fn column_norms(atoms: &DMatrix<Complex64>) -> Vec<f64> {
    atoms.column_iter().map(|c| c.norm()).collect()
}

/// Best column for `residual`, skipping `excluded`. Returns the index and
/// its normalized correlation.
pub(crate) fn best_atom(
    atoms: &DMatrix<Complex64>,
    norms: &[f64],
    residual: &DVector<Complex64>,
    excluded: &[usize],
) -> Option<(usize, f64)> {
    let corr = atoms.ad_mul(residual);
    let mut best: Option<(usize, f64)> = None;
    for (c, (v, &n)) in corr.iter().zip(norms).enumerate() {
        if excluded.contains(&c) || n == 0.0 {
            continue;
        }
        let score = v.norm() / n;
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((c, score));
        }
    }
    best
}

/// Residual-energy reduction obtained by adding each column of `atoms` to
/// the fixed columns spanned by the orthonormal `basis`. Columns inside the
/// fixed span score zero.
pub(crate) fn projected_scores(
    atoms: &DMatrix<Complex64>,
    basis: &DMatrix<Complex64>,
    y: &DVector<Complex64>,
) -> Vec<f64> {
    let z = y - basis * basis.ad_mul(y);
    let corr = atoms.ad_mul(&z);
    let inside = basis.ad_mul(atoms);
    corr.iter()
        .enumerate()
        .map(|(c, v)| {
            let total = atoms.column(c).norm_squared();
            let outside = total - inside.column(c).norm_squared();
            if outside > 1e-12 * total {
                v.norm_sqr() / outside
            } else {
                0.0
            }
        })
        .collect()
}

/// Column that, joined to the fixed span, leaves the smallest residual.
pub(crate) fn best_atom_given(
    atoms: &DMatrix<Complex64>,
    basis: &DMatrix<Complex64>,
    y: &DVector<Complex64>,
) -> Option<(usize, f64)> {
    argmax(&projected_scores(atoms, basis, y))
}

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best
}

pub(crate) fn stack_columns(columns: &[DVector<Complex64>], rows: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

/// Runs `k` OMP iterations of `y` over the columns of `atoms`.
pub fn omp(y: &DVector<Complex64>, atoms: &DMatrix<Complex64>, k: usize) -> Result<OmpOutcome> {
    if atoms.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: atoms.nrows(),
            actual: y.len(),
        });
    }
    if k == 0 || k > atoms.ncols() {
        return Err(invalid(format!(
            "pursuit order {k} must lie in 1..={}",
            atoms.ncols()
        )));
    }
    let norms = column_norms(atoms);
    if let Some(c) = norms.iter().position(|&n| n == 0.0) {
        return Err(invalid(format!("dictionary column {c} is zero")));
    }

    let mut support = Vec::with_capacity(k);
    let mut selected = Vec::with_capacity(k);
    let mut residual = y.clone();
    let mut residual_norms = Vec::with_capacity(k);
    let mut coefficients = DVector::zeros(0);
    let mut rank_deficient = false;

    for _ in 0..k {
        let (c, _) = best_atom(atoms, &norms, &residual, &support)
            .expect("k <= column count leaves an unselected column");
        support.push(c);
        selected.push(atoms.column(c).into_owned());
        let fit = min_norm_lstsq(&stack_columns(&selected, y.len()), y);
        rank_deficient |= fit.rank_deficient;
        residual_norms.push(fit.residual.norm());
        residual = fit.residual;
        coefficients = fit.coefficients;
    }

    Ok(OmpOutcome {
        support,
        coefficients: coefficients.iter().copied().collect(),
        residual,
        residual_norms,
        rank_deficient,
    })
}

#[derive(Debug, Clone)]
pub(crate) struct SequentialFit {
    pub picks: Vec<usize>,
    pub coefficients: Vec<Complex64>,
    pub residual: DVector<Complex64>,
    pub rank_deficient: bool,
}

/// Matching pursuit where iteration `i` draws from its own dictionary
/// `dictionaries[i]`; all picked atoms are re-fitted jointly after each pick.
/// Afterwards every pick is revisited with the others held fixed, for at
/// most `backfit_sweeps` sweeps or until no pick changes.
pub(crate) fn sequential_pursuit(
    y: &DVector<Complex64>,
    dictionaries: &[DMatrix<Complex64>],
    backfit_sweeps: usize,
) -> SequentialFit {
    let mut picks = Vec::with_capacity(dictionaries.len());
    let mut selected = Vec::with_capacity(dictionaries.len());
    let mut residual = y.clone();
    for dict in dictionaries {
        let norms = column_norms(dict);
        let (c, _) = best_atom(dict, &norms, &residual, &[]).unwrap_or((0, 0.0));
        picks.push(c);
        selected.push(dict.column(c).into_owned());
        residual = min_norm_lstsq(&stack_columns(&selected, y.len()), y).residual;
    }

    if dictionaries.len() > 1 {
        for _ in 0..backfit_sweeps {
            let mut changed = false;
            for (p, dict) in dictionaries.iter().enumerate() {
                let others: Vec<_> = (0..selected.len())
                    .filter(|&q| q != p)
                    .map(|q| selected[q].clone())
                    .collect();
                let basis = column_space(&stack_columns(&others, y.len()));
                if let Some((c, _)) = best_atom_given(dict, &basis, y) {
                    if c != picks[p] {
                        picks[p] = c;
                        selected[p] = dict.column(c).into_owned();
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    let fit = min_norm_lstsq(&stack_columns(&selected, y.len()), y);
    SequentialFit {
        picks,
        coefficients: fit.coefficients.iter().copied().collect(),
        residual: fit.residual,
        rank_deficient: fit.rank_deficient,
    }
}
