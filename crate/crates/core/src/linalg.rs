use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Singular values below this fraction of the largest are treated as zero.
pub(crate) const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct LeastSquares {
    pub coefficients: DVector<Complex64>,
    pub residual: DVector<Complex64>,
    pub condition_number: f64,
    pub rank_deficient: bool,
}

/// Minimum-norm solution of `min ‖A b − y‖₂` through the SVD of `A`.
pub(crate) fn min_norm_lstsq(a: &DMatrix<Complex64>, y: &DVector<Complex64>) -> LeastSquares {
    let cols = a.ncols();
    if cols == 0 {
        return LeastSquares {
            coefficients: DVector::zeros(0),
            residual: y.clone(),
            condition_number: 1.0,
            rank_deficient: false,
        };
    }
    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let rank_deficient = cols > a.nrows() || s_max == 0.0 || s_min <= RANK_TOLERANCE * s_max;
    let condition_number = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };

    let coefficients = if s_max == 0.0 {
        DVector::zeros(cols)
    } else {
        svd.solve(y, RANK_TOLERANCE * s_max)
            .expect("U and V^H were requested from the SVD")
    };
    let residual = y - a * &coefficients;
    LeastSquares {
        coefficients,
        residual,
        condition_number,
        rank_deficient,
    }
}

/// Orthonormal basis of the column space of `a` (left singular vectors
/// above the rank tolerance).
pub(crate) fn column_space(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("U was requested from the SVD");
    let s_max = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| s_max > 0.0 && svd.singular_values[i] > RANK_TOLERANCE * s_max)
        .collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}
