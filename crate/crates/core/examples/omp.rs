//! Orthogonal matching pursuit on a small random dictionary.

use nalgebra::{DMatrix, DVector};
use pinching_csi::estimator::omp;
use pinching_csi::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

fn main() -> pinching_csi::Result<()> {
    let (rows, atoms) = (16, 40);
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let a = DMatrix::from_fn(rows, atoms, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let y: DVector<Complex64> = a.column(4) * Complex64::new(2.0, 0.5) + a.column(15) * Complex64::new(-1.0, 0.0);
    let out = omp(&y, &a, 2)?;
    println!("support      {:?} (true 4, 15)", out.support);
    println!("coefficients {:?}", out.coefficients.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>());
    println!("residual     {:.3e}", out.residual_norm());
    Ok(())
}
