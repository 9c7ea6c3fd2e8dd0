//! Statistics shared by the acceptance criteria.

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Two-sided exact sign test on paired samples; ties are dropped.
pub fn sign_test(a: &[f64], b: &[f64]) -> f64 {
    let below = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let above = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let n = below + above;
    if n == 0 {
        return 1.0;
    }
    let k = below.min(above);
    // P(X <= k) for X ~ Binomial(n, 1/2), accumulated in log space
    let mut log_c = 0.0f64;
    let mut tail = 0.0;
    for i in 0..=k {
        if i > 0 {
            log_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        tail += (log_c - n as f64 * 2f64.ln()).exp();
    }
    (2.0 * tail).min(1.0)
}

/// Whether `a` lies below `b` in mean, by at least `margin` relative to
/// `b`'s mean or with a sign-test p-value under `alpha` and a majority of
/// pairs ordered. The string summarises the comparison.
pub fn ordered(a: &[f64], b: &[f64], margin: f64, alpha: f64) -> (bool, String) {
    let (ma, mb) = (mean(a), mean(b));
    let rel = (mb - ma) / mb;
    let p = sign_test(a, b);
    let below = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let ok = ma <= mb && (rel >= margin || (p < alpha && below * 2 > a.len()));
    (ok, format!("{ma:.4e} vs {mb:.4e} (margin {:.1}%, sign-test p {p:.2e})", 100.0 * rel))
}
