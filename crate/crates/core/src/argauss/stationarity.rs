use nalgebra::{DMatrix, DVector};

/// Roots of `1 - rho_1 z - ... - rho_k z^k` must have modulus above this.
pub const ROOT_MARGIN: f64 = 1e-10;

/// Whether the AR polynomial has all roots strictly outside the unit circle.
pub fn is_stationary(rho: &[f64]) -> bool {
    let k = rho.len();
    if k == 0 {
        return true;
    }
    if rho.iter().any(|r| !r.is_finite()) {
        return false;
    }
    // eigenvalues of the companion matrix are the reciprocal roots
    let mut c = DMatrix::zeros(k, k);
    for (j, r) in rho.iter().enumerate() {
        c[(0, j)] = *r;
    }
    for i in 1..k {
        c[(i, i - 1)] = 1.0;
    }
    let limit = 1.0 / (1.0 + ROOT_MARGIN);
    c.complex_eigenvalues().iter().all(|l| l.norm() < limit)
}

/// Solves the Yule–Walker equations given autocovariances `acov[0..=k]`.
pub fn yule_walker(acov: &[f64]) -> Option<Vec<f64>> {
    let k = acov.len().checked_sub(1)?;
    if k == 0 {
        return Some(Vec::new());
    }
    let g = DMatrix::from_fn(k, k, |i, j| acov[i.abs_diff(j)]);
    let rhs = DVector::from_iterator(k, acov[1..].iter().copied());
    g.lu().solve(&rhs).map(|v| v.as_slice().to_vec())
}

/// MA(∞) weights psi_0..psi_{len-1} of the AR recursion.
pub fn psi_weights(rho: &[f64], len: usize) -> Vec<f64> {
    let mut psi = vec![0.0; len];
    if len == 0 {
        return psi;
    }
    psi[0] = 1.0;
    for i in 1..len {
        psi[i] = rho
            .iter()
            .enumerate()
            .filter(|(j, _)| *j < i)
            .map(|(j, r)| r * psi[i - j - 1])
            .sum();
    }
    psi
}

/// Stationary autocovariances gamma(0..=max_lag) of an AR process with
/// innovation sd `sigma`. Returns `None` for non-stationary coefficients.
pub fn ar_autocovariance(rho: &[f64], sigma: f64, max_lag: usize) -> Option<Vec<f64>> {
    if !is_stationary(rho) {
        return None;
    }
    let k = rho.len();
    let s2 = sigma * sigma;
    let mut g = vec![0.0; max_lag.max(k) + 1];
    if k == 0 {
        g[0] = s2;
    } else {
        // gamma(h) - sum_j rho_j gamma(|h - j|) = s2 * [h == 0], h = 0..k
        let mut a = DMatrix::zeros(k + 1, k + 1);
        let mut b = DVector::zeros(k + 1);
        b[0] = s2;
        for h in 0..=k {
            a[(h, h)] += 1.0;
            for (j, r) in rho.iter().enumerate() {
                let lag = h.abs_diff(j + 1);
                a[(h, lag)] -= r;
            }
        }
        let sol = a.lu().solve(&b)?;
        g[..=k].copy_from_slice(sol.as_slice());
        for h in k + 1..g.len() {
            g[h] = rho.iter().enumerate().map(|(j, r)| r * g[h - j - 1]).sum();
        }
    }
    g.truncate(max_lag + 1);
    Some(g)
}
