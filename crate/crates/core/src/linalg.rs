//! Small dense vector helpers on `[f64]` slices.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

/// Normalizes in place and returns the original norm.
pub fn normalize(x: &mut [f64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale(1.0 / n, x);
    }
    n
}

pub fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

/// Removes the components of `v` along each (orthonormal) vector of `basis`.
/// Two passes of modified Gram-Schmidt.
pub fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Extends the orthonormal family `seed` (vectors of length `dim`) to an
/// orthonormal basis of R^dim and returns only the added vectors.
///
/// Candidates are the standard basis vectors; at each step the candidate with
/// the largest residual norm after projection is taken, ties broken by lowest
/// index, so the output is a deterministic function of `seed`.
pub fn complete_orthonormal(seed: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = seed.to_vec();
    // residual[j] = 1 - sum_b b[j]^2 = squared norm of e_j after projection
    let mut residual = vec![1.0; dim];
    for b in &basis {
        for (r, bj) in residual.iter_mut().zip(b) {
            *r -= bj * bj;
        }
    }
    let mut used = vec![false; dim];
    let mut added = Vec::with_capacity(dim.saturating_sub(seed.len()));
    while basis.len() < dim {
        let mut best = usize::MAX;
        let mut best_r = f64::NEG_INFINITY;
        for (j, &r) in residual.iter().enumerate() {
            if !used[j] && r > best_r {
                best_r = r;
                best = j;
            }
        }
        used[best] = true;
        let mut v = vec![0.0; dim];
        v[best] = 1.0;
        project_out(&mut v, &basis);
        if normalize(&mut v) < 1e-8 {
            continue;
        }
        for (r, vj) in residual.iter_mut().zip(&v) {
            *r -= vj * vj;
        }
        added.push(v.clone());
        basis.push(v);
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_is_orthonormal_and_deterministic() {
        let mut a = vec![1.0, 2.0, -1.0, 0.5];
        normalize(&mut a);
        let mut b = vec![0.0, 1.0, 2.0, 0.0];
        project_out(&mut b, std::slice::from_ref(&a));
        normalize(&mut b);
        let seed = vec![a, b];
        let added = complete_orthonormal(&seed, 4);
        assert_eq!(added.len(), 2);
        let all: Vec<_> = seed.iter().chain(&added).collect();
        for (i, u) in all.iter().enumerate() {
            for (j, v) in all.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - expect).abs() < 1e-14);
            }
        }
        assert_eq!(added, complete_orthonormal(&seed, 4));
    }
}
