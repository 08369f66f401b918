//! Discrete entropies, mutual information and KL divergence, in bits.
//!
//! `0·log 0` is taken as `0` throughout.

use crate::matrix::Matrix;

#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * libm::log2(p)
    } else {
        0.0
    }
}

/// Shannon entropy of a (not necessarily normalized) weight vector, normalized first.
pub fn entropy(p: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let h = -p.iter().map(|&v| plogp(v / total)).sum::<f64>();
    h.max(0.0)
}

/// Joint entropy of all cells of a joint table.
pub fn joint_entropy(joint: &Matrix) -> f64 {
    entropy(joint.as_slice())
}

/// `I(R; C)` for a joint table with row variable `R` and column variable `C`.
///
/// Clamped at zero to absorb round-off on independent tables.
pub fn mutual_information(joint: &Matrix) -> f64 {
    let total = joint.sum();
    if total <= 0.0 {
        return 0.0;
    }
    let rows = joint.row_sums();
    let cols = joint.col_sums();
    let mut mi = 0.0;
    for (r, row) in joint.iter_rows().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v > 0.0 {
                mi += v / total * libm::log2(v * total / (rows[r] * cols[c]));
            }
        }
    }
    mi.max(0.0)
}

/// `H(C | R)`: entropy of the column variable given the row variable.
pub fn conditional_entropy_cols_given_rows(joint: &Matrix) -> f64 {
    (joint_entropy(joint) - entropy(&joint.row_sums())).max(0.0)
}

/// `KL[p ‖ q]` in bits. Infinite when `p` puts mass where `q` has none.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut kl = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            kl += a * libm::log2(a / b);
        }
    }
    kl.max(0.0)
}

/// Mixes `ε` into every cell of a distribution and renormalizes.
pub fn smooth(p: &[f64], eps: f64) -> alloc::vec::Vec<f64> {
    let total: f64 = p.iter().map(|v| v + eps).sum();
    p.iter().map(|v| (v + eps) / total).collect()
}

/// Conditional mutual information `I(A; B | C)` of a joint tensor stored as
/// `joint[a][b][c]` in a flat buffer of shape `(na, nb, nc)`.
pub fn conditional_mutual_information(joint: &[f64], na: usize, nb: usize, nc: usize) -> f64 {
    debug_assert_eq!(joint.len(), na * nb * nc);
    let idx = |a: usize, b: usize, c: usize| (a * nb + b) * nc + c;
    let mut p_ac = alloc::vec![0.0; na * nc];
    let mut p_bc = alloc::vec![0.0; nb * nc];
    let mut p_c = alloc::vec![0.0; nc];
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let v = joint[idx(a, b, c)];
                p_ac[a * nc + c] += v;
                p_bc[b * nc + c] += v;
                p_c[c] += v;
            }
        }
    }
    let mut cmi = 0.0;
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let v = joint[idx(a, b, c)];
                if v > 0.0 {
                    cmi += v * libm::log2(v * p_c[c] / (p_ac[a * nc + c] * p_bc[b * nc + c]));
                }
            }
        }
    }
    cmi.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn uniform_entropy() {
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn mi_of_diagonal_and_product() {
        let diag = Matrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((mutual_information(&diag) - 1.0).abs() < 1e-15);
        let prod = Matrix::from_fn(2, 2, |_, _| 0.25);
        assert_eq!(mutual_information(&prod), 0.0);
        assert!((conditional_entropy_cols_given_rows(&prod) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kl_disjoint_support_is_infinite() {
        assert_eq!(kl_divergence(&[0.0, 1.0], &[1.0, 0.0]), f64::INFINITY);
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        let s = smooth(&[0.0, 1.0], 1e-12);
        assert!(kl_divergence(&s, &smooth(&[1.0, 0.0], 1e-12)).is_finite());
    }

    #[test]
    fn cmi_of_copy_given_nothing() {
        // a = b uniform bit, c constant: I(A;B|C) = 1 bit
        let joint = [0.5, 0.0, 0.0, 0.5];
        assert!((conditional_mutual_information(&joint, 2, 2, 1) - 1.0).abs() < 1e-15);
        // a = c, b independent: 0
        let mut j = [0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                j[(a * 2 + b) * 2 + a] = 0.25;
            }
        }
        assert!(conditional_mutual_information(&j, 2, 2, 2).abs() < 1e-15);
    }
}
