//! Dense LU factorization with partial pivoting, plus forward/back
//! substitution for both `A x = b` and `Aᵀ x = b`.
//!
//! Exact policy evaluation factors one dense matrix per policy (a few
//! thousand rows for baseline scenarios) on a single core, so the
//! factorization is cache-blocked: a narrow panel is factored unblocked,
//! then the trailing submatrix is updated in column tiles with the panel
//! multipliers unrolled four at a time. Everything is plain safe Rust over a
//! flat row-major buffer; results are bit-deterministic for a given matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Panel width of the blocked factorization.
const BLOCK: usize = 64;

/// Column-tile width of the trailing update, sized so one tile of the
/// destination row stays in L1 across all panel multipliers.
const TILE: usize = 512;

/// Pivots smaller than this are treated as singular.
const PIVOT_MIN: f64 = 1e-250;

/// A failed factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinalgError {
    /// No usable pivot in this elimination column; the matrix is singular
    /// (or numerically indistinguishable from singular).
    Singular { pivot: usize },
    /// The buffer length does not match the requested dimension.
    Shape { expected: usize, got: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Singular { pivot } => {
                write!(f, "matrix is singular at elimination column {pivot}")
            }
            LinalgError::Shape { expected, got } => {
                write!(f, "matrix buffer holds {got} values, expected {expected}")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// A packed LU factorization `P A = L U` (unit-diagonal `L` below the
/// diagonal, `U` on and above it) with the row-swap sequence in `pivots`.
#[derive(Clone, Debug)]
pub struct LuFactors {
    n: usize,
    data: Vec<f64>,
    pivots: Vec<u32>,
}

/// `dst -= l * src`, the elimination kernel.
#[inline]
fn axpy(dst: &mut [f64], src: &[f64], l: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d -= l * s;
    }
}

/// `dst -= l0*s0 + l1*s1 + l2*s2 + l3*s3`, four eliminations fused so each
/// destination tile is traversed once per group.
#[inline]
fn axpy4(dst: &mut [f64], s0: &[f64], s1: &[f64], s2: &[f64], s3: &[f64], l: [f64; 4]) {
    for (j, d) in dst.iter_mut().enumerate() {
        *d -= l[0] * s0[j] + l[1] * s1[j] + l[2] * s2[j] + l[3] * s3[j];
    }
}

/// Factors a row-major `n x n` matrix in place.
pub fn lu_factor(mut data: Vec<f64>, n: usize) -> Result<LuFactors, LinalgError> {
    if data.len() != n * n {
        return Err(LinalgError::Shape {
            expected: n * n,
            got: data.len(),
        });
    }
    let mut pivots = Vec::with_capacity(n);

    let mut kb = 0;
    while kb < n {
        let bw = BLOCK.min(n - kb);
        let jb = kb + bw;

        // Panel factorization: columns kb..jb, full pivot search down the
        // column, whole-row swaps, eliminations restricted to the panel.
        for k in kb..jb {
            let mut piv = k;
            let mut max = data[k * n + k].abs();
            for i in k + 1..n {
                let v = data[i * n + k].abs();
                if v > max {
                    max = v;
                    piv = i;
                }
            }
            if max < PIVOT_MIN {
                return Err(LinalgError::Singular { pivot: k });
            }
            if piv != k {
                for j in 0..n {
                    data.swap(k * n + j, piv * n + j);
                }
            }
            pivots.push(piv as u32);

            let inv = 1.0 / data[k * n + k];
            let (top, rest) = data.split_at_mut((k + 1) * n);
            let row_k = &top[k * n..];
            for row_i in rest.chunks_exact_mut(n) {
                let l = row_i[k] * inv;
                row_i[k] = l;
                if l != 0.0 {
                    axpy(&mut row_i[k + 1..jb], &row_k[k + 1..jb], l);
                }
            }
        }

        if jb == n {
            break;
        }

        // Block row of U: forward-substitute the unit-lower panel through
        // the columns right of it.
        for k in kb..jb {
            let (top, rest) = data.split_at_mut((k + 1) * n);
            let row_k = &top[k * n..];
            for row_i in rest.chunks_exact_mut(n).take(jb - k - 1) {
                let l = row_i[k];
                if l != 0.0 {
                    axpy(&mut row_i[jb..n], &row_k[jb..n], l);
                }
            }
        }

        // Trailing update: subtract (panel multipliers) x (U block row) from
        // every remaining row, tiled over columns with the multipliers
        // consumed four at a time.
        let (head, tail) = data.split_at_mut(jb * n);
        let panel_rows: Vec<&[f64]> = (kb..jb).map(|k| &head[k * n..(k + 1) * n]).collect();
        for row_i in tail.chunks_exact_mut(n) {
            let mut jt = jb;
            while jt < n {
                let jhi = (jt + TILE).min(n);
                let mut g = 0;
                while g + 4 <= bw {
                    let l = [
                        row_i[kb + g],
                        row_i[kb + g + 1],
                        row_i[kb + g + 2],
                        row_i[kb + g + 3],
                    ];
                    if l.iter().any(|&x| x != 0.0) {
                        // Reborrow the destination tile per group; the
                        // sources live in the panel block above.
                        let (s0, s1, s2, s3) = (
                            &panel_rows[g][jt..jhi],
                            &panel_rows[g + 1][jt..jhi],
                            &panel_rows[g + 2][jt..jhi],
                            &panel_rows[g + 3][jt..jhi],
                        );
                        axpy4(&mut row_i[jt..jhi], s0, s1, s2, s3, l);
                    }
                    g += 4;
                }
                while g < bw {
                    let l = row_i[kb + g];
                    if l != 0.0 {
                        axpy(&mut row_i[jt..jhi], &panel_rows[g][jt..jhi], l);
                    }
                    g += 1;
                }
                jt = jhi;
            }
        }

        kb = jb;
    }

    Ok(LuFactors { n, data, pivots })
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length");
        let n = self.n;
        let mut x = b.to_vec();
        for (k, &piv) in self.pivots.iter().enumerate() {
            x.swap(k, piv as usize);
        }
        // L y = P b (unit lower).
        for i in 1..n {
            let row = &self.data[i * n..i * n + i];
            let mut acc = 0.0;
            for (j, &l) in row.iter().enumerate() {
                acc += l * x[j];
            }
            x[i] -= acc;
        }
        // U x = y.
        for i in (0..n).rev() {
            let row = &self.data[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for j in i + 1..n {
                acc += row[j] * x[j];
            }
            x[i] = (x[i] - acc) / row[i];
        }
        x
    }

    /// Solves `Aᵀ x = b` using the same factorization
    /// (`Aᵀ = Uᵀ Lᵀ P`, so substitution runs through `Uᵀ` then `Lᵀ`,
    /// followed by undoing the row swaps).
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length");
        let n = self.n;
        let mut x = b.to_vec();
        // Uᵀ y = b: outer-product form keeps row-major access sequential.
        for k in 0..n {
            let row = &self.data[k * n..(k + 1) * n];
            let yk = x[k] / row[k];
            x[k] = yk;
            if yk != 0.0 {
                for j in k + 1..n {
                    x[j] -= row[j] * yk;
                }
            }
        }
        // Lᵀ z = y (unit diagonal), bottom-up in the same outer-product form.
        for k in (1..n).rev() {
            let xk = x[k];
            if xk != 0.0 {
                let row = &self.data[k * n..k * n + k];
                for (j, &l) in row.iter().enumerate() {
                    x[j] -= l * xk;
                }
            }
        }
        // x = P⁻¹ z: undo the swaps in reverse order.
        for (k, &piv) in self.pivots.iter().enumerate().rev() {
            x.swap(k, piv as usize);
        }
        x
    }
}

/// Dense row-major matrix-vector product, used by tests and residual checks.
pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        let mut acc = 0.0;
        for (j, &v) in row.iter().enumerate() {
            acc += v * x[j];
        }
        y[i] = acc;
    }
    y
}

/// Dense row-major transposed matrix-vector product `Aᵀ x`.
pub fn mat_tvec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        let xi = x[i];
        if xi != 0.0 {
            for (j, &v) in row.iter().enumerate() {
                y[j] += v * xi;
            }
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_system(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for v in a.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        // Mild diagonal weighting keeps the conditioning predictable while
        // still forcing plenty of pivoting.
        for i in 0..n {
            a[i * n + i] += 2.0;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (a, b)
    }

    fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn solves_a_hand_checked_system() {
        // [[2, 1], [1, 3]] x = [5, 10] has x = [1, 3].
        let a = vec![2.0, 1.0, 1.0, 3.0];
        let lu = lu_factor(a, 2).unwrap();
        let x = lu.solve(&[5.0, 10.0]);
        assert!(max_abs_diff(&x, &[1.0, 3.0]) < 1e-14);
        // Transpose system: [[2, 1], [1, 3]]ᵀ y = [4, 7] has y = [1, 2].
        let y = lu.solve_transpose(&[4.0, 7.0]);
        assert!(max_abs_diff(&y, &[1.0, 2.0]) < 1e-14);
    }

    #[test]
    fn residuals_vanish_across_block_boundaries() {
        // Sizes straddling one, two, and three panels, including ragged
        // remainders, all solved to tiny residuals.
        for (seed, n) in [(1u64, 3), (2, 31), (3, 64), (4, 65), (5, 150), (6, 257)] {
            let (a, b) = random_system(n, seed);
            let lu = lu_factor(a.clone(), n).unwrap();
            let x = lu.solve(&b);
            let r = mat_vec(&a, n, &x);
            assert!(
                max_abs_diff(&r, &b) < 1e-10,
                "forward residual at n = {n}"
            );
            let xt = lu.solve_transpose(&b);
            let rt = mat_tvec(&a, n, &xt);
            assert!(
                max_abs_diff(&rt, &b) < 1e-10,
                "transpose residual at n = {n}"
            );
        }
    }

    #[test]
    fn permutation_matrices_invert_exactly() {
        // A pure permutation exercises the pivoting logic with no rounding.
        let n = 7;
        let perm = [3usize, 0, 6, 1, 5, 2, 4];
        let mut a = vec![0.0; n * n];
        for (i, &p) in perm.iter().enumerate() {
            a[i * n + p] = 1.0;
        }
        let lu = lu_factor(a.clone(), n).unwrap();
        let b: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let x = lu.solve(&b);
        assert_eq!(mat_vec(&a, n, &x), b);
        let xt = lu.solve_transpose(&b);
        assert_eq!(mat_tvec(&a, n, &xt), b);
    }

    #[test]
    fn singular_matrices_are_rejected() {
        // Two identical rows.
        let a = vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 0.0, 1.0, 1.0];
        assert!(matches!(
            lu_factor(a, 3),
            Err(LinalgError::Singular { .. })
        ));
        // All-zero column.
        let a = vec![0.0, 2.0, 0.0, 5.0];
        assert!(matches!(
            lu_factor(a, 2),
            Err(LinalgError::Singular { pivot: 0 })
        ));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        assert!(matches!(
            lu_factor(vec![1.0; 5], 2),
            Err(LinalgError::Shape {
                expected: 4,
                got: 5
            })
        ));
    }
}
