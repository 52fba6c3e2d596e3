//! Shared matrix helpers: the one-parameter subgroups u^t, a^s, v^r,
//! integer 2x2 matrices for SL(2,Z) words, norms, and basis expansion.

use nalgebra::{linalg::Schur, Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;

pub fn mat2(a: f64, b: f64, c: f64, d: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[a, b, c, d])
}

/// u^t = [[1,0],[t,1]], the lower-triangular unipotent subgroup.
pub fn u_mat(t: f64) -> Mat {
    mat2(1.0, 0.0, t, 1.0)
}

/// a^s = diag(e^s, e^{-s}).
pub fn a_mat(s: f64) -> Mat {
    mat2(s.exp(), 0.0, 0.0, (-s).exp())
}

/// v^r = [[1,r],[0,1]], the opposite unipotent subgroup.
pub fn v_mat(r: f64) -> Mat {
    mat2(1.0, r, 0.0, 1.0)
}

pub fn det2(m: &Mat) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

pub fn max_norm(m: &Mat) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Eigenvalues through a Schur iteration with a bounded step count.
/// The unbounded QR iteration can cycle forever on exactly structured
/// input (nilpotent companion matrices, integer Jordan blocks); a random
/// similarity keeps the spectrum while breaking the structure, so a few
/// retries make the computation total.
pub fn complex_eigs(m: &Mat) -> Option<DVector<Complex<f64>>> {
    use rand::{Rng, SeedableRng};
    if let Some(dec) = Schur::try_new(m.clone(), f64::EPSILON, 50_000) {
        return Some(dec.complex_eigenvalues());
    }
    let n = m.nrows();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0e16);
    for _ in 0..6 {
        let r = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let s = Mat::identity(n, n) + 0.08 * r;
        let Some(si) = s.clone().try_inverse() else { continue };
        if let Some(dec) = Schur::try_new(&si * m * &s, f64::EPSILON, 50_000) {
            return Some(dec.complex_eigenvalues());
        }
    }
    None
}

pub fn check_det1_2x2(m: &Mat, tol: f64) -> Result<()> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::InvalidInput(format!(
            "expected 2x2 matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let d = det2(m);
    if (d - 1.0).abs() > tol {
        return Err(Error::InvalidInput(format!("determinant {d} is not 1")));
    }
    Ok(())
}

/// Integer 2x2 matrix, the carrier for SL(2,Z) elements. Entries row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IMat2 {
    pub e: [i64; 4],
}

impl IMat2 {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        IMat2 { e: [a, b, c, d] }
    }

    pub const fn identity() -> Self {
        IMat2::new(1, 0, 0, 1)
    }

    /// T = [[1,1],[0,1]].
    pub const fn t_gen() -> Self {
        IMat2::new(1, 1, 0, 1)
    }

    /// S = [[0,-1],[1,0]].
    pub const fn s_gen() -> Self {
        IMat2::new(0, -1, 1, 0)
    }

    pub fn t_pow(n: i64) -> Self {
        IMat2::new(1, n, 0, 1)
    }

    pub fn det(&self) -> i64 {
        self.e[0] * self.e[3] - self.e[1] * self.e[2]
    }

    pub fn mul(&self, o: &IMat2) -> Result<IMat2> {
        let p = |x: i64, y: i64| x.checked_mul(y);
        let f = |i: usize, j: usize, k: usize, l: usize| -> Option<i64> {
            p(self.e[i], o.e[j])?.checked_add(p(self.e[k], o.e[l])?)
        };
        let a = f(0, 0, 1, 2);
        let b = f(0, 1, 1, 3);
        let c = f(2, 0, 3, 2);
        let d = f(2, 1, 3, 3);
        match (a, b, c, d) {
            (Some(a), Some(b), Some(c), Some(d)) => Ok(IMat2::new(a, b, c, d)),
            _ => Err(Error::Numerical("integer overflow in SL(2,Z) word".into())),
        }
    }

    pub fn neg(&self) -> IMat2 {
        IMat2::new(-self.e[0], -self.e[1], -self.e[2], -self.e[3])
    }

    /// Conjugation by the antidiagonal involution J = [[0,1],[1,0]]:
    /// J [[a,b],[c,d]] J = [[d,c],[b,a]].
    pub fn j_conj(&self) -> IMat2 {
        IMat2::new(self.e[3], self.e[2], self.e[1], self.e[0])
    }

    pub fn to_mat(&self) -> Mat {
        mat2(
            self.e[0] as f64,
            self.e[1] as f64,
            self.e[2] as f64,
            self.e[3] as f64,
        )
    }

    /// Sign-normalize: flip the global sign so the first nonzero entry is
    /// positive. (gamma and -gamma act identically on the upper half-plane.)
    pub fn sign_normalized(&self) -> IMat2 {
        for &x in &self.e {
            if x != 0 {
                return if x < 0 { self.neg() } else { *self };
            }
        }
        *self
    }
}

/// Lexicographic comparison of entry tuples, used to pick a canonical coset
/// word when the reduced point lies on the fundamental-domain boundary.
pub fn lex_le(a: &IMat2, b: &IMat2) -> bool {
    a.e <= b.e
}

/// Expand `m` in the span of `basis` (all of equal shape); returns the
/// coordinate vector and the relative residual of the expansion.
pub fn coords_in_basis(m: &Mat, basis: &[Mat]) -> (Vec<f64>, f64) {
    let rows = m.nrows() * m.ncols();
    let d = basis.len();
    let mut bm = DMatrix::<f64>::zeros(rows, d);
    for (j, b) in basis.iter().enumerate() {
        for (i, x) in b.iter().enumerate() {
            bm[(i, j)] = *x;
        }
    }
    let rhs = DMatrix::<f64>::from_column_slice(rows, 1, m.as_slice());
    let svd = bm.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-13).expect("svd solve");
    let resid = (&bm * &sol - &rhs).norm();
    let scale = m.norm().max(1e-300);
    (sol.as_slice().to_vec(), resid / scale)
}

/// Kernel of `m` (columns spanning null space) with singular-value cutoff
/// `tol` relative to the largest singular value.
pub fn kernel_basis(m: &Mat, tol: f64) -> Vec<nalgebra::DVector<f64>> {
    let cols = m.ncols();
    let svd = m.clone().svd(false, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cut = tol * smax.max(1.0);
    let vt = svd.v_t.expect("svd v_t");
    let mut out = Vec::new();
    for i in 0..svd.singular_values.len() {
        if svd.singular_values[i] <= cut {
            out.push(vt.row(i).transpose());
        }
    }
    // Rows of V^T beyond the number of singular values also span the kernel
    // when the matrix has more columns than rows.
    for i in svd.singular_values.len()..cols {
        out.push(vt.row(i).transpose());
    }
    out
}

/// In-place row-style Hermite normal form over the integers: row-span is
/// preserved, pivots are positive, entries above each pivot are reduced to
/// [0, pivot). Canonical basis for an integer relation lattice.
pub fn hermite_rows(rows: &mut [Vec<i64>]) {
    let nrows = rows.len();
    if nrows == 0 {
        return;
    }
    let ncols = rows[0].len();
    let mut r = 0usize;
    for c in 0..ncols {
        // euclidean elimination below row r in column c
        loop {
            let mut piv: Option<usize> = None;
            for i in r..nrows {
                if rows[i][c] != 0
                    && piv.is_none_or(|p| rows[i][c].abs() < rows[p][c].abs())
                {
                    piv = Some(i);
                }
            }
            let Some(p) = piv else { break };
            rows.swap(r, p);
            let mut remainder_left = false;
            for i in r + 1..nrows {
                let q = rows[i][c].div_euclid(rows[r][c]);
                if q != 0 {
                    for j in 0..ncols {
                        rows[i][j] -= q * rows[r][j];
                    }
                }
                remainder_left |= rows[i][c] != 0;
            }
            if !remainder_left {
                break;
            }
        }
        if rows[r][c] != 0 {
            if rows[r][c] < 0 {
                for x in rows[r].iter_mut() {
                    *x = -*x;
                }
            }
            for i in 0..r {
                let q = rows[i][c].div_euclid(rows[r][c]);
                if q != 0 {
                    for j in 0..ncols {
                        rows[i][j] -= q * rows[r][j];
                    }
                }
            }
            r += 1;
            if r == nrows {
                return;
            }
        }
    }
}

/// Well-conditioned random SL(n,R) sample: entries uniform in [-1,1],
/// determinant normalized to +1, rejecting near-singular draws.
pub fn random_sl(n: usize, rng: &mut impl rand::Rng) -> Mat {
    loop {
        let m = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let det = m.determinant();
        if det.abs() < 0.05 {
            continue;
        }
        let scale = det.abs().powf(1.0 / n as f64);
        let mut m = m / scale;
        if det < 0.0 {
            // flip one row to land in SL rather than det = -1
            for j in 0..n {
                m[(0, j)] = -m[(0, j)];
            }
        }
        let svd = m.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin > 1e-3 && smax / smin < 1e3 {
            return m;
        }
    }
}
