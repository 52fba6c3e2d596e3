//! Matrix and Lie-algebra computations: real Jordan decomposition, SL(2)
//! classification, weight and horospherical decompositions, Jacobians,
//! sl(2)-module structure, and the S-tilde subalgebra.
//!
//! Conventions: the adjoint actions are right actions, x(ad g) = [x, g] and
//! x(Ad g) = g^{-1} x g, so for a = diag(a_1..a_n) the weight of E_ij is
//! a_j - a_i and the lower-triangular nilpotents carry positive weight.

use nalgebra::{Complex, DVector};

use crate::error::{Error, Result};
use crate::mat::{coords_in_basis, kernel_basis, max_norm, Mat};
use crate::tol;

pub type Coords = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sl2Class {
    IdentityLike,
    Unipotent,
    Hyperbolic,
    Elliptic,
    NoneOfThese,
}

/// Trace-band classification of g in SL(2,R): unipotent iff |tr-2| <= tau,
/// hyperbolic iff tr > 2+tau, elliptic iff |tr| < 2-tau, none-of-these for
/// tr <= -2+tau. The elements +I and -I are flagged identity-like first,
/// since -I (trace -2) is elliptic as a group element but falls in the
/// none-of-these trace band.
pub fn classify_sl2(g: &Mat) -> Result<Sl2Class> {
    crate::mat::check_det1_2x2(g, 1e-9)?;
    let tau = tol::TAU_CLS;
    let id = Mat::identity(2, 2);
    if max_norm(&(g - &id)) <= tau || max_norm(&(g + &id)) <= tau {
        return Ok(Sl2Class::IdentityLike);
    }
    let tr = g[(0, 0)] + g[(1, 1)];
    if (tr - 2.0).abs() <= tau {
        Ok(Sl2Class::Unipotent)
    } else if tr > 2.0 + tau {
        Ok(Sl2Class::Hyperbolic)
    } else if tr.abs() < 2.0 - tau {
        Ok(Sl2Class::Elliptic)
    } else {
        Ok(Sl2Class::NoneOfThese)
    }
}

#[derive(Debug, Clone)]
pub struct JordanTriple {
    pub unip: Mat,
    pub hyp: Mat,
    pub ell: Mat,
}

impl JordanTriple {
    /// Max-norm of unip*hyp*ell - g, relative to ||g||.
    pub fn reconstruction_residual(&self, g: &Mat) -> f64 {
        let p = &self.unip * &self.hyp * &self.ell;
        max_norm(&(&p - g)) / max_norm(g).max(1e-300)
    }

    /// Largest pairwise commutator norm, relative to ||g||.
    pub fn commutation_residual(&self, g: &Mat) -> f64 {
        let comm = |x: &Mat, y: &Mat| max_norm(&(x * y - y * x));
        let c = comm(&self.unip, &self.hyp)
            .max(comm(&self.unip, &self.ell))
            .max(comm(&self.hyp, &self.ell));
        c / max_norm(g).max(1e-300)
    }
}

fn eval_poly_mat(c: &[f64], m: &Mat) -> Mat {
    let n = m.nrows();
    let mut acc = Mat::from_diagonal_element(n, n, *c.last().unwrap());
    for &k in c.iter().rev().skip(1) {
        acc = &acc * m + Mat::from_diagonal_element(n, n, k);
    }
    acc
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Greedy 1d clustering of sorted values; returns (centroid, count).
fn cluster_1d(mut vals: Vec<f64>, tol: f64) -> Vec<(f64, usize)> {
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<(f64, usize)> = Vec::new();
    for v in vals {
        match out.last_mut() {
            Some((c, n)) if (v - *c).abs() <= tol => {
                *c = (*c * *n as f64 + v) / (*n as f64 + 1.0);
                *n += 1;
            }
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Real Jordan decomposition g = unip * hyp * ell of an invertible real
/// matrix, all three components commuting.
///
/// Algorithm: cluster the (Schur) eigenvalues conjugate-symmetrically, form
/// the squarefree real polynomial with those roots, Newton-iterate
/// X <- X - p(X) p'(X)^{-1} from X = g to extract the semisimple part S
/// (a polynomial in g, hence everything commutes), set unip = I + (g-S)S^{-1},
/// and split S = hyp * ell by interpolating the modulus map on the spectrum.
pub fn real_jordan_decompose(g: &Mat) -> Result<JordanTriple> {
    let n = g.nrows();
    if n != g.ncols() || n < 1 {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite entries".into()));
    }
    let svd = g.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(Error::Numerical(format!(
            "matrix numerically singular, condition estimate {:.3e}",
            smax / smin.max(1e-300)
        )));
    }
    let cond = smax / smin;
    let eigs = crate::mat::complex_eigs(g)
        .ok_or_else(|| Error::Numerical("eigenvalue iteration did not converge".into()))?;
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let ctol = tol::TAU_CLS * scale;

    // split into (numerically) real eigenvalues and one representative per
    // conjugate pair
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    for z in eigs.iter() {
        if z.im.abs() <= ctol {
            reals.push(z.re);
        } else if z.im > 0.0 {
            upper.push(*z);
        }
    }
    let real_clusters = cluster_1d(reals, ctol);
    // cluster complex representatives greedily in the plane
    let mut cplx: Vec<(Complex<f64>, usize)> = Vec::new();
    upper.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    for z in upper {
        match cplx.last_mut() {
            Some((c, k)) if (z - *c).norm() <= ctol => {
                *c = (*c * *k as f64 + z) / (*k as f64 + 1.0);
                *k += 1;
            }
            _ => cplx.push((z, 1)),
        }
    }

    // squarefree polynomial with one root per cluster (conjugate pairs give
    // a real quadratic factor)
    let mut p = vec![1.0];
    for (r, _) in &real_clusters {
        p = poly_mul(&p, &[-r, 1.0]);
    }
    for (z, _) in &cplx {
        p = poly_mul(&p, &[z.norm_sqr(), -2.0 * z.re, 1.0]);
    }
    let dp: Vec<f64> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &k)| i as f64 * k)
        .collect();

    // Newton iteration toward the semisimple part
    let mut x = g.clone();
    let psize = |m: &Mat| -> f64 {
        let nm = max_norm(m).max(1.0);
        p.iter().enumerate().map(|(i, &k)| k.abs() * nm.powi(i as i32)).sum()
    };
    let mut best = x.clone();
    let mut best_res = f64::INFINITY;
    for _ in 0..80 {
        let px = eval_poly_mat(&p, &x);
        let res = max_norm(&px) / psize(&x);
        if res < best_res {
            best_res = res;
            best = x.clone();
        }
        if res < 1e-16 {
            break;
        }
        let dpx = eval_poly_mat(&dp, &x);
        let lu = dpx.lu();
        match lu.solve(&px) {
            Some(step) => x -= step,
            None => break,
        }
    }
    let s = best;
    if best_res > 1e-8 {
        return Err(Error::Numerical(format!(
            "semisimple-part iteration stalled at residual {best_res:.3e}, condition estimate {cond:.3e}"
        )));
    }
    let nil = g - &s;
    let s_inv = s
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("semisimple part not invertible".into()))?;
    let unip = Mat::identity(n, n) + &nil * &s_inv;

    // interpolate lambda -> |lambda| on the clustered spectrum with a real
    // polynomial (conjugate-symmetric nodes give real coefficients)
    let mut nodes: Vec<Complex<f64>> = Vec::new();
    for (r, _) in &real_clusters {
        nodes.push(Complex::new(*r, 0.0));
    }
    for (z, _) in &cplx {
        nodes.push(*z);
        nodes.push(z.conj());
    }
    let mut q = vec![Complex::new(0.0, 0.0); nodes.len()];
    for (j, nj) in nodes.iter().enumerate() {
        let target = Complex::new(nj.norm(), 0.0);
        let mut lj = vec![Complex::new(1.0, 0.0)];
        let mut denom = Complex::new(1.0, 0.0);
        for (k, nk) in nodes.iter().enumerate() {
            if k == j {
                continue;
            }
            let mut next = vec![Complex::new(0.0, 0.0); lj.len() + 1];
            for (i, &c) in lj.iter().enumerate() {
                next[i] -= c * nk;
                next[i + 1] += c;
            }
            lj = next;
            denom *= nj - nk;
        }
        for (i, c) in lj.iter().enumerate() {
            q[i] += target / denom * c;
        }
    }
    let qr: Vec<f64> = q.iter().map(|z| z.re).collect();
    let hyp = eval_poly_mat(&qr, &s);
    let hyp_inv = hyp
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("hyperbolic part not invertible".into()))?;
    let ell = &hyp_inv * &s;

    Ok(JordanTriple { unip, hyp, ell })
}

/// Terminating logarithm series of a unipotent matrix.
pub fn nilpotent_log(g: &Mat) -> Result<Mat> {
    let n = g.nrows();
    if n != g.ncols() {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    let m = g - Mat::identity(n, n);
    let mut pow = m.clone();
    for _ in 1..n {
        pow = &pow * &m;
    }
    if max_norm(&pow) > 1e-8 {
        return Err(Error::InvalidInput("matrix is not unipotent".into()));
    }
    let mut out = Mat::zeros(n, n);
    let mut pow = m.clone();
    for k in 1..n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out += &pow * (sign / k as f64);
        pow = &pow * &m;
    }
    Ok(out)
}

/// Terminating exponential series of a nilpotent matrix.
pub fn unipotent_exp(x: &Mat) -> Result<Mat> {
    let n = x.nrows();
    if n != x.ncols() {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    let mut pow = x.clone();
    for _ in 1..n {
        pow = &pow * x;
    }
    if max_norm(&pow) > 1e-8 {
        return Err(Error::InvalidInput("matrix is not nilpotent".into()));
    }
    let mut out = Mat::identity(n, n);
    let mut pow = Mat::identity(n, n);
    let mut fact = 1.0;
    for k in 1..n {
        pow = &pow * x;
        fact *= k as f64;
        out += &pow / fact;
    }
    Ok(out)
}

/// A Lie algebra given by structure constants [e_i, e_j] = sum_k c_ijk e_k,
/// optionally realized by matrices of a defining representation.
#[derive(Debug, Clone)]
pub struct LieAlgebraPresentation {
    pub labels: Vec<String>,
    c: Vec<f64>,
    pub mats: Option<Vec<Mat>>,
}

impl LieAlgebraPresentation {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn c_at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim() + j) * self.dim() + k]
    }

    /// Build from a matrix realization; structure constants are extracted by
    /// expanding each bracket in the given basis.
    pub fn from_matrices(labels: Vec<String>, mats: Vec<Mat>) -> Result<Self> {
        let d = labels.len();
        if mats.len() != d || d == 0 {
            return Err(Error::InvalidInput("labels/matrices length mismatch".into()));
        }
        let mut c = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let br = &mats[i] * &mats[j] - &mats[j] * &mats[i];
                let (coords, resid) = coords_in_basis(&br, &mats);
                if resid > 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "basis not closed under bracket: [{} , {}] residual {resid:.3e}",
                        labels[i], labels[j]
                    )));
                }
                for k in 0..d {
                    c[(i * d + j) * d + k] = coords[k];
                }
            }
        }
        Ok(LieAlgebraPresentation { labels, c, mats: Some(mats) })
    }

    /// Parse a plain-text structure-constant table: lines "i j k c" meaning
    /// [e_i, e_j] contains c * e_k, with 1-based indices; '#' starts a
    /// comment. Missing antisymmetric counterparts are filled in
    /// automatically; conflicting ones are rejected.
    pub fn from_structure_text(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, usize, usize, f64)> = Vec::new();
        let mut dmax = 0usize;
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected 'i j k c', got '{line}'",
                    ln + 1
                )));
            }
            let i: usize = parts[0]
                .parse()
                .map_err(|_| Error::InvalidInput(format!("line {}: bad index", ln + 1)))?;
            let j: usize = parts[1]
                .parse()
                .map_err(|_| Error::InvalidInput(format!("line {}: bad index", ln + 1)))?;
            let k: usize = parts[2]
                .parse()
                .map_err(|_| Error::InvalidInput(format!("line {}: bad index", ln + 1)))?;
            let v: f64 = parts[3]
                .parse()
                .map_err(|_| Error::InvalidInput(format!("line {}: bad coefficient", ln + 1)))?;
            if i == 0 || j == 0 || k == 0 {
                return Err(Error::InvalidInput(format!(
                    "line {}: indices are 1-based",
                    ln + 1
                )));
            }
            dmax = dmax.max(i).max(j).max(k);
            entries.push((i - 1, j - 1, k - 1, v));
        }
        if entries.is_empty() {
            return Err(Error::InvalidInput("empty structure-constant table".into()));
        }
        let d = dmax;
        let mut c = vec![0.0; d * d * d];
        let mut set = vec![false; d * d * d];
        for (i, j, k, v) in entries {
            let idx = (i * d + j) * d + k;
            if set[idx] && (c[idx] - v).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "conflicting entries for ({},{},{})",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
            c[idx] = v;
            set[idx] = true;
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let idx = (i * d + j) * d + k;
                    let jdx = (j * d + i) * d + k;
                    if set[idx] && !set[jdx] {
                        c[jdx] = -c[idx];
                        set[jdx] = true;
                    }
                }
            }
        }
        let labels = (1..=d).map(|i| format!("e{i}")).collect();
        let alg = LieAlgebraPresentation { labels, c, mats: None };
        let a = alg.antisymmetry_residual();
        if a > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "antisymmetry violated, residual {a:.3e}"
            )));
        }
        let j = alg.jacobi_residual();
        if j > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "Jacobi identity violated, residual {j:.3e}"
            )));
        }
        Ok(alg)
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Coords {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0.0 {
                    continue;
                }
                let f = x[i] * y[j];
                for k in 0..d {
                    out[k] += f * self.c_at(i, j, k);
                }
            }
        }
        out
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst = worst.max((self.c_at(i, j, k) + self.c_at(j, i, k)).abs());
                }
            }
        }
        worst
    }

    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        let basis: Vec<Coords> = (0..d)
            .map(|i| DVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 }))
            .collect();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let t1 = self.bracket(
                        self.bracket(basis[i].as_slice(), basis[j].as_slice()).as_slice(),
                        basis[k].as_slice(),
                    );
                    let t2 = self.bracket(
                        self.bracket(basis[j].as_slice(), basis[k].as_slice()).as_slice(),
                        basis[i].as_slice(),
                    );
                    let t3 = self.bracket(
                        self.bracket(basis[k].as_slice(), basis[i].as_slice()).as_slice(),
                        basis[j].as_slice(),
                    );
                    worst = worst.max((t1 + t2 + t3).abs().max());
                }
            }
        }
        worst
    }

    /// Matrix of the right adjoint action x -> [x, a] on coordinates.
    pub fn ad_right(&self, a: &[f64]) -> Mat {
        let d = self.dim();
        Mat::from_fn(d, d, |k, i| {
            (0..d).map(|j| self.c_at(i, j, k) * a[j]).sum()
        })
    }

    /// Realize a coordinate vector as a matrix of the defining representation.
    pub fn matrix_of(&self, x: &[f64]) -> Result<Mat> {
        let mats = self
            .mats
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no defining representation attached".into()))?;
        let mut out = Mat::zeros(mats[0].nrows(), mats[0].ncols());
        for (c, m) in x.iter().zip(mats) {
            out += m * *c;
        }
        Ok(out)
    }

    /// Coordinates of a matrix in the defining-representation basis.
    pub fn coords_of(&self, m: &Mat) -> Result<Coords> {
        let mats = self
            .mats
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no defining representation attached".into()))?;
        let (c, resid) = coords_in_basis(m, mats);
        if resid > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "matrix not in the algebra, expansion residual {resid:.3e}"
            )));
        }
        Ok(DVector::from_vec(c))
    }

    /// Matrix of the right group adjoint x -> g^{-1} x g on coordinates.
    pub fn ad_group(&self, g: &Mat) -> Result<Mat> {
        let mats = self
            .mats
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no defining representation attached".into()))?;
        let ginv = g
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("group element not invertible".into()))?;
        let d = self.dim();
        let mut out = Mat::zeros(d, d);
        for i in 0..d {
            let im = &ginv * &mats[i] * g;
            let (coords, resid) = coords_in_basis(&im, mats);
            if resid > 1e-8 {
                return Err(Error::InvalidInput(format!(
                    "adjoint image leaves the algebra, residual {resid:.3e}"
                )));
            }
            for k in 0..d {
                out[(k, i)] = coords[k];
            }
        }
        Ok(out)
    }

    // ---- built-in presentations ----

    fn eij(n: usize, i: usize, j: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        m[(i, j)] = 1.0;
        m
    }

    /// sl(2,R) with basis a = diag(1,-1), u = E21, v = E12.
    pub fn sl2() -> Self {
        let a = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let u = Self::eij(2, 1, 0);
        let v = Self::eij(2, 0, 1);
        Self::from_matrices(vec!["a".into(), "u".into(), "v".into()], vec![a, u, v]).unwrap()
    }

    /// sl(3,R) with basis E12,E13,E23,E21,E31,E32,H1=diag(1,-1,0),H2=diag(0,1,-1).
    pub fn sl3() -> Self {
        let labels = ["E12", "E13", "E23", "E21", "E31", "E32", "H1", "H2"];
        let mats = vec![
            Self::eij(3, 0, 1),
            Self::eij(3, 0, 2),
            Self::eij(3, 1, 2),
            Self::eij(3, 1, 0),
            Self::eij(3, 2, 0),
            Self::eij(3, 2, 1),
            Mat::from_partial_diagonal(3, 3, &[1.0, -1.0, 0.0]),
            Mat::from_partial_diagonal(3, 3, &[0.0, 1.0, -1.0]),
        ];
        Self::from_matrices(labels.iter().map(|s| s.to_string()).collect(), mats).unwrap()
    }

    /// gl(3,R) = sl(3,R) + R I, the scalar-extended ambient used by the
    /// S-tilde worked examples.
    pub fn gl3() -> Self {
        let base = Self::sl3();
        let mut labels = base.labels.clone();
        labels.push("Z".into());
        let mut mats = base.mats.unwrap();
        mats.push(Mat::identity(3, 3));
        Self::from_matrices(labels, mats).unwrap()
    }

    /// sl(2,R) + sl(2,R) as block-diagonal 4x4 matrices.
    pub fn sl2_sl2() -> Self {
        let emb = |m: &Mat, hi: bool| -> Mat {
            let mut out = Mat::zeros(4, 4);
            let off = if hi { 2 } else { 0 };
            for i in 0..2 {
                for j in 0..2 {
                    out[(i + off, j + off)] = m[(i, j)];
                }
            }
            out
        };
        let s = Self::sl2();
        let sm = s.mats.as_ref().unwrap();
        let labels = vec!["a1", "u1", "v1", "a2", "u2", "v2"];
        let mats = vec![
            emb(&sm[0], false),
            emb(&sm[1], false),
            emb(&sm[2], false),
            emb(&sm[0], true),
            emb(&sm[1], true),
            emb(&sm[2], true),
        ];
        Self::from_matrices(labels.iter().map(|s| s.to_string()).collect(), mats).unwrap()
    }

    /// sl(2,R) + sl(2,R) + R I4, the scalar-extended product ambient.
    pub fn sl2_sl2_center() -> Self {
        let base = Self::sl2_sl2();
        let mut labels = base.labels.clone();
        labels.push("Z".into());
        let mut mats = base.mats.unwrap();
        mats.push(Mat::identity(4, 4));
        Self::from_matrices(labels, mats).unwrap()
    }

    /// Look up a built-in presentation by name.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "sl2" => Ok(Self::sl2()),
            "sl3" => Ok(Self::sl3()),
            "gl3" => Ok(Self::gl3()),
            "sl2sl2" => Ok(Self::sl2_sl2()),
            "sl2sl2z" => Ok(Self::sl2_sl2_center()),
            _ => Err(Error::InvalidInput(format!(
                "unknown algebra '{name}' (built-ins: sl2, sl3, gl3, sl2sl2, sl2sl2z)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightPair {
    pub weight: f64,
    pub basis: Vec<Coords>,
}

#[derive(Debug, Clone)]
pub struct WeightDecomposition {
    pub pairs: Vec<WeightPair>,
}

impl WeightDecomposition {
    pub fn total_dim(&self) -> usize {
        self.pairs.iter().map(|p| p.basis.len()).sum()
    }

    pub fn space(&self, weight: f64) -> Option<&WeightPair> {
        self.pairs.iter().find(|p| (p.weight - weight).abs() < 1e-9)
    }

    /// Worst projection residual of [g_l1, g_l2] outside g_{l1+l2}.
    pub fn grading_residual(&self, alg: &LieAlgebraPresentation) -> f64 {
        let mut worst = 0.0f64;
        for p1 in &self.pairs {
            for p2 in &self.pairs {
                let target = p1.weight + p2.weight;
                let tb: Vec<Coords> = self
                    .pairs
                    .iter()
                    .filter(|p| (p.weight - target).abs() < 1e-9)
                    .flat_map(|p| p.basis.iter().cloned())
                    .collect();
                for x in &p1.basis {
                    for y in &p2.basis {
                        let br = alg.bracket(x.as_slice(), y.as_slice());
                        let nb = br.norm();
                        if nb < 1e-14 {
                            continue;
                        }
                        let out = project_residual(&br, &tb);
                        worst = worst.max(out / nb.max(1.0));
                    }
                }
            }
        }
        worst
    }
}

/// Norm of the component of x orthogonal to span(basis).
pub fn project_residual(x: &Coords, basis: &[Coords]) -> f64 {
    if basis.is_empty() {
        return x.norm();
    }
    let d = x.len();
    let mut b = Mat::zeros(d, basis.len());
    for (j, v) in basis.iter().enumerate() {
        b.set_column(j, v);
    }
    let svd = b.clone().svd(true, false);
    let u = svd.u.as_ref().unwrap();
    let smax = svd.singular_values.max();
    let mut resid = x.clone();
    for j in 0..svd.singular_values.len() {
        if svd.singular_values[j] > 1e-12 * smax.max(1.0) {
            let col = u.column(j);
            let dot = col.dot(x);
            resid -= DVector::from_iterator(d, col.iter().map(|c| c * dot));
        }
    }
    resid.norm()
}

/// Eigen-decomposition of a real operator that is required to be
/// real-diagonalizable; eigenvalues are clustered within `ctol` and
/// optionally snapped to integers.
fn real_eigen_spaces(op: &Mat, snap_int: bool) -> Result<Vec<(f64, Vec<Coords>)>> {
    let d = op.nrows();
    let eigs = crate::mat::complex_eigs(op)
        .ok_or_else(|| Error::Numerical("eigenvalue iteration did not converge".into()))?;
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    for z in eigs.iter() {
        if z.im.abs() > tol::WEIGHT_SNAP * scale {
            return Err(Error::NotRealDiagonalizable(format!(
                "complex eigenvalue {:.6} + {:.6}i",
                z.re, z.im
            )));
        }
    }
    let vals: Vec<f64> = eigs.iter().map(|z| z.re).collect();
    let clusters = cluster_1d(vals, tol::WEIGHT_SNAP * scale);
    let mut out = Vec::new();
    let mut total = 0usize;
    for (c, count) in clusters {
        let lam = if snap_int && (c - c.round()).abs() <= tol::WEIGHT_SNAP {
            c.round()
        } else {
            c
        };
        let shifted = op - Mat::identity(d, d) * lam;
        let mut kb = kernel_basis(&shifted, 1e-7);
        if kb.len() < count {
            return Err(Error::NotRealDiagonalizable(format!(
                "defective eigenvalue {lam:.6}: multiplicity {count}, eigenspace {}",
                kb.len()
            )));
        }
        kb.truncate(count);
        total += count;
        out.push((lam, kb));
    }
    if total != d {
        return Err(Error::NotRealDiagonalizable(format!(
            "eigenspaces span {total} of {d} dimensions"
        )));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}

/// Weight-space decomposition of the algebra under x -> [x, a].
pub fn weight_decomposition(alg: &LieAlgebraPresentation, a: &[f64]) -> Result<WeightDecomposition> {
    if a.len() != alg.dim() {
        return Err(Error::InvalidInput("coordinate length mismatch".into()));
    }
    let ad = alg.ad_right(a);
    let spaces = real_eigen_spaces(&ad, true)?;
    Ok(WeightDecomposition {
        pairs: spaces
            .into_iter()
            .map(|(weight, basis)| WeightPair { weight, basis })
            .collect(),
    })
}

#[derive(Debug, Clone)]
pub struct SubalgebraBasis {
    pub basis: Vec<Coords>,
}

impl SubalgebraBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Worst relative projection residual of pairwise brackets outside the
    /// span (bracket-closure check).
    pub fn closure_residual(&self, alg: &LieAlgebraPresentation) -> f64 {
        let mut worst = 0.0f64;
        for x in &self.basis {
            for y in &self.basis {
                let br = alg.bracket(x.as_slice(), y.as_slice());
                let nb = br.norm();
                if nb < 1e-14 {
                    continue;
                }
                worst = worst.max(project_residual(&br, &self.basis) / nb.max(1.0));
            }
        }
        worst
    }

    pub fn contains_residual(&self, x: &Coords) -> f64 {
        project_residual(x, &self.basis) / x.norm().max(1e-300)
    }
}

/// Span of the eigenspaces of Ad g with |eigenvalue| > 1 (the expanding
/// horospherical subalgebra). Requires Ad g real-diagonalizable.
pub fn horospherical_subalgebra(
    alg: &LieAlgebraPresentation,
    g: &Mat,
) -> Result<SubalgebraBasis> {
    let ad = alg.ad_group(g)?;
    let spaces = real_eigen_spaces(&ad, false)?;
    let mut basis = Vec::new();
    for (lam, vecs) in spaces {
        if lam.abs() > 1.0 + tol::WEIGHT_SNAP {
            basis.extend(vecs);
        }
    }
    Ok(SubalgebraBasis { basis })
}

/// log J(g, W) = sum of log |lambda| over the spectrum of Ad g restricted to
/// the invariant subspace spanned by W.
pub fn log_jacobian(alg: &LieAlgebraPresentation, g: &Mat, w: &SubalgebraBasis) -> Result<f64> {
    if w.basis.is_empty() {
        return Ok(0.0);
    }
    let ad = alg.ad_group(g)?;
    let d = alg.dim();
    let m = w.basis.len();
    let mut b = Mat::zeros(d, m);
    for (j, v) in w.basis.iter().enumerate() {
        b.set_column(j, v);
    }
    let image = &ad * &b;
    // residual of the image outside span(W)
    for j in 0..m {
        let col: Coords = image.column(j).into();
        let r = project_residual(&col, &w.basis) / col.norm().max(1.0);
        if r > 1e-8 {
            return Err(Error::NotInvariant(format!(
                "Ad g moves basis vector {j} off the span, residual {r:.3e}"
            )));
        }
    }
    // restriction in the W coordinates, via least squares
    let svd = b.clone().svd(true, true);
    let restr = svd.solve(&image, 1e-12).map_err(|e| Error::Numerical(e.to_string()))?;
    let eigs = crate::mat::complex_eigs(&restr)
        .ok_or_else(|| Error::Numerical("eigenvalue iteration did not converge".into()))?;
    let mut sum = 0.0;
    for z in eigs.iter() {
        let n = z.norm();
        if n < 1e-300 {
            return Err(Error::Numerical("restricted adjoint is singular".into()));
        }
        sum += n.ln();
    }
    Ok(sum)
}

/// One irreducible chain of an sl(2)-module: highest weight lambda and the
/// adapted basis w_j, j = lambda, lambda-1, ..., 0 (stored top first).
#[derive(Debug, Clone)]
pub struct Sl2Chain {
    pub lambda: usize,
    pub vectors: Vec<Coords>,
}

/// Decompose a right sl(2)-action (operators R_a, R_u, R_v on column vectors
/// with R_[x,y] = [R_y, R_x]) into irreducible chains. Verifies the bracket
/// relations [R_a,R_u] = 2R_u, [R_a,R_v] = -2R_v, [R_u,R_v] = R_a first.
pub fn sl2_module_structure(ra: &Mat, ru: &Mat, rv: &Mat) -> Result<Vec<Sl2Chain>> {
    let m = ra.nrows();
    if ru.nrows() != m || rv.nrows() != m || ra.ncols() != m || ru.ncols() != m || rv.ncols() != m {
        return Err(Error::InvalidInput("operators must be square of equal size".into()));
    }
    let comm = |x: &Mat, y: &Mat| x * y - y * x;
    let scale = max_norm(ra).max(max_norm(ru)).max(max_norm(rv)).max(1.0);
    let r1 = max_norm(&(comm(ra, ru) - ru * 2.0));
    let r2 = max_norm(&(comm(ra, rv) + rv * 2.0));
    let r3 = max_norm(&(comm(ru, rv) - ra));
    let worst = r1.max(r2).max(r3) / scale;
    if worst > 1e-8 {
        return Err(Error::NotAnSl2Module(format!(
            "bracket relations violated, residual {worst:.3e}"
        )));
    }

    // highest vectors live in ker R_u; R_a restricted there carries the
    // highest weights
    let kb = kernel_basis(ru, 1e-8);
    if kb.is_empty() {
        return Err(Error::NotAnSl2Module("no highest-weight vectors found".into()));
    }
    let r = kb.len();
    let mut k = Mat::zeros(m, r);
    for (j, v) in kb.iter().enumerate() {
        k.set_column(j, v);
    }
    let ak = ra * &k;
    let svd = k.clone().svd(true, true);
    let restr = svd.solve(&ak, 1e-12).map_err(|e| Error::Numerical(e.to_string()))?;
    let spaces = real_eigen_spaces(&restr, true)
        .map_err(|e| Error::NotAnSl2Module(format!("highest weights not diagonalizable: {e}")))?;

    let mut chains = Vec::new();
    let mut total = 0usize;
    for (lam, vecs) in spaces {
        if lam < -1e-6 || (lam - lam.round()).abs() > 1e-6 {
            return Err(Error::NotAnSl2Module(format!(
                "highest weight {lam:.6} is not a nonnegative integer"
            )));
        }
        let lambda = lam.round() as usize;
        for y in vecs {
            let mut w: Coords = &k * y;
            w /= w.norm();
            let mut chain = vec![w.clone()];
            for j in (1..=lambda).rev() {
                let next: Coords = rv * chain.last().unwrap() / j as f64;
                chain.push(next);
            }
            total += lambda + 1;
            chains.push(Sl2Chain { lambda, vectors: chain });
        }
    }
    if total != m {
        return Err(Error::NotAnSl2Module(format!(
            "chain lengths sum to {total}, expected {m}"
        )));
    }

    // verify all three relations on the produced basis
    let resid = sl2_relations_residual(ra, ru, rv, &chains);
    if resid > 1e-8 {
        return Err(Error::NotAnSl2Module(format!(
            "adapted basis fails the module relations, residual {resid:.3e}"
        )));
    }
    Ok(chains)
}

/// Max residual of the three defining relations over an adapted basis.
pub fn sl2_relations_residual(ra: &Mat, ru: &Mat, rv: &Mat, chains: &[Sl2Chain]) -> f64 {
    let mut worst = 0.0f64;
    for ch in chains {
        let lam = ch.lambda as f64;
        // vectors stored j = lambda down to 0
        for (idx, w) in ch.vectors.iter().enumerate() {
            let j = lam - idx as f64;
            let r_a: Coords = ra * w - w * (2.0 * j - lam);
            worst = worst.max(r_a.norm());
            let up: Coords = if idx == 0 {
                ru * w
            } else {
                ru * w - &ch.vectors[idx - 1] * (lam - j)
            };
            worst = worst.max(up.norm());
            let down: Coords = if idx + 1 < ch.vectors.len() {
                rv * w - &ch.vectors[idx + 1] * j
            } else {
                rv * w
            };
            worst = worst.max(down.norm());
        }
    }
    worst
}

/// Membership residual of the S-tilde test for a single vector: the worst
/// relative projection of x (ad u_b)^k outside g_- + g_0 + U, over k up to
/// the ambient dimension and u_b in the given basis of U.
pub fn s_tilde_membership_residual(
    alg: &LieAlgebraPresentation,
    weights: &WeightDecomposition,
    u_basis: &[Coords],
    x: &Coords,
) -> f64 {
    let mut target: Vec<Coords> = Vec::new();
    for p in &weights.pairs {
        if p.weight <= 1e-9 {
            target.extend(p.basis.iter().cloned());
        }
    }
    target.extend(u_basis.iter().cloned());
    let kmax = alg.dim();
    let mut worst = 0.0f64;
    for ub in u_basis {
        let mut cur = x.clone();
        // once the chain drops this far below its peak it is cancellation
        // noise, not an honest iterate
        let mut peak = cur.norm();
        for _k in 0..=kmax {
            let n = cur.norm();
            if n <= 1e-12 * peak {
                break;
            }
            peak = peak.max(n);
            worst = worst.max(project_residual(&cur, &target) / n);
            cur = alg.bracket(cur.as_slice(), ub.as_slice());
        }
    }
    worst
}

/// The S-tilde subalgebra: the largest ad a-invariant subspace whose
/// elements satisfy x (ad u)^k in g_- + g_0 + U for every k up to dim g and
/// every u in the given basis of U. Returns a weight-aligned basis whose
/// positive-weight part is exactly the span of U.
pub fn compute_s_tilde(
    alg: &LieAlgebraPresentation,
    a: &[f64],
    u_basis: &[Coords],
) -> Result<SubalgebraBasis> {
    if u_basis.is_empty() {
        return Err(Error::InvalidInput("U must be nonzero".into()));
    }
    let weights = weight_decomposition(alg, a)?;
    let d = alg.dim();

    // preconditions: U inside the positive part and ad a-invariant
    let positive: Vec<Coords> = weights
        .pairs
        .iter()
        .filter(|p| p.weight > 1e-9)
        .flat_map(|p| p.basis.iter().cloned())
        .collect();
    for ub in u_basis {
        let r = project_residual(ub, &positive) / ub.norm().max(1e-300);
        if r > tol::STILDE {
            return Err(Error::InvalidInput(format!(
                "U is not contained in the positive-weight part, residual {r:.3e}"
            )));
        }
        let br = alg.bracket(ub.as_slice(), a);
        if br.norm() > 1e-14 {
            let r = project_residual(&br, u_basis) / br.norm();
            if r > tol::STILDE {
                return Err(Error::InvalidInput(format!(
                    "U is not ad a-invariant, residual {r:.3e}"
                )));
            }
        }
    }

    // target space g_- + g_0 + U and its orthogonal complement projector
    let mut target: Vec<Coords> = Vec::new();
    for p in &weights.pairs {
        if p.weight <= 1e-9 {
            target.extend(p.basis.iter().cloned());
        }
    }
    target.extend(u_basis.iter().cloned());

    let tm = {
        let mut t = Mat::zeros(d, target.len());
        for (j, v) in target.iter().enumerate() {
            t.set_column(j, v);
        }
        t
    };
    let svd = tm.clone().svd(true, false);
    let uq = svd.u.as_ref().unwrap();
    let smax = svd.singular_values.max();
    let rank_cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] > 1e-12 * smax.max(1.0))
        .collect();
    let project_out = |x: &Coords| -> Coords {
        let mut r = x.clone();
        for &j in &rank_cols {
            let col = uq.column(j);
            let dot = col.dot(&r);
            r -= DVector::from_iterator(d, col.iter().map(|c| c * dot));
        }
        r
    };

    let ad_us: Vec<Mat> = u_basis.iter().map(|ub| alg.ad_right(ub.as_slice())).collect();

    // per non-positive weight space, the joint kernel of all truncation maps
    let mut basis: Vec<Coords> = Vec::new();
    for p in &weights.pairs {
        if p.weight > 1e-9 {
            continue;
        }
        let dl = p.basis.len();
        let mut wl = Mat::zeros(d, dl);
        for (j, v) in p.basis.iter().enumerate() {
            wl.set_column(j, v);
        }
        // stack P_out (ad u)^k W_lambda for k = 1..dim
        let mut rows: Vec<Mat> = Vec::new();
        for adu in &ad_us {
            let mut cur = wl.clone();
            for _k in 1..=d {
                cur = adu * cur;
                let mut proj = Mat::zeros(d, dl);
                for j in 0..dl {
                    let col: Coords = cur.column(j).into();
                    proj.set_column(j, &project_out(&col));
                }
                rows.push(proj);
            }
        }
        let stacked = {
            let mut s = Mat::zeros(d * rows.len(), dl);
            for (bi, blk) in rows.iter().enumerate() {
                for i in 0..d {
                    for j in 0..dl {
                        s[(bi * d + i, j)] = blk[(i, j)];
                    }
                }
            }
            s
        };
        let ker = kernel_basis(&stacked, 1e-8);
        for y in ker {
            let mut v: Coords = &wl * y;
            let n = v.norm();
            if n > 1e-12 {
                v /= n;
                basis.push(v);
            }
        }
    }
    // the positive-weight part of S-tilde is exactly U
    basis.extend(u_basis.iter().cloned());

    Ok(SubalgebraBasis { basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{a_mat, mat2, u_mat};

    fn vecf(v: &[f64]) -> Coords {
        DVector::from_vec(v.to_vec())
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_sl2(&u_mat(3.0)).unwrap(), Sl2Class::Unipotent);
        assert_eq!(classify_sl2(&a_mat(1.0)).unwrap(), Sl2Class::Hyperbolic);
        let th = std::f64::consts::PI / 3.0;
        let rot = mat2(th.cos(), th.sin(), -th.sin(), th.cos());
        assert_eq!(classify_sl2(&rot).unwrap(), Sl2Class::Elliptic);
        assert_eq!(classify_sl2(&Mat::identity(2, 2)).unwrap(), Sl2Class::IdentityLike);
        assert_eq!(
            classify_sl2(&(Mat::identity(2, 2) * -1.0)).unwrap(),
            Sl2Class::IdentityLike
        );
        let neg = mat2(-2.0, -1.0, -1.0, -1.0); // det = 2 - 1 = 1, trace -3
        assert_eq!(classify_sl2(&neg).unwrap(), Sl2Class::NoneOfThese);
        assert!(classify_sl2(&mat2(2.0, 0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn jordan_identity_and_unipotent() {
        let id = Mat::identity(2, 2);
        let t = real_jordan_decompose(&id).unwrap();
        assert!(max_norm(&(&t.unip - &id)) < 1e-12);
        assert!(max_norm(&(&t.hyp - &id)) < 1e-12);
        assert!(max_norm(&(&t.ell - &id)) < 1e-12);

        let g = u_mat(1.7);
        let t = real_jordan_decompose(&g).unwrap();
        assert!(max_norm(&(&t.unip - &g)) < 1e-10);
        assert!(max_norm(&(&t.hyp - &id)) < 1e-10);
        assert!(max_norm(&(&t.ell - &id)) < 1e-10);
    }

    #[test]
    fn jordan_hyperbolic_example() {
        // eigenvalues (3 +- sqrt 5)/2, real positive distinct
        let g = mat2(2.0, 1.0, 1.0, 1.0);
        let t = real_jordan_decompose(&g).unwrap();
        let id = Mat::identity(2, 2);
        assert!(max_norm(&(&t.unip - &id)) < 1e-9);
        assert!(max_norm(&(&t.hyp - &g)) < 1e-9);
        assert!(max_norm(&(&t.ell - &id)) < 1e-9);
        assert!(t.reconstruction_residual(&g) < 1e-12);
    }

    #[test]
    fn jordan_mixed_negative_unipotent() {
        // -I times a unipotent: semisimple part -I, elliptic -I, hyp I
        let g = mat2(-1.0, 1.0, 0.0, -1.0);
        let t = real_jordan_decompose(&g).unwrap();
        assert!(max_norm(&(&t.unip - mat2(1.0, -1.0, 0.0, 1.0))) < 1e-10);
        assert!(max_norm(&(&t.hyp - Mat::identity(2, 2))) < 1e-10);
        assert!(max_norm(&(&t.ell + Mat::identity(2, 2))) < 1e-10);
    }

    #[test]
    fn jordan_rotation_scales() {
        // r * rotation: hyperbolic part r I, elliptic part the rotation
        let r: f64 = 1.5;
        let th: f64 = 0.7;
        let g = mat2(
            r * th.cos(),
            r * th.sin(),
            -r * th.sin(),
            r * th.cos(),
        );
        let t = real_jordan_decompose(&g).unwrap();
        assert!(max_norm(&(&t.hyp - Mat::identity(2, 2) * r)) < 1e-9);
        assert!(t.reconstruction_residual(&g) < 1e-11);
        assert!(t.commutation_residual(&g) < 1e-11);
    }

    #[test]
    fn jordan_idempotence_on_components() {
        let g = mat2(2.0, 1.0, 1.0, 1.0);
        let t = real_jordan_decompose(&g).unwrap();
        let t2 = real_jordan_decompose(&t.hyp).unwrap();
        let id = Mat::identity(2, 2);
        assert!(max_norm(&(&t2.unip - &id)) < 1e-9);
        assert!(max_norm(&(&t2.hyp - &t.hyp)) < 1e-9);
        assert!(max_norm(&(&t2.ell - &id)) < 1e-9);
    }

    #[test]
    fn log_exp_roundtrip() {
        let g = u_mat(2.5);
        let l = nilpotent_log(&g).unwrap();
        assert!(max_norm(&(&l - mat2(0.0, 0.0, 2.5, 0.0))) < 1e-12);
        assert!(max_norm(&(unipotent_exp(&l).unwrap() - &g)) < 1e-10);

        let x = Mat::zeros(3, 3);
        assert!(max_norm(&(unipotent_exp(&x).unwrap() - Mat::identity(3, 3))) < 1e-15);

        // random strictly lower-triangular perturbation of I in 3x3
        let mut m = Mat::identity(3, 3);
        m[(1, 0)] = 0.3;
        m[(2, 0)] = -1.2;
        m[(2, 1)] = 0.9;
        let l = nilpotent_log(&m).unwrap();
        assert!(max_norm(&(unipotent_exp(&l).unwrap() - &m)) < 1e-10);

        assert!(nilpotent_log(&a_mat(1.0)).is_err());
    }

    #[test]
    fn builtin_algebras_are_consistent() {
        for name in ["sl2", "sl3", "gl3", "sl2sl2", "sl2sl2z"] {
            let alg = LieAlgebraPresentation::builtin(name).unwrap();
            assert!(alg.antisymmetry_residual() < 1e-12, "{name}");
            assert!(alg.jacobi_residual() < 1e-10, "{name}");
        }
    }

    #[test]
    fn sl2_weights() {
        let alg = LieAlgebraPresentation::sl2();
        let w = weight_decomposition(&alg, &[1.0, 0.0, 0.0]).unwrap();
        let mut weights: Vec<(f64, usize)> =
            w.pairs.iter().map(|p| (p.weight, p.basis.len())).collect();
        weights.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(weights, vec![(-2.0, 1), (0.0, 1), (2.0, 1)]);
        // u = e_2 carries weight +2 under x -> [x, a]
        let p = w.space(2.0).unwrap();
        assert!((p.basis[0][1].abs() - 1.0).abs() < 1e-9);
        assert!(w.grading_residual(&alg) < 1e-9);
    }

    #[test]
    fn sl3_weights() {
        let alg = LieAlgebraPresentation::sl3();
        // a = diag(1,0,-1) = H1 + H2 in the built-in basis
        let mut a = vec![0.0; 8];
        a[6] = 1.0;
        a[7] = 1.0;
        let w = weight_decomposition(&alg, &a).unwrap();
        let mut weights: Vec<(f64, usize)> =
            w.pairs.iter().map(|p| (p.weight, p.basis.len())).collect();
        weights.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(
            weights,
            vec![(-2.0, 1), (-1.0, 2), (0.0, 2), (1.0, 2), (2.0, 1)]
        );
        assert!(w.grading_residual(&alg) < 1e-9);
    }

    #[test]
    fn abelian_single_weight() {
        // 2-dim abelian algebra from a structure file of zeros
        let alg = LieAlgebraPresentation::from_structure_text("1 2 1 0\n1 2 2 0\n").unwrap();
        let w = weight_decomposition(&alg, &[1.0, 0.5]).unwrap();
        assert_eq!(w.pairs.len(), 1);
        assert_eq!(w.pairs[0].weight, 0.0);
        assert_eq!(w.pairs[0].basis.len(), 2);
    }

    #[test]
    fn horospherical_sl2_and_sl3() {
        let alg = LieAlgebraPresentation::sl2();
        let h = horospherical_subalgebra(&alg, &a_mat(0.5)).unwrap();
        assert_eq!(h.dim(), 1);
        // the u direction is e_2
        assert!((h.basis[0][1].abs() - 1.0).abs() < 1e-8);

        let h = horospherical_subalgebra(&alg, &Mat::identity(2, 2)).unwrap();
        assert_eq!(h.dim(), 0);

        let alg3 = LieAlgebraPresentation::sl3();
        let g = Mat::from_partial_diagonal(3, 3, &[1f64.exp(), 1.0, (-1f64).exp()]);
        let h = horospherical_subalgebra(&alg3, &g).unwrap();
        assert_eq!(h.dim(), 3);
        // all three expanding directions are strictly lower-triangular
        for v in &h.basis {
            let m = alg3.matrix_of(v.as_slice()).unwrap();
            for i in 0..3 {
                for j in i..3 {
                    assert!(m[(i, j)].abs() < 1e-8);
                }
            }
        }
        assert!(h.closure_residual(&alg3) < 1e-9);
    }

    #[test]
    fn horospherical_rejects_unipotent() {
        let alg = LieAlgebraPresentation::sl2();
        assert!(matches!(
            horospherical_subalgebra(&alg, &u_mat(1.0)),
            Err(Error::NotRealDiagonalizable(_))
        ));
    }

    #[test]
    fn log_jacobian_values() {
        let alg = LieAlgebraPresentation::sl2();
        for s in [0.1, 1.0, 3.0] {
            let w = horospherical_subalgebra(&alg, &a_mat(s)).unwrap();
            let j = log_jacobian(&alg, &a_mat(s), &w).unwrap();
            assert!((j - 2.0 * s).abs() < 1e-9, "s = {s}: {j}");
            // inverse on the same invariant subspace negates
            let jinv = log_jacobian(&alg, &a_mat(-s), &w).unwrap();
            assert!((j + jinv).abs() < 1e-9);
        }
        // unipotent g on an invariant subalgebra: the whole algebra is
        // invariant and the Jacobian vanishes
        let full = SubalgebraBasis {
            basis: (0..3)
                .map(|i| DVector::from_fn(3, |r, _| if r == i { 1.0 } else { 0.0 }))
                .collect(),
        };
        let j = log_jacobian(&alg, &u_mat(2.0), &full).unwrap();
        assert!(j.abs() < 1e-9);
        assert!(log_jacobian(&alg, &a_mat(1.0), &SubalgebraBasis { basis: vec![] }).unwrap() == 0.0);
        // non-invariant subspace is rejected: span{v} under a^s is invariant,
        // but span{a + u} is not
        let w = SubalgebraBasis { basis: vec![vecf(&[1.0, 1.0, 0.0])] };
        assert!(matches!(
            log_jacobian(&alg, &a_mat(1.0), &w),
            Err(Error::NotInvariant(_))
        ));
    }

    #[test]
    fn sl2_module_adjoint_and_standard() {
        let alg = LieAlgebraPresentation::sl2();
        let e = |i: usize| -> Vec<f64> {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        // right adjoint operators on coordinates
        let ra = alg.ad_right(&e(0));
        let ru = alg.ad_right(&e(1));
        let rv = alg.ad_right(&e(2));
        let chains = sl2_module_structure(&ra, &ru, &rv).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].lambda, 2);

        // standard representation: right action via transposes
        let m = alg.mats.as_ref().unwrap();
        let chains =
            sl2_module_structure(&m[0].transpose(), &m[1].transpose(), &m[2].transpose()).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].lambda, 1);

        // zero action on R^2
        let z = Mat::zeros(2, 2);
        let chains = sl2_module_structure(&z, &z, &z).unwrap();
        let mut ls: Vec<usize> = chains.iter().map(|c| c.lambda).collect();
        ls.sort();
        assert_eq!(ls, vec![0, 0]);

        // broken brackets rejected
        assert!(sl2_module_structure(&ra, &ru, &ru).is_err());
    }

    fn unit(d: usize, i: usize) -> Coords {
        DVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn s_tilde_full_when_u_is_all_positive() {
        let alg = LieAlgebraPresentation::sl2();
        let a = [1.0, 0.0, 0.0];
        let st = compute_s_tilde(&alg, &a, &[unit(3, 1)]).unwrap();
        assert_eq!(st.dim(), 3);
        assert!(st.closure_residual(&alg) < 1e-9);
    }

    #[test]
    fn s_tilde_sl3_corner() {
        // gl(3), a = diag(1,0,-1), U = R E31: dim 5
        let alg = LieAlgebraPresentation::gl3();
        let a_m = Mat::from_partial_diagonal(3, 3, &[1.0, 0.0, -1.0]);
        let a = alg.coords_of(&a_m).unwrap();
        let u = alg.coords_of(&LieAlgebraPresentation::eij(3, 2, 0)).unwrap();
        let st = compute_s_tilde(&alg, a.as_slice(), &[u.clone()]).unwrap();
        assert_eq!(st.dim(), 5);
        assert!(st.closure_residual(&alg) < 1e-9);
        // membership residuals
        let w = weight_decomposition(&alg, a.as_slice()).unwrap();
        for v in &st.basis {
            assert!(s_tilde_membership_residual(&alg, &w, &[u.clone()], v) < tol::STILDE);
        }
        // every returned vector realizes the printed pattern: zero at
        // positions (1,2), (2,1), (2,3), (3,2)
        for v in &st.basis {
            let m = alg.matrix_of(v.as_slice()).unwrap();
            for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
                assert!(m[(i, j)].abs() < 1e-8);
            }
        }
        // excluded weight vector fails the test
        let e12 = alg.coords_of(&LieAlgebraPresentation::eij(3, 0, 1)).unwrap();
        assert!(s_tilde_membership_residual(&alg, &w, &[u], &e12) > 1e-3);
    }

    #[test]
    fn s_tilde_sl3_two_dim_u() {
        // gl(3), a = diag(1,0,-1), U = span{E21, E31}: dim 7
        let alg = LieAlgebraPresentation::gl3();
        let a_m = Mat::from_partial_diagonal(3, 3, &[1.0, 0.0, -1.0]);
        let a = alg.coords_of(&a_m).unwrap();
        let u1 = alg.coords_of(&LieAlgebraPresentation::eij(3, 1, 0)).unwrap();
        let u2 = alg.coords_of(&LieAlgebraPresentation::eij(3, 2, 0)).unwrap();
        let st = compute_s_tilde(&alg, a.as_slice(), &[u1, u2]).unwrap();
        assert_eq!(st.dim(), 7);
        assert!(st.closure_residual(&alg) < 1e-9);
        for v in &st.basis {
            let m = alg.matrix_of(v.as_slice()).unwrap();
            for (i, j) in [(0, 1), (2, 1)] {
                assert!(m[(i, j)].abs() < 1e-8, "pattern violated: {m}");
            }
        }
    }

    #[test]
    fn s_tilde_principal_nilpotent() {
        // gl(3), a = diag(2,0,-2), U = R(E21+E32): dim 4
        let alg = LieAlgebraPresentation::gl3();
        let a_m = Mat::from_partial_diagonal(3, 3, &[2.0, 0.0, -2.0]);
        let a = alg.coords_of(&a_m).unwrap();
        let u_m = LieAlgebraPresentation::eij(3, 1, 0) + LieAlgebraPresentation::eij(3, 2, 1);
        let u = alg.coords_of(&u_m).unwrap();
        let st = compute_s_tilde(&alg, a.as_slice(), &[u.clone()]).unwrap();
        assert_eq!(st.dim(), 4);
        assert!(st.closure_residual(&alg) < 1e-9);
        let w = weight_decomposition(&alg, a.as_slice()).unwrap();
        for v in &st.basis {
            assert!(s_tilde_membership_residual(&alg, &w, &[u.clone()], v) < tol::STILDE);
        }
        // E13 passes k = 1, 2 but fails at k = 3
        let e13 = alg.coords_of(&LieAlgebraPresentation::eij(3, 0, 2)).unwrap();
        assert!(s_tilde_membership_residual(&alg, &w, &[u], &e13) > 1e-3);
    }

    #[test]
    fn s_tilde_product_diagonal() {
        // (sl2 + sl2) + R I, joint a, U = R(u,u): dim 4
        let alg = LieAlgebraPresentation::sl2_sl2_center();
        let d = alg.dim();
        let mut a = vec![0.0; d];
        a[0] = 1.0;
        a[3] = 1.0;
        let mut u = DVector::zeros(d);
        u[1] = 1.0;
        u[4] = 1.0;
        let st = compute_s_tilde(&alg, &a, &[u.clone()]).unwrap();
        assert_eq!(st.dim(), 4);
        assert!(st.closure_residual(&alg) < 1e-9);
        // v-part must be the diagonal line R(v,v)
        let w = weight_decomposition(&alg, &a).unwrap();
        let mut vdiag = DVector::zeros(d);
        vdiag[2] = 1.0;
        vdiag[5] = 1.0;
        vdiag /= vdiag.norm();
        assert!(st.contains_residual(&vdiag) < 1e-8);
        let mut vanti = DVector::zeros(d);
        vanti[2] = 1.0;
        vanti[5] = -1.0;
        assert!(s_tilde_membership_residual(&alg, &w, &[u], &vanti) > 1e-3);
    }

    #[test]
    fn s_tilde_rejects_bad_u() {
        let alg = LieAlgebraPresentation::sl2();
        let a = [1.0, 0.0, 0.0];
        // v has negative weight: not inside the positive part
        assert!(compute_s_tilde(&alg, &a, &[unit(3, 2)]).is_err());
    }

    #[test]
    fn structure_file_roundtrip() {
        // sl2 as a structure file: [a,u] = -2u ... using 1-based indices
        // basis e1 = a, e2 = u, e3 = v; [u,a] = 2u, [v,a] = -2v, [v,u] = a
        let text = "2 1 2 2\n3 1 3 -2\n3 2 1 1\n";
        let alg = LieAlgebraPresentation::from_structure_text(text).unwrap();
        assert_eq!(alg.dim(), 3);
        let w = weight_decomposition(&alg, &[1.0, 0.0, 0.0]).unwrap();
        let mut ws: Vec<f64> = w.pairs.iter().map(|p| p.weight).collect();
        ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(ws, vec![-2.0, 0.0, 2.0]);
        // matches the built-in's constants
        let b = LieAlgebraPresentation::sl2();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!((alg.c_at(i, j, k) - b.c_at(i, j, k)).abs() < 1e-12);
                }
            }
        }
    }
}
