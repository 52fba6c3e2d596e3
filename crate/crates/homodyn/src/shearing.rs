//! Exact conjugation-displacement formulas for the unipotent and geodesic
//! flows, fastest-divergence analysis, the polynomial proportional-extension
//! property, and SL(2) x SL(2) joint transverse divergence.

use crate::error::{Error, Result};
use crate::mat::{check_det1_2x2, mat2, Mat};
use crate::poly;

/// The four entries of u^{-t} q u^{t} - I as polynomials in t (degree <= 2),
/// coefficients stored ascending: e[i][j] = [c0, c1, c2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementPolynomial {
    pub e: [[[f64; 3]; 2]; 2],
}

impl DisplacementPolynomial {
    pub fn eval(&self, t: f64) -> Mat {
        let ev = |c: &[f64; 3]| c[0] + t * (c[1] + t * c[2]);
        mat2(
            ev(&self.e[0][0]),
            ev(&self.e[0][1]),
            ev(&self.e[1][0]),
            ev(&self.e[1][1]),
        )
    }

    pub fn max_entry_at(&self, t: f64) -> f64 {
        self.eval(t).iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn is_constant(&self) -> bool {
        self.e
            .iter()
            .flatten()
            .all(|c| c[1] == 0.0 && c[2] == 0.0)
    }
}

/// Entry polynomials of u^{-t} q u^{t} - I: with q - I = [[a,b],[c,d]],
/// the result is [a + bt, b; c - (a-d)t - bt^2, d - bt].
pub fn unipotent_displacement(q: &Mat) -> Result<DisplacementPolynomial> {
    check_det1_2x2(q, 1e-9)?;
    let a = q[(0, 0)] - 1.0;
    let b = q[(0, 1)];
    let c = q[(1, 0)];
    let d = q[(1, 1)] - 1.0;
    Ok(DisplacementPolynomial {
        e: [
            [[a, b, 0.0], [b, 0.0, 0.0]],
            [[c, -(a - d), -b], [d, -b, 0.0]],
        ],
    })
}

/// a^{-t} q a^{t} - I = [[a, b e^{-2t}],[c e^{2t}, d]] with
/// q - I = [[a,b],[c,d]].
pub fn geodesic_displacement(q: &Mat, t: f64) -> Result<Mat> {
    check_det1_2x2(q, 1e-9)?;
    if !t.is_finite() || t.abs() > 300.0 {
        return Err(Error::MagnitudeOverflow);
    }
    Ok(mat2(
        q[(0, 0)] - 1.0,
        q[(0, 1)] * (-2.0 * t).exp(),
        q[(1, 0)] * (2.0 * t).exp(),
        q[(1, 1)] - 1.0,
    ))
}

fn quadratic_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    if c2.abs() < 1e-300 {
        if c1.abs() < 1e-300 {
            return Vec::new();
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Vec::new();
    }
    let sd = disc.sqrt();
    let qq = -0.5 * (c1 + c1.signum() * sd);
    if qq.abs() < 1e-300 {
        // c1 ~ 0 and disc ~ 0: double root at 0 shifted
        return vec![0.0 - c1 / (2.0 * c2)];
    }
    vec![qq / c2, c0 / qq]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstDivergence {
    pub t_star: f64,
    /// 1-based entry position of the dominant (threshold-achieving) entry.
    pub row: usize,
    pub col: usize,
}

/// Smallest t >= 0 at which some entry of the displacement reaches L in
/// absolute value, with the entry that achieves it. Ties go to the entry
/// largest in magnitude at t*, row-major on exact ties.
pub fn first_divergence(d: &DisplacementPolynomial, l: f64) -> Result<FirstDivergence> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidInput("threshold must be positive".into()));
    }
    if d.max_entry_at(0.0) >= l {
        return Err(Error::InvalidInput(
            "threshold must exceed the displacement at t = 0".into(),
        ));
    }
    let mut t_star = f64::INFINITY;
    for i in 0..2 {
        for j in 0..2 {
            let c = d.e[i][j];
            for target in [l, -l] {
                for r in quadratic_roots(c[2], c[1], c[0] - target) {
                    if r >= -1e-12 && r.max(0.0) < t_star {
                        t_star = r.max(0.0);
                    }
                }
            }
        }
    }
    if !t_star.is_finite() {
        return Err(Error::NoDivergence);
    }
    let m = d.eval(t_star);
    let mut best = (0usize, 0usize);
    let mut bv = -1.0f64;
    for i in 0..2 {
        for j in 0..2 {
            if m[(i, j)].abs() > bv {
                bv = m[(i, j)].abs();
                best = (i, j);
            }
        }
    }
    Ok(FirstDivergence {
        t_star,
        row: best.0 + 1,
        col: best.1 + 1,
    })
}

/// Largest eps such that sup of |f| over [k, k + (1+eps) l] stays within
/// (1+delta) times the sup over [k, k+l]. Infinite for (near-)constant f,
/// encoded as f64::INFINITY.
pub fn polynomial_extension_factor(f: &[f64], k: f64, l: f64, delta: f64) -> Result<f64> {
    if !(l > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidInput("need l > 0 and delta > 0".into()));
    }
    let c = poly::trim(f).to_vec();
    if c.len() > 9 {
        return Err(Error::InvalidInput(format!(
            "degree {} exceeds the supported bound 8",
            c.len() - 1
        )));
    }
    if c.len() <= 1 {
        return Ok(f64::INFINITY);
    }
    let sup = poly::sup_abs_on(&c, k, k + l);
    let bound = (1.0 + delta) * sup;
    let mut first = f64::INFINITY;
    for target in [bound, -bound] {
        let mut g = c.clone();
        g[0] -= target;
        for r in poly::real_roots(&g) {
            if r > k + l + 1e-12 && r < first {
                first = r;
            }
        }
    }
    if !first.is_finite() {
        // a nonconstant polynomial always breaks the bound eventually
        return Err(Error::Numerical(
            "failed to isolate the bound-crossing root".into(),
        ));
    }
    Ok((first - k) / l - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointVerdict {
    Diagonal,
    OffDiagonal,
}

/// Displacement pair for conjugating (v^{r1}, v^{r2}) by the diagonal
/// unipotent (u^t, u^t); the pair is asymptotically diagonal (equal leading
/// t^2 coefficients) exactly when r1 = r2.
pub fn joint_transverse_divergence(
    r1: f64,
    r2: f64,
) -> Result<(DisplacementPolynomial, DisplacementPolynomial, JointVerdict)> {
    let part = |r: f64| -> Result<DisplacementPolynomial> {
        unipotent_displacement(&mat2(1.0, r, 0.0, 1.0))
    };
    let d1 = part(r1)?;
    let d2 = part(r2)?;
    let verdict = if (r1 - r2).abs() <= crate::tol::JOINT_DIAG {
        JointVerdict::Diagonal
    } else {
        JointVerdict::OffDiagonal
    };
    Ok((d1, d2, verdict))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseCoords {
    pub beta: f64,
    pub alpha: f64,
    pub sigma: f64,
}

/// Coordinates of u^{-t} q u^{t} in the chart v^beta a^alpha u^sigma.
/// The pivot is the bottom-right entry of the conjugate (= e^{-alpha}),
/// which must be positive; it vanishes only on a measure-zero set.
pub fn transverse_component(q: &Mat, t: f64) -> Result<TransverseCoords> {
    check_det1_2x2(q, 1e-9)?;
    if !t.is_finite() {
        return Err(Error::InvalidInput("t must be finite".into()));
    }
    // full conjugate (not the displacement): entries of u^{-t} q u^t
    let a = q[(0, 0)];
    let b = q[(0, 1)];
    let c = q[(1, 0)];
    let dd = q[(1, 1)];
    let m12 = b;
    let m21 = c + (dd - a) * t - b * t * t;
    let m22 = dd - b * t;
    if m22 <= 1e-300 {
        return Err(Error::FactorizationUndefined);
    }
    Ok(TransverseCoords {
        beta: m12 / m22,
        alpha: -m22.ln(),
        sigma: m21 / m22,
    })
}

pub fn recompose_transverse(c: &TransverseCoords) -> Mat {
    let v = mat2(1.0, c.beta, 0.0, 1.0);
    let a = mat2(c.alpha.exp(), 0.0, 0.0, (-c.alpha).exp());
    let u = mat2(1.0, 0.0, c.sigma, 1.0);
    v * a * u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{a_mat, max_norm, u_mat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_unipotent(q: &Mat, t: f64) -> Mat {
        u_mat(-t) * q * u_mat(t) - Mat::identity(2, 2)
    }

    fn random_sl2(rng: &mut ChaCha8Rng, scale: f64) -> Mat {
        // perturbation of I with det renormalized to 1
        let mut q = Mat::identity(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                q[(i, j)] += scale * (rng.gen::<f64>() * 2.0 - 1.0);
            }
        }
        let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
        q / det.abs().sqrt()
    }

    #[test]
    fn unipotent_displacement_examples() {
        let d = unipotent_displacement(&u_mat(0.4)).unwrap();
        assert!(d.is_constant());
        assert!(max_norm(&(d.eval(7.0) - mat2(0.0, 0.0, 0.4, 0.0))) < 1e-15);

        let eps = 1e-3;
        let d = unipotent_displacement(&mat2(1.0, eps, 0.0, 1.0)).unwrap();
        assert_eq!(d.e[1][0], [0.0, 0.0, -eps]);
        assert_eq!(d.e[0][0], [0.0, eps, 0.0]);
        assert_eq!(d.e[1][1], [0.0, -eps, 0.0]);
        assert_eq!(d.e[0][1], [eps, 0.0, 0.0]);
    }

    #[test]
    fn closed_forms_match_direct_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let q = random_sl2(&mut rng, 0.5);
            let t = rng.gen::<f64>() * 8.0 - 4.0;
            let d = unipotent_displacement(&q).unwrap();
            let gap = max_norm(&(d.eval(t) - direct_unipotent(&q, t)));
            let qnorm = max_norm(&(&q - Mat::identity(2, 2)));
            assert!(gap <= 1e-12 * (1.0 + t.abs()).powi(2) * qnorm.max(1e-3), "gap {gap}");

            let g = geodesic_displacement(&q, t).unwrap();
            let direct = a_mat(-t) * &q * a_mat(t) - Mat::identity(2, 2);
            assert!(max_norm(&(g - direct)) < 1e-11 * (2.0 * t.abs()).exp());
        }
    }

    #[test]
    fn displacement_degree_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random_sl2(&mut rng, 0.3);
        // fit each entry through 5 samples of the direct product
        let ts = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let vals: Vec<Mat> = ts.iter().map(|t| direct_unipotent(&q, *t)).collect();
        let d = unipotent_displacement(&q).unwrap();
        let vmat = Mat::from_fn(5, 3, |r, c| ts[r].powi(c as i32));
        for i in 0..2 {
            for j in 0..2 {
                let rhs = nalgebra::DVector::from_fn(5, |r, _| vals[r][(i, j)]);
                let sol = vmat.clone().svd(true, true).solve(&rhs, 1e-13).unwrap();
                for (k, got) in sol.iter().enumerate() {
                    assert!((got - d.e[i][j][k]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn geodesic_examples() {
        let q = a_mat(0.3);
        for t in [0.0, 1.0, -5.0] {
            let g = geodesic_displacement(&q, t).unwrap();
            assert!(max_norm(&(g - (a_mat(0.3) - Mat::identity(2, 2)))) < 1e-14);
        }
        let eps = 1e-4;
        let g = geodesic_displacement(&mat2(1.0, 0.0, eps, 1.0), 1.0).unwrap();
        assert!((g[(1, 0)] - eps * 2f64.exp()).abs() < 1e-16 * 2f64.exp());
        assert!(matches!(
            geodesic_displacement(&a_mat(0.1), 301.0),
            Err(Error::MagnitudeOverflow)
        ));
    }

    #[test]
    fn geodesic_exponential_law() {
        let q = mat2(1.0, 2e-3, 3e-3, 1.0 + 6e-6);
        let q = &q / (q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)]).sqrt();
        let (t1, t2) = (0.7, 1.9);
        let g1 = geodesic_displacement(&q, t1).unwrap();
        let g12 = geodesic_displacement(&q, t1 + t2).unwrap();
        assert!((g12[(0, 1)] - g1[(0, 1)] * (-2.0 * t2).exp()).abs() < 1e-18);
        assert!((g12[(1, 0)] - g1[(1, 0)] * (2.0 * t2).exp()).abs() < 1e-12);
    }

    #[test]
    fn first_divergence_examples() {
        let d = unipotent_displacement(&u_mat(0.4)).unwrap();
        assert!(matches!(first_divergence(&d, 1.0), Err(Error::NoDivergence)));

        let eps = 1e-6;
        let d = unipotent_displacement(&mat2(1.0, eps, 0.0, 1.0)).unwrap();
        let fd = first_divergence(&d, 1.0).unwrap();
        assert_eq!((fd.row, fd.col), (2, 1));
        assert!((fd.t_star - 1e3).abs() < 1e-9 * 1e3);

        // threshold below the t=0 displacement is rejected
        let d = unipotent_displacement(&mat2(2.0, 1.0, 1.0, 1.0)).unwrap();
        assert!(matches!(first_divergence(&d, 0.5), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn small_perturbations_diverge_bottom_left() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut bottom_left = 0usize;
        let n = 100;
        for _ in 0..n {
            let q = random_sl2(&mut rng, 1e-8);
            let d = unipotent_displacement(&q).unwrap();
            let fd = first_divergence(&d, 1.0).unwrap();
            if (fd.row, fd.col) == (2, 1) {
                bottom_left += 1;
                let m = d.eval(fd.t_star);
                let diag_sum = m[(0, 0)].abs() + m[(1, 1)].abs();
                assert!(diag_sum < 1e-3, "diagonal sum {diag_sum}");
            }
        }
        assert!(bottom_left >= 99, "only {bottom_left} of {n} dominated at (2,1)");
    }

    #[test]
    fn extension_factor_examples() {
        assert_eq!(
            polynomial_extension_factor(&[5.0], 0.0, 1.0, 0.5).unwrap(),
            f64::INFINITY
        );
        let eps = polynomial_extension_factor(&[0.0, 1.0], 0.0, 1.0, 1.0).unwrap();
        assert!((eps - 1.0).abs() < 1e-9);
        // 2t^2 - 1 on [-1, 1]: bound 2 first met where 2t^2 - 1 = 2
        let eps = polynomial_extension_factor(&[-1.0, 0.0, 2.0], -1.0, 2.0, 1.0).unwrap();
        let expect = ((1.5f64).sqrt() + 1.0) / 2.0 - 1.0;
        assert!((eps - expect).abs() < 1e-9, "eps {eps} expect {expect}");
    }

    #[test]
    fn extension_factor_scale_invariance_and_monotonicity() {
        // invariance under affine reparametrization of the interval
        let f = [0.3, -1.0, 0.5, 2.0];
        let e1 = polynomial_extension_factor(&f, 0.25, 0.5, 0.7).unwrap();
        // substitute t = 0.25 + 0.5 s: coefficients of g(s) = f(0.25 + 0.5 s)
        let mut g = vec![0.0; 4];
        for (i, &fi) in f.iter().enumerate() {
            // expand fi * (0.25 + 0.5 s)^i
            let mut term = vec![0.0; i + 1];
            term[0] = 1.0;
            for _ in 0..i {
                let mut next = vec![0.0; term.len() + 1];
                for (k, &c) in term.iter().enumerate() {
                    next[k] += 0.25 * c;
                    next[k + 1] += 0.5 * c;
                }
                term = next;
                term.truncate(i + 1);
            }
            for (k, &c) in term.iter().enumerate() {
                g[k] += fi * c;
            }
        }
        let e2 = polynomial_extension_factor(&g, 0.0, 1.0, 0.7).unwrap();
        assert!((e1 - e2).abs() < 1e-8, "{e1} vs {e2}");

        let mut prev = f64::INFINITY;
        for d in 1..=8usize {
            let mut f = vec![0.0; d + 1];
            f[d] = 1.0;
            let eps = polynomial_extension_factor(&f, 0.0, 1.0, 0.5).unwrap();
            let expect = (1.5f64).powf(1.0 / d as f64) - 1.0;
            assert!((eps - expect).abs() < 1e-9);
            assert!(eps <= prev + 1e-12);
            prev = eps;
        }
    }

    #[test]
    fn joint_divergence_cases() {
        let (d1, d2, v) = joint_transverse_divergence(0.3, 0.3).unwrap();
        assert_eq!(v, JointVerdict::Diagonal);
        assert_eq!(d1.e, d2.e);
        assert_eq!(d1.e[1][0][2], -0.3);

        let (d1, d2, v) = joint_transverse_divergence(0.3, -0.3).unwrap();
        assert_eq!(v, JointVerdict::OffDiagonal);
        assert!((d1.e[1][0][2] - d2.e[1][0][2] + 0.6).abs() < 1e-15);

        let (d1, _, v) = joint_transverse_divergence(0.0, 0.0).unwrap();
        assert_eq!(v, JointVerdict::Diagonal);
        assert!(d1.max_entry_at(100.0) == 0.0);

        let (_, _, v) = joint_transverse_divergence(0.3, 0.3 + 1e-11).unwrap();
        assert_eq!(v, JointVerdict::Diagonal);
        let (_, _, v) = joint_transverse_divergence(0.3, 0.3 + 1e-9).unwrap();
        assert_eq!(v, JointVerdict::OffDiagonal);
    }

    #[test]
    fn transverse_coordinates() {
        for t in [0.0, 3.0, -11.0] {
            let c = transverse_component(&u_mat(0.8), t).unwrap();
            assert!(c.beta.abs() < 1e-15 && c.alpha.abs() < 1e-15);
            assert!((c.sigma - 0.8).abs() < 1e-12);

            let c = transverse_component(&a_mat(0.01), t).unwrap();
            assert!(c.beta.abs() < 1e-15);
            assert!((c.alpha - 0.01).abs() < 1e-12);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let q = random_sl2(&mut rng, 1e-4);
            let t = rng.gen::<f64>() * 200.0 - 100.0;
            let c = transverse_component(&q, t).unwrap();
            let m = u_mat(-t) * &q * u_mat(t);
            let back = recompose_transverse(&c);
            let rel = max_norm(&(&back - &m)) / max_norm(&m);
            assert!(rel < 1e-10, "relative recomposition error {rel}");
        }

        // pivot vanishes: q with zero bottom-right at t = 0
        let rot = mat2(0.0, -1.0, 1.0, 0.0);
        assert!(matches!(
            transverse_component(&rot, 0.0),
            Err(Error::FactorizationUndefined)
        ));
    }
}
