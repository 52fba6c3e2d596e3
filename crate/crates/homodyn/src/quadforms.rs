//! Quadratic-form algebra, integer value searches of Oppenheim type, and the
//! quantitative lattice-point counting experiment.

use crate::error::{Error, Result};
use crate::mat::{max_norm, Mat};
use crate::tol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const LATTICE_BUDGET: f64 = 1e9;
const MC_STRATA: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    b: Mat,
    sig: (usize, usize, usize),
}

fn signature_of(b: &Mat) -> (usize, usize, usize) {
    let eigs = b.clone().symmetric_eigen().eigenvalues;
    let scale = eigs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let thr = tol::SIGNATURE_ZERO * scale;
    let mut p = 0;
    let mut q = 0;
    let mut z = 0;
    for e in eigs.iter() {
        if *e > thr {
            p += 1;
        } else if *e < -thr {
            q += 1;
        } else {
            z += 1;
        }
    }
    (p, q, z)
}

impl QuadraticForm {
    /// Q(v) = v B v^T with B symmetrized from the given matrix.
    pub fn new(m: &Mat) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidInput("form matrix must be square".into()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("form matrix must be finite".into()));
        }
        let b = (m + m.transpose()) * 0.5;
        let sig = signature_of(&b);
        Ok(QuadraticForm { b, sig })
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        QuadraticForm::new(&Mat::from_fn(d.len(), d.len(), |i, j| {
            if i == j {
                d[i]
            } else {
                0.0
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.b
    }

    pub fn evaluate(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim(), "dimension mismatch");
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += v[i] * self.b[(i, j)] * v[j];
            }
        }
        s
    }

    pub fn evaluate_int(&self, v: &[i64]) -> f64 {
        assert_eq!(v.len(), self.dim(), "dimension mismatch");
        eval_int(&self.b, v)
    }

    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim(), "dimension mismatch");
        assert_eq!(w.len(), self.dim(), "dimension mismatch");
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += v[i] * self.b[(i, j)] * w[j];
            }
        }
        s
    }

    /// (#positive, #negative, #zero) eigenvalues at threshold 1e-10 ||B||.
    pub fn signature(&self) -> (usize, usize, usize) {
        self.sig
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.sig.2 == 0
    }

    pub fn is_indefinite(&self) -> bool {
        self.sig.0 >= 1 && self.sig.1 >= 1
    }

    /// The form v -> Q(v T), matrix T B T^T.
    pub fn congruence(&self, t: &Mat) -> Result<QuadraticForm> {
        let n = self.dim();
        if t.nrows() != n || t.ncols() != n {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        QuadraticForm::new(&(t * &self.b * t.transpose()))
    }

    /// h preserves Q: h B h^T = B, with det h = 1 required up to tol.
    pub fn so_q_member(&self, h: &Mat, tol_in: f64) -> Result<bool> {
        let n = self.dim();
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        let det = h.determinant();
        if (det - 1.0).abs() > tol_in {
            return Err(Error::InvalidInput(format!(
                "determinant {det} is not 1 within {tol_in}"
            )));
        }
        Ok(max_norm(&(h * &self.b * h.transpose() - &self.b)) <= tol_in)
    }
}

fn eval_int(b: &Mat, v: &[i64]) -> f64 {
    let n = b.nrows();
    let mut s = 0.0;
    for i in 0..n {
        if v[i] == 0 {
            continue;
        }
        let vi = v[i] as f64;
        for j in 0..n {
            s += vi * b[(i, j)] * v[j] as f64;
        }
    }
    s
}

// ---------------------------------------------------------------------------
// rational-multiple detection

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RationalVerdict {
    /// Q = (q/p) * (integer-coefficient form); k = p/q is the reported scalar.
    Yes { p: i64, q: i64 },
    /// No scalar of height <= H maps all polynomial coefficients near integers.
    /// Heuristic verdict: bounded search, floating tolerance.
    NoWithinBounds,
}

impl QuadraticForm {
    /// Polynomial coefficients of Q: diagonal entries and twice the
    /// off-diagonal entries (the x_i x_j cross coefficients).
    pub fn polynomial_coefficients(&self) -> Vec<f64> {
        let n = self.dim();
        let mut c = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            c.push(self.b[(i, i)]);
            for j in i + 1..n {
                c.push(2.0 * self.b[(i, j)]);
            }
        }
        c
    }

    /// Search k = p/q with 1 <= p, q <= height making every polynomial
    /// coefficient of k Q within tol_int of an integer; the smallest such k
    /// is reported in lowest terms.
    pub fn is_rational_multiple(&self, height: i64, tol_int: f64) -> Result<RationalVerdict> {
        if height < 1 {
            return Err(Error::InvalidInput("height must be at least 1".into()));
        }
        if !(tol_int > 0.0) || tol_int >= 0.5 {
            return Err(Error::InvalidInput("tolerance must lie in (0, 0.5)".into()));
        }
        let mut coeffs = self.polynomial_coefficients();
        coeffs.retain(|c| c.abs() > 1e-14);
        if coeffs.is_empty() {
            return Ok(RationalVerdict::Yes { p: 1, q: 1 });
        }
        let c0 = coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let passes = |p: i64, q: i64| -> bool {
            let k = p as f64 / q as f64;
            coeffs.iter().all(|c| {
                let x = k * c;
                (x - x.round()).abs() <= tol_int
            })
        };
        let mut best: Option<(f64, i64, i64)> = None;
        let mut consider = |p: i64, q: i64| {
            if passes(p, q) {
                let k = p as f64 / q as f64;
                if best.map_or(true, |(bk, _, _)| k < bk) {
                    best = Some((k, p, q));
                }
            }
        };
        for q in 1..=height {
            let step = q as f64 / c0;
            if step <= 2.0 {
                for p in 1..=height {
                    consider(p, q);
                }
            } else {
                // k c0 must sit near an integer j, so p clusters near j step
                let jmax = (c0 * height as f64 / q as f64).ceil() as i64 + 1;
                for j in 1..=jmax {
                    let p = (j as f64 * step).round() as i64;
                    if (1..=height).contains(&p) {
                        consider(p, q);
                    }
                }
            }
        }
        Ok(match best {
            Some((_, p, q)) => {
                let g = gcd(p, q);
                RationalVerdict::Yes { p: p / g, q: q / g }
            }
            None => RationalVerdict::NoWithinBounds,
        })
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

// ---------------------------------------------------------------------------
// Oppenheim-type search

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeHit {
    pub v: Vec<i64>,
    pub value: f64,
}

fn lattice_budget(n: usize, radius: f64) -> Result<()> {
    if (n as f64) * radius.floor().powi(n as i32) > LATTICE_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "dim {n} at radius {radius} exceeds the lattice budget"
        )));
    }
    Ok(())
}

/// Candidate value at slot `k` of the per-coordinate scan order
/// 0, 1, -1, 2, -2, ..., restricted to nonnegative when the prefix is zero.
fn scan_value(k: usize, all_zero: bool) -> i64 {
    if all_zero {
        k as i64
    } else if k == 0 {
        0
    } else {
        let t = ((k + 1) / 2) as i64;
        if k % 2 == 1 {
            t
        } else {
            -t
        }
    }
}

fn scan_rec(
    q: &QuadraticForm,
    r: f64,
    eps: f64,
    s: i64,
    v: &mut Vec<i64>,
    all_zero: bool,
    max_met: bool,
) -> Option<LatticeHit> {
    let n = q.dim();
    if v.len() == n {
        let value = eval_int(&q.b, v);
        if (value - r).abs() < eps {
            return Some(LatticeHit {
                v: v.clone(),
                value,
            });
        }
        return None;
    }
    let force = !max_met && v.len() + 1 == n;
    if force {
        // the last coordinate has to realize the sup-norm shell
        let cands: &[i64] = if all_zero { &[1] } else { &[1, -1] };
        for sign in cands {
            let t = sign * s;
            v.push(t);
            let hit = scan_rec(q, r, eps, s, v, false, true);
            v.pop();
            if hit.is_some() {
                return hit;
            }
        }
        return None;
    }
    let slots = if all_zero { s as usize + 1 } else { 2 * s as usize + 1 };
    for k in 0..slots {
        let t = scan_value(k, all_zero);
        v.push(t);
        let hit = scan_rec(q, r, eps, s, v, all_zero && t == 0, max_met || t.abs() == s);
        v.pop();
        if hit.is_some() {
            return hit;
        }
    }
    None
}

impl QuadraticForm {
    /// First nonzero v in the deterministic scan order (sup-norm shells
    /// outward; within a shell, coordinates ordered by absolute value with
    /// positive before negative, sign-normalized so the leading nonzero
    /// coordinate is positive) with |Q(v) - r| < eps; None when the box
    /// holds no witness.
    pub fn oppenheim_search(&self, r: f64, eps: f64, n_box: i64) -> Result<Option<LatticeHit>> {
        #[cfg(feature = "parallel")]
        {
            self.oppenheim_search_par(r, eps, n_box)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.oppenheim_search_seq(r, eps, n_box)
        }
    }

    pub fn oppenheim_search_seq(&self, r: f64, eps: f64, n_box: i64) -> Result<Option<LatticeHit>> {
        self.oppenheim_gate(r, eps, n_box)?;
        for s in 1..=n_box {
            let mut v = Vec::with_capacity(self.dim());
            if let Some(hit) = scan_rec(self, r, eps, s, &mut v, true, false) {
                return Ok(Some(hit));
            }
        }
        Ok(None)
    }

    #[cfg(feature = "parallel")]
    pub fn oppenheim_search_par(&self, r: f64, eps: f64, n_box: i64) -> Result<Option<LatticeHit>> {
        self.oppenheim_gate(r, eps, n_box)?;
        let n = self.dim();
        for s in 1..=n_box {
            if n == 1 {
                let mut v = Vec::new();
                if let Some(hit) = scan_rec(self, r, eps, s, &mut v, true, false) {
                    return Ok(Some(hit));
                }
                continue;
            }
            // split on the leading coordinate, keeping the scan order
            let hit = (0..s + 1).into_par_iter().find_map_first(|v0| {
                let mut v = Vec::with_capacity(n);
                v.push(v0);
                scan_rec(self, r, eps, s, &mut v, v0 == 0, v0 == s)
            });
            if let Some(hit) = hit {
                return Ok(Some(hit));
            }
        }
        Ok(None)
    }

    fn oppenheim_gate(&self, r: f64, eps: f64, n_box: i64) -> Result<()> {
        if !(eps > 0.0) || !r.is_finite() {
            return Err(Error::InvalidInput("need finite r and eps > 0".into()));
        }
        if n_box < 1 {
            return Err(Error::InvalidInput("box radius must be at least 1".into()));
        }
        lattice_budget(self.dim(), n_box as f64)
    }
}

// ---------------------------------------------------------------------------
// exact counting and the ratio experiment

fn count_slice(b: &Mat, lo: f64, hi: f64, r2: f64, v: &mut Vec<f64>) -> u64 {
    let n = b.nrows();
    let used: f64 = v.iter().map(|x| x * x).sum();
    let rem = r2 - used;
    if rem < 0.0 {
        return 0;
    }
    let m = rem.sqrt().floor() as i64;
    if v.len() == n - 1 {
        // the value is quadratic in the last coordinate
        let a2 = b[(n - 1, n - 1)];
        let mut b1 = 0.0;
        for (j, x) in v.iter().enumerate() {
            b1 += 2.0 * b[(n - 1, j)] * x;
        }
        let mut c0 = 0.0;
        for p in 0..n - 1 {
            for q in 0..n - 1 {
                c0 += v[p] * b[(p, q)] * v[q];
            }
        }
        let mut cnt = 0;
        for t in -m..=m {
            let tf = t as f64;
            let val = (a2 * tf + b1) * tf + c0;
            if lo < val && val < hi {
                cnt += 1;
            }
        }
        return cnt;
    }
    let mut cnt = 0;
    for t in -m..=m {
        v.push(t as f64);
        cnt += count_slice(b, lo, hi, r2, v);
        v.pop();
    }
    cnt
}

impl QuadraticForm {
    /// Number of v in Z^n with Euclidean norm at most `radius` (the origin
    /// included) and a < Q(v) < b.
    pub fn count_values(&self, a: f64, b: f64, radius: f64) -> Result<u64> {
        #[cfg(feature = "parallel")]
        {
            self.count_values_par(a, b, radius)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.count_values_seq(a, b, radius)
        }
    }

    pub fn count_values_seq(&self, a: f64, b: f64, radius: f64) -> Result<u64> {
        self.count_gate(a, b, radius)?;
        let mut v = Vec::with_capacity(self.dim());
        Ok(count_slice(&self.b, a, b, radius * radius, &mut v))
    }

    #[cfg(feature = "parallel")]
    pub fn count_values_par(&self, a: f64, b: f64, radius: f64) -> Result<u64> {
        self.count_gate(a, b, radius)?;
        let r2 = radius * radius;
        if self.dim() == 1 {
            let mut v = Vec::new();
            return Ok(count_slice(&self.b, a, b, r2, &mut v));
        }
        let m0 = radius.floor() as i64;
        Ok((-m0..m0 + 1)
            .into_par_iter()
            .map(|t0| {
                let mut v = Vec::with_capacity(self.dim());
                v.push(t0 as f64);
                count_slice(&self.b, a, b, r2, &mut v)
            })
            .sum())
    }

    fn count_gate(&self, a: f64, b: f64, radius: f64) -> Result<()> {
        if !(a < b) {
            return Err(Error::InvalidInput("need a < b".into()));
        }
        if !(radius >= 1.0) || !radius.is_finite() {
            return Err(Error::InvalidInput("radius must be finite and >= 1".into()));
        }
        lattice_budget(self.dim(), radius)
    }
}

fn ball_volume(n: usize, r: f64) -> f64 {
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = n % 2;
    while k < n {
        k += 2;
        v *= 2.0 * std::f64::consts::PI / k as f64;
    }
    v * r.powi(n as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub radius: f64,
    pub count: u64,
    pub volume: f64,
    pub std_error: f64,
    /// count / volume; None when the Monte-Carlo volume estimate is zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    pub rows: Vec<RatioRow>,
    /// least-squares slope of log(count) against log(radius)
    pub fitted_exponent: Option<f64>,
    pub expected_exponent: f64,
}

impl QuadraticForm {
    /// Counting experiment rows (N, count, MC volume, standard error, ratio)
    /// for the region a < Q < b inside the Euclidean ball, plus the fitted
    /// growth exponent to compare with p + q - 2.
    pub fn counting_ratio_table(
        &self,
        a: f64,
        b: f64,
        radii: &[f64],
        mc_samples: usize,
        seed: u64,
    ) -> Result<RatioTable> {
        let (p, q, _) = self.sig;
        if p < 3 || q < 1 {
            return Err(Error::InvalidInput(format!(
                "signature ({p}, {q}) violates the hypothesis p >= 3, q >= 1"
            )));
        }
        if let RationalVerdict::Yes { .. } = self.is_rational_multiple(1000, 1e-8)? {
            return Err(Error::InvalidInput(
                "the form is a rational multiple of an integer form".into(),
            ));
        }
        if radii.is_empty() || mc_samples < MC_STRATA {
            return Err(Error::InvalidInput(
                "need at least one radius and one sample per stratum".into(),
            ));
        }
        let mut rows = Vec::with_capacity(radii.len());
        for (ri, &radius) in radii.iter().enumerate() {
            let count = self.count_values(a, b, radius)?;
            let (volume, std_error) = self.mc_volume(a, b, radius, mc_samples, seed, ri);
            let ratio = if volume > 0.0 {
                Some(count as f64 / volume)
            } else {
                None
            };
            rows.push(RatioRow {
                radius,
                count,
                volume,
                std_error,
                ratio,
            });
        }
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.count > 0)
            .map(|r| (r.radius.ln(), (r.count as f64).ln()))
            .collect();
        Ok(RatioTable {
            rows,
            fitted_exponent: fit_slope(&pts),
            expected_exponent: (p + q) as f64 - 2.0,
        })
    }

    /// Stratified Monte-Carlo volume of {x : ||x|| <= radius, a < Q(x) < b}.
    fn mc_volume(
        &self,
        lo: f64,
        hi: f64,
        radius: f64,
        mc_samples: usize,
        seed: u64,
        row_idx: usize,
    ) -> (f64, f64) {
        let n = self.dim();
        let per = mc_samples.div_ceil(MC_STRATA);
        let hats = self.stratum_hats(lo, hi, radius, per, seed, row_idx);
        let vi = ball_volume(n, radius) / MC_STRATA as f64;
        let mut vol = 0.0;
        let mut var = 0.0;
        for phat in hats {
            vol += vi * phat;
            var += vi * vi * phat * (1.0 - phat) / per as f64;
        }
        (vol, var.sqrt())
    }

    #[cfg(feature = "parallel")]
    fn stratum_hats(
        &self,
        lo: f64,
        hi: f64,
        radius: f64,
        per: usize,
        seed: u64,
        row_idx: usize,
    ) -> Vec<f64> {
        (0..MC_STRATA)
            .into_par_iter()
            .map(|i| self.stratum_hat(lo, hi, radius, per, seed, row_idx, i))
            .collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn stratum_hats(
        &self,
        lo: f64,
        hi: f64,
        radius: f64,
        per: usize,
        seed: u64,
        row_idx: usize,
    ) -> Vec<f64> {
        (0..MC_STRATA)
            .map(|i| self.stratum_hat(lo, hi, radius, per, seed, row_idx, i))
            .collect()
    }

    fn stratum_hat(
        &self,
        lo: f64,
        hi: f64,
        radius: f64,
        per: usize,
        seed: u64,
        row_idx: usize,
        idx: usize,
    ) -> f64 {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((row_idx * MC_STRATA + idx + 1) as u64);
        let mut dir = vec![0.0f64; n];
        let mut hits = 0usize;
        for _ in 0..per {
            let u: f64 = rng.gen();
            let rad = radius * ((idx as f64 + u) / MC_STRATA as f64).powf(1.0 / n as f64);
            let norm = loop {
                let mut s = 0.0;
                for d in dir.iter_mut() {
                    *d = rng.sample(StandardNormal);
                    s += *d * *d;
                }
                if s > 1e-24 {
                    break s.sqrt();
                }
            };
            for d in dir.iter_mut() {
                *d *= rad / norm;
            }
            let val = self.evaluate(&dir);
            if lo < val && val < hi {
                hits += 1;
            }
        }
        hits as f64 / per as f64
    }
}

fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx < 1e-12 {
        return None;
    }
    Some(sxy / sxx)
}

// ---------------------------------------------------------------------------
// the two-variable counterexample form

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRow {
    pub radius: i64,
    pub min_abs: f64,
    pub argmin: (i64, i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapAnalysis {
    pub min_abs: f64,
    pub argmin: (i64, i64),
    /// one row per sup-norm radius at which the running minimum improved
    pub table: Vec<GapRow>,
}

impl GapAnalysis {
    /// Running minimum at the given radius.
    pub fn min_at(&self, radius: i64) -> Option<f64> {
        self.table
            .iter()
            .take_while(|row| row.radius <= radius)
            .last()
            .map(|row| row.min_abs)
    }
}

/// Exact running minimum of |p^2 - (3 + 2 sqrt 2) q^2| over nonzero integer
/// points with max(|p|, |q|) <= R, via the factorization through
/// theta = 1 + sqrt 2.
pub fn gap_analysis(r_max: i64) -> Result<GapAnalysis> {
    if r_max < 1 {
        return Err(Error::InvalidInput("radius must be at least 1".into()));
    }
    let theta = 1.0 + 2.0f64.sqrt();
    let value = |p: i64, q: i64| -> f64 {
        let (pf, qf) = (p as f64, q as f64);
        ((pf - theta * qf) * (pf + theta * qf)).abs()
    };
    let mut best = f64::INFINITY;
    let mut argmin = (0, 0);
    let mut table = Vec::new();
    for s in 1..=r_max {
        let mut improved = false;
        let mut consider = |p: i64, q: i64, best: &mut f64, argmin: &mut (i64, i64)| {
            let v = value(p, q);
            if v < *best {
                *best = v;
                *argmin = (p, q);
                improved = true;
            }
        };
        // the quadrant fold: |Q| only depends on |p|, |q|
        for q in 0..=s {
            consider(s, q, &mut best, &mut argmin);
        }
        for p in 0..s {
            consider(p, s, &mut best, &mut argmin);
        }
        if improved {
            table.push(GapRow {
                radius: s,
                min_abs: best,
                argmin,
            });
        }
    }
    Ok(GapAnalysis {
        min_abs: best,
        argmin,
        table,
    })
}

// ---------------------------------------------------------------------------
// textual form input

/// One coefficient token: a float literal or [m*]sqrt{2,3,5}[/d] with an
/// optional sign.
pub fn parse_coeff(tok: &str) -> Result<f64> {
    let t = tok.trim();
    let bad = || Error::InvalidInput(format!("bad coefficient token '{tok}'"));
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let (numer, denom) = match t.split_once('/') {
        Some((a, d)) => {
            let dv: f64 = d.trim().parse().map_err(|_| bad())?;
            if dv == 0.0 || !dv.is_finite() {
                return Err(bad());
            }
            (a.trim(), dv)
        }
        None => (t, 1.0),
    };
    let value = if let Some(pos) = numer.find("sqrt") {
        let (mult_str, root_str) = numer.split_at(pos);
        let root: f64 = match &root_str[4..] {
            "2" => 2.0,
            "3" => 3.0,
            "5" => 5.0,
            _ => return Err(bad()),
        };
        let mult_str = mult_str.trim_end_matches('*').trim();
        let mult: f64 = if mult_str.is_empty() {
            1.0
        } else {
            mult_str.parse().map_err(|_| bad())?
        };
        mult * root.sqrt()
    } else {
        numer.trim().parse().map_err(|_| bad())?
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(sign * value / denom)
}

/// Parse the comma-separated upper triangle (row-major, diagonal included)
/// of the symmetric matrix of a form. Tokens are float literals or
/// [m*]sqrt{2,3,5}[/d] with optional sign.
pub fn parse_form(s: &str) -> Result<QuadraticForm> {
    let toks: Vec<&str> = s.split(',').collect();
    let m = toks.len();
    let mut n = 0usize;
    while n * (n + 1) / 2 < m {
        n += 1;
    }
    if n == 0 || n * (n + 1) / 2 != m {
        return Err(Error::InvalidInput(format!(
            "{m} entries do not fill an upper triangle"
        )));
    }
    let mut b = Mat::zeros(n, n);
    let mut it = toks.iter();
    for i in 0..n {
        for j in i..n {
            let val = parse_coeff(it.next().unwrap())?;
            b[(i, j)] = val;
            b[(j, i)] = val;
        }
    }
    QuadraticForm::new(&b)
}
