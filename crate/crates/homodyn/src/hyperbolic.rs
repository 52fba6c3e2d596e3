//! The upper half-plane, the modular fundamental domain, coset reduction
//! for the quotient of SL(2,R) by SL(2,Z), hyperbolic areas, and sampling
//! from the area measure.
//!
//! Group elements act on the right: act(g, z) = (az + c)/(bz + d) for
//! g = [[a, b], [c, d]], so act(g, act(h, z)) = act(hg, z). The section
//! zeta(g) = (c + id)/(a + ib) identifies the coset space with the
//! fundamental domain F = { |Re z| <= 1/2, |z| >= 1 }.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mat::{IMat2, Mat};

/// Lowest height in F, attained at the corners: sqrt(3)/2.
pub const F_MIN_HEIGHT: f64 = 0.866_025_403_784_438_6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidInput("non-finite coordinates".into()));
        }
        if y <= 1e-300 {
            return Err(Error::InvalidInput(format!(
                "point must lie in the open upper half-plane, y = {y:.3e}"
            )));
        }
        Ok(HPoint { x, y })
    }

    pub fn i() -> Self {
        HPoint { x: 0.0, y: 1.0 }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }
}

/// cosh of the hyperbolic distance.
pub fn dist_cosh(p: HPoint, q: HPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    1.0 + (dx * dx + dy * dy) / (2.0 * p.y * q.y)
}

/// Standard left Mobius action (az + b)/(cz + d).
pub fn std_mobius(m: &Mat, z: HPoint) -> Result<HPoint> {
    let zc = z.to_complex();
    let den = m[(1, 0)] * zc + Complex64::new(m[(1, 1)], 0.0);
    if den.norm() < 1e-300 {
        return Err(Error::Numerical("Mobius denominator vanished".into()));
    }
    let num = m[(0, 0)] * zc + Complex64::new(m[(0, 1)], 0.0);
    HPoint::from_complex(num / den)
}

/// Right action act(g, z) = (az + c)/(bz + d).
pub fn mobius_act(g: &Mat, z: HPoint) -> Result<HPoint> {
    let zc = z.to_complex();
    let den = g[(0, 1)] * zc + Complex64::new(g[(1, 1)], 0.0);
    if den.norm() < 1e-300 {
        return Err(Error::Numerical("Mobius denominator vanished".into()));
    }
    let num = g[(0, 0)] * zc + Complex64::new(g[(1, 0)], 0.0);
    HPoint::from_complex(num / den)
}

/// zeta(g) = (c + id)/(a + ib); lands in the upper half-plane whenever
/// det g > 0.
pub fn zeta(g: &Mat) -> Result<HPoint> {
    if g.nrows() != 2 || g.ncols() != 2 {
        return Err(Error::InvalidInput("zeta needs a 2x2 matrix".into()));
    }
    let den = Complex64::new(g[(0, 0)], g[(0, 1)]);
    if den.norm() < 1e-300 {
        return Err(Error::Numerical("zeta denominator vanished".into()));
    }
    let num = Complex64::new(g[(1, 0)], g[(1, 1)]);
    HPoint::from_complex(num / den)
}

pub fn in_fundamental_domain(z: HPoint, tol: f64) -> bool {
    z.x.abs() <= 0.5 + tol && z.x * z.x + z.y * z.y >= 1.0 - 2.0 * tol
}

/// Gauss reduction of a point into F. Returns (gamma, w) with
/// w = std_mobius(gamma, z) in F. Boundary points are canonicalized to the
/// representative maximizing (y, x), with ties in the point broken by the
/// lexicographically least sign-normalized gamma.
pub fn reduce_point(z0: HPoint) -> Result<(IMat2, HPoint)> {
    let mut z = z0;
    let mut g = IMat2::identity();
    for _ in 0..1_000_000 {
        let n = z.x.round();
        if n.abs() > 9.0e15 {
            return Err(Error::Numerical("translation step overflows".into()));
        }
        if n != 0.0 {
            g = IMat2::t_pow(-(n as i64)).mul(&g)?;
            z = HPoint { x: z.x - n, y: z.y };
        }
        let r2 = z.x * z.x + z.y * z.y;
        if r2 < 1.0 - 1e-15 {
            g = IMat2::s_gen().mul(&g)?;
            z = HPoint { x: -z.x / r2, y: z.y / r2 };
        } else {
            let w = std_mobius(&g.to_mat(), z0)?;
            return canonicalize(g, w, z0);
        }
    }
    Err(Error::NonConvergence)
}

fn canonicalize(g0: IMat2, w0: HPoint, z0: HPoint) -> Result<(IMat2, HPoint)> {
    let tb = 1e-9;
    let mut cands: Vec<(IMat2, HPoint)> = vec![(g0, w0)];
    let push_edges = |cands: &mut Vec<(IMat2, HPoint)>| -> Result<()> {
        let mut extra = Vec::new();
        for (g, p) in cands.iter() {
            if (p.x + 0.5).abs() <= tb {
                let ng = IMat2::t_pow(1).mul(g)?;
                extra.push((ng, std_mobius(&ng.to_mat(), z0)?));
            }
            if (p.x - 0.5).abs() <= tb {
                let ng = IMat2::t_pow(-1).mul(g)?;
                extra.push((ng, std_mobius(&ng.to_mat(), z0)?));
            }
        }
        cands.extend(extra);
        Ok(())
    };
    push_edges(&mut cands)?;
    let mut extra = Vec::new();
    for (g, p) in cands.iter() {
        let r2 = p.x * p.x + p.y * p.y;
        if (r2 - 1.0).abs() <= 2.0 * tb {
            let ng = IMat2::s_gen().mul(g)?;
            extra.push((ng, std_mobius(&ng.to_mat(), z0)?));
        }
    }
    cands.extend(extra);
    push_edges(&mut cands)?;

    let mut valid: Vec<(IMat2, HPoint)> = cands
        .iter()
        .filter(|(_, p)| in_fundamental_domain(*p, tb))
        .cloned()
        .collect();
    if valid.is_empty() {
        valid.push((g0, w0));
    }
    let best = valid
        .iter()
        .map(|(_, p)| (p.y, p.x))
        .fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |acc, v| {
            if v > acc {
                v
            } else {
                acc
            }
        });
    let mut tied: Vec<IMat2> = valid
        .into_iter()
        .filter(|(_, p)| (p.y - best.0).abs() <= tb && (p.x - best.1).abs() <= tb)
        .map(|(g, _)| g.sign_normalized())
        .collect();
    tied.sort_by(|a, b| {
        if crate::mat::lex_le(a, b) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    let gamma = tied[0];
    let w = std_mobius(&gamma.to_mat(), z0)?;
    Ok((gamma, w))
}

/// A reduced representative of the coset of g: gamma in SL(2,Z) with
/// zeta(gamma g) in F.
#[derive(Debug, Clone)]
pub struct ReducedCoset {
    pub gamma: IMat2,
    pub rep: Mat,
    pub point: HPoint,
}

/// Reduce the coset of g. Uses the equivariance
/// zeta(gamma g) = std_mobius(J gamma J, zeta(g)) with J = [[0,1],[1,0]]:
/// the point zeta(g) is Gauss-reduced by gamma_std and the output gamma is
/// its J-conjugate.
pub fn reduce_coset(g: &Mat) -> Result<ReducedCoset> {
    crate::mat::check_det1_2x2(g, 1e-6)?;
    let z = zeta(g)?;
    let (gstd, _) = reduce_point(z)?;
    let gamma = gstd.j_conj();
    let rep = gamma.to_mat() * g;
    let point = zeta(&rep)?;
    if !in_fundamental_domain(point, 1e-6) {
        return Err(Error::Numerical(format!(
            "reduced point ({}, {}) escaped the fundamental domain",
            point.x, point.y
        )));
    }
    Ok(ReducedCoset { gamma, rep, point })
}

#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

#[derive(Debug, Clone)]
pub enum Region {
    /// Disjoint union of coordinate rectangles.
    RectUnion(Vec<Rect>),
    /// The modular fundamental domain, optionally truncated to y <= y_cut.
    FundamentalDomain { y_cut: Option<f64> },
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * k as f64);
    }
    s * h / 3.0
}

/// Area with respect to dx dy / y^2.
pub fn hyperbolic_area(region: &Region) -> Result<f64> {
    match region {
        Region::RectUnion(rects) => {
            let mut total = 0.0;
            for r in rects {
                if !r.x0.is_finite() || !r.x1.is_finite() || r.x1 <= r.x0 {
                    return Err(Error::InvalidInput("bad rectangle x-extent".into()));
                }
                if r.y1 <= r.y0 {
                    return Err(Error::InvalidInput("bad rectangle y-extent".into()));
                }
                if r.y0 <= 0.0 {
                    return Err(Error::DivergentRegion);
                }
                let tail = if r.y1.is_finite() { 1.0 / r.y1 } else { 0.0 };
                total += (r.x1 - r.x0) * (1.0 / r.y0 - tail);
            }
            Ok(total)
        }
        Region::FundamentalDomain { y_cut } => match y_cut {
            None => Ok(simpson(|x| 1.0 / (1.0 - x * x).sqrt(), -0.5, 0.5, 4096)),
            Some(yc) => {
                if !yc.is_finite() || *yc <= 0.0 {
                    return Err(Error::InvalidInput("y_cut must be positive".into()));
                }
                if *yc <= F_MIN_HEIGHT {
                    return Ok(0.0);
                }
                let xm = if *yc >= 1.0 {
                    0.0
                } else {
                    (1.0 - yc * yc).sqrt()
                };
                let v = simpson(
                    |x| 1.0 / (1.0 - x * x).sqrt() - 1.0 / yc,
                    xm,
                    0.5,
                    4096,
                );
                Ok(2.0 * v)
            }
        },
    }
}

const HAAR_BATCH: usize = 1024;

fn haar_batch(seed: u64, index: u64, count: usize) -> Vec<HPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index + 1);
    (0..count)
        .map(|_| loop {
            let x = rng.gen::<f64>() - 0.5;
            let y = F_MIN_HEIGHT / (1.0 - rng.gen::<f64>());
            if x * x + y * y >= 1.0 {
                break HPoint { x, y };
            }
        })
        .collect()
}

fn haar_plan(n: usize) -> Vec<(u64, usize)> {
    let mut plan = Vec::new();
    let mut left = n;
    let mut idx = 0u64;
    while left > 0 {
        let c = left.min(HAAR_BATCH);
        plan.push((idx, c));
        left -= c;
        idx += 1;
    }
    plan
}

/// n independent samples from the normalized area measure on F. The output
/// depends only on (n, seed); sample j is the same for every n > j.
pub fn haar_sample(n: usize, seed: u64) -> Vec<HPoint> {
    #[cfg(feature = "parallel")]
    {
        haar_sample_par(n, seed)
    }
    #[cfg(not(feature = "parallel"))]
    {
        haar_sample_seq(n, seed)
    }
}

pub fn haar_sample_seq(n: usize, seed: u64) -> Vec<HPoint> {
    haar_plan(n)
        .into_iter()
        .flat_map(|(idx, c)| haar_batch(seed, idx, c))
        .collect()
}

#[cfg(feature = "parallel")]
pub fn haar_sample_par(n: usize, seed: u64) -> Vec<HPoint> {
    use rayon::prelude::*;
    haar_plan(n)
        .into_par_iter()
        .map(|(idx, c)| haar_batch(seed, idx, c))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
