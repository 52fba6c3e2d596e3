//! Partition entropy, exact iterated-join information for three model
//! symbolic systems, and translation entropy via expansion Jacobians.

use crate::error::{Error, Result};
use crate::group_algebra::{horospherical_subalgebra, log_jacobian, LieAlgebraPresentation};
use crate::mat::Mat;
use crate::tol;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const ARC_CAP: usize = 10_000;
const DYADIC_CAP: usize = 60;

fn validate_weights(p: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &w in p {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidInput(format!("bad weight {w}")));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > tol::PROB_SUM {
        return Err(Error::InvalidInput(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

fn entropy_unchecked(w: &[f64]) -> f64 {
    // 0 log(1/0) = 0 by convention
    w.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum()
}

/// Sum of p_i log(1/p_i), natural log.
pub fn entropy(p: &[f64]) -> Result<f64> {
    validate_weights(p)?;
    Ok(entropy_unchecked(p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinitePartition {
    pub weights: Vec<f64>,
}

impl FinitePartition {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        validate_weights(&weights)?;
        Ok(FinitePartition { weights })
    }

    pub fn trivial() -> Self {
        FinitePartition { weights: vec![1.0] }
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn entropy(&self) -> f64 {
        entropy_unchecked(&self.weights)
    }
}

/// Joint weights of two partitions of the same space:
/// p[(i, j)] = mu(A_i intersect B_j), rows indexing A.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub p: Mat,
}

impl JointTable {
    pub fn new(p: Mat) -> Result<Self> {
        validate_weights(p.as_slice())?;
        Ok(JointTable { p })
    }

    pub fn independent(a: &[f64], b: &[f64]) -> Result<Self> {
        validate_weights(a)?;
        validate_weights(b)?;
        Ok(JointTable {
            p: Mat::from_fn(a.len(), b.len(), |i, j| a[i] * b[j]),
        })
    }

    pub fn marginal_rows(&self) -> Vec<f64> {
        (0..self.p.nrows()).map(|i| self.p.row(i).sum()).collect()
    }

    pub fn marginal_cols(&self) -> Vec<f64> {
        (0..self.p.ncols()).map(|j| self.p.column(j).sum()).collect()
    }
}

/// A v B: the nonempty intersection cells.
pub fn join(t: &JointTable) -> FinitePartition {
    FinitePartition {
        weights: t.p.iter().copied().filter(|w| *w > 0.0).collect(),
    }
}

/// H(B | A) with rows indexing A; satisfies H(A v B) = H(A) + H(B | A).
pub fn conditional_entropy(t: &JointTable) -> f64 {
    let mut h = 0.0;
    for i in 0..t.p.nrows() {
        let pa: f64 = t.p.row(i).sum();
        if pa <= 0.0 {
            continue;
        }
        for j in 0..t.p.ncols() {
            let pij = t.p[(i, j)];
            if pij > 0.0 {
                h -= pij * (pij / pa).ln();
            }
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolicSystem {
    /// circle rotation t -> t + beta mod 1
    Rotation(f64),
    /// two-sided coin shift with head weight p
    Bernoulli(f64),
    /// the planar baker map, handled through its shift isomorphism
    Baker,
}

fn frac01(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

impl SymbolicSystem {
    pub fn validate(&self) -> Result<()> {
        match self {
            SymbolicSystem::Rotation(b) if !b.is_finite() => {
                Err(Error::InvalidInput("rotation number must be finite".into()))
            }
            SymbolicSystem::Bernoulli(p) if !(0.0..=1.0).contains(p) => {
                Err(Error::InvalidInput(format!("bernoulli weight {p} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    /// Arc / cylinder / left-right base partition.
    pub fn canonical_partition(&self) -> FinitePartition {
        match self {
            SymbolicSystem::Bernoulli(p) => FinitePartition {
                weights: vec![*p, 1.0 - *p],
            },
            _ => FinitePartition {
                weights: vec![0.5, 0.5],
            },
        }
    }

    /// The inverse transformation as a system of the same family.
    pub fn inverse(&self) -> Self {
        match self {
            SymbolicSystem::Rotation(b) => SymbolicSystem::Rotation(frac01(-b)),
            other => *other,
        }
    }
}

/// E^k = H(A v T^{-1}A v ... v T^{-(k-1)}A) for the canonical partition,
/// computed exactly per backend.
pub fn iterated_information(sys: &SymbolicSystem, k: usize) -> Result<f64> {
    sys.validate()?;
    if k < 1 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    match sys {
        SymbolicSystem::Rotation(beta) => {
            if 2 * k > ARC_CAP {
                return Err(Error::CapExceeded(format!(
                    "{} arcs exceed the rotation backend cap {ARC_CAP}",
                    2 * k
                )));
            }
            // the join is the arc partition with endpoints -j b, 1/2 - j b
            let mut ends = Vec::with_capacity(2 * k);
            for j in 0..k {
                let t = -(j as f64) * beta;
                ends.push(frac01(t));
                ends.push(frac01(0.5 + t));
            }
            ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut h = 0.0;
            for i in 0..ends.len() {
                let w = if i + 1 < ends.len() {
                    ends[i + 1] - ends[i]
                } else {
                    ends[0] + 1.0 - ends[i]
                };
                if w > 0.0 {
                    h -= w * w.ln();
                }
            }
            Ok(h)
        }
        SymbolicSystem::Bernoulli(p) => {
            if k > DYADIC_CAP {
                return Err(Error::CapExceeded(format!(
                    "k = {k} exceeds the cylinder backend cap {DYADIC_CAP}"
                )));
            }
            // independence makes the 2^k cylinder weights products
            Ok(k as f64 * entropy_unchecked(&[*p, 1.0 - *p]))
        }
        SymbolicSystem::Baker => {
            if k > DYADIC_CAP {
                return Err(Error::CapExceeded(format!(
                    "k = {k} exceeds the cylinder backend cap {DYADIC_CAP}"
                )));
            }
            Ok(k as f64 * std::f64::consts::LN_2)
        }
    }
}

#[derive(Debug, Clone)]
pub struct EntropyRate {
    /// E^k for k = 1..=k_max
    pub e: Vec<f64>,
    /// E^k / k
    pub rates: Vec<f64>,
    pub terminal: f64,
}

pub fn entropy_rate(sys: &SymbolicSystem, k_max: usize) -> Result<EntropyRate> {
    #[cfg(feature = "parallel")]
    {
        entropy_rate_par(sys, k_max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        entropy_rate_seq(sys, k_max)
    }
}

pub fn entropy_rate_seq(sys: &SymbolicSystem, k_max: usize) -> Result<EntropyRate> {
    if k_max < 2 {
        return Err(Error::InvalidInput("k_max must be at least 2".into()));
    }
    let e = (1..=k_max)
        .map(|k| iterated_information(sys, k))
        .collect::<Result<Vec<f64>>>()?;
    finish_rate(e)
}

#[cfg(feature = "parallel")]
pub fn entropy_rate_par(sys: &SymbolicSystem, k_max: usize) -> Result<EntropyRate> {
    if k_max < 2 {
        return Err(Error::InvalidInput("k_max must be at least 2".into()));
    }
    let e = (1..=k_max)
        .into_par_iter()
        .map(|k| iterated_information(sys, k))
        .collect::<Result<Vec<f64>>>()?;
    finish_rate(e)
}

fn finish_rate(e: Vec<f64>) -> Result<EntropyRate> {
    let k_max = e.len();
    for i in 1..=k_max {
        for j in i..=k_max {
            if i + j > k_max {
                break;
            }
            let excess = e[i + j - 1] - e[i - 1] - e[j - 1];
            if excess > 1e-9 {
                return Err(Error::Numerical(format!(
                    "subadditivity violated at ({i}, {j}) by {excess:.3e}"
                )));
            }
        }
    }
    let rates: Vec<f64> = e
        .iter()
        .enumerate()
        .map(|(i, v)| v / (i as f64 + 1.0))
        .collect();
    let terminal = rates[k_max - 1];
    Ok(EntropyRate { e, rates, terminal })
}

/// Sum over expanding factors tau_i > 1 of d_i log tau_i.
pub fn stretch_entropy(spec: &[(f64, usize)]) -> Result<f64> {
    let mut h = 0.0;
    for &(tau, d) in spec {
        if !(tau > 0.0) || !tau.is_finite() || d < 1 {
            return Err(Error::InvalidInput(format!("bad stretch entry ({tau}, {d})")));
        }
        if tau > 1.0 {
            h += d as f64 * tau.ln();
        }
    }
    Ok(h)
}

/// Entropy of right translation by g: log of the Jacobian of Ad g on the
/// expanding horospherical subalgebra. Zero when the whole Ad spectrum sits
/// on the unit circle (unipotent or elliptic g).
pub fn translation_entropy(alg: &LieAlgebraPresentation, g: &Mat) -> Result<f64> {
    let ad = alg.ad_group(g)?;
    let eigs = crate::mat::complex_eigs(&ad)
        .ok_or_else(|| Error::Numerical("eigenvalue iteration did not converge".into()))?;
    if eigs.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-8) {
        return Ok(0.0);
    }
    let w = horospherical_subalgebra(alg, g)?;
    log_jacobian(alg, g, &w)
}
