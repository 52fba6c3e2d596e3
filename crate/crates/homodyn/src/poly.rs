//! Real polynomial utilities: evaluation, derivative, real roots via the
//! companion matrix, and sup-norms over intervals.

use nalgebra::DMatrix;

/// Coefficients in ascending order: p(t) = c[0] + c[1] t + ... + c[d] t^d.
pub fn eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * t + k)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &k)| i as f64 * k)
        .collect()
}

/// Strip trailing coefficients that are negligible against the largest one.
pub fn trim(c: &[f64]) -> &[f64] {
    let mut d = c.len();
    let scale = c.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    while d > 1 && c[d - 1].abs() <= 1e-14 * scale {
        d -= 1;
    }
    &c[..d]
}

/// All real roots, with multiplicity, sorted ascending. Zero roots are
/// split off first so the companion matrix never degenerates into an exact
/// nilpotent Jordan block (on which the QR iteration cycles), low degrees
/// are closed-form, and the rest goes through a capped Schur iteration
/// polished by a few Newton steps. Complex pairs are discarded.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    let c = trim(c);
    let scale = c.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    let mut at_zero = 0;
    while at_zero + 1 < c.len() && c[at_zero].abs() <= 1e-30 * scale {
        at_zero += 1;
    }
    let c = &c[at_zero..];
    let mut out = vec![0.0; at_zero];
    let d = c.len() - 1;
    if d == 1 {
        out.push(-c[0] / c[1]);
    } else if d == 2 {
        out.extend(quadratic(c[2], c[1], c[0]));
    } else if d >= 3 {
        let lead = c[d];
        let mut comp = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            comp[(i, d - 1)] = -c[i] / lead;
        }
        match crate::mat::complex_eigs(&comp) {
            Some(eigs) => {
                let escale: f64 = eigs.iter().map(|z| z.norm()).fold(1.0, f64::max);
                let dc = derivative(c);
                for z in eigs.iter() {
                    if z.im.abs() > 1e-8 * escale {
                        continue;
                    }
                    let mut r = z.re;
                    for _ in 0..4 {
                        let f = eval(c, r);
                        let df = eval(&dc, r);
                        if df.abs() > 1e-300 {
                            let step = f / df;
                            if step.abs() < 1.0 + r.abs() {
                                r -= step;
                            }
                        }
                    }
                    out.push(r);
                }
            }
            None => out.extend(scan_roots(c)),
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Stable quadratic formula; empty when the discriminant is negative.
fn quadratic(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return vec![];
    }
    let s = if c1 >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (c1 + s * disc.sqrt());
    if q.abs() < 1e-300 {
        return vec![0.0, 0.0];
    }
    vec![q / c2, c0 / q]
}

/// Last-resort root isolation by sign changes over the Cauchy bound. Only
/// odd-multiplicity roots are found, which is all the capped iteration can
/// realistically miss.
fn scan_roots(c: &[f64]) -> Vec<f64> {
    let d = c.len() - 1;
    let bound = 1.0 + c[..d].iter().map(|x| x.abs()).fold(0.0, f64::max) / c[d].abs();
    let n = 40_000;
    let mut out = Vec::new();
    let mut prev_t = -bound;
    let mut prev_v = eval(c, prev_t);
    for i in 1..=n {
        let t = -bound + 2.0 * bound * i as f64 / n as f64;
        let v = eval(c, t);
        if prev_v == 0.0 {
            out.push(prev_t);
        } else if prev_v * v < 0.0 {
            let (mut a, mut b, mut fa) = (prev_t, t, prev_v);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = eval(c, m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev_t = t;
        prev_v = v;
    }
    if prev_v == 0.0 {
        out.push(prev_t);
    }
    out
}

/// sup of |p| over [lo, hi], exact up to root-polish error: checked at the
/// endpoints and at the interior critical points.
pub fn sup_abs_on(c: &[f64], lo: f64, hi: f64) -> f64 {
    let mut best = eval(c, lo).abs().max(eval(c, hi).abs());
    for r in real_roots(&derivative(c)) {
        if r > lo && r < hi {
            best = best.max(eval(c, r).abs());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_cubic() {
        // (t-1)(t+2)(t-3) = t^3 - 2t^2 - 5t + 6
        let c = [6.0, -5.0, -2.0, 1.0];
        let r = real_roots(&c);
        assert_eq!(r.len(), 3);
        assert!((r[0] + 2.0).abs() < 1e-9);
        assert!((r[1] - 1.0).abs() < 1e-9);
        assert!((r[2] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn complex_pair_discarded() {
        // t^2 + 1
        assert!(real_roots(&[1.0, 0.0, 1.0]).is_empty());
    }

    #[test]
    fn monomial_roots_terminate() {
        // companion of t^7 is an exact nilpotent Jordan block, the classic
        // input on which an unbounded QR iteration cycles
        let r = real_roots(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 8.0]);
        assert_eq!(r.len(), 7);
        assert!(r.iter().all(|x| x.abs() < 1e-12));
        let mut c = vec![0.0; 9];
        c[8] = 1.0;
        let s = sup_abs_on(&c, 0.0, 1.0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sup_on_interval() {
        // 2t^2 - 1 on [-1, 1]: sup |.| = 1 at the ends and at t = 0
        let s = sup_abs_on(&[-1.0, 0.0, 2.0], -1.0, 1.0);
        assert!((s - 1.0).abs() < 1e-12);
    }
}
