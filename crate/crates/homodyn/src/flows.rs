//! Linear flows on tori and the geodesic/horocycle flows on the modular
//! quotient, with orbit-closure detection, time/space averages, and
//! cusp-excursion statistics.
//!
//! Group integration is exact (closed-form a^dt, u^dt); only reduction and
//! averaging are approximate. Orbits re-reduce every step so representative
//! entries stay bounded.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::hyperbolic::{reduce_coset, HPoint, ReducedCoset};
use crate::mat::{a_mat, u_mat, IMat2, Mat};

#[derive(Debug, Clone)]
pub struct TorusState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

fn fract01(t: f64) -> f64 {
    let f = t.fract();
    if f < 0.0 {
        f + 1.0
    } else {
        f
    }
}

impl TorusState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x.len() != v.len() {
            return Err(Error::InvalidInput(
                "point and direction must have equal positive dimension".into(),
            ));
        }
        if x.iter().chain(&v).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite torus data".into()));
        }
        Ok(TorusState {
            x: x.into_iter().map(fract01).collect(),
            v,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

pub fn torus_step(s: &TorusState, t: f64) -> TorusState {
    TorusState {
        x: s.x
            .iter()
            .zip(&s.v)
            .map(|(x, v)| fract01(x + t * v))
            .collect(),
        v: s.v.clone(),
    }
}

#[derive(Debug, Clone)]
pub struct TorusClosure {
    pub dim: usize,
    pub relations: Vec<Vec<i64>>,
    /// Always true: rational independence is undecidable from floats; the
    /// answer is relative to the declared bound and tolerance.
    pub heuristic: bool,
}

fn rank_of(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j] as f64);
    m.svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > 1e-9)
        .count()
}

/// Exhaustive search for integer relations m with |m . v| < tol and
/// max-norm at most h. Returns an independent set collected by increasing
/// shell, then lexicographic order, sign-normalized.
pub fn torus_orbit_closure(v: &[f64], h: i64, tol: f64) -> Result<TorusClosure> {
    let n = v.len();
    if n == 0 || v.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("bad direction vector".into()));
    }
    if h < 1 || !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidInput("need bound >= 1 and tol > 0".into()));
    }
    let mut relations: Vec<Vec<i64>> = Vec::new();
    for shell in 1..=h {
        let mut m = vec![-shell; n];
        loop {
            let on_shell = m.iter().any(|c| c.abs() == shell);
            if on_shell {
                // sign-normalize: first nonzero positive
                let lead = m.iter().find(|c| **c != 0).copied().unwrap_or(0);
                if lead > 0 {
                    let dot: f64 = m.iter().zip(v).map(|(a, b)| *a as f64 * b).sum();
                    if dot.abs() < tol {
                        let mut cand = relations.clone();
                        cand.push(m.clone());
                        if rank_of(&cand) > rank_of(&relations) {
                            relations.push(m.clone());
                        }
                    }
                }
            }
            // odometer over [-shell, shell]^n, lexicographic
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if m[i] < shell {
                    m[i] += 1;
                    for c in m.iter_mut().skip(i + 1) {
                        *c = -shell;
                    }
                    break;
                }
                if i == 0 {
                    m.clear();
                    break;
                }
            }
            if m.is_empty() {
                break;
            }
        }
        if relations.len() == n {
            break;
        }
    }
    // canonical basis of the relation lattice: the raw scan can return a
    // skew pair like (0,1),(1,-1) where (1,0),(0,1) generates the same
    // lattice with smaller support
    crate::mat::hermite_rows(&mut relations);
    let dim = n - relations.len();
    Ok(TorusClosure {
        dim,
        relations,
        heuristic: true,
    })
}

/// Trapezoidal time average of f along the torus flow from s over [0, T].
pub fn time_average_torus(
    s: &TorusState,
    t_max: f64,
    dt: f64,
    f: impl Fn(&[f64]) -> f64,
) -> Result<f64> {
    if !(dt > 0.0) || !(t_max >= dt) {
        return Err(Error::InvalidInput("need dt > 0 and T >= dt".into()));
    }
    let steps = (t_max / dt).round() as usize;
    let mut acc = 0.0;
    let mut prev = f(&s.x);
    for k in 1..=steps {
        let cur = f(&torus_step(s, k as f64 * dt).x);
        acc += 0.5 * (prev + cur);
        prev = cur;
    }
    Ok(acc / steps as f64)
}

#[derive(Debug, Clone)]
pub struct OccupancyCheck {
    pub subtorus_boxes: usize,
    pub complement_boxes: usize,
    pub visited_subtorus: usize,
    pub visited_complement: usize,
    pub subtorus_occupancy: f64,
    pub complement_occupancy: f64,
}

/// Box-counting consistency check: the orbit of s should visit (nearly) all
/// boxes meeting the subtorus cut out by the relations through s.x, and
/// (nearly) none of the others. The grid is anchored at s.x so the subtorus
/// passes through the center of box 0 and never grazes box boundaries.
pub fn torus_box_occupancy(
    s: &TorusState,
    relations: &[Vec<i64>],
    t_max: f64,
    dt: f64,
    boxes_per_dim: usize,
) -> Result<OccupancyCheck> {
    let n = s.dim();
    let b = boxes_per_dim;
    if b < 2 || b.pow(n as u32) > 4_000_000 {
        return Err(Error::InvalidInput("unreasonable box count".into()));
    }
    let box_of = |x: &[f64]| -> Vec<usize> {
        x.iter()
            .zip(&s.x)
            .map(|(c, x0)| (((c - x0) * b as f64 + 0.5).floor() as i64).rem_euclid(b as i64) as usize)
            .collect()
    };
    let on_subtorus = |k: &[usize]| -> bool {
        // box centers in coordinates relative to s.x
        let c: Vec<f64> = k.iter().map(|ki| *ki as f64 / b as f64).collect();
        relations.iter().all(|m| {
            let slack = m.iter().map(|mi| mi.abs()).sum::<i64>() as f64 / (2.0 * b as f64);
            let d: f64 = m.iter().zip(&c).map(|(mi, ci)| *mi as f64 * ci).sum();
            let wrapped = d - d.round();
            wrapped.abs() <= slack + 1e-9
        })
    };

    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let steps = (t_max / dt).round() as usize;
    for k in 0..=steps {
        visited.insert(box_of(&torus_step(s, k as f64 * dt).x));
    }

    let mut sub = 0usize;
    let mut comp = 0usize;
    let mut vis_sub = 0usize;
    let mut vis_comp = 0usize;
    let mut k = vec![0usize; n];
    loop {
        let on = on_subtorus(&k);
        let vis = visited.contains(&k);
        if on {
            sub += 1;
            if vis {
                vis_sub += 1;
            }
        } else {
            comp += 1;
            if vis {
                vis_comp += 1;
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                k.clear();
                break;
            }
            i -= 1;
            k[i] += 1;
            if k[i] < b {
                break;
            }
            k[i] = 0;
            if i == 0 {
                k.clear();
                break;
            }
        }
        if k.is_empty() {
            break;
        }
    }
    Ok(OccupancyCheck {
        subtorus_boxes: sub,
        complement_boxes: comp,
        visited_subtorus: vis_sub,
        visited_complement: vis_comp,
        subtorus_occupancy: vis_sub as f64 / sub.max(1) as f64,
        complement_occupancy: vis_comp as f64 / comp.max(1) as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    Geodesic,
    Horocycle,
}

impl FlowKind {
    pub fn step_matrix(self, dt: f64) -> Mat {
        match self {
            FlowKind::Geodesic => a_mat(dt),
            FlowKind::Horocycle => u_mat(dt),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitSample {
    pub kind: FlowKind,
    pub times: Vec<f64>,
    pub points: Vec<HPoint>,
}

/// Stream the flow from g0: exact right-multiplication by the step matrix,
/// re-reduction every step, callback per sample (including t = 0).
pub fn flow_scan(
    g0: &Mat,
    kind: FlowKind,
    t_max: f64,
    dt: f64,
    mut f: impl FnMut(f64, &ReducedCoset),
) -> Result<()> {
    if !(dt > 0.0) || !(t_max >= dt || t_max == 0.0) {
        return Err(Error::InvalidInput("need dt > 0 and T >= dt (or T = 0)".into()));
    }
    let step = kind.step_matrix(dt);
    let mut rc = reduce_coset(g0)?;
    f(0.0, &rc);
    let steps = (t_max / dt).round() as usize;
    for k in 1..=steps {
        let g = &rc.rep * &step;
        rc = reduce_coset(&g)?;
        f(k as f64 * dt, &rc);
    }
    Ok(())
}

pub fn flow_orbit(g0: &Mat, kind: FlowKind, t_max: f64, dt: f64) -> Result<OrbitSample> {
    let mut times = Vec::new();
    let mut points = Vec::new();
    flow_scan(g0, kind, t_max, dt, |t, rc| {
        times.push(t);
        points.push(rc.point);
    })?;
    Ok(OrbitSample { kind, times, points })
}

/// Trapezoidal time average of f over the sampled orbit.
pub fn time_average_flow(orbit: &OrbitSample, f: impl Fn(HPoint) -> f64) -> Result<f64> {
    let n = orbit.points.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty orbit".into()));
    }
    if n == 1 {
        return Ok(f(orbit.points[0]));
    }
    let mut acc = 0.0;
    let mut span = 0.0;
    for i in 1..n {
        let h = orbit.times[i] - orbit.times[i - 1];
        acc += 0.5 * h * (f(orbit.points[i - 1]) + f(orbit.points[i]));
        span += h;
    }
    Ok(acc / span)
}

/// Fraction of sampled times spent above height h (cusp excursion fraction).
pub fn nondivergence_fraction(orbit: &OrbitSample, h: f64) -> Result<f64> {
    if orbit.points.is_empty() {
        return Err(Error::InvalidInput("empty orbit".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput("height must be positive".into()));
    }
    let above = orbit.points.iter().filter(|p| p.y > h).count();
    Ok(above as f64 / orbit.points.len() as f64)
}

/// Smoothed indicator of { y <= c }: 1 below c - w, 0 above c + w, cubic
/// ramp in between.
pub fn smoothed_height_indicator(c: f64, w: f64) -> impl Fn(HPoint) -> f64 + Copy + Send + Sync {
    move |p: HPoint| {
        let t = ((p.y - (c - w)) / (2.0 * w)).clamp(0.0, 1.0);
        1.0 - t * t * (3.0 - 2.0 * t)
    }
}

/// Average of f over F with respect to the normalized hyperbolic area,
/// by nested quadrature (inner variable u = 1/y). f must be bounded and
/// must vanish as y -> infinity.
pub fn space_average(f: &dyn Fn(HPoint) -> f64) -> f64 {
    let inner_n = 512;
    let outer_n = 256;
    let simpson = |g: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize| -> f64 {
        let h = (b - a) / n as f64;
        let mut s = g(a) + g(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(a + h * k as f64);
        }
        s * h / 3.0
    };
    let inner = |x: f64| -> f64 {
        let umax = 1.0 / (1.0 - x * x).sqrt();
        simpson(
            &|u: f64| {
                let y = 1.0 / u.max(1e-12);
                f(HPoint { x, y })
            },
            0.0,
            umax,
            inner_n,
        )
    };
    let mass = simpson(&|x| 1.0 / (1.0 - x * x).sqrt(), -0.5, 0.5, outer_n);
    simpson(&inner, -0.5, 0.5, outer_n) / mass
}

pub struct Observable {
    pub name: String,
    pub f: Box<dyn Fn(HPoint) -> f64 + Send + Sync>,
}

impl Observable {
    pub fn height_indicator(c: f64, w: f64) -> Self {
        Observable {
            name: format!("ind_y_le_{c}"),
            f: Box::new(smoothed_height_indicator(c, w)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquidistRow {
    pub t: f64,
    pub time_avgs: Vec<f64>,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct EquidistReport {
    pub names: Vec<String>,
    pub space_avgs: Vec<f64>,
    pub rows: Vec<EquidistRow>,
}

/// Time averages along one orbit at several horizon times, against
/// quadrature space averages. Single streaming pass to the largest horizon.
pub fn equidistribution_report(
    g0: &Mat,
    kind: FlowKind,
    obs: &[Observable],
    t_list: &[f64],
    dt: f64,
) -> Result<EquidistReport> {
    if obs.is_empty() || t_list.is_empty() {
        return Err(Error::InvalidInput("need observables and horizons".into()));
    }
    if t_list.windows(2).any(|w| w[1] <= w[0]) || t_list[0] < dt {
        return Err(Error::InvalidInput(
            "horizons must be increasing and at least dt".into(),
        ));
    }
    let space_avgs: Vec<f64> = obs.iter().map(|o| space_average(&o.f)).collect();
    let t_max = *t_list.last().unwrap();

    let mut rows: Vec<EquidistRow> = Vec::new();
    let mut next_cp = 0usize;
    let mut acc = vec![0.0f64; obs.len()];
    let mut prev: Vec<f64> = Vec::new();
    let mut prev_t = 0.0f64;
    flow_scan(g0, kind, t_max, dt, |t, rc| {
        let cur: Vec<f64> = obs.iter().map(|o| (o.f)(rc.point)).collect();
        if t > 0.0 {
            let h = t - prev_t;
            for (a, (p, c)) in acc.iter_mut().zip(prev.iter().zip(&cur)) {
                *a += 0.5 * h * (p + c);
            }
        }
        prev = cur;
        prev_t = t;
        while next_cp < t_list.len() && t + 0.5 * dt >= t_list[next_cp] {
            let avgs: Vec<f64> = acc.iter().map(|a| a / t).collect();
            let devs: Vec<f64> = avgs
                .iter()
                .zip(&space_avgs)
                .map(|(a, s)| (a - s).abs())
                .collect();
            let maxd = devs.iter().cloned().fold(0.0, f64::max);
            rows.push(EquidistRow {
                t: t_list[next_cp],
                time_avgs: avgs,
                deviations: devs,
                max_deviation: maxd,
            });
            next_cp += 1;
        }
    })?;
    Ok(EquidistReport {
        names: obs.iter().map(|o| o.name.clone()).collect(),
        space_avgs,
        rows,
    })
}

/// Basepoint whose geodesic orbit is periodic: g0 diagonalizes gamma
/// (g0^{-1} gamma g0 = a^{l/2}, det g0 = 1) and the returned period is
/// l = 2 log lambda with lambda the leading eigenvalue of gamma.
pub fn periodic_geodesic_basepoint(gamma: &IMat2) -> Result<(Mat, f64)> {
    if gamma.det() != 1 {
        return Err(Error::InvalidInput("gamma must lie in SL(2,Z)".into()));
    }
    let [p, q, r, s] = gamma.e;
    let tr = (p + s) as f64;
    if tr <= 2.0 {
        return Err(Error::NotHyperbolic);
    }
    let disc = (tr * tr - 4.0).sqrt();
    let lam = (tr + disc) / 2.0;
    let eigvec = |l: f64| -> (f64, f64) {
        // rows of gamma - l I are proportional; take a nonzero kernel vector
        let (a, b, c, d) = (p as f64 - l, q as f64, r as f64, s as f64 - l);
        if a.abs().max(b.abs()) >= c.abs().max(d.abs()) {
            (b, -a)
        } else {
            (d, -c)
        }
    };
    let (x1, y1) = eigvec(lam);
    let (x2, y2) = eigvec(1.0 / lam);
    let n1 = (x1 * x1 + y1 * y1).sqrt();
    let n2 = (x2 * x2 + y2 * y2).sqrt();
    let mut g0 = Mat::from_row_slice(2, 2, &[x1 / n1, x2 / n2, y1 / n1, y2 / n2]);
    let mut det = g0[(0, 0)] * g0[(1, 1)] - g0[(0, 1)] * g0[(1, 0)];
    if det < 0.0 {
        g0[(0, 1)] = -g0[(0, 1)];
        g0[(1, 1)] = -g0[(1, 1)];
        det = -det;
    }
    if det < 1e-12 {
        return Err(Error::Numerical("eigenvectors nearly parallel".into()));
    }
    g0 /= det.sqrt();
    Ok((g0, 2.0 * lam.ln()))
}
