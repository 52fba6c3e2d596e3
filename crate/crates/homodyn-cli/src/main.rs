//! Command-line front end: every library module behind a subcommand, CSV on
//! stdout (or --out), deterministic for a fixed argv. Exit codes: 0 ok,
//! 2 validation, 3 numerical failure.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use homodyn::entropy::{
    entropy_rate, stretch_entropy, translation_entropy, FinitePartition, SymbolicSystem,
};
use homodyn::flows::{
    equidistribution_report, flow_orbit, nondivergence_fraction, time_average_torus,
    torus_box_occupancy, torus_orbit_closure, FlowKind, Observable, TorusState,
};
use homodyn::group_algebra::{
    compute_s_tilde, real_jordan_decompose, s_tilde_membership_residual, weight_decomposition,
    LieAlgebraPresentation,
};
use homodyn::mat::Mat;
use homodyn::quadforms::parse_form;
use homodyn::shearing::{
    first_divergence, joint_transverse_divergence, polynomial_extension_factor,
    unipotent_displacement, JointVerdict,
};
use homodyn::{Error, Result};

#[derive(Parser)]
#[command(name = "homodyn", version, about = "homogeneous-dynamics laboratory")]
struct Cli {
    /// write the CSV here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// geodesic and horocycle flows on the modular surface
    Flow {
        #[command(subcommand)]
        cmd: FlowCmd,
    },
    /// linear flows on tori
    Torus {
        #[command(subcommand)]
        cmd: TorusCmd,
    },
    /// polynomial divergence of unipotent orbits
    Shear {
        #[command(subcommand)]
        cmd: ShearCmd,
    },
    /// partition entropy and entropy of matrix translations
    Entropy {
        #[command(subcommand)]
        cmd: EntropyCmd,
    },
    /// values of quadratic forms on the integer lattice
    Qform {
        #[command(subcommand)]
        cmd: QformCmd,
    },
    /// real Jordan decomposition of an invertible matrix
    Jordan {
        /// row-major square matrix, comma-separated
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// the S-tilde subalgebra of a unipotent direction
    Stilde {
        /// built-in algebra name (sl2, sl3, gl3, sl2sl2, sl2sl2z)
        #[arg(long)]
        algebra: String,
        /// coordinates of the diagonal element a
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// coordinates of a generator of U; repeat for a larger U
        #[arg(long, required = true, allow_hyphen_values = true)]
        u: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Horocycle,
    Geodesic,
}

impl KindArg {
    fn kind(self) -> FlowKind {
        match self {
            KindArg::Horocycle => FlowKind::Horocycle,
            KindArg::Geodesic => FlowKind::Geodesic,
        }
    }
    fn name(self) -> &'static str {
        match self {
            KindArg::Horocycle => "horocycle",
            KindArg::Geodesic => "geodesic",
        }
    }
}

#[derive(Subcommand)]
enum FlowCmd {
    /// sample the orbit of g0 and report reduced coordinates
    Orbit(FlowOrbitArgs),
    /// time averages against quadrature space averages at several horizons
    Equidist(FlowEquidistArgs),
    /// fraction of time the orbit spends above a height cut
    Nondiv(FlowNondivArgs),
}

#[derive(Args)]
struct FlowOrbitArgs {
    /// starting matrix, row-major a,b,c,d
    #[arg(long, default_value = "1,0,0,1", allow_hyphen_values = true)]
    g0: String,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    tmax: f64,
    #[arg(long)]
    dt: f64,
}

#[derive(Args)]
struct FlowEquidistArgs {
    #[arg(long, default_value = "1,0,0,1", allow_hyphen_values = true)]
    g0: String,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// increasing horizon times, comma-separated
    #[arg(long)]
    tlist: String,
    #[arg(long)]
    dt: f64,
    /// height cuts c for the smoothed indicators of {y <= c}
    #[arg(long, default_value = "2,1.5")]
    levels: String,
    /// smoothing half-width of the indicators
    #[arg(long, default_value_t = 0.1)]
    width: f64,
}

#[derive(Args)]
struct FlowNondivArgs {
    #[arg(long, default_value = "1,0,0,1", allow_hyphen_values = true)]
    g0: String,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    tmax: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    height: f64,
}

#[derive(Subcommand)]
enum TorusCmd {
    /// integer relations satisfied by the direction vector, and the
    /// dimension of the orbit closure
    Closure(TorusClosureArgs),
    /// time average of cos(2 pi m.x) along the orbit
    Average(TorusAverageArgs),
}

#[derive(Args)]
struct TorusClosureArgs {
    /// direction vector, comma-separated; sqrt2/sqrt3/sqrt5 tokens allowed
    #[arg(long, allow_hyphen_values = true)]
    v: String,
    /// search height for relation coefficients
    #[arg(long)]
    height: i64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// also run the box-occupancy check with this many boxes per axis
    #[arg(long)]
    boxes: Option<usize>,
    #[arg(long, default_value_t = 200.0)]
    tmax: f64,
    #[arg(long, default_value_t = 0.001)]
    dt: f64,
}

#[derive(Args)]
struct TorusAverageArgs {
    #[arg(long, allow_hyphen_values = true)]
    v: String,
    /// starting point; defaults to the origin
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// integer character m, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    mode: String,
    #[arg(long)]
    tmax: f64,
    #[arg(long)]
    dt: f64,
}

#[derive(Subcommand)]
enum ShearCmd {
    /// entry polynomials of u^{-t} q u^t - I, optionally with the first
    /// time an entry reaches a threshold
    Table(ShearTableArgs),
    /// largest horizon extension factor keeping the sup within (1+delta)
    Extension(ShearExtensionArgs),
    /// transverse divergence of two nearby horocycle points
    Joint(ShearJointArgs),
}

#[derive(Args)]
struct ShearTableArgs {
    /// perturbation matrix q, row-major a,b,c,d
    #[arg(long, allow_hyphen_values = true)]
    q: String,
    /// divergence threshold; adds the first-divergence columns
    #[arg(long)]
    l: Option<f64>,
}

#[derive(Args)]
struct ShearExtensionArgs {
    /// polynomial coefficients, ascending
    #[arg(long, allow_hyphen_values = true)]
    coeffs: String,
    /// interval start
    #[arg(long, allow_negative_numbers = true)]
    k: f64,
    /// interval length
    #[arg(long)]
    len: f64,
    #[arg(long)]
    delta: f64,
}

#[derive(Args)]
struct ShearJointArgs {
    #[arg(long, allow_negative_numbers = true)]
    r1: f64,
    #[arg(long, allow_negative_numbers = true)]
    r2: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Bernoulli,
    Baker,
    Rotation,
}

#[derive(Subcommand)]
enum EntropyCmd {
    /// iterated information E^k and the rates E^k/k
    Rate(EntropyRateArgs),
    /// entropy of a finite partition from its cell weights
    Partition(EntropyPartitionArgs),
    /// entropy from expansion factors with multiplicities
    Stretch(EntropyStretchArgs),
    /// entropy of translation by a matrix, via the expanding Jacobian
    Translation(EntropyTranslationArgs),
}

#[derive(Args)]
struct EntropyRateArgs {
    #[arg(long, value_enum)]
    system: SystemArg,
    /// bernoulli weight
    #[arg(long)]
    p: Option<f64>,
    /// rotation number
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    kmax: usize,
}

#[derive(Args)]
struct EntropyPartitionArgs {
    /// cell weights, comma-separated, summing to 1
    #[arg(long)]
    weights: String,
}

#[derive(Args)]
struct EntropyStretchArgs {
    /// factor:multiplicity pairs, comma-separated, e.g. 2.718:1,0.5:2
    #[arg(long)]
    factors: String,
}

#[derive(Args)]
struct EntropyTranslationArgs {
    #[arg(long)]
    algebra: String,
    /// row-major square matrix in the ambient representation
    #[arg(long, allow_hyphen_values = true)]
    matrix: String,
}

#[derive(Subcommand)]
enum QformCmd {
    /// first lattice vector with |Q(v) - r| < eps in the sup-norm box
    Search(QformSearchArgs),
    /// exact count of lattice points with Q in [a, b] inside a ball
    Count(QformCountArgs),
    /// count/volume ratio table with Monte-Carlo volumes and a fitted
    /// growth exponent
    Ratio(QformRatioArgs),
    /// running minimum of |Q| for the two-variable counterexample form
    Gap(QformGapArgs),
    /// signature (p, q, zero) of a form
    Signature(QformSignatureArgs),
}

#[derive(Args)]
struct QformSearchArgs {
    /// upper triangle of the symmetric matrix; sqrt2/sqrt3/sqrt5 allowed
    #[arg(long, allow_hyphen_values = true)]
    form: String,
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    nbox: i64,
}

#[derive(Args)]
struct QformCountArgs {
    #[arg(long, allow_hyphen_values = true)]
    form: String,
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    #[arg(long)]
    radius: f64,
}

#[derive(Args)]
struct QformRatioArgs {
    #[arg(long, allow_hyphen_values = true)]
    form: String,
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// increasing radii, comma-separated
    #[arg(long)]
    radii: String,
    /// Monte-Carlo samples per radius for the volume estimate
    #[arg(long, default_value_t = 100_000)]
    mc: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct QformGapArgs {
    #[arg(long)]
    rmax: i64,
}

#[derive(Args)]
struct QformSignatureArgs {
    #[arg(long, allow_hyphen_values = true)]
    form: String,
}

// ---------------------------------------------------------------------------
// helpers

/// 12 significant digits, deterministic
fn fmt(x: f64) -> String {
    format!("{x:.11e}")
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad float '{t}'")))
        })
        .collect()
}

fn parse_ints(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidInput(format!("bad integer '{t}'")))
        })
        .collect()
}

fn parse_matrix(s: &str) -> Result<Mat> {
    let e = parse_floats(s)?;
    let n = (e.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != e.len() {
        return Err(Error::InvalidInput(format!(
            "{} entries do not fill a square matrix",
            e.len()
        )));
    }
    Ok(Mat::from_row_slice(n, n, &e))
}

struct Csv {
    header: String,
    config: String,
    rows: Vec<String>,
}

impl Csv {
    fn new(header: &str, config: String) -> Self {
        Csv {
            header: header.to_string(),
            config: format!("#config: {config}"),
            rows: Vec::new(),
        }
    }
    fn row(&mut self, cells: &[String]) {
        self.rows.push(cells.join(","));
    }
}

fn emit(out: Option<&PathBuf>, csv: &Csv) -> std::io::Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "{}", csv.header);
    let _ = writeln!(text, "{}", csv.config);
    for r in &csv.rows {
        let _ = writeln!(text, "{r}");
    }
    match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

// ---------------------------------------------------------------------------
// subcommand bodies

fn run_flow(cmd: FlowCmd) -> Result<Csv> {
    match cmd {
        FlowCmd::Orbit(a) => {
            let g0 = parse_matrix(&a.g0)?;
            let orbit = flow_orbit(&g0, a.kind.kind(), a.tmax, a.dt)?;
            let mut csv = Csv::new(
                "t,x,y",
                format!(
                    "flow orbit g0={} kind={} tmax={} dt={} seed=0",
                    a.g0,
                    a.kind.name(),
                    fmt(a.tmax),
                    fmt(a.dt)
                ),
            );
            for (t, p) in orbit.times.iter().zip(&orbit.points) {
                csv.row(&[fmt(*t), fmt(p.x), fmt(p.y)]);
            }
            Ok(csv)
        }
        FlowCmd::Equidist(a) => {
            let g0 = parse_matrix(&a.g0)?;
            let t_list = parse_floats(&a.tlist)?;
            let levels = parse_floats(&a.levels)?;
            if levels.is_empty() {
                return Err(Error::InvalidInput("need at least one level".into()));
            }
            let obs: Vec<Observable> = levels
                .iter()
                .map(|c| Observable::height_indicator(*c, a.width))
                .collect();
            let rep = equidistribution_report(&g0, a.kind.kind(), &obs, &t_list, a.dt)?;
            let mut header = String::from("t");
            for n in &rep.names {
                let _ = write!(header, ",avg_{n}");
            }
            for n in &rep.names {
                let _ = write!(header, ",space_{n}");
            }
            for n in &rep.names {
                let _ = write!(header, ",dev_{n}");
            }
            header.push_str(",max_deviation");
            let mut csv = Csv::new(
                &header,
                format!(
                    "flow equidist g0={} kind={} tlist={} dt={} levels={} width={} seed=0",
                    a.g0,
                    a.kind.name(),
                    a.tlist,
                    fmt(a.dt),
                    a.levels,
                    fmt(a.width)
                ),
            );
            for row in &rep.rows {
                let mut cells = vec![fmt(row.t)];
                cells.extend(row.time_avgs.iter().map(|x| fmt(*x)));
                cells.extend(rep.space_avgs.iter().map(|x| fmt(*x)));
                cells.extend(row.deviations.iter().map(|x| fmt(*x)));
                cells.push(fmt(row.max_deviation));
                csv.row(&cells);
            }
            Ok(csv)
        }
        FlowCmd::Nondiv(a) => {
            let g0 = parse_matrix(&a.g0)?;
            let orbit = flow_orbit(&g0, a.kind.kind(), a.tmax, a.dt)?;
            let frac = nondivergence_fraction(&orbit, a.height)?;
            let mut csv = Csv::new(
                "t_max,dt,height,fraction",
                format!(
                    "flow nondiv g0={} kind={} tmax={} dt={} height={} seed=0",
                    a.g0,
                    a.kind.name(),
                    fmt(a.tmax),
                    fmt(a.dt),
                    fmt(a.height)
                ),
            );
            csv.row(&[fmt(a.tmax), fmt(a.dt), fmt(a.height), fmt(frac)]);
            Ok(csv)
        }
    }
}

/// Direction vectors admit the same sqrt tokens as forms.
fn parse_direction(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| homodyn::quadforms::parse_coeff(t))
        .collect()
}

fn run_torus(cmd: TorusCmd) -> Result<Csv> {
    match cmd {
        TorusCmd::Closure(a) => {
            let v = parse_direction(&a.v)?;
            let c = torus_orbit_closure(&v, a.height, a.tol)?;
            let occ = match a.boxes {
                Some(b) => {
                    let s = TorusState::new(vec![0.0; v.len()], v.clone())?;
                    Some(torus_box_occupancy(&s, &c.relations, a.tmax, a.dt, b)?)
                }
                None => None,
            };
            let header = if occ.is_some() {
                "dim,heuristic,relation,subtorus_occupancy,complement_occupancy"
            } else {
                "dim,heuristic,relation"
            };
            let mut csv = Csv::new(
                header,
                format!(
                    "torus closure v={} height={} tol={} boxes={} tmax={} dt={} seed=0",
                    a.v,
                    a.height,
                    fmt(a.tol),
                    a.boxes.map_or("none".into(), |b| b.to_string()),
                    fmt(a.tmax),
                    fmt(a.dt)
                ),
            );
            let occ_cells: Vec<String> = match &occ {
                Some(o) => vec![fmt(o.subtorus_occupancy), fmt(o.complement_occupancy)],
                None => Vec::new(),
            };
            let rels: Vec<String> = if c.relations.is_empty() {
                vec![String::new()]
            } else {
                c.relations
                    .iter()
                    .map(|m| {
                        m.iter()
                            .map(|x| x.to_string())
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect()
            };
            for rel in rels {
                let mut cells = vec![c.dim.to_string(), (c.heuristic as u8).to_string(), rel];
                cells.extend(occ_cells.iter().cloned());
                csv.row(&cells);
            }
            Ok(csv)
        }
        TorusCmd::Average(a) => {
            let v = parse_direction(&a.v)?;
            let x0 = match &a.x0 {
                Some(s) => parse_direction(s)?,
                None => vec![0.0; v.len()],
            };
            let m = parse_ints(&a.mode)?;
            if m.len() != v.len() {
                return Err(Error::InvalidInput(
                    "mode and direction dimensions differ".into(),
                ));
            }
            let s = TorusState::new(x0, v)?;
            let mode = m.clone();
            let avg = time_average_torus(&s, a.tmax, a.dt, move |x| {
                let phase: f64 = mode.iter().zip(x).map(|(mi, xi)| *mi as f64 * xi).sum();
                (std::f64::consts::TAU * phase).cos()
            })?;
            let mut csv = Csv::new(
                "t_max,dt,mode,average",
                format!(
                    "torus average v={} x0={} mode={} tmax={} dt={} seed=0",
                    a.v,
                    a.x0.as_deref().unwrap_or("origin"),
                    a.mode,
                    fmt(a.tmax),
                    fmt(a.dt)
                ),
            );
            let mode_str = m
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            csv.row(&[fmt(a.tmax), fmt(a.dt), mode_str, fmt(avg)]);
            Ok(csv)
        }
    }
}

fn run_shear(cmd: ShearCmd) -> Result<Csv> {
    match cmd {
        ShearCmd::Table(a) => {
            let q = parse_matrix(&a.q)?;
            let d = unipotent_displacement(&q)?;
            let fd = match a.l {
                Some(l) => Some(first_divergence(&d, l)?),
                None => None,
            };
            let header = if fd.is_some() {
                "row,col,c0,c1,c2,first,t_star"
            } else {
                "row,col,c0,c1,c2"
            };
            let mut csv = Csv::new(
                header,
                format!(
                    "shear table q={} l={} seed=0",
                    a.q,
                    a.l.map_or("none".into(), fmt)
                ),
            );
            for i in 0..2 {
                for j in 0..2 {
                    let c = &d.e[i][j];
                    let mut cells = vec![
                        (i + 1).to_string(),
                        (j + 1).to_string(),
                        fmt(c[0]),
                        fmt(c[1]),
                        fmt(c[2]),
                    ];
                    if let Some(fd) = &fd {
                        let first = (fd.row == i + 1 && fd.col == j + 1) as u8;
                        cells.push(first.to_string());
                        cells.push(fmt(fd.t_star));
                    }
                    csv.row(&cells);
                }
            }
            Ok(csv)
        }
        ShearCmd::Extension(a) => {
            let c = parse_floats(&a.coeffs)?;
            let eps = polynomial_extension_factor(&c, a.k, a.len, a.delta)?;
            let mut csv = Csv::new(
                "k,len,delta,epsilon",
                format!(
                    "shear extension coeffs={} k={} len={} delta={} seed=0",
                    a.coeffs,
                    fmt(a.k),
                    fmt(a.len),
                    fmt(a.delta)
                ),
            );
            csv.row(&[fmt(a.k), fmt(a.len), fmt(a.delta), fmt(eps)]);
            Ok(csv)
        }
        ShearCmd::Joint(a) => {
            let (d1, d2, verdict) = joint_transverse_divergence(a.r1, a.r2)?;
            let vname = match verdict {
                JointVerdict::Diagonal => "diagonal",
                JointVerdict::OffDiagonal => "off_diagonal",
            };
            let mut csv = Csv::new(
                "factor,row,col,c0,c1,c2,verdict",
                format!("shear joint r1={} r2={} seed=0", fmt(a.r1), fmt(a.r2)),
            );
            for (idx, d) in [&d1, &d2].iter().enumerate() {
                for i in 0..2 {
                    for j in 0..2 {
                        let c = &d.e[i][j];
                        csv.row(&[
                            (idx + 1).to_string(),
                            (i + 1).to_string(),
                            (j + 1).to_string(),
                            fmt(c[0]),
                            fmt(c[1]),
                            fmt(c[2]),
                            vname.to_string(),
                        ]);
                    }
                }
            }
            Ok(csv)
        }
    }
}

fn run_entropy(cmd: EntropyCmd) -> Result<Csv> {
    match cmd {
        EntropyCmd::Rate(a) => {
            let (sys, sys_cfg) = match (a.system, a.p, a.alpha) {
                (SystemArg::Bernoulli, Some(p), None) => {
                    (SymbolicSystem::Bernoulli(p), format!("bernoulli p={}", fmt(p)))
                }
                (SystemArg::Baker, None, None) => (SymbolicSystem::Baker, "baker".to_string()),
                (SystemArg::Rotation, None, Some(al)) => {
                    (SymbolicSystem::Rotation(al), format!("rotation alpha={}", fmt(al)))
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "bernoulli takes --p, rotation takes --alpha, baker takes neither".into(),
                    ))
                }
            };
            let r = entropy_rate(&sys, a.kmax)?;
            let mut csv = Csv::new(
                "k,e,rate",
                format!("entropy rate system={sys_cfg} kmax={} seed=0", a.kmax),
            );
            for (i, (e, rate)) in r.e.iter().zip(&r.rates).enumerate() {
                csv.row(&[(i + 1).to_string(), fmt(*e), fmt(*rate)]);
            }
            Ok(csv)
        }
        EntropyCmd::Partition(a) => {
            let w = parse_floats(&a.weights)?;
            let p = FinitePartition::new(w)?;
            let mut csv = Csv::new(
                "m,entropy",
                format!("entropy partition weights={} seed=0", a.weights),
            );
            csv.row(&[p.m().to_string(), fmt(p.entropy())]);
            Ok(csv)
        }
        EntropyCmd::Stretch(a) => {
            let mut spec = Vec::new();
            for tok in a.factors.split(',') {
                let (f, m) = tok
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidInput(format!("bad factor '{tok}'")))?;
                let f: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad factor '{tok}'")))?;
                let m: usize = m
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad multiplicity '{tok}'")))?;
                spec.push((f, m));
            }
            let h = stretch_entropy(&spec)?;
            let mut csv = Csv::new(
                "n_factors,entropy",
                format!("entropy stretch factors={} seed=0", a.factors),
            );
            csv.row(&[spec.len().to_string(), fmt(h)]);
            Ok(csv)
        }
        EntropyCmd::Translation(a) => {
            let alg = LieAlgebraPresentation::builtin(&a.algebra)?;
            let g = parse_matrix(&a.matrix)?;
            let h = translation_entropy(&alg, &g)?;
            let mut csv = Csv::new(
                "algebra,entropy",
                format!(
                    "entropy translation algebra={} matrix={} seed=0",
                    a.algebra, a.matrix
                ),
            );
            csv.row(&[a.algebra.clone(), fmt(h)]);
            Ok(csv)
        }
    }
}

fn run_qform(cmd: QformCmd) -> Result<Csv> {
    match cmd {
        QformCmd::Search(a) => {
            let q = parse_form(&a.form)?;
            let hit = q.oppenheim_search(a.r, a.eps, a.nbox)?;
            let mut csv = Csv::new(
                "found,value,v",
                format!(
                    "qform search form={} r={} eps={} nbox={} seed=0",
                    a.form,
                    fmt(a.r),
                    fmt(a.eps),
                    a.nbox
                ),
            );
            match hit {
                Some(h) => {
                    let v = h
                        .v
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(" ");
                    csv.row(&["1".to_string(), fmt(h.value), v]);
                }
                None => csv.row(&["0".to_string(), String::new(), String::new()]),
            }
            Ok(csv)
        }
        QformCmd::Count(a) => {
            let q = parse_form(&a.form)?;
            let count = q.count_values(a.a, a.b, a.radius)?;
            let mut csv = Csv::new(
                "radius,count",
                format!(
                    "qform count form={} a={} b={} radius={} seed=0",
                    a.form,
                    fmt(a.a),
                    fmt(a.b),
                    fmt(a.radius)
                ),
            );
            csv.row(&[fmt(a.radius), count.to_string()]);
            Ok(csv)
        }
        QformCmd::Ratio(a) => {
            let q = parse_form(&a.form)?;
            let radii = parse_floats(&a.radii)?;
            let table = q.counting_ratio_table(a.a, a.b, &radii, a.mc, a.seed)?;
            let mut csv = Csv::new(
                "radius,count,volume,std_error,ratio,fitted_exponent,expected_exponent",
                format!(
                    "qform ratio form={} a={} b={} radii={} mc={} seed={}",
                    a.form,
                    fmt(a.a),
                    fmt(a.b),
                    a.radii,
                    a.mc,
                    a.seed
                ),
            );
            let fitted = table.fitted_exponent.map_or(String::new(), fmt);
            for r in &table.rows {
                csv.row(&[
                    fmt(r.radius),
                    r.count.to_string(),
                    fmt(r.volume),
                    fmt(r.std_error),
                    r.ratio.map_or(String::new(), fmt),
                    fitted.clone(),
                    fmt(table.expected_exponent),
                ]);
            }
            Ok(csv)
        }
        QformCmd::Gap(a) => {
            let g = homodyn::quadforms::gap_analysis(a.rmax)?;
            let mut csv = Csv::new(
                "radius,min_abs,x,y",
                format!("qform gap rmax={} seed=0", a.rmax),
            );
            for r in &g.table {
                csv.row(&[
                    r.radius.to_string(),
                    fmt(r.min_abs),
                    r.argmin.0.to_string(),
                    r.argmin.1.to_string(),
                ]);
            }
            Ok(csv)
        }
        QformCmd::Signature(a) => {
            let q = parse_form(&a.form)?;
            let (p, m, z) = q.signature();
            let mut csv = Csv::new(
                "p,q,zero",
                format!("qform signature form={} seed=0", a.form),
            );
            csv.row(&[p.to_string(), m.to_string(), z.to_string()]);
            Ok(csv)
        }
    }
}

fn run_jordan(matrix: &str) -> Result<Csv> {
    let g = parse_matrix(matrix)?;
    let n = g.nrows();
    let j = real_jordan_decompose(&g)?;
    let mut header = String::from("component");
    for i in 1..=n {
        for k in 1..=n {
            let _ = write!(header, ",e{i}{k}");
        }
    }
    let mut csv = Csv::new(&header, format!("jordan matrix={matrix} seed=0"));
    for (name, m) in [("unip", &j.unip), ("hyp", &j.hyp), ("ell", &j.ell)] {
        let mut cells = vec![name.to_string()];
        for i in 0..n {
            for k in 0..n {
                cells.push(fmt(m[(i, k)]));
            }
        }
        csv.row(&cells);
    }
    Ok(csv)
}

fn run_stilde(algebra: &str, a: &str, u: &[String]) -> Result<Csv> {
    let alg = LieAlgebraPresentation::builtin(algebra)?;
    let av = parse_floats(a)?;
    if av.len() != alg.dim() {
        return Err(Error::InvalidInput(format!(
            "a has {} coordinates, algebra dimension is {}",
            av.len(),
            alg.dim()
        )));
    }
    let mut u_basis = Vec::new();
    for s in u {
        let c = parse_floats(s)?;
        if c.len() != alg.dim() {
            return Err(Error::InvalidInput(format!(
                "u has {} coordinates, algebra dimension is {}",
                c.len(),
                alg.dim()
            )));
        }
        u_basis.push(homodyn::group_algebra::Coords::from_vec(c));
    }
    let st = compute_s_tilde(&alg, &av, &u_basis)?;
    let w = weight_decomposition(&alg, &av)?;
    let mut header = String::from("k,residual");
    for i in 1..=alg.dim() {
        let _ = write!(header, ",c{i}");
    }
    let mut csv = Csv::new(
        &header,
        format!(
            "stilde algebra={algebra} a={a} u={} seed=0",
            u.join(";")
        ),
    );
    for (k, v) in st.basis.iter().enumerate() {
        let resid = s_tilde_membership_residual(&alg, &w, &u_basis, v);
        let mut cells = vec![(k + 1).to_string(), fmt(resid)];
        cells.extend(v.iter().map(|x| fmt(*x)));
        csv.row(&cells);
    }
    Ok(csv)
}

fn run(cmd: Cmd) -> Result<Csv> {
    match cmd {
        Cmd::Flow { cmd } => run_flow(cmd),
        Cmd::Torus { cmd } => run_torus(cmd),
        Cmd::Shear { cmd } => run_shear(cmd),
        Cmd::Entropy { cmd } => run_entropy(cmd),
        Cmd::Qform { cmd } => run_qform(cmd),
        Cmd::Jordan { matrix } => run_jordan(&matrix),
        Cmd::Stilde { algebra, a, u } => run_stilde(&algebra, &a, &u),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(csv) => match emit(cli.out.as_ref(), &csv) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
