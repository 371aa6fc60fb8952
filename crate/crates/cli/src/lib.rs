//! Command-line front end. [`run`] parses arguments, executes one library
//! operation and renders a JSON or CSV report; the binary only does I/O.

use std::fmt::Display;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mahler::sublevel::{default_y_grid, DEFAULT_SAMPLES};
use mahler::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Which library operations each subcommand exposes.
pub const REGISTRY: &[(&str, &[&str])] = &[
    (
        "measure",
        &[
            "parse_poly",
            "evaluate",
            "specialize",
            "scale",
            "nonzero_coefficient_count",
            "min_coeff_modulus",
            "roots",
            "roots_near_circle",
            "mahler",
            "mahler_univariate",
            "integrate_circle",
            "integrate_torus_qmc",
        ],
    ),
    ("higher", &["higher_mahler"]),
    ("multiple", &["multiple_mahler"]),
    ("mmax", &["generalized_mahler"]),
    ("qr", &["q_of_r", "admissible_sequence"]),
    (
        "converge",
        &[
            "boyd_lawton_table",
            "generalized_table",
            "multiple_table",
            "higher_table",
            "tail_summary",
        ],
    ),
    (
        "sublevel",
        &[
            "sublevel_measure",
            "fit_sublevel_exponent",
            "singular_log_integral",
            "vanishing_report",
        ],
    ),
    ("jtable", &["j_closed_form", "i_closed_form"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "mahler", version, about = "Mahler measures and Boyd-Lawton limits")]
pub struct Cli {
    /// Quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// QMC points per randomization (a power of two).
    #[arg(long, global = true, default_value_t = 1 << 16)]
    pub samples: u64,
    #[arg(long, global = true, default_value_t = 16)]
    pub randomizations: u32,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Jensen's formula for one variable, torus QMC otherwise.
    Auto,
    /// Adaptive quadrature of log|P| on the circle (one variable).
    Circle,
    /// Randomized QMC of log|P| on the torus.
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Classic,
    Higher,
    Multiple,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SublevelOp {
    Measure,
    Fit,
    Integral,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Union,
    Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegrandArg {
    Product,
    Max,
}

#[derive(Debug, Args)]
pub struct PolyList {
    /// Polynomial expressions, e.g. "1 + x + y". Put `--` before an
    /// expression that starts with a minus sign.
    #[arg(required = true)]
    pub polys: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mahler measure of one polynomial, with optional diagnostics.
    Measure {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        #[arg(long, value_enum, default_value_t = Engine::Auto)]
        engine: Engine,
        /// Substitute x_j -> x^{r_j} first.
        #[arg(long, value_delimiter = ',')]
        specialize: Option<Vec<u64>>,
        /// Multiply by a real constant first.
        #[arg(long, allow_hyphen_values = true)]
        scale: Option<f64>,
        /// Also evaluate at these torus angles.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<f64>>,
        /// Also report the roots (one variable only).
        #[arg(long)]
        roots: bool,
        /// Roots within this distance of the circle are listed by angle.
        #[arg(long, default_value_t = 1e-6)]
        band: f64,
    },
    /// Higher Mahler measure m_s.
    Higher {
        #[arg(short)]
        s: u32,
        #[arg(allow_hyphen_values = true)]
        poly: String,
    },
    /// Multiple Mahler measure of several polynomials.
    Multiple(PolyList),
    /// Generalized (max) Mahler measure of several polynomials.
    Mmax(PolyList),
    /// Minimal height q(r) of an integer relation, or an admissible sequence.
    Qr {
        entries: Vec<u64>,
        /// Emit (1, m, ..., m^{n-1}) for each --m instead.
        #[arg(long)]
        sequence: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        m: Vec<u64>,
    },
    /// Measures of P_r along r = (1, m, ..., m^{n-1}) against the target.
    Converge {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(short)]
        s: Option<u32>,
        #[arg(long)]
        mmax: u64,
        #[arg(long, default_value_t = 5)]
        step: u64,
        #[arg(long, default_value_t = 5)]
        tail: usize,
        #[command(flatten)]
        polys: PolyList,
    },
    /// Monte Carlo estimates over sublevel sets {|P| < y}.
    Sublevel {
        #[arg(long, value_enum)]
        op: SublevelOp,
        #[arg(long)]
        y: Option<f64>,
        /// Decreasing list of y; defaults to 10^-1, 10^-1.5, ..., 10^-4.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = ModeArg::Union)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = IntegrandArg::Product)]
        integrand: IntegrandArg,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        mc_samples: u64,
        #[command(flatten)]
        polys: PolyList,
    },
    /// Closed forms J_{l,delta}(y) and I_{l,k}(y) over a grid.
    Jtable {
        #[arg(long, default_value_t = 4)]
        ell_max: u32,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 3, 4])]
        k: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        y: Option<Vec<f64>>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Measure { .. } => "measure",
            Command::Higher { .. } => "higher",
            Command::Multiple(_) => "multiple",
            Command::Mmax(_) => "mmax",
            Command::Qr { .. } => "qr",
            Command::Converge { .. } => "converge",
            Command::Sublevel { .. } => "sublevel",
            Command::Jtable { .. } => "jtable",
        }
    }
}

/// What the binary should print and how it should exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
    pub stderr: String,
    pub output: Option<std::path::PathBuf>,
}

impl Outcome {
    fn input_error(msg: impl Display) -> Self {
        Outcome {
            code: EXIT_INPUT,
            report: String::new(),
            stderr: format!("error: {msg}\n"),
            output: None,
        }
    }
}

/// A computed payload: JSON fields plus CSV header and rows.
struct Payload {
    fields: Map<String, Value>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    converged: bool,
}

impl Payload {
    fn new(fields: Value, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        let Value::Object(fields) = fields else {
            unreachable!("payload fields are an object")
        };
        Payload {
            fields,
            header,
            rows,
            converged: true,
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn parse_all(exprs: &[String]) -> Result<Vec<Polynomial>> {
    exprs.iter().map(|e| parse_poly(e)).collect()
}

const RESULT_HEADER: [&str; 6] = ["value", "error_estimate", "method", "effort", "seed", "converged"];

fn result_row(r: &MeasureResult) -> Vec<String> {
    vec![
        num(r.value),
        num(r.error_estimate),
        r.method.as_str().to_string(),
        r.effort.to_string(),
        r.seed.map(|s| s.to_string()).unwrap_or_default(),
        r.converged.to_string(),
    ]
}

fn measure_payload(r: MeasureResult, mut extra: Map<String, Value>) -> Payload {
    let Value::Object(fields) = json!(r) else {
        unreachable!()
    };
    extra.extend(fields);
    let mut p = Payload::new(Value::Object(extra), RESULT_HEADER.to_vec(), vec![result_row(&r)]);
    p.converged = r.converged;
    p
}

fn poly_fields(polys: &[Polynomial]) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert(
        "polynomials".into(),
        json!(polys.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
    );
    m
}

#[allow(clippy::too_many_arguments)]
fn cmd_measure(
    expr: &str,
    engine: Engine,
    specialize: Option<&[u64]>,
    scale: Option<f64>,
    at: Option<&[f64]>,
    want_roots: bool,
    band: f64,
    cfg: &QuadConfig,
) -> Result<Payload> {
    let mut p = parse_poly(expr)?;
    if let Some(r) = specialize {
        p = p.specialize(r)?;
    }
    if let Some(c) = scale {
        p = p.scale(c)?;
    }
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut extra = Map::new();
    extra.insert("polynomial".into(), json!(p.to_string()));
    extra.insert("nvars".into(), json!(p.nvars()));
    extra.insert("k".into(), json!(p.nonzero_coefficient_count()?));
    extra.insert("min_coeff_modulus".into(), json!(p.min_coeff_modulus()?));
    if let Some(a) = at {
        let z = p.evaluate(&TorusPoint::new(a.to_vec()))?;
        extra.insert("at".into(), json!({ "angles": a, "re": z.re, "im": z.im }));
    }
    if want_roots {
        let rs = roots(&p, mahler::roots::DEFAULT_TOL)?;
        extra.insert(
            "roots".into(),
            json!(rs
                .roots
                .iter()
                .map(|r| json!({
                    "re": r.value.re,
                    "im": r.value.im,
                    "multiplicity": r.multiplicity,
                    "error_bound": r.error_bound,
                }))
                .collect::<Vec<_>>()),
        );
        extra.insert("on_circle_angles".into(), json!(roots_near_circle(&rs, band)));
    }
    let result = match engine {
        Engine::Auto if p.nvars() == 1 => mahler_univariate(&p, mahler::roots::DEFAULT_TOL)?,
        Engine::Auto => mahler(&p, cfg)?,
        Engine::Circle => {
            if p.nvars() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    got: p.nvars(),
                });
            }
            let angles = if p.is_constant() {
                Vec::new()
            } else {
                roots_near_circle(&roots(&p, mahler::roots::DEFAULT_TOL)?, 0.25)
            };
            let ev = Evaluator::new(&p);
            integrate_circle(|t| ev.log_abs(&[t]), &angles, cfg)?
        }
        Engine::Torus => {
            let ev = Evaluator::new(&p);
            integrate_torus_qmc(|a| ev.log_abs(a), p.nvars(), cfg)?
        }
    };
    Ok(measure_payload(result, extra))
}

fn cmd_qr(entries: &[u64], sequence: Option<usize>, m: &[u64]) -> Result<Payload> {
    let header = vec!["r", "q", "witness"];
    let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(";");
    match sequence {
        Some(n) => {
            if m.is_empty() {
                return Err(Error::InvalidParameter("--sequence needs --m values".into()));
            }
            let seq = admissible_sequence(n, m)?;
            let rows = seq
                .iter()
                .map(|r| {
                    let rel = q_of_r(r);
                    vec![
                        r.entries().iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
                        rel.q.to_string(),
                        rel.witness.as_deref().map(join).unwrap_or_default(),
                    ]
                })
                .collect();
            Ok(Payload::new(json!({ "n": n, "sequence": seq }), header, rows))
        }
        None => {
            let r = RVector::new(entries.to_vec())?;
            let rel = q_of_r(&r);
            let row = vec![
                entries.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
                rel.q.to_string(),
                rel.witness.as_deref().map(join).unwrap_or_default(),
            ];
            Ok(Payload::new(
                json!({ "r": entries, "q": rel.q, "witness": rel.witness }),
                header,
                vec![row],
            ))
        }
    }
}

fn cmd_converge(
    kind: Kind,
    s: Option<u32>,
    mmax: u64,
    step: u64,
    tail: usize,
    exprs: &[String],
    cfg: &QuadConfig,
) -> Result<Payload> {
    if step == 0 || mmax < step {
        return Err(Error::InvalidParameter("need 1 <= --step <= --mmax".into()));
    }
    let polys = parse_all(exprs)?;
    let ms: Vec<u64> = (1..=mmax / step).map(|k| k * step).collect();
    let single = || {
        if polys.len() == 1 {
            Ok(&polys[0])
        } else {
            Err(Error::InvalidParameter("this kind takes one polynomial".into()))
        }
    };
    let table = match kind {
        Kind::Classic => boyd_lawton_table(single()?, &ms, cfg)?,
        Kind::Higher => {
            let s = s.ok_or_else(|| Error::InvalidParameter("--kind higher needs -s".into()))?;
            higher_table(single()?, s, &ms, cfg)?
        }
        Kind::Multiple => multiple_table(&polys, &ms, cfg)?,
        Kind::Max => generalized_table(&polys, &ms, cfg)?,
    };
    let summary = tail_summary(&table, tail)
        .ok()
        .map(|(mean, spread)| json!({ "tail": tail, "mean": mean, "spread": spread }));
    let records = table.records();
    let rows = records
        .iter()
        .map(|r| {
            vec![
                r.kind.clone(),
                r.r.clone(),
                r.q.clone(),
                opt(r.value),
                opt(r.err),
                num(r.target),
                opt(r.deviation),
            ]
        })
        .collect();
    let converged = table.target.converged && table.computed().all(|(_, r)| r.converged);
    let mut fields = poly_fields(&polys);
    fields.insert("kind".into(), json!(table.kind));
    fields.insert("target".into(), json!(table.target));
    fields.insert("rows".into(), json!(records));
    fields.insert("tail_summary".into(), summary.unwrap_or(Value::Null));
    let mut p = Payload::new(
        Value::Object(fields),
        vec!["kind", "r", "q", "value", "err", "target", "deviation"],
        rows,
    );
    p.converged = converged;
    Ok(p)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sublevel(
    op: SublevelOp,
    y: Option<f64>,
    grid: Option<Vec<f64>>,
    mode: ModeArg,
    integrand: IntegrandArg,
    samples: u64,
    seed: u64,
    exprs: &[String],
) -> Result<Payload> {
    let polys = parse_all(exprs)?;
    let mode = match mode {
        ModeArg::Union => SetMode::Union,
        ModeArg::Intersection => SetMode::Intersection,
    };
    let kind = match integrand {
        IntegrandArg::Product => IntegrandKind::Product,
        IntegrandArg::Max => IntegrandKind::Max,
    };
    let grid = grid.unwrap_or_else(default_y_grid);
    let need_y = || y.ok_or_else(|| Error::InvalidParameter("--y is required".into()));
    let single = || {
        if polys.len() == 1 {
            Ok(&polys[0])
        } else {
            Err(Error::InvalidParameter("this operation takes one polynomial".into()))
        }
    };
    let mut fields = poly_fields(&polys);
    match op {
        SublevelOp::Measure => {
            let e = sublevel_measure(single()?, need_y()?, samples, seed)?;
            let row = vec![num(e.y), num(e.measure_est), num(e.ci_halfwidth), e.samples.to_string()];
            fields.insert("estimate".into(), json!(e));
            Ok(Payload::new(
                Value::Object(fields),
                vec!["y", "estimate", "ci", "samples"],
                vec![row],
            ))
        }
        SublevelOp::Fit => {
            let f = fit_sublevel_exponent(single()?, &grid, samples, seed)?;
            let row = vec![num(f.c_hat), num(f.delta_hat), num(f.residual), f.y_grid.len().to_string()];
            fields.insert("fit".into(), json!(f));
            Ok(Payload::new(
                Value::Object(fields),
                vec!["c_hat", "delta_hat", "residual", "points"],
                vec![row],
            ))
        }
        SublevelOp::Integral => {
            let r = singular_log_integral(&polys, need_y()?, mode, kind, samples, seed)?;
            Ok(measure_payload(r, fields))
        }
        SublevelOp::Report => {
            let rep = vanishing_report(&polys, &grid, mode, kind, samples, seed)?;
            let rows = rep
                .rows
                .iter()
                .map(|r| vec![num(r.y), num(r.estimate), num(r.ci), r.samples.to_string()])
                .collect();
            fields.insert("decreasing_within_ci".into(), json!(rep.decreasing_within_ci()));
            fields.insert("report".into(), json!(rep));
            Ok(Payload::new(
                Value::Object(fields),
                vec!["y", "estimate", "ci", "samples"],
                rows,
            ))
        }
    }
}

fn cmd_jtable(ell_max: u32, ks: &[u32], ys: Option<Vec<f64>>) -> Result<Payload> {
    let ys = ys.unwrap_or_else(|| (1..=6).map(|e| 10f64.powi(-e)).collect());
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for ell in 1..=ell_max {
        for &k in ks {
            for &y in &ys {
                let i = i_closed_form(ell, k, y)?;
                let jp = JParams::new(ell, 1.0 / (k - 1) as f64, y)?;
                let j = j_closed_form(&jp);
                let bound = j_upper_bound(&jp);
                rows.push(vec![
                    ell.to_string(),
                    k.to_string(),
                    num(jp.delta),
                    num(y),
                    num(j),
                    num(i),
                    num(bound),
                ]);
                entries.push(json!({
                    "ell": ell, "k": k, "delta": jp.delta, "y": y, "j": j, "i": i, "bound": bound
                }));
            }
        }
    }
    Ok(Payload::new(
        json!({ "rows": entries }),
        vec!["ell", "k", "delta", "y", "j", "i", "bound"],
        rows,
    ))
}

fn execute(cli: &Cli, cfg: &QuadConfig) -> Result<Payload> {
    match &cli.command {
        Command::Measure {
            poly,
            engine,
            specialize,
            scale,
            at,
            roots,
            band,
        } => cmd_measure(
            poly,
            *engine,
            specialize.as_deref(),
            *scale,
            at.as_deref(),
            *roots,
            *band,
            cfg,
        ),
        Command::Higher { s, poly } => {
            let p = parse_poly(poly)?;
            let r = higher_mahler(&p, *s, cfg)?;
            let mut extra = poly_fields(std::slice::from_ref(&p));
            extra.insert("s".into(), json!(s));
            Ok(measure_payload(r, extra))
        }
        Command::Multiple(list) => {
            let polys = parse_all(&list.polys)?;
            Ok(measure_payload(multiple_mahler(&polys, cfg)?, poly_fields(&polys)))
        }
        Command::Mmax(list) => {
            let polys = parse_all(&list.polys)?;
            Ok(measure_payload(generalized_mahler(&polys, cfg)?, poly_fields(&polys)))
        }
        Command::Qr { entries, sequence, m } => cmd_qr(entries, *sequence, m),
        Command::Converge {
            kind,
            s,
            mmax,
            step,
            tail,
            polys,
        } => cmd_converge(*kind, *s, *mmax, *step, *tail, &polys.polys, cfg),
        Command::Sublevel {
            op,
            y,
            grid,
            mode,
            integrand,
            mc_samples,
            polys,
        } => cmd_sublevel(
            *op,
            *y,
            grid.clone(),
            *mode,
            *integrand,
            *mc_samples,
            cli.seed,
            &polys.polys,
        ),
        Command::Jtable { ell_max, k, y } => cmd_jtable(*ell_max, k, y.clone()),
    }
}

fn render(cli: &Cli, cfg: &QuadConfig, payload: Payload) -> String {
    match cli.format {
        Format::Json => {
            let mut out = Map::new();
            out.insert("schema".into(), json!(SCHEMA));
            out.insert("version".into(), json!(concat!("v", env!("CARGO_PKG_VERSION"))));
            out.insert("command".into(), json!(cli.command.name()));
            out.insert("config".into(), json!(cfg));
            out.extend(payload.fields);
            let mut s = serde_json::to_string_pretty(&Value::Object(out)).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&payload.header).expect("in-memory write");
            for row in &payload.rows {
                w.write_record(row).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code,
                    report: String::new(),
                    stderr: text,
                    output: None,
                }
            } else {
                Outcome {
                    code,
                    report: text,
                    stderr: String::new(),
                    output: None,
                }
            };
        }
    };
    let cfg = QuadConfig {
        tol: cli.tol,
        qmc_samples: cli.samples,
        randomizations: cli.randomizations,
        seed: cli.seed,
        ..QuadConfig::default()
    };
    let output = cli.output.clone();
    let result = cfg.validate().and_then(|()| execute(&cli, &cfg));
    match result {
        Ok(payload) => {
            let converged = payload.converged;
            let report = render(&cli, &cfg, payload);
            Outcome {
                code: if converged { EXIT_OK } else { EXIT_NOT_CONVERGED },
                report,
                stderr: if converged {
                    String::new()
                } else {
                    "warning: requested tolerance not reached\n".into()
                },
                output,
            }
        }
        Err(e @ Error::NonConvergence { .. }) => Outcome {
            code: EXIT_NOT_CONVERGED,
            report: String::new(),
            stderr: format!("error: {e}\n"),
            output: None,
        },
        Err(e) => Outcome::input_error(e),
    }
}
