use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Args;
use precond_core::{
    baseline, estimate_condition_number, gaussian_rhs, generate_synthetic, iterate_preconditioner, jacobi,
    optimize_in_subspace, pcg_solve, random_subspace, read_matrix_market, ruiz, sparsity_score,
    write_matrix_market, write_trace_csv, Basis, DiagonalVec, EntryDist, Error, Method, PrecondResult,
    PricingNorm, Result, ScoreConfig, SipSolution, SipStatus, SparseSymMatrix,
};
use serde_json::json;

use crate::config::RunConfig;
use crate::report::{write_file, MatrixInfo, Report};
use crate::{Cli, Command, MatrixArg};

pub fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() {
        2
    } else if e.is_nonconvergence() {
        3
    } else {
        4
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match exit_code(e) {
        2 => "input",
        3 => "nonconvergence",
        _ => "internal",
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    /// Probability that an entry of `A` is nonzero.
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    /// `uniform` or `normal`.
    #[arg(long, default_value = "uniform")]
    pub dist: EntryDist,
    /// Output file; defaults to `matrix.mtx` in the output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PreconditionArgs {
    pub matrix: PathBuf,
    /// Comma-separated basis entries: identity, jacobi, ruiz, random:K.
    #[arg(long, default_value = "identity,jacobi")]
    pub basis: String,
}

#[derive(Args, Debug)]
pub struct IterateArgs {
    pub matrix: PathBuf,
    /// Outer iterations; overrides the config file.
    #[arg(long, short = 't')]
    pub iterations: Option<usize>,
    /// Starting diagonal: identity, jacobi or ruiz.
    #[arg(long, default_value = "jacobi")]
    pub init: String,
    /// Pricing norm: l1, l2 or linf; overrides the config file.
    #[arg(long)]
    pub norm: Option<PricingNorm>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    pub matrix: PathBuf,
    /// Seed of the Gaussian solution behind the right-hand side.
    #[arg(long, default_value_t = 0)]
    pub rhs_seed: u64,
    /// Comma-separated sources: none, jacobi, ruiz, subspace, iterative, file:PATH.
    #[arg(long, default_value = "none,jacobi,iterative")]
    pub precond: String,
    /// Charges construction matvecs to each run.
    #[arg(long)]
    pub delay: bool,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    pub matrix: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub top_q: usize,
    /// Largest n for which the full score matrix is written.
    #[arg(long, default_value_t = 100)]
    pub dense_cap: usize,
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", cli.out.display())))?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, &cfg, out),
        Command::Precondition(a) => cmd_precondition(&a, &cfg, out),
        Command::Iterate(a) => cmd_iterate(&a, cfg, out),
        Command::Estimate(a) => cmd_estimate(&a, cfg, out),
        Command::BenchPcg(a) => cmd_bench_pcg(&a, &cfg, out),
        Command::Score(a) => cmd_score(&a, &cfg, out),
    }
}

fn load(path: &Path) -> Result<SparseSymMatrix> {
    Ok(read_matrix_market(path)?)
}

fn write_diagonal(path: &Path, d: &DiagonalVec) -> Result<()> {
    let mut s = String::with_capacity(24 * d.len());
    for x in d.as_slice() {
        writeln!(s, "{x:.16e}").expect("writing to a string");
    }
    write_file(path, s.as_bytes())
}

pub fn read_diagonal(path: &Path) -> Result<DiagonalVec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let v = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("{}: line {}: {e}", path.display(), i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagonalVec::new(v)?)
}

fn status_code(status: SipStatus) -> ExitCode {
    if status == SipStatus::Converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn sip_details(sol: &SipSolution) -> serde_json::Value {
    json!({
        "status": sol.status,
        "rounds": sol.rounds(),
        "tau_hat": sol.tau_hat,
        "tau_prime": sol.tau_prime,
        "cuts1": sol.cuts1.len(),
        "cuts2": sol.cuts2.len(),
        "lp_solves": sol.lp_solves,
        "unbounded_cuts": sol.unbounded_cuts,
    })
}

fn write_sip_trace(sol: &SipSolution, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_trace_csv(&sol.trace, &mut buf).expect("writing to memory");
    write_file(path, &buf)
}

fn cmd_gen(a: &GenArgs, cfg: &RunConfig, out: &Path) -> Result<ExitCode> {
    let t = Instant::now();
    let m = generate_synthetic(a.n, a.sigma, a.alpha, a.dist, cfg.seed)?;
    let path = a.output.clone().unwrap_or_else(|| out.join("matrix.mtx"));
    write_matrix_market(&m, &path)?;
    let mut r = Report::new("gen", "synthetic", cfg);
    r.matrix = Some(MatrixInfo::new(&m, &path));
    r.wall_time_s = t.elapsed().as_secs_f64();
    r.file("matrix", &path);
    r.details = json!({
        "n": a.n,
        "sigma": a.sigma,
        "alpha": a.alpha,
        "dist": a.dist.to_string(),
        "seed": cfg.seed,
    });
    r.emit(out)?;
    Ok(ExitCode::SUCCESS)
}

/// Builds the basis named by a comma-separated spec.
pub fn parse_basis(spec: &str, m: &SparseSymMatrix, cfg: &RunConfig) -> Result<Basis> {
    let n = m.n();
    let mut vectors = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "identity" | "ones" => vectors.push(DiagonalVec::ones(n)),
            "jacobi" => vectors.push(jacobi(m)?),
            "ruiz" => vectors.push(ruiz(m, cfg.ruiz_sweeps, cfg.ruiz_tol)?),
            s if s.starts_with("random:") => {
                let k: usize = s["random:".len()..]
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad basis entry {s:?}")))?;
                let b = random_subspace(n, k, cfg.seed)?;
                vectors.extend(b.vectors().iter().cloned());
            }
            other => return Err(Error::InvalidArgument(format!("unknown basis entry {other:?}"))),
        }
    }
    if vectors.is_empty() {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    Basis::new_dedup(vectors)
}

fn fill_result(r: &mut Report, res: &PrecondResult) {
    r.kappa_bound = Some(res.kappa_bound);
    r.certified = Some(res.certified);
    r.tau = Some(res.tau);
    r.matvecs.insert("total".into(), res.matvecs);
    if let Some(sol) = &res.sip {
        r.matvecs.insert("lanczos".into(), sol.lanczos_matvecs);
        r.status = format!("{:?}", sol.status);
    }
}

fn cmd_precondition(a: &PreconditionArgs, cfg: &RunConfig, out: &Path) -> Result<ExitCode> {
    let t = Instant::now();
    let m = load(&a.matrix)?;
    let basis = parse_basis(&a.basis, &m, cfg)?;
    let res = optimize_in_subspace(&m, &basis, &cfg.sip())?;
    let mut r = Report::new("precondition", "subspace", cfg);
    r.wall_time_s = t.elapsed().as_secs_f64();
    r.matrix = Some(MatrixInfo::new(&m, &a.matrix));
    fill_result(&mut r, &res);
    let sol = res.sip.as_ref().expect("subspace result carries its solve");
    let diag = out.join("diagonal.txt");
    write_diagonal(&diag, &res.d)?;
    r.file("diagonal", &diag);
    let trace = out.join("sip_trace.csv");
    write_sip_trace(sol, &trace)?;
    r.file("trace", &trace);
    r.details = json!({ "basis": a.basis, "basis_size": basis.k(), "z": res.z, "sip": sip_details(sol) });
    r.emit(out)?;
    Ok(status_code(sol.status))
}

fn initial_diagonal(name: &str, m: &SparseSymMatrix, cfg: &RunConfig) -> Result<DiagonalVec> {
    match name {
        "identity" | "ones" => Ok(DiagonalVec::ones(m.n())),
        "jacobi" => jacobi(m),
        "ruiz" => ruiz(m, cfg.ruiz_sweeps, cfg.ruiz_tol),
        other => Err(Error::InvalidArgument(format!("unknown initial diagonal {other:?}"))),
    }
}

fn cmd_iterate(a: &IterateArgs, mut cfg: RunConfig, out: &Path) -> Result<ExitCode> {
    if let Some(t) = a.iterations {
        if t == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        cfg.iterations = t;
    }
    if let Some(p) = a.norm {
        cfg.pricing_norm = p;
    }
    let t = Instant::now();
    let m = load(&a.matrix)?;
    let d0 = initial_diagonal(&a.init, &m, &cfg)?;
    let (res, trace) = iterate_preconditioner(&m, &d0, &cfg.iterate())?;
    let mut r = Report::new("iterate", "iterative", &cfg);
    r.wall_time_s = t.elapsed().as_secs_f64();
    r.matrix = Some(MatrixInfo::new(&m, &a.matrix));
    fill_result(&mut r, &res);
    let diag = out.join("diagonal.txt");
    write_diagonal(&diag, &res.d)?;
    r.file("diagonal", &diag);
    let path = out.join("iterate_trace.csv");
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).expect("writing to memory");
    write_file(&path, &buf)?;
    r.file("trace", &path);
    let kappas: Vec<f64> = trace.records.iter().map(|x| x.kappa_bound).collect();
    r.details = json!({
        "init": a.init,
        "iterations_run": trace.records.len(),
        "stalled": trace.stalled,
        "kappa_trace": kappas,
        "pricing_norm": cfg.pricing_norm,
    });
    r.emit(out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_estimate(a: &MatrixArg, mut cfg: RunConfig, out: &Path) -> Result<ExitCode> {
    if let Some(k) = a.oracle_iters {
        cfg.lanczos_max_iter = Some(k);
        cfg.validate()?;
    }
    let t = Instant::now();
    let m = load(&a.matrix)?;
    let est = estimate_condition_number(&m, &cfg.sip())?;
    let mut r = Report::new("estimate", "cutting-plane", &cfg);
    r.wall_time_s = t.elapsed().as_secs_f64();
    r.matrix = Some(MatrixInfo::new(&m, &a.matrix));
    r.kappa_bound = Some(est.kappa);
    r.tau = Some(est.sip.tau_hat);
    r.certified = Some(false);
    r.status = format!("{:?}", est.sip.status);
    r.matvecs.insert("total".into(), est.sip.matvecs);
    r.matvecs.insert("lanczos".into(), est.sip.lanczos_matvecs);
    let trace = out.join("sip_trace.csv");
    write_sip_trace(&est.sip, &trace)?;
    r.file("trace", &trace);
    r.details = json!({ "kappa": est.kappa, "sip": sip_details(&est.sip) });
    r.emit(out)?;
    Ok(match est.sip.status {
        SipStatus::Converged | SipStatus::OracleInconclusive => ExitCode::SUCCESS,
        _ => ExitCode::from(3),
    })
}

fn build_source(name: &str, m: &SparseSymMatrix, cfg: &RunConfig) -> Result<(String, PrecondResult)> {
    let lanczos = cfg.lanczos();
    let res = match name {
        "none" | "identity" => baseline(m, DiagonalVec::ones(m.n()), Method::Identity, &lanczos)?,
        "jacobi" => baseline(m, jacobi(m)?, Method::Jacobi, &lanczos)?,
        "ruiz" => baseline(m, ruiz(m, cfg.ruiz_sweeps, cfg.ruiz_tol)?, Method::Ruiz, &lanczos)?,
        "subspace" => optimize_in_subspace(m, &parse_basis("identity,jacobi", m, cfg)?, &cfg.sip())?,
        "iterative" => iterate_preconditioner(m, &jacobi(m)?, &cfg.iterate())?.0,
        s if s.starts_with("file:") => {
            let d = read_diagonal(Path::new(&s["file:".len()..]))?;
            if d.len() != m.n() {
                return Err(Error::InvalidArgument(format!("{s}: length {} but n = {}", d.len(), m.n())));
            }
            baseline(m, d, Method::Identity, &lanczos)?
        }
        other => return Err(Error::InvalidArgument(format!("unknown preconditioner source {other:?}"))),
    };
    let label = name.strip_prefix("file:").map_or(name.to_string(), |p| {
        let stem = Path::new(p).file_stem().map_or("file".into(), |s| s.to_string_lossy().into_owned());
        format!("file_{stem}")
    });
    Ok((label, res))
}

fn cmd_bench_pcg(a: &BenchArgs, cfg: &RunConfig, out: &Path) -> Result<ExitCode> {
    let t = Instant::now();
    let m = load(&a.matrix)?;
    let b = gaussian_rhs(&m, a.rhs_seed);
    let mut r = Report::new("bench-pcg", "pcg", cfg);
    r.matrix = Some(MatrixInfo::new(&m, &a.matrix));
    let mut runs = Vec::new();
    let mut all_converged = true;
    for name in a.precond.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (label, res) = build_source(name, &m, cfg)?;
        let offset = if a.delay { res.matvecs } else { 0 };
        let rep = pcg_solve(&m, &b, &res.d, cfg.pcg_tol, cfg.pcg_max_iter, offset)?;
        all_converged &= rep.converged;
        let path = out.join(format!("pcg_{label}.csv"));
        let mut buf = Vec::new();
        rep.write_csv(offset, &mut buf).expect("writing to memory");
        write_file(&path, &buf)?;
        r.file(&format!("residuals_{label}"), &path);
        r.matvecs.insert(label.clone(), rep.matvecs);
        runs.push(json!({
            "source": name,
            "label": label,
            "kappa": res.kappa_bound,
            "construction_matvecs": res.matvecs,
            "iterations": rep.iterations,
            "matvecs": rep.matvecs,
            "converged": rep.converged,
            "final_residual": rep.final_residual,
        }));
    }
    r.wall_time_s = t.elapsed().as_secs_f64();
    r.status = if all_converged { "ok".into() } else { "not converged".into() };
    r.details = json!({
        "rhs": "b = M x*, x* standard Gaussian",
        "rhs_seed": a.rhs_seed,
        "tol": cfg.pcg_tol,
        "delay": a.delay,
        "runs": runs,
    });
    r.emit(out)?;
    Ok(if all_converged { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn cmd_score(a: &ScoreArgs, cfg: &RunConfig, out: &Path) -> Result<ExitCode> {
    let t = Instant::now();
    let m = load(&a.matrix)?;
    let sc = ScoreConfig {
        lanczos: cfg.lanczos(),
        dense_cap: a.dense_cap,
        top_q: a.top_q,
        ..ScoreConfig::default()
    };
    let score = sparsity_score(&m, &sc)?;
    let mut r = Report::new("score", "extreme-eigenvector", cfg);
    r.wall_time_s = t.elapsed().as_secs_f64();
    r.matrix = Some(MatrixInfo::new(&m, &a.matrix));
    r.matvecs.insert("lanczos".into(), score.matvecs);
    let path = out.join("score.csv");
    let mut buf = Vec::new();
    score.write_csv(&mut buf).expect("writing to memory");
    write_file(&path, &buf)?;
    r.file("scores", &path);
    let top: BTreeMap<String, f64> = score.top.iter().map(|&(i, j, s)| (format!("{i},{j}"), s)).collect();
    r.details = json!({ "dense": score.dense.is_some(), "top": top, "warnings": score.warnings });
    r.emit(out)?;
    Ok(ExitCode::SUCCESS)
}
