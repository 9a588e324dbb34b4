//! `relaydmt` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a numerical check failed.

mod experiment;
mod output;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use relaydmt::dmt_closed_form::{dmt, sample_grid, DmtCurve, KappaPolicy};
use relaydmt::exponent_oracle::{compare_fixed_kappa, rows_csv, OracleRow, DEFAULT_GRID_STEP};
use relaydmt::gram::{
    build_gamma_omega, build_gamma_set, build_xi, check_psd, circulant_rank_check, sinc_rank_one_ratio,
    szego_eig_check, uniform_omega_grid,
};
use relaydmt::outage_sim::run_outage;
use relaydmt::waveforms::{make_waveform, DelayProfile, Waveform};
use relaydmt::{Mode, Protocol, KAPPA_HAT};
use serde::Serialize;

use experiment::{parse_pulse, ExperimentFile};
use output::{Header, OutputDir};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RELAYDMT_OUT_DIR";
/// Coarsest accepted step for `curve`.
const MAX_CURVE_STEP: f64 = 0.1;
/// Largest `σ₂/σ₁` of the sinc symbol still reported as rank one.
const RANK_ONE_TOL: f64 = 1e-2;

#[derive(Debug, Parser)]
#[command(name = "relaydmt", version, about = "Diversity–multiplexing tradeoff tools for asynchronous relay networks")]
struct Cli {
    /// Worker threads (0 = one per core). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Default directory for outputs without an explicit path.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,
    /// Fail instead of creating missing output directories.
    #[arg(long, global = true)]
    no_create: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form DMT curve(s) as CSV.
    Curve(CurveArgs),
    /// Compare closed forms with a brute-force grid oracle.
    Oracle(OracleArgs),
    /// Correlation-matrix diagnostics for a waveform/delay configuration.
    Gram(GramArgs),
    /// Monte Carlo outage runs from an experiment file.
    Outage(OutageArgs),
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long)]
    protocol: Protocol,
    #[arg(long)]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    relays: usize,
    /// `opt`, `hat` (golden ratio) or a real ≥ 1; comma-separate to overlay.
    #[arg(long, value_delimiter = ',', default_value = "opt")]
    kappa: Vec<String>,
    #[arg(long, default_value_t = 0.001)]
    step: f64,
    /// Emit the piecewise segment table instead of samples (single κ only).
    #[arg(long)]
    segments: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Restrict the sweep; every omitted axis takes its full default range.
    #[arg(long)]
    protocol: Option<Protocol>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    relays: Option<usize>,
    /// `hat` or a real ≥ 1.
    #[arg(long)]
    kappa: Option<String>,
    /// Oracle grid step.
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    step: f64,
    /// Spacing of the multiplexing-gain grid `{0, Δ, …} ∩ [0, 1)`.
    #[arg(long, default_value_t = 0.02)]
    r_step: f64,
    #[arg(long, default_value_t = 0.015)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GramArgs {
    /// `rect[:u]`, `rc:<rolloff>[:u]` or `sinc`; one per node, or one shared.
    #[arg(long = "pulse", value_delimiter = ',', required = true)]
    pulses: Vec<String>,
    /// Node delays in symbol intervals, source first (must start at 0).
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    delays: Vec<f64>,
    /// Block size `q` (symbols per block).
    #[arg(long, default_value_t = 16)]
    q: usize,
    /// Correlation band; defaults to the widest pulse support.
    #[arg(long)]
    u: Option<usize>,
    #[arg(long, default_value_t = 256)]
    omega_points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutageArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `[output] dir` and `--out-dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Why a command did not succeed, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Validation(anyhow::Error),
    Check(String),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Check(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl From<relaydmt::Error> for Failure {
    fn from(e: relaydmt::Error) -> Self {
        use relaydmt::Error::*;
        match e {
            Numerical(_) | SingularNoiseCovariance(_) | InsufficientData(_) => Failure::Check(e.to_string()),
            Invalid(_) | Dimension(_) | ModeMismatch(_) | Unsupported(_) => Failure::Validation(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.chain().find_map(|c| c.downcast_ref::<relaydmt::Error>()) {
            Some(relaydmt::Error::Numerical(_) | relaydmt::Error::SingularNoiseCovariance(_)) => {
                Failure::Check(format!("{e:#}"))
            }
            _ => Failure::Validation(e),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    let out = OutputDir { root: cli.out_dir.clone(), create: !cli.no_create };
    let result = pool.install(|| match &cli.command {
        Command::Curve(a) => cmd_curve(a, &out),
        Command::Oracle(a) => cmd_oracle(a, &out),
        Command::Gram(a) => cmd_gram(a, &out),
        Command::Outage(a) => cmd_outage(a, &out),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Validation(e) | Failure::Io(e) => eprintln!("error: {e:#}"),
                Failure::Check(msg) => eprintln!("check failed: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn parse_real_kappa(s: &str) -> Result<f64, Failure> {
    let k = match s {
        "hat" => KAPPA_HAT,
        _ => s.parse::<f64>().map_err(|_| Failure::Validation(anyhow!("kappa must be `opt`, `hat` or a real, got `{s}`")))?,
    };
    if !(k.is_finite() && k >= 1.0) {
        return Err(Failure::Validation(anyhow!("kappa must be ≥ 1, got {s}")));
    }
    Ok(k)
}

fn parse_policy(s: &str) -> Result<KappaPolicy, Failure> {
    if s == "opt" {
        Ok(KappaPolicy::Optimal)
    } else {
        parse_real_kappa(s).map(KappaPolicy::Fixed)
    }
}

fn policy_label(p: KappaPolicy) -> String {
    match p {
        KappaPolicy::Optimal => "opt".into(),
        KappaPolicy::Fixed(k) => format!("{k}"),
    }
}

#[derive(Serialize)]
struct CurveConfig {
    protocol: Protocol,
    /// `any` for OAF, whose curve does not depend on the waveform regime.
    mode: String,
    relays: usize,
    kappa: Vec<String>,
    step: f64,
    segments: bool,
}

fn cmd_curve(a: &CurveArgs, out: &OutputDir) -> CmdResult {
    if !(a.step > 0.0 && a.step <= MAX_CURVE_STEP) {
        return Err(Failure::Validation(anyhow!("--step must be in (0, {MAX_CURVE_STEP}], got {}", a.step)));
    }
    if a.relays == 0 {
        return Err(Failure::Validation(anyhow!("--relays must be at least 1")));
    }
    let policies = a.kappa.iter().map(|s| parse_policy(s)).collect::<Result<Vec<_>, _>>()?;
    if a.segments && policies.len() != 1 {
        return Err(Failure::Validation(anyhow!("--segments takes a single --kappa")));
    }
    let mut curves: Vec<DmtCurve> = Vec::new();
    for &p in &policies {
        let curve = dmt(a.protocol, a.mode, a.relays, p)?;
        if a.protocol == Protocol::Oaf {
            let other = if a.mode == Mode::Finite { Mode::Infinite } else { Mode::Finite };
            let twin = dmt(a.protocol, other, a.relays, p)?;
            if twin.sampled_csv(a.step) != curve.sampled_csv(a.step) {
                return Err(Failure::Check("OAF curves differ between waveform regimes".into()));
            }
        }
        curves.push(curve);
    }
    let mode_label = if a.protocol == Protocol::Oaf { "any".to_string() } else { a.mode.to_string() };
    let labels: Vec<String> = policies.iter().map(|&p| policy_label(p)).collect();
    let config = CurveConfig {
        protocol: a.protocol,
        mode: mode_label.clone(),
        relays: a.relays,
        kappa: labels.clone(),
        step: a.step,
        segments: a.segments,
    };
    let header = Header::new("curve", &config, None)?
        .with(format!("protocol: {}", a.protocol))
        .with(format!("mode: {mode_label}"))
        .with(format!("relays: {}", a.relays))
        .with(format!("kappa: {}", labels.join(",")));

    let body = if a.segments {
        curves[0].segments_csv()
    } else if curves.len() == 1 {
        curves[0].sampled_csv(a.step)
    } else {
        let mut s = String::from("r");
        for l in &labels {
            let _ = write!(s, ",d_kappa_{l}");
        }
        s.push('\n');
        for r in sample_grid(a.step) {
            let _ = write!(s, "{r:.6}");
            for c in &curves {
                let _ = write!(s, ",{:.12}", c.eval(r));
            }
            s.push('\n');
        }
        s
    };
    let name = format!("curve_{}_{}_m{}.csv", a.protocol, mode_label, a.relays);
    out.write(&out.resolve(a.out.as_deref(), &name), &header, &body)
}

#[derive(Serialize)]
struct OracleConfig {
    protocols: Vec<Protocol>,
    modes: Vec<Mode>,
    relays: Vec<usize>,
    kappas: Vec<f64>,
    grid_step: f64,
    r_grid: Vec<f64>,
    threshold: f64,
}

const SWEEP_KAPPAS: [f64; 6] = [1.0, 1.5, KAPPA_HAT, 2.0, 3.0, 5.0];

fn cmd_oracle(a: &OracleArgs, out: &OutputDir) -> CmdResult {
    if !(a.step > 0.0 && a.step <= 0.01) {
        return Err(Failure::Validation(anyhow!("--step must be in (0, 0.01], got {}", a.step)));
    }
    if !(a.r_step > 0.0 && a.r_step <= 0.5) {
        return Err(Failure::Validation(anyhow!("--r-step must be in (0, 0.5], got {}", a.r_step)));
    }
    if !(a.threshold >= 0.0) {
        return Err(Failure::Validation(anyhow!("--threshold must be non-negative")));
    }
    let config = OracleConfig {
        protocols: a.protocol.map_or(Protocol::ALL.to_vec(), |p| vec![p]),
        modes: a.mode.map_or(Mode::ALL.to_vec(), |m| vec![m]),
        relays: match a.relays {
            Some(0) => return Err(Failure::Validation(anyhow!("--relays must be at least 1"))),
            Some(m) => vec![m],
            None => vec![1, 2, 3],
        },
        kappas: match &a.kappa {
            Some(k) => vec![parse_real_kappa(k)?],
            None => SWEEP_KAPPAS.to_vec(),
        },
        grid_step: a.step,
        r_grid: (0..).map(|k| k as f64 * a.r_step).take_while(|&r| r < 1.0 - 1e-9).collect(),
        threshold: a.threshold,
    };
    let mut configs = Vec::new();
    for &p in &config.protocols {
        for &m in &config.modes {
            for &n in &config.relays {
                for &k in &config.kappas {
                    configs.push((p, m, n, k));
                }
            }
        }
    }
    let items: Vec<(usize, f64)> =
        (0..configs.len()).flat_map(|c| config.r_grid.iter().map(move |&r| (c, r))).collect();
    // one work item per (config, r); collecting keeps input order, so output is job-count independent
    let rows: Vec<OracleRow> = items
        .par_iter()
        .map(|&(c, r)| {
            let (p, m, n, k) = configs[c];
            compare_fixed_kappa(p, m, n, k, &[r], a.step).map(|mut v| v.remove(0))
        })
        .collect::<Result<_, _>>()?;

    let per_config: Vec<&[OracleRow]> = rows.chunks(config.r_grid.len()).collect();
    let mut worst = (0.0f64, String::new());
    let mut body = String::new();
    if configs.len() == 1 {
        body = rows_csv(per_config[0]);
    } else {
        body.push_str("protocol,mode,relays,kappa,max_gap,r_at_max,oracle_d,closed_form_d\n");
    }
    for (&(p, m, n, k), chunk) in configs.iter().zip(&per_config) {
        let w = chunk.iter().fold(&chunk[0], |acc, row| if row.gap > acc.gap { row } else { acc });
        if configs.len() > 1 {
            let _ = writeln!(body, "{p},{m},{n},{k},{:.3e},{:.4},{:.9},{:.9}", w.gap, w.r, w.oracle, w.closed_form);
        }
        if w.gap > worst.0 || worst.1.is_empty() {
            worst = (w.gap, format!("{p}/{m}/M={n}/κ={k} at r={:.4}", w.r));
        }
    }
    let header = Header::new("oracle", &config, None)?
        .with(format!("configs: {}", configs.len()))
        .with(format!("max_gap: {:.3e}", worst.0))
        .with(format!("threshold: {}", a.threshold));
    let name = match configs.as_slice() {
        [(p, m, n, k)] => format!("oracle_{p}_{m}_m{n}_k{k}.csv"),
        _ => "oracle_sweep.csv".to_string(),
    };
    out.write(&out.resolve(a.out.as_deref(), &name), &header, &body)?;
    println!("max gap {:.3e} ({}) over {} configurations", worst.0, worst.1, configs.len());
    if worst.0 > a.threshold {
        return Err(Failure::Check(format!("max gap {:.3e} exceeds threshold {} ({})", worst.0, a.threshold, worst.1)));
    }
    Ok(())
}

#[derive(Serialize)]
struct GramConfig {
    pulses: Vec<String>,
    delays: Vec<f64>,
    q: usize,
    u: Option<usize>,
    omega_points: usize,
}

struct Report {
    body: String,
    failures: Vec<String>,
}

impl Report {
    fn row(&mut self, check: &str, value: impl std::fmt::Display, status: &str) {
        let _ = writeln!(self.body, "{check},{value},{status}");
    }

    fn gate(&mut self, check: &str, value: impl std::fmt::Display, ok: bool) {
        self.row(check, value, if ok { "pass" } else { "fail" });
        if !ok {
            self.failures.push(check.to_string());
        }
    }
}

fn cmd_gram(a: &GramArgs, out: &OutputDir) -> CmdResult {
    let nodes = a.delays.len();
    if a.pulses.len() != 1 && a.pulses.len() != nodes {
        return Err(Failure::Validation(anyhow!(
            "give one --pulse per node ({nodes}) or a single shared one, got {}",
            a.pulses.len()
        )));
    }
    if a.omega_points < 64 {
        return Err(Failure::Validation(anyhow!("--omega-points must be at least 64")));
    }
    let specs = a.pulses.iter().map(|s| parse_pulse(s)).collect::<anyhow::Result<Vec<_>>>()?;
    let wf: Vec<Waveform> = (0..nodes)
        .map(|i| make_waveform(specs[i.min(specs.len() - 1)]))
        .collect::<Result<_, _>>()?;
    let delays = DelayProfile::new(a.delays.clone(), 1.0)?;
    let finite = wf.iter().filter(|w| w.is_finite()).count();
    let mut rep = Report { body: String::from("check,value,status\n"), failures: Vec::new() };
    rep.row("nodes", nodes, "info");
    rep.row("q", a.q, "info");
    if finite == nodes {
        let widest = wf.iter().filter_map(Waveform::support_u).max().unwrap_or(1) as usize;
        let u = a.u.unwrap_or(widest);
        if u < widest {
            return Err(Failure::Validation(anyhow!("--u {u} is narrower than the widest pulse support {widest}")));
        }
        rep.row("u", u, "info");
        let cg = build_xi(&wf, &delays, u, a.q)?;
        let sg = build_gamma_omega(&wf, &delays, u, &uniform_omega_grid(a.omega_points))?;
        let psd = check_psd(&sg);
        rep.gate("gamma_min_eig", format!("{:.6e}", psd.min_eig), psd.passed());
        rep.row("gamma_argmin_omega", format!("{:.6}", psd.argmin_omega), "info");
        rep.row("gamma_violations", psd.violating_omega.len(), "info");
        let dim = cg.xi().nrows();
        let rank = cg.rank();
        rep.row("xi_rank", format!("{rank}/{dim}"), if cg.is_degenerate() { "rank-deficient" } else { "full" });
        let sz = szego_eig_check(&cg, &sg)?;
        rep.row("xi_lambda_min", format!("{:.9e}", sz.lambda_min), "info");
        rep.row("xi_lambda_max", format!("{:.9e}", sz.lambda_max), "info");
        rep.row("symbol_mu_min", format!("{:.9e}", sz.mu_min), "info");
        rep.row("symbol_mu_max", format!("{:.9e}", sz.mu_max), "info");
        rep.gate("szego_containment", format!("{:.3e}", (sz.mu_min - sz.lambda_min).max(sz.lambda_max - sz.mu_max)), sz.contained);
        rep.row("trace_rel_err", format!("{:.3e}", sz.trace_rel_err), "info");
    } else if finite == 0 {
        for (j, tm) in build_gamma_set(&wf, &delays, a.q)?.iter().enumerate() {
            let c = circulant_rank_check(tm, 4 * a.q)?;
            rep.gate(&format!("circulant_min_abs_dft_{j}"), format!("{:.6e}", c.min_abs_dft), c.min_abs_dft > 0.0);
            rep.gate(&format!("eigen_bound_{j}"), format!("{:.6e}", c.eig_abs_max), c.within_bound);
        }
        if nodes > 1 {
            let ratio = sinc_rank_one_ratio(&delays, 4096, &uniform_omega_grid(a.omega_points));
            rep.row("symbol_rank_one", format!("{ratio:.3e}"), if ratio < RANK_ONE_TOL { "flagged" } else { "no" });
        }
    } else {
        return Err(relaydmt::Error::ModeMismatch("mix of sinc and finite-support pulses".into()).into());
    }

    let config = GramConfig {
        pulses: a.pulses.clone(),
        delays: a.delays.clone(),
        q: a.q,
        u: a.u,
        omega_points: a.omega_points,
    };
    let header = Header::new("gram", &config, None)?
        .with(format!("pulses: {}", a.pulses.join(" ")))
        .with(format!("delays: {}", a.delays.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")));
    out.write(&out.resolve(a.out.as_deref(), "gram_report.csv"), &header, &rep.body)?;
    print!("{}", rep.body);
    if rep.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed: {}", rep.failures.join(", "))))
    }
}

fn cmd_outage(a: &OutageArgs, out: &OutputDir) -> CmdResult {
    let file = ExperimentFile::load(&a.config)?;
    let exp = file.resolve(a.seed)?;
    let dir = a.out.clone().or_else(|| file.output.dir.clone()).unwrap_or_else(|| out.root.clone());
    out.ensure(&dir)?;
    let prefix = file.output.prefix.clone().unwrap_or_else(|| {
        a.config.file_stem().map_or_else(|| "outage".to_string(), |s| s.to_string_lossy().into_owned())
    });
    let base = Header::new("outage", &exp, Some(exp.seed))?
        .with(format!("protocol: {}", exp.protocol))
        .with(format!("mode: {}", exp.mode))
        .with(format!("relays: {}", exp.relays));

    let mut summary = String::from("r,p,q,kappa,slope_hat,log_power,slope_top_half,slope_closed_form,gap,fit_points\n");
    let mut warnings = Vec::new();
    let mut seen: Vec<f64> = Vec::new();
    for run_spec in &exp.runs {
        if seen.iter().any(|&s| (s - run_spec.r).abs() < 1e-12) {
            warnings.push(format!("duplicate r = {} dropped", run_spec.r));
            continue;
        }
        seen.push(run_spec.r);
        let run = run_outage(&exp.config(run_spec))?;
        let fmt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.6}"));
        let frame = run_spec.frame;
        let _ = writeln!(
            summary,
            "{},{},{},{:.6},{},{},{},{:.6},{},{}",
            run.r,
            frame.p,
            frame.q,
            frame.kappa(),
            fmt(run.slope),
            fmt(run.log_power),
            fmt(run.slope_top_half),
            run.slope_closed_form,
            fmt(run.gap()),
            run.fit_snr_db.len()
        );
        let mut header = base.clone().with(format!("r: {}", run.r)).with(format!("frame: {}/{}", frame.p, frame.q));
        for w in &run.warnings {
            warnings.push(format!("r = {}: {w}", run.r));
            header = header.with(format!("warning: {w}"));
        }
        let path = dir.join(format!("{prefix}_r{:.4}.csv", run.r));
        out.write(&path, &header, &run.results_csv())?;
        println!(
            "r = {}: slope {} (closed form {:.4})",
            run.r,
            run.slope.map_or_else(|| "n/a".to_string(), |s| format!("{s:.4}")),
            run.slope_closed_form
        );
    }
    let mut header = base;
    for w in &warnings {
        header = header.with(format!("warning: {w}"));
        eprintln!("warning: {w}");
    }
    out.write(&dir.join(format!("{prefix}_summary.csv")), &header, &summary)
}

