mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ssforge_core::domain::{parse_resolution, DomainSpec};
use ssforge_core::presets::{self, DEFAULT_RESOLUTION, PRESETS};
use ssforge_core::verify::parse_tolerance_override;
use ssforge_core::{
    configure_threads_from_env, mesh, sample, verify, Mesh, Prefactor, Target, VerificationReport, VerifyError,
    VerifyOptions,
};

use config::ConfigFile;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ssforge", version, about = "Generate and verify surfaces from a pair of holomorphic functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the surface of (f, g) and write a mesh or sample table
    Generate(Common),
    /// Same as generate for the rotational pair f = a z + b, g = exp z
    Rotational(Common),
    /// Run the verification suite and print a JSON report
    Verify(Common),
    /// List the built-in presets
    Presets,
}

#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// Built-in parameter set (see `ssforge presets`)
    #[arg(long)]
    preset: Option<String>,
    /// Holomorphic expression for f, e.g. "z^2"
    #[arg(long)]
    f: Option<String>,
    /// Holomorphic expression for g, e.g. "z^3"
    #[arg(long)]
    g: Option<String>,
    /// Slope of the rotational pair f = a z + b
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Offset of the rotational pair f = a z + b
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// rect:U1MIN,U1MAX,U2MIN,U2MAX[,periodic] or annulus:RMIN,RMAX[,TMIN,TMAX]
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// Grid resolution, `N` or `N1xN2`
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    mask_gprime: Option<f64>,
    #[arg(long)]
    mask_detv: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output path (verify: report file, default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Finite-difference step of the verification oracle
    #[arg(long)]
    fd_step: Option<f64>,
    /// Tolerance override `name=value`, repeatable
    #[arg(long)]
    tol: Vec<String>,
    /// key=value file mirroring these flags; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Skip the verification summary after generating
    #[arg(long)]
    no_verify: bool,
    /// Use the h/(2|g'|) immersion prefactor (negative control)
    #[arg(long, hide = true)]
    debug_prefactor_inv_norm: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Obj,
    Ply,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// Failure carrying its exit code.
struct Failure(u8, String);

fn input_error(msg: impl Into<String>) -> Failure {
    Failure(EXIT_INPUT, msg.into())
}

#[derive(Debug)]
struct Resolved {
    target: Target,
    domain: DomainSpec,
    format: Format,
    out: Option<PathBuf>,
    fd_step: Option<f64>,
    tols: Vec<String>,
    prefactor: Prefactor,
    verify_after: bool,
}

fn value<T: std::str::FromStr>(flag: Option<T>, cfg: &ConfigFile, key: &str) -> Result<Option<T>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    cfg.get(key)
        .map(|s| s.parse::<T>().map_err(|_| input_error(format!("config: bad value for `{key}`: {s}"))))
        .transpose()
}

fn resolve(args: &Common, rotational_cmd: bool) -> Result<Resolved, Failure> {
    let cfg = match &args.config {
        Some(p) => ConfigFile::load(p).map_err(input_error)?,
        None => ConfigFile::default(),
    };
    let preset_name = value(args.preset.clone(), &cfg, "preset")?;
    let preset = match &preset_name {
        Some(name) => Some(presets::find(name).ok_or_else(|| input_error(format!("unknown preset `{name}`")))?),
        None => None,
    };
    let f = value(args.f.clone(), &cfg, "f")?;
    let g = value(args.g.clone(), &cfg, "g")?;
    let a = value(args.a, &cfg, "a")?;
    let b = value(args.b, &cfg, "b")?;

    let target = if rotational_cmd || a.is_some() || b.is_some() {
        if f.is_some() || g.is_some() {
            return Err(input_error("give either --f/--g or --a/--b, not both"));
        }
        let preset_ab = match preset.map(|p| p.target()) {
            Some(Target::Rotational { a, b }) => Some((a, b)),
            Some(_) => return Err(input_error("preset is not rotational")),
            None => None,
        };
        match (a.or(preset_ab.map(|p| p.0)), b.or(preset_ab.map(|p| p.1))) {
            (Some(a), Some(b)) => Target::Rotational { a, b },
            _ => return Err(input_error("rotational surfaces need --a and --b (or a rotational --preset)")),
        }
    } else {
        let preset_fg = match preset.map(|p| p.target()) {
            Some(Target::Pair { f, g }) => Some((f, g)),
            Some(t @ Target::Rotational { .. }) => {
                if f.is_some() || g.is_some() {
                    return Err(input_error("preset is rotational; --f/--g do not apply"));
                }
                return finish(args, &cfg, t, preset);
            }
            None => None,
        };
        match (f.or(preset_fg.as_ref().map(|p| p.0.clone())), g.or(preset_fg.map(|p| p.1))) {
            (Some(f), Some(g)) => Target::Pair { f, g },
            _ => return Err(input_error("need --f and --g, or --preset")),
        }
    };
    finish(args, &cfg, target, preset)
}

fn finish(
    args: &Common,
    cfg: &ConfigFile,
    target: Target,
    preset: Option<&presets::Preset>,
) -> Result<Resolved, Failure> {
    let nu = match value(args.nu.clone(), cfg, "nu")? {
        Some(s) => parse_resolution(&s).ok_or_else(|| input_error(format!("bad --nu `{s}`")))?,
        None => [DEFAULT_RESOLUTION; 2],
    };
    let domain_src = value(args.domain.clone(), cfg, "domain")?
        .or_else(|| preset.map(|p| p.domain.to_string()))
        .unwrap_or_else(|| match target {
            Target::Rotational { .. } => "rect:-1.5,1.5,0,tau,periodic".into(),
            Target::Pair { .. } => "rect:-1,1,-1,1".into(),
        });
    let mut domain = DomainSpec::parse(&domain_src, nu).map_err(|e| input_error(e.to_string()))?;
    let mg = value(args.mask_gprime, cfg, "mask-gprime")?.unwrap_or(domain.mask_gprime);
    let md = value(args.mask_detv, cfg, "mask-detv")?.unwrap_or(domain.mask_detv);
    domain = domain.with_masks(mg, md).map_err(|e| input_error(e.to_string()))?;

    let mut tols = cfg.tols().to_vec();
    tols.extend(args.tol.iter().cloned());
    Ok(Resolved {
        target,
        domain,
        format: value(args.format, cfg, "format")?.unwrap_or(Format::Obj),
        out: value(args.out.clone(), cfg, "out")?,
        fd_step: value(args.fd_step, cfg, "fd-step")?,
        tols,
        prefactor: if args.debug_prefactor_inv_norm { Prefactor::InvNorm } else { Prefactor::InvNormSq },
        verify_after: !args.no_verify,
    })
}

fn verify_options(r: &Resolved) -> Result<VerifyOptions, Failure> {
    let mut opts = VerifyOptions::new(r.target.clone(), r.domain);
    opts.prefactor = r.prefactor;
    if let Some(step) = r.fd_step {
        opts.fd_step = step;
    }
    for t in &r.tols {
        let (name, v) = parse_tolerance_override(t).ok_or_else(|| input_error(format!("bad --tol `{t}`")))?;
        opts.tolerances.set(name, v).map_err(|e| input_error(e.to_string()))?;
    }
    Ok(opts)
}

fn run_verify(opts: &VerifyOptions) -> Result<VerificationReport, Failure> {
    verify(opts).map_err(|e: VerifyError| input_error(e.to_string()))
}

fn print_summary(report: &VerificationReport) {
    let mut err = io::stderr().lock();
    let _ = writeln!(err, "verification: {}", if report.pass { "PASS" } else { "FAIL" });
    for c in &report.checks {
        let _ = writeln!(
            err,
            "  {:<4} {:<24} max {:.3e}  tol {:.0e}  tested {}  masked {}",
            if c.pass { "ok" } else { "FAIL" },
            c.name,
            c.max_residual,
            c.tolerance,
            c.points_tested,
            c.points_masked
        );
    }
    let d = &report.detv_diagnostic;
    let _ = writeln!(
        err,
        "  detV closed forms vs product: printed {:.2e}, corrected prefactor {:.2e}, expanded {:.2e}; matching {:?}",
        d.printed, d.corrected_prefactor, d.expanded, d.matching
    );
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| input_error(format!("cannot create {}: {e}", path.display())))
}

fn cmd_generate(args: &Common, rotational: bool) -> Result<(), Failure> {
    let r = resolve(args, rotational)?;
    let opts = verify_options(&r)?;
    let surface = r.target.surface().map_err(|e| input_error(e.to_string()))?.with_prefactor(r.prefactor);
    let out = r.out.clone().ok_or_else(|| input_error("--out is required"))?;
    let grid = sample(&surface, &r.domain);
    log::info!("{} of {} grid points masked", grid.masked_count(), grid.samples.len());
    if grid.unmasked().next().is_none() {
        return Err(Failure(EXIT_DEGENERATE, "no regular points in the domain".into()));
    }
    let mut w = create(&out)?;
    let io_err = |e: io::Error| input_error(format!("cannot write {}: {e}", out.display()));
    match r.format {
        Format::Csv => mesh::write_csv(&grid, &mut w).map_err(io_err)?,
        Format::Obj | Format::Ply => {
            let m = Mesh::from_grid(&grid).map_err(|e| Failure(EXIT_DEGENERATE, e.to_string()))?;
            let res = if r.format == Format::Obj { m.write_obj(&mut w) } else { m.write_ply(&mut w) };
            res.map_err(io_err)?;
            eprintln!("wrote {} ({} vertices, {} triangles)", out.display(), m.positions.len(), m.triangles.len());
        }
    }
    w.flush().map_err(io_err)?;
    if r.verify_after {
        print_summary(&run_verify(&opts)?);
    }
    Ok(())
}

fn cmd_verify(args: &Common) -> Result<(), Failure> {
    let r = resolve(args, false)?;
    let opts = verify_options(&r)?;
    let report = run_verify(&opts)?;
    if report.checks.iter().all(|c| c.points_tested == 0) {
        return Err(Failure(EXIT_DEGENERATE, "no regular points in the domain".into()));
    }
    let json = report.to_json();
    match &r.out {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{json}")
                .and_then(|_| w.flush())
                .map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))?;
        }
        None => println!("{json}"),
    }
    print_summary(&report);
    if report.pass {
        Ok(())
    } else {
        Err(Failure(EXIT_VERIFY_FAILED, "verification failed".into()))
    }
}

fn cmd_presets() {
    for p in &PRESETS {
        println!("{}", p.describe());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = configure_threads_from_env() {
        log::info!("using {n} worker threads");
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(args) => cmd_generate(args, false),
        Command::Rotational(args) => cmd_generate(args, true),
        Command::Verify(args) => cmd_verify(args),
        Command::Presets => {
            cmd_presets();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            if code != EXIT_VERIFY_FAILED {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}
