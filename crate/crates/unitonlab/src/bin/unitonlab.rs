//! Command-line front end for the loop-group pipeline: root gradings,
//! potential validation, exact Picard integration, Birkhoff/Iwasawa
//! factorization, frame grids with harmonicity reports, Willmore surface
//! sampling/export, and full pipeline runs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use unitonlab::dpw::{maurer_cartan_residual, picard_integrate};
use unitonlab::factor::{birkhoff, duality_check, iwasawa, IwasawaRoute};
use unitonlab::harmonic::{flatness_residual_fine, frame_grid, FrameEvaluator, GridSpec};
use unitonlab::jsonio::{
    builtin_potential, fmt_f64, frame_to_json, grid_report_csv, loop_from_json, loop_to_json,
    parse_complex, parse_lambdas, potential_from_json, surface_csv, surface_obj, JsonValue,
};
use unitonlab::liealg::FormSpec;
use unitonlab::pipeline::{run_pipeline, PipelineConfig};
use unitonlab::potentials::NormalizedPotential;
use unitonlab::roots::build_torus_and_roots;
use unitonlab::willmore::{s6_surface, verify_surface, S4Family, SurfaceGrid};
use unitonlab::{Result, UnitonError};

#[derive(Parser)]
#[command(name = "unitonlab", version, about = "DPW loop-group pipeline for harmonic maps of finite uniton type")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Root-system machinery for so(2m, C)
    Roots {
        #[command(subcommand)]
        cmd: RootsCmd,
    },
    /// Build and validate normalized potentials
    Potential {
        #[command(subcommand)]
        cmd: PotentialCmd,
    },
    /// Exact Picard integration of nilpotent potentials
    Dpw {
        #[command(subcommand)]
        cmd: DpwCmd,
    },
    /// Birkhoff and Iwasawa factorization of matrix Laurent loops
    Factor {
        #[command(subcommand)]
        cmd: FactorCmd,
    },
    /// Extended frames on z-grids with harmonicity reports
    Harmonic {
        #[command(subcommand)]
        cmd: HarmonicCmd,
    },
    /// Closed-form Willmore surface evaluators and mesh export
    Willmore {
        #[command(subcommand)]
        cmd: WillmoreCmd,
    },
    /// Full pipeline run from a config
    Run(RunArgs),
}

#[derive(Subcommand)]
enum RootsCmd {
    /// Print grading dimensions and height of a canonical element
    Grade {
        #[arg(long)]
        m: usize,
        /// Comma-separated selector, e.g. 1,3
        #[arg(long)]
        selector: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PotentialCmd {
    /// Validate a potential spec and report its structure
    Validate {
        #[command(flatten)]
        source: PotentialSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PotentialSource {
    /// Potential spec JSON file
    #[arg(long, conflicts_with = "builtin")]
    potential: Option<PathBuf>,
    /// Built-in potential: s6-example | s4-family
    #[arg(long)]
    builtin: Option<String>,
}

impl PotentialSource {
    fn load(&self) -> Result<(String, NormalizedPotential)> {
        if let Some(name) = &self.builtin {
            return Ok((name.clone(), builtin_potential(name)?));
        }
        let path = self.potential.as_ref().ok_or_else(|| {
            UnitonError::InvalidArgument("need --potential <file> or --builtin <name>".into())
        })?;
        let text = std::fs::read_to_string(path)?;
        Ok((path.display().to_string(), potential_from_json(&text)?))
    }
}

#[derive(Subcommand)]
enum DpwCmd {
    /// Integrate a potential to the normalized meromorphic frame
    Integrate {
        #[command(flatten)]
        source: PotentialSource,
        /// Base point z0 (complex, e.g. "0" or "0.1+0.2i")
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        base_point: String,
        /// Step cap for uncertified potentials
        #[arg(long, default_value_t = 64)]
        max_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FactorCmd {
    /// Birkhoff factorization x = F_minus * F_plus
    Birkhoff {
        #[arg(long = "in")]
        input: PathBuf,
        /// Metric signature "1,7" (Willmore ambient); "none" uses the
        /// unipotent inverse route; "auto" infers from the dimension
        #[arg(long, default_value = "auto")]
        signature: String,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iwasawa factorization x = F_real * F_plus
    Iwasawa {
        #[arg(long = "in")]
        input: PathBuf,
        /// compact | noncompact
        #[arg(long, default_value = "compact")]
        form: String,
        /// Metric signature "1,n+3"; "auto" infers the Willmore form
        #[arg(long, default_value = "auto")]
        signature: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Three-way normalized-factor agreement report
    Duality {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "auto")]
        signature: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum HarmonicCmd {
    /// Per-point Iwasawa frames over a grid with a flatness report
    Frames {
        #[command(flatten)]
        source: PotentialSource,
        /// Grid spec re0:re1:n,im0:im1:n
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Lambda samples, e.g. "1,i,-1"
        #[arg(long, default_value = "1,i,-1", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        base_point: String,
        /// compact | noncompact
        #[arg(long, default_value = "compact")]
        route: String,
        /// Report kind (flatness)
        #[arg(long, default_value = "flatness")]
        report: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum WillmoreCmd {
    /// Sample the S6 Willmore two-sphere family
    S6 {
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Output path (.obj or .csv by extension)
        #[arg(long)]
        out: PathBuf,
        /// 1-indexed coordinate triple for OBJ projection
        #[arg(long, default_value = "2,3,4")]
        project: String,
        /// Also print the surface verification report
        #[arg(long, default_value_t = false)]
        verify: bool,
    },
    /// Sample the S4 family light-cone projection (built-in f = (z, z, -z, z))
    S4 {
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "2,3,4")]
        project: String,
        #[arg(long, default_value_t = false)]
        verify: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config JSON file
    #[arg(long, conflicts_with = "builtin")]
    config: Option<PathBuf>,
    /// Built-in config: s6-example
    #[arg(long)]
    builtin: Option<String>,
    /// Output directory for artifacts (report.json, frames.csv, surface.csv)
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => println!("{content}"),
    }
    Ok(())
}

fn parse_signature(sig: &str, dim: usize) -> Result<Option<FormSpec>> {
    match sig {
        "none" => Ok(None),
        "auto" => {
            if dim < 5 {
                return Err(UnitonError::InvalidArgument(
                    "cannot infer a Willmore form for dim < 5; pass --signature".into(),
                ));
            }
            Ok(Some(FormSpec::willmore(dim - 4)))
        }
        s => {
            let parts: Vec<&str> = s.split(',').collect();
            if parts.len() != 2 {
                return Err(UnitonError::Parse("signature must be p,q".into()));
            }
            let p: usize = parts[0].parse().map_err(|_| UnitonError::Parse("bad signature".into()))?;
            let q: usize = parts[1].parse().map_err(|_| UnitonError::Parse("bad signature".into()))?;
            if p + q != dim {
                return Err(UnitonError::DimensionMismatch(format!(
                    "signature {p},{q} does not match loop dimension {dim}"
                )));
            }
            if p != 1 {
                return Err(UnitonError::InvalidArgument(
                    "only signatures 1,n+3 are supported".into(),
                ));
            }
            Ok(Some(FormSpec::willmore(dim - 4)))
        }
    }
}

fn iwasawa_result_json(res: &unitonlab::factor::IwasawaResult) -> JsonValue {
    JsonValue::Object(vec![
        ("f_real".into(), loop_to_json(&res.f_real)),
        ("f_plus".into(), loop_to_json(&res.f_plus)),
        ("reconstruction_residual".into(), JsonValue::Float(res.residual)),
        ("reality_residual".into(), JsonValue::Float(res.reality_residual)),
        ("twist_residual".into(), JsonValue::Float(res.twist_residual)),
        (
            "gauge_correction_applied".into(),
            JsonValue::Bool(res.gauge_note.reality_correction.is_some()),
        ),
    ])
}

fn parse_projection(s: &str) -> Result<(usize, usize, usize)> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| UnitonError::Parse("projection needs three 1-indexed integers".into()))?;
    if v.len() != 3 {
        return Err(UnitonError::Parse("projection needs three indices".into()));
    }
    Ok((v[0], v[1], v[2]))
}

fn export_surface(s: &SurfaceGrid, out: &PathBuf, project: &str) -> Result<()> {
    let is_obj = out.extension().map(|e| e == "obj").unwrap_or(false);
    let content = if is_obj {
        surface_obj(s, parse_projection(project)?)?
    } else {
        surface_csv(s)
    };
    std::fs::write(out, content)?;
    Ok(())
}

fn real_main() -> Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Roots { cmd } => match cmd {
            RootsCmd::Grade { m, selector, out } => {
                let sel: Vec<usize> = selector
                    .split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| UnitonError::Parse("bad selector".into()))?;
                let sys = build_torus_and_roots(m)?;
                let ce = sys.canonical_element(&sel)?;
                let dims = ce
                    .grading_dims()
                    .into_iter()
                    .map(|(j, d)| (j.to_string(), JsonValue::Int(d as i64)))
                    .collect();
                let report = JsonValue::Object(vec![
                    ("m".into(), JsonValue::Int(m as i64)),
                    (
                        "selector".into(),
                        JsonValue::Array(sel.iter().map(|&s| JsonValue::Int(s as i64)).collect()),
                    ),
                    ("height".into(), JsonValue::Int(ce.height as i64)),
                    ("dims".into(), JsonValue::Object(dims)),
                    ("total_dim".into(), JsonValue::Int(ce.total_dim() as i64)),
                ]);
                write_or_print(&out, &report.render())?;
                Ok(0)
            }
        },
        Command::Potential { cmd } => match cmd {
            PotentialCmd::Validate { source, out } => {
                let (name, pot) = match source.load() {
                    Ok(v) => v,
                    Err(UnitonError::ConstraintViolated(msg)) => {
                        let report = JsonValue::Object(vec![
                            ("status".into(), JsonValue::Str("invalid".into())),
                            ("violated".into(), JsonValue::Str(msg)),
                        ]);
                        println!("{}", report.render());
                        return Ok(2);
                    }
                    Err(e) => return Err(e),
                };
                let z = Complex64::new(0.37, -0.41);
                let report = JsonValue::Object(vec![
                    ("status".into(), JsonValue::Str("valid".into())),
                    ("source".into(), JsonValue::Str(name)),
                    ("dim".into(), JsonValue::Int(pot.dim as i64)),
                    (
                        "certificate".into(),
                        JsonValue::Str(format!("{:?}", pot.certificate)),
                    ),
                    ("twist_residual".into(), JsonValue::Float(pot.twist_residual(z))),
                ]);
                write_or_print(&out, &report.render())?;
                Ok(0)
            }
        },
        Command::Dpw { cmd } => match cmd {
            DpwCmd::Integrate { source, base_point, max_steps, out } => {
                let (_, pot) = source.load()?;
                let z0 = parse_complex(&base_point)?;
                let frame = picard_integrate(&pot, z0, max_steps)?;
                eprintln!(
                    "picard: {} steps, Maurer-Cartan exact: {}, residual {:e}",
                    frame.steps_used,
                    frame.mc_exact,
                    maurer_cartan_residual(&frame, &pot)
                );
                write_or_print(&out, &frame_to_json(&frame).render())?;
                Ok(0)
            }
        },
        Command::Factor { cmd } => match cmd {
            FactorCmd::Birkhoff { input, signature, depth, tol, out } => {
                let lp = loop_from_json(&std::fs::read_to_string(&input)?)?;
                let form = parse_signature(&signature, lp.dim())?;
                let metric = form.as_ref().map(|f| f.ambient.clone());
                let res = birkhoff(&lp, metric.as_deref(), depth, tol)?;
                let report = JsonValue::Object(vec![
                    ("f_minus".into(), loop_to_json(&res.f_minus)),
                    ("f_plus".into(), loop_to_json(&res.f_plus)),
                    ("residual".into(), JsonValue::Float(res.residual)),
                    ("in_big_cell".into(), JsonValue::Bool(res.in_big_cell)),
                ]);
                write_or_print(&out, &report.render())?;
                Ok(if res.in_big_cell { 0 } else { 2 })
            }
            FactorCmd::Iwasawa { input, form, signature, tol, out } => {
                let lp = loop_from_json(&std::fs::read_to_string(&input)?)?;
                let spec = parse_signature(&signature, lp.dim())?.ok_or_else(|| {
                    UnitonError::InvalidArgument("iwasawa needs a metric signature".into())
                })?;
                let route = match form.as_str() {
                    "compact" => IwasawaRoute::Compact,
                    "noncompact" => IwasawaRoute::Noncompact,
                    other => return Err(UnitonError::Parse(format!("unknown form {other}"))),
                };
                match iwasawa(&lp, &spec, route, tol) {
                    Ok(res) => {
                        write_or_print(&out, &iwasawa_result_json(&res).render())?;
                        Ok(0)
                    }
                    Err(UnitonError::CellViolation(msg)) => {
                        let report = JsonValue::Object(vec![
                            ("status".into(), JsonValue::Str("cell-violation".into())),
                            ("detail".into(), JsonValue::Str(msg)),
                        ]);
                        write_or_print(&out, &report.render())?;
                        Ok(2)
                    }
                    Err(e) => Err(e),
                }
            }
            FactorCmd::Duality { input, signature, tol, out } => {
                let lp = loop_from_json(&std::fs::read_to_string(&input)?)?;
                let spec = parse_signature(&signature, lp.dim())?.ok_or_else(|| {
                    UnitonError::InvalidArgument("duality needs a metric signature".into())
                })?;
                let rep = duality_check(&lp, &spec, tol)?;
                let report = JsonValue::Object(vec![
                    (
                        "compact_discrepancy".into(),
                        JsonValue::Float(rep.compact_discrepancy),
                    ),
                    (
                        "noncompact_discrepancy".into(),
                        rep.noncompact_discrepancy
                            .map(JsonValue::Float)
                            .unwrap_or(JsonValue::Null),
                    ),
                    (
                        "noncompact_failure".into(),
                        rep.noncompact_failure
                            .clone()
                            .map(JsonValue::Str)
                            .unwrap_or(JsonValue::Null),
                    ),
                ]);
                write_or_print(&out, &report.render())?;
                Ok(if rep.max_discrepancy() < tol { 0 } else { 2 })
            }
        },
        Command::Harmonic { cmd } => match cmd {
            HarmonicCmd::Frames { source, grid, lambda, base_point, route, report, out } => {
                if report != "flatness" {
                    return Err(UnitonError::InvalidArgument(format!(
                        "unknown report kind {report}"
                    )));
                }
                let (_, pot) = source.load()?;
                let form = pot.form.clone().ok_or_else(|| {
                    UnitonError::InvalidArgument("potential carries no reality form".into())
                })?;
                let gridspec = GridSpec::parse(&grid)?;
                let lambdas = parse_lambdas(&lambda)?;
                let z0 = parse_complex(&base_point)?;
                let route = match route.as_str() {
                    "compact" => IwasawaRoute::Compact,
                    "noncompact" => IwasawaRoute::Noncompact,
                    other => return Err(UnitonError::Parse(format!("unknown route {other}"))),
                };
                let frame = picard_integrate(&pot, z0, 64)?;
                let ev = FrameEvaluator::new(&frame, form, route, 1e-10);
                let fr = frame_grid(&ev, &gridspec, z0)?;
                let mut rows = Vec::new();
                for (idx, z) in gridspec.points().into_iter().enumerate() {
                    if fr.frames[idx].is_none() {
                        rows.push((z.re, z.im, None, true));
                        continue;
                    }
                    let res = flatness_residual_fine(&ev, &[z], &lambdas, 1e-5)?;
                    rows.push((z.re, z.im, Some(res), false));
                }
                write_or_print(&out, &grid_report_csv(&rows))?;
                eprintln!("singular points: {}", fr.singular_count());
                Ok(0)
            }
        },
        Command::Willmore { cmd } => match cmd {
            WillmoreCmd::S6 { lambda, grid, out, project, verify } => {
                let lam = parse_complex(&lambda)?;
                let gridspec = GridSpec::parse(&grid)?;
                let s = s6_surface(&gridspec, lam)?;
                export_surface(&s, &out, &project)?;
                if verify {
                    let rep = verify_surface(&s, 1e-8)?;
                    let j = JsonValue::Object(vec![
                        ("norm_defect".into(), JsonValue::Float(rep.norm_defect)),
                        (
                            "conformality_defect".into(),
                            JsonValue::Float(rep.conformality_defect),
                        ),
                        (
                            "second_isotropy_defect".into(),
                            JsonValue::Float(rep.second_isotropy_defect),
                        ),
                        ("span_rank".into(), JsonValue::Int(rep.span_rank as i64)),
                    ]);
                    println!("{}", j.render());
                }
                Ok(0)
            }
            WillmoreCmd::S4 { lambda, grid, out, project, verify } => {
                let lam = parse_complex(&lambda)?;
                let gridspec = GridSpec::parse(&grid)?;
                let zp = unitonlab::poly::Poly::monomial(unitonlab::exact::GaussQ::from_ints(1, 0), 1);
                let fam = S4Family::new([zp.clone(), zp.clone(), zp.neg(), zp])?;
                let mut values = Vec::with_capacity(gridspec.len());
                let mut worst_pairing = 0.0f64;
                for z in gridspec.points() {
                    let sample = fam.eval(z, lam)?;
                    worst_pairing = worst_pairing.max(sample.pairing_defect);
                    // light-cone projection into S4: spatial part over y0
                    let s: Vec<f64> = (1..6).map(|k| sample.y[k] / sample.y[0]).collect();
                    values.push(s);
                }
                let s = SurfaceGrid { grid: gridspec, lambda: lam, ambient_dim: 5, values };
                export_surface(&s, &out, &project)?;
                if verify {
                    let j = JsonValue::Object(vec![(
                        "light_cone_defect".into(),
                        JsonValue::Float(worst_pairing),
                    )]);
                    println!("{}", j.render());
                }
                Ok(0)
            }
        },
        Command::Run(args) => {
            let cfg = if let Some(name) = &args.builtin {
                if name != "s6-example" {
                    return Err(UnitonError::Parse(format!("unknown built-in config {name}")));
                }
                PipelineConfig::from_json(
                    r#"{
                        "potential": "s6-example",
                        "grid": "-1:1:21,-1:1:21",
                        "lambda": "1,angle:0.7853981633974483,i,-1",
                        "mode": "compact"
                    }"#,
                )?
            } else {
                let path = args.config.as_ref().ok_or_else(|| {
                    UnitonError::InvalidArgument("need --config <file> or --builtin s6-example".into())
                })?;
                PipelineConfig::from_json(&std::fs::read_to_string(path)?)?
            };
            let started = std::time::Instant::now();
            let report = run_pipeline(&cfg)?;
            eprintln!("pipeline finished in {:.1}s", started.elapsed().as_secs_f64());
            let json = report.to_json().render();
            if let Some(dir) = &args.out_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("report.json"), &json)?;
                std::fs::write(dir.join("frames.csv"), grid_report_csv(&report.grid_rows))?;
                if cfg.potential_name == "s6-example" {
                    let s = s6_surface(&cfg.grid, Complex64::new(1.0, 0.0))?;
                    std::fs::write(dir.join("surface.csv"), surface_csv(&s))?;
                }
                eprintln!("artifacts written to {}", dir.display());
            }
            println!("{json}");
            if report.passed() {
                eprintln!("uniton degree: {}", report.uniton_degree);
                Ok(0)
            } else {
                eprintln!(
                    "FAILED invariant: {} (value {})",
                    report.first_failure().unwrap_or("unknown"),
                    fmt_f64(
                        report
                            .checks
                            .iter()
                            .find(|c| !c.pass)
                            .map(|c| c.value)
                            .unwrap_or(f64::NAN)
                    )
                );
                Ok(2)
            }
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e @ (UnitonError::ConstraintViolated(_) | UnitonError::CellViolation(_))) => {
            // machine-readable failure naming the violated invariant
            let report = JsonValue::Object(vec![
                ("status".into(), JsonValue::Str("fail".into())),
                ("violated".into(), JsonValue::Str(e.to_string())),
            ]);
            println!("{}", report.render());
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
