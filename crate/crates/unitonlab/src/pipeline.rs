//! End-to-end pipeline runs: potential → Picard → per-point Iwasawa →
//! flatness / uniton / reality checks, with a deterministic JSON report
//! naming the first violated invariant.

use num_complex::Complex64;
use serde::Deserialize;

use crate::config::Tolerances;
use crate::dpw::picard_integrate;
use crate::factor::{duality_check, IwasawaRoute};
use crate::harmonic::{
    extended_solution, flatness_residual_fine, frame_grid, FrameEvaluator, GridSpec,
};
use crate::jsonio::{builtin_potential, parse_complex, parse_lambdas, potential_from_json, JsonValue};
use crate::potentials::NormalizedPotential;
use crate::{Result, UnitonError};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PipelineMode {
    Compact,
    Noncompact,
    Duality,
}

impl PipelineMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "compact" => Ok(PipelineMode::Compact),
            "noncompact" => Ok(PipelineMode::Noncompact),
            "duality" => Ok(PipelineMode::Duality),
            other => Err(UnitonError::Parse(format!("unknown mode {other}"))),
        }
    }
}

pub struct PipelineConfig {
    pub potential_name: String,
    pub potential: NormalizedPotential,
    pub grid: GridSpec,
    pub lambdas: Vec<Complex64>,
    pub base_point: Complex64,
    pub mode: PipelineMode,
    pub tol: Tolerances,
}

#[derive(Deserialize)]
struct ConfigJson {
    potential: String,
    #[serde(default)]
    potential_file: Option<String>,
    grid: String,
    #[serde(default)]
    lambda: Option<String>,
    #[serde(default)]
    base_point: Option<String>,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    tolerances: Option<TolerancesJson>,
}

#[derive(Deserialize)]
struct TolerancesJson {
    #[serde(default)]
    factorization: Option<f64>,
    #[serde(default)]
    reality: Option<f64>,
    #[serde(default)]
    flatness: Option<f64>,
    #[serde(default)]
    fd_step: Option<f64>,
}

impl PipelineConfig {
    /// Parse a config: `potential` is a built-in name or `file`, in which
    /// case `potential_file` holds the path.
    pub fn from_json(text: &str) -> Result<PipelineConfig> {
        let parsed: ConfigJson = serde_json::from_str(text)?;
        let (name, potential) = if parsed.potential == "file" {
            let path = parsed
                .potential_file
                .ok_or_else(|| UnitonError::Parse("potential=file needs potential_file".into()))?;
            let body = std::fs::read_to_string(&path)?;
            (path, potential_from_json(&body)?)
        } else {
            (parsed.potential.clone(), builtin_potential(&parsed.potential)?)
        };
        let grid = GridSpec::parse(&parsed.grid)?;
        let lambdas = parse_lambdas(parsed.lambda.as_deref().unwrap_or("1,angle:0.7853981633974483,i,-1"))?;
        let base_point = parse_complex(parsed.base_point.as_deref().unwrap_or("0"))?;
        let mode = PipelineMode::parse(parsed.mode.as_deref().unwrap_or("compact"))?;
        let mut tol = Tolerances::default();
        if let Some(t) = parsed.tolerances {
            if let Some(v) = t.factorization {
                tol.factorization = v;
            }
            if let Some(v) = t.reality {
                tol.reality = v;
            }
            if let Some(v) = t.flatness {
                tol.flatness = v;
            }
            if let Some(v) = t.fd_step {
                tol.fd_step = v;
            }
        }
        if grid.shape().0 < 3 || grid.shape().1 < 3 {
            return Err(UnitonError::GridTooCoarse(
                "pipeline grid needs ≥ 3×3 points".into(),
            ));
        }
        Ok(PipelineConfig { potential_name: name, potential, grid, lambdas, base_point, mode, tol })
    }
}

pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub struct PipelineReport {
    pub potential_name: String,
    pub grid: String,
    pub mode: PipelineMode,
    pub tol: Tolerances,
    pub picard_steps: usize,
    pub mc_exact: bool,
    pub singular_points: usize,
    pub flatness_residual: f64,
    pub uniton_degree: usize,
    pub based_residual: f64,
    pub idempotency_residual: f64,
    pub reality_residual: f64,
    pub twist_residual: f64,
    pub duality_discrepancy: Option<f64>,
    pub duality_offcell: Option<usize>,
    pub checks: Vec<Check>,
    pub grid_rows: Vec<(f64, f64, Option<f64>, bool)>,
}

impl PipelineReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        self.checks.iter().find(|c| !c.pass).map(|c| c.name)
    }

    pub fn to_json(&self) -> JsonValue {
        let mode = match self.mode {
            PipelineMode::Compact => "compact",
            PipelineMode::Noncompact => "noncompact",
            PipelineMode::Duality => "duality",
        };
        let checks = self
            .checks
            .iter()
            .map(|c| {
                JsonValue::Object(vec![
                    ("name".into(), JsonValue::Str(c.name.into())),
                    ("value".into(), JsonValue::Float(c.value)),
                    ("tolerance".into(), JsonValue::Float(c.tolerance)),
                    ("pass".into(), JsonValue::Bool(c.pass)),
                ])
            })
            .collect();
        let mut results = vec![
            ("picard_steps".into(), JsonValue::Int(self.picard_steps as i64)),
            ("maurer_cartan_exact".into(), JsonValue::Bool(self.mc_exact)),
            ("singular_points".into(), JsonValue::Int(self.singular_points as i64)),
            ("flatness_residual".into(), JsonValue::Float(self.flatness_residual)),
            ("uniton_degree".into(), JsonValue::Int(self.uniton_degree as i64)),
            ("based_residual".into(), JsonValue::Float(self.based_residual)),
            ("idempotency_residual".into(), JsonValue::Float(self.idempotency_residual)),
            ("reality_residual".into(), JsonValue::Float(self.reality_residual)),
            ("twist_residual".into(), JsonValue::Float(self.twist_residual)),
        ];
        if let Some(d) = self.duality_discrepancy {
            results.push(("duality_discrepancy".into(), JsonValue::Float(d)));
        }
        if let Some(n) = self.duality_offcell {
            results.push(("duality_offcell_points".into(), JsonValue::Int(n as i64)));
        }
        JsonValue::Object(vec![
            (
                "config".into(),
                JsonValue::Object(vec![
                    ("potential".into(), JsonValue::Str(self.potential_name.clone())),
                    ("grid".into(), JsonValue::Str(self.grid.clone())),
                    ("mode".into(), JsonValue::Str(mode.into())),
                ]),
            ),
            (
                "tolerances".into(),
                JsonValue::Object(vec![
                    ("factorization".into(), JsonValue::Float(self.tol.factorization)),
                    ("reality".into(), JsonValue::Float(self.tol.reality)),
                    ("flatness".into(), JsonValue::Float(self.tol.flatness)),
                    ("fd_step".into(), JsonValue::Float(self.tol.fd_step)),
                    ("bauer_delta".into(), JsonValue::Float(self.tol.bauer_delta)),
                    ("prune".into(), JsonValue::Float(self.tol.prune)),
                ]),
            ),
            ("results".into(), JsonValue::Object(results)),
            ("checks".into(), JsonValue::Array(checks)),
            (
                "status".into(),
                JsonValue::Str(if self.passed() { "pass".into() } else { "fail".into() }),
            ),
            (
                "first_failure".into(),
                match self.first_failure() {
                    Some(n) => JsonValue::Str(n.into()),
                    None => JsonValue::Null,
                },
            ),
        ])
    }
}

/// Run the full pipeline for one config.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport> {
    let form = cfg.potential.form.clone().ok_or_else(|| {
        UnitonError::InvalidArgument("potential carries no reality form; cannot run pipeline".into())
    })?;
    let frame = picard_integrate(&cfg.potential, cfg.base_point, cfg.tol.picard_max_steps)?;
    let route = match cfg.mode {
        PipelineMode::Noncompact => IwasawaRoute::Noncompact,
        _ => IwasawaRoute::Compact,
    };
    let ev = FrameEvaluator::new(&frame, form.clone(), route, cfg.tol.factorization);
    let fr = frame_grid(&ev, &cfg.grid, cfg.base_point)?;
    let singular = fr.singular_count();
    // reality/twisting maxima over the grid
    let mut reality = 0.0f64;
    let mut twist = 0.0f64;
    let reality_form = match route {
        IwasawaRoute::Compact => form.compact_form(),
        IwasawaRoute::Noncompact => form.noncompact_form(),
    };
    let twist_mat = form.twist_mat();
    for f in fr.frames.iter().flatten() {
        reality = reality.max(f.real_form_residual(&reality_form, 32));
        twist = twist.max(f.is_twisted(&twist_mat, cfg.tol.reality)?.1);
    }
    let sol = extended_solution(&fr)?;
    // per-point flatness rows (fine stencil) and the max
    let points = cfg.grid.points();
    let mut rows = Vec::with_capacity(points.len());
    let mut flatness = 0.0f64;
    for (idx, &z) in points.iter().enumerate() {
        if fr.frames[idx].is_none() {
            rows.push((z.re, z.im, None, true));
            continue;
        }
        let res = flatness_residual_fine(&ev, &[z], &cfg.lambdas, cfg.tol.fd_step)?;
        flatness = flatness.max(res);
        rows.push((z.re, z.im, Some(res), false));
    }
    // duality mode: three-way F₋ agreement on a coarse subsample
    let (duality_disc, duality_off) = if cfg.mode == PipelineMode::Duality {
        let mut worst = 0.0f64;
        let mut off = 0usize;
        for &z in points.iter().step_by((points.len() / 9).max(1)) {
            let lp = frame.eval_loop(z);
            let rep = duality_check(&lp, &form, cfg.tol.factorization)?;
            worst = worst.max(rep.max_discrepancy());
            if rep.noncompact_failure.is_some() {
                off += 1;
            }
        }
        (Some(worst), Some(off))
    } else {
        (None, None)
    };
    let mut checks = vec![
        Check {
            name: "picard_maurer_cartan_exact",
            value: if frame.mc_exact { 0.0 } else { 1.0 },
            tolerance: 0.5,
            pass: frame.mc_exact,
        },
        Check {
            name: "no_singular_points",
            value: singular as f64,
            tolerance: 0.5,
            pass: singular == 0,
        },
        Check {
            name: "flatness_residual",
            value: flatness,
            tolerance: cfg.tol.flatness,
            pass: flatness < cfg.tol.flatness,
        },
        Check {
            name: "frame_reality",
            value: reality,
            tolerance: cfg.tol.reality,
            pass: reality < cfg.tol.reality,
        },
        Check {
            name: "frame_twisting",
            value: twist,
            tolerance: cfg.tol.reality,
            pass: twist < cfg.tol.reality,
        },
        Check {
            name: "solution_based_at_lambda_1",
            value: sol.based_residual,
            tolerance: cfg.tol.reality,
            pass: sol.based_residual < cfg.tol.reality,
        },
        Check {
            name: "cartan_embedding_idempotent",
            value: sol.idempotency_residual,
            tolerance: cfg.tol.reality,
            pass: sol.idempotency_residual < cfg.tol.reality,
        },
    ];
    if let Some(d) = duality_disc {
        checks.push(Check {
            name: "duality_f_minus_agreement",
            value: d,
            tolerance: cfg.tol.reality,
            pass: d < cfg.tol.reality,
        });
    }
    Ok(PipelineReport {
        potential_name: cfg.potential_name.clone(),
        grid: format!(
            "{}:{}:{},{}:{}:{}",
            cfg.grid.re.0, cfg.grid.re.1, cfg.grid.re.2, cfg.grid.im.0, cfg.grid.im.1, cfg.grid.im.2
        ),
        mode: cfg.mode,
        tol: cfg.tol.clone(),
        picard_steps: frame.steps_used,
        mc_exact: frame.mc_exact,
        singular_points: singular,
        flatness_residual: flatness,
        uniton_degree: sol.uniton_degree,
        based_residual: sol.based_residual,
        idempotency_residual: sol.idempotency_residual,
        reality_residual: reality,
        twist_residual: twist,
        duality_discrepancy: duality_disc,
        duality_offcell: duality_off,
        checks,
        grid_rows: rows,
    })
}
