//! File formats: loop / potential / frame JSON schemas, CSV and OBJ
//! emission, and a small deterministic JSON writer (floats fixed to 17
//! significant digits so identical runs produce byte-identical reports).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Deserialize;

use crate::dpw::MeromorphicFrame;
use crate::exact::{GaussQ, Ring};
use crate::linalg::{c, CMat};
use crate::loops::LaurentLoop;
use crate::poly::{Poly, PolyMat};
use crate::potentials::{
    make_s4_potential, make_willmore_potential, s6_example_potential, ColumnPair,
    GradedCoefficient, NormalizedPotential, WillmorePotentialSpec,
};
use crate::roots::build_torus_and_roots;
use crate::willmore::SurfaceGrid;
use crate::{Result, UnitonError};

/// 17-significant-digit float formatting for deterministic reports.
pub fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{:.1}", x)
    } else {
        format!("{:.16e}", x)
    }
}

/// Minimal JSON writer with deterministic number formatting.
pub enum JsonValue {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<JsonValue>),
    Object(Vec<(String, JsonValue)>),
}

impl JsonValue {
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            JsonValue::Null => out.push_str("null"),
            JsonValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            JsonValue::Int(v) => {
                let _ = write!(out, "{v}");
            }
            JsonValue::Float(v) => out.push_str(&fmt_f64(*v)),
            JsonValue::Str(s) => {
                out.push('"');
                for ch in s.chars() {
                    match ch {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\t' => out.push_str("\\t"),
                        ch if (ch as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", ch as u32);
                        }
                        ch => out.push(ch),
                    }
                }
                out.push('"');
            }
            JsonValue::Array(items) => {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            JsonValue::Object(fields) => {
                out.push('{');
                for (k, (key, val)) in fields.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    JsonValue::Str(key.clone()).write(out);
                    out.push(':');
                    val.write(out);
                }
                out.push('}');
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Loop JSON: { "dim": n, "coeffs": [ { "exp": j, "re": [[..]], "im": [[..]] } ] }

#[derive(Deserialize)]
struct LoopJson {
    dim: usize,
    coeffs: Vec<LoopCoeffJson>,
}

#[derive(Deserialize)]
struct LoopCoeffJson {
    exp: i32,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

pub fn loop_from_json(text: &str) -> Result<LaurentLoop> {
    let parsed: LoopJson = serde_json::from_str(text)?;
    let mut coeffs = BTreeMap::new();
    for cj in parsed.coeffs {
        if cj.re.len() != parsed.dim || cj.im.len() != parsed.dim {
            return Err(UnitonError::Parse("coefficient matrix shape mismatch".into()));
        }
        let m = CMat::from_fn(parsed.dim, parsed.dim, |i, j| c(cj.re[i][j], cj.im[i][j]));
        coeffs.insert(cj.exp, m);
    }
    Ok(LaurentLoop::from_coeffs(parsed.dim, coeffs))
}

pub fn loop_to_json(l: &LaurentLoop) -> JsonValue {
    let dim = l.dim();
    let coeffs = l
        .exponents()
        .into_iter()
        .map(|e| {
            let m = l.coeff(e);
            let grid = |im: bool| {
                JsonValue::Array(
                    (0..dim)
                        .map(|i| {
                            JsonValue::Array(
                                (0..dim)
                                    .map(|j| {
                                        let z = m[(i, j)];
                                        JsonValue::Float(if im { z.im } else { z.re })
                                    })
                                    .collect(),
                            )
                        })
                        .collect(),
                )
            };
            JsonValue::Object(vec![
                ("exp".into(), JsonValue::Int(e as i64)),
                ("re".into(), grid(false)),
                ("im".into(), grid(true)),
            ])
        })
        .collect();
    JsonValue::Object(vec![
        ("dim".into(), JsonValue::Int(dim as i64)),
        ("coeffs".into(), JsonValue::Array(coeffs)),
    ])
}

// ---------------------------------------------------------------------------
// Potential JSON.
//
// { "kind": "willmore", "m": 4, "family": 3,
//   "columns": [ { "type": "ii", "h": [ [ [re,im], ... ] × 4 ] }, ... ] }
// { "kind": "s4", "f": [ [ [re,im], ... ] × 4 ] }
// { "kind": "graded", "m": 3, "selector": [2,3], "symmetric": true,
//   "components": [ { "j": 0, "polys": [ [ [re,im], ... ] ... ] } ] }

#[derive(Deserialize)]
struct PotentialJson {
    kind: String,
    #[serde(default)]
    m: Option<usize>,
    #[serde(default)]
    family: Option<usize>,
    #[serde(default)]
    columns: Option<Vec<ColumnJson>>,
    #[serde(default)]
    f: Option<Vec<PolyJson>>,
    #[serde(default)]
    selector: Option<Vec<usize>>,
    #[serde(default)]
    symmetric: Option<bool>,
    #[serde(default)]
    components: Option<Vec<ComponentJson>>,
}

#[derive(Deserialize)]
struct ColumnJson {
    #[serde(rename = "type")]
    kind: String,
    h: Vec<PolyJson>,
}

#[derive(Deserialize)]
struct ComponentJson {
    j: usize,
    polys: Vec<PolyJson>,
}

type PolyJson = Vec<[f64; 2]>;

fn poly_from_json(p: &PolyJson) -> Poly<GaussQ> {
    Poly::from_coeffs(
        p.iter()
            .map(|&[re, im]| GaussQ::from_c64(Complex64::new(re, im)))
            .collect(),
    )
}

pub fn potential_from_json(text: &str) -> Result<NormalizedPotential> {
    let parsed: PotentialJson = serde_json::from_str(text)?;
    match parsed.kind.as_str() {
        "willmore" => {
            let m = parsed.m.ok_or_else(|| UnitonError::Parse("willmore needs m".into()))?;
            let family = parsed
                .family
                .ok_or_else(|| UnitonError::Parse("willmore needs family".into()))?;
            let columns = parsed
                .columns
                .ok_or_else(|| UnitonError::Parse("willmore needs columns".into()))?;
            let pairs = columns
                .iter()
                .map(|col| match col.kind.as_str() {
                    "i" => {
                        if col.h.len() != 4 {
                            return Err(UnitonError::Parse(
                                "type (i) pair needs h = [h1, h3, h1_hat, h3_hat]".into(),
                            ));
                        }
                        Ok(ColumnPair::TypeI {
                            h1: poly_from_json(&col.h[0]),
                            h3: poly_from_json(&col.h[1]),
                            h1_hat: poly_from_json(&col.h[2]),
                            h3_hat: poly_from_json(&col.h[3]),
                        })
                    }
                    "ii" => {
                        if col.h.len() != 4 {
                            return Err(UnitonError::Parse(
                                "type (ii) pair needs h = [h1, h2, h3, h4]".into(),
                            ));
                        }
                        Ok(ColumnPair::TypeII {
                            h: [
                                poly_from_json(&col.h[0]),
                                poly_from_json(&col.h[1]),
                                poly_from_json(&col.h[2]),
                                poly_from_json(&col.h[3]),
                            ],
                        })
                    }
                    other => Err(UnitonError::Parse(format!("unknown column type {other}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            make_willmore_potential(&WillmorePotentialSpec { m, family, pairs })
        }
        "s4" => {
            let f = parsed.f.ok_or_else(|| UnitonError::Parse("s4 needs f".into()))?;
            if f.len() != 4 {
                return Err(UnitonError::Parse("s4 needs exactly f1..f4".into()));
            }
            make_s4_potential(&[
                poly_from_json(&f[0]),
                poly_from_json(&f[1]),
                poly_from_json(&f[2]),
                poly_from_json(&f[3]),
            ])
        }
        "graded" => {
            let m = parsed.m.ok_or_else(|| UnitonError::Parse("graded needs m".into()))?;
            let selector = parsed
                .selector
                .ok_or_else(|| UnitonError::Parse("graded needs selector".into()))?;
            let symmetric = parsed.symmetric.unwrap_or(false);
            let comps = parsed
                .components
                .ok_or_else(|| UnitonError::Parse("graded needs components".into()))?;
            let sys = build_torus_and_roots(m)?;
            let ce = sys.canonical_element(&selector)?;
            let coefficients: Vec<GradedCoefficient> = comps
                .iter()
                .map(|cj| GradedCoefficient {
                    j: cj.j,
                    polys: cj.polys.iter().map(poly_from_json).collect(),
                })
                .collect();
            make_nilpotent(&ce, &coefficients, symmetric)
        }
        other => Err(UnitonError::Parse(format!("unknown potential kind {other}"))),
    }
}

fn make_nilpotent(
    ce: &crate::roots::CanonicalElement,
    coeffs: &[GradedCoefficient],
    symmetric: bool,
) -> Result<NormalizedPotential> {
    crate::potentials::make_nilpotent_potential(ce, coeffs, symmetric)
}

/// Built-in potential sources for the CLI and pipeline configs.
pub fn builtin_potential(name: &str) -> Result<NormalizedPotential> {
    match name {
        "s6-example" => Ok(s6_example_potential()),
        "s4-family" => {
            // f = (z, z, −z, z): the sample constraint-satisfying family
            let zp = Poly::monomial(GaussQ::one(), 1);
            make_s4_potential(&[zp.clone(), zp.clone(), zp.neg(), zp])
        }
        other => Err(UnitonError::Parse(format!(
            "unknown built-in potential {other} (expected s6-example or s4-family)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Frame JSON: { "z_degree": d, "terms": [ { "z_exp": k, "loop": <loop> } ] }

pub fn frame_to_json(f: &MeromorphicFrame) -> JsonValue {
    let zdeg = f.z_degree();
    let mut terms = Vec::new();
    for k in 0..=zdeg {
        // loop whose λ-coefficients are the z^k coefficients of each term
        let mut coeffs: BTreeMap<i32, CMat> = BTreeMap::new();
        for (e, pm) in &f.terms {
            let m = CMat::from_fn(f.dim, f.dim, |i, j| {
                pm.get(i, j)
                    .coeffs
                    .get(k)
                    .map(|q| q.to_c64())
                    .unwrap_or_else(|| c(0.0, 0.0))
            });
            if m.max_abs() > 0.0 {
                coeffs.insert(*e, m);
            }
        }
        if coeffs.is_empty() {
            continue;
        }
        let lp = LaurentLoop::from_coeffs(f.dim, coeffs);
        terms.push(JsonValue::Object(vec![
            ("z_exp".into(), JsonValue::Int(k as i64)),
            ("loop".into(), loop_to_json(&lp)),
        ]));
    }
    JsonValue::Object(vec![
        ("z_degree".into(), JsonValue::Int(zdeg as i64)),
        ("terms".into(), JsonValue::Array(terms)),
    ])
}

#[derive(Deserialize)]
struct FrameJson {
    #[allow(dead_code)]
    z_degree: usize,
    terms: Vec<FrameTermJson>,
}

#[derive(Deserialize)]
struct FrameTermJson {
    z_exp: usize,
    #[serde(rename = "loop")]
    loop_json: serde_json::Value,
}

pub fn frame_from_json(text: &str) -> Result<MeromorphicFrame> {
    let parsed: FrameJson = serde_json::from_str(text)?;
    let mut dim = 0usize;
    let mut by_lambda: BTreeMap<i32, BTreeMap<usize, CMat>> = BTreeMap::new();
    for term in &parsed.terms {
        let lp = loop_from_json(&term.loop_json.to_string())?;
        dim = lp.dim();
        for e in lp.exponents() {
            by_lambda.entry(e).or_default().insert(term.z_exp, lp.coeff(e));
        }
    }
    let mut terms = BTreeMap::new();
    for (e, zmap) in by_lambda {
        let mut pm = PolyMat::<GaussQ>::zeros(dim);
        for (zk, m) in zmap {
            for i in 0..dim {
                for j in 0..dim {
                    if m[(i, j)].norm() == 0.0 {
                        continue;
                    }
                    let add = Poly::monomial(GaussQ::from_c64(m[(i, j)]), zk);
                    let cur = pm.get(i, j).clone();
                    pm.set(i, j, cur.add(&add));
                }
            }
        }
        terms.insert(e, pm);
    }
    Ok(MeromorphicFrame {
        dim,
        base_point: Complex64::new(0.0, 0.0),
        terms,
        steps_used: 0,
        mc_exact: false,
    })
}

// ---------------------------------------------------------------------------
// CSV / OBJ emission

/// Grid report rows (z_re, z_im, residual, singular_flag).
pub fn grid_report_csv(rows: &[(f64, f64, Option<f64>, bool)]) -> String {
    let mut out = String::from("z_re,z_im,residual,singular_flag\n");
    for (re, im, res, singular) in rows {
        let r = res.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", fmt_f64(*re), fmt_f64(*im), r, *singular as u8);
    }
    out
}

/// Surface samples as CSV: z coordinates followed by the ambient components.
pub fn surface_csv(s: &SurfaceGrid) -> String {
    let mut out = String::from("z_re,z_im");
    for k in 0..s.ambient_dim {
        let _ = write!(out, ",x{}", k + 1);
    }
    out.push('\n');
    for (z, v) in s.grid.points().iter().zip(&s.values) {
        let _ = write!(out, "{},{}", fmt_f64(z.re), fmt_f64(z.im));
        for comp in v {
            let _ = write!(out, ",{}", fmt_f64(*comp));
        }
        out.push('\n');
    }
    out
}

/// OBJ export of the grid image under a coordinate-triple projection
/// (1-indexed). Vertex count = grid size; (n_re−1)(n_im−1)·2 triangles.
/// Degenerate (all-equal) samples are emitted with a warning comment.
pub fn surface_obj(s: &SurfaceGrid, projection: (usize, usize, usize)) -> Result<String> {
    let (nx, ny) = s.grid.shape();
    if s.values.is_empty() {
        return Err(UnitonError::InvalidArgument("empty surface grid".into()));
    }
    let (pi, pj, pk) = projection;
    for idx in [pi, pj, pk] {
        if idx < 1 || idx > s.ambient_dim {
            return Err(UnitonError::InvalidArgument(format!(
                "projection index {idx} out of range 1..={}",
                s.ambient_dim
            )));
        }
    }
    let mut out = String::new();
    let degenerate = s.values.iter().all(|v| v == &s.values[0]);
    if degenerate {
        out.push_str("# warning: degenerate surface (all samples equal)\n");
    }
    for v in &s.values {
        let _ = writeln!(
            out,
            "v {} {} {}",
            fmt_f64(v[pi - 1]),
            fmt_f64(v[pj - 1]),
            fmt_f64(v[pk - 1])
        );
    }
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let a = s.grid.index(ix, iy) + 1;
            let b = s.grid.index(ix + 1, iy) + 1;
            let cc = s.grid.index(ix + 1, iy + 1) + 1;
            let d = s.grid.index(ix, iy + 1) + 1;
            let _ = writeln!(out, "f {a} {b} {cc}");
            let _ = writeln!(out, "f {a} {cc} {d}");
        }
    }
    Ok(out)
}

/// Parse a list of λ samples: tokens are real numbers, `i`/`-i`, `a+bi`,
/// or `angle:<radians>` for e^{iθ}.
pub fn parse_lambdas(s: &str) -> Result<Vec<Complex64>> {
    s.split(',')
        .map(|tok| parse_complex(tok.trim()))
        .collect()
}

pub fn parse_complex(tok: &str) -> Result<Complex64> {
    if let Some(rest) = tok.strip_prefix("angle:") {
        let t: f64 = rest
            .parse()
            .map_err(|_| UnitonError::Parse(format!("bad angle in {tok}")))?;
        return Ok(Complex64::new(t.cos(), t.sin()));
    }
    match tok {
        "i" => return Ok(Complex64::new(0.0, 1.0)),
        "-i" => return Ok(Complex64::new(0.0, -1.0)),
        _ => {}
    }
    if let Ok(x) = tok.parse::<f64>() {
        return Ok(Complex64::new(x, 0.0));
    }
    // a+bi / a-bi with a mandatory real part
    if let Some(pos) = tok[1..].find(['+', '-']).map(|p| p + 1) {
        let (re, imtok) = tok.split_at(pos);
        let re: f64 = re
            .parse()
            .map_err(|_| UnitonError::Parse(format!("bad complex {tok}")))?;
        let imtok = imtok
            .strip_suffix('i')
            .ok_or_else(|| UnitonError::Parse(format!("bad complex {tok}")))?;
        let im: f64 = match imtok {
            "+" => 1.0,
            "-" => -1.0,
            _ => imtok
                .parse()
                .map_err(|_| UnitonError::Parse(format!("bad complex {tok}")))?,
        };
        return Ok(Complex64::new(re, im));
    }
    Err(UnitonError::Parse(format!("cannot parse complex number {tok}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::sampled_distance;
    use crate::{dpw::picard_integrate, harmonic::GridSpec};

    #[test]
    fn loop_json_round_trip() {
        let pot = s6_example_potential();
        let frame = picard_integrate(&pot, Complex64::new(0.0, 0.0), 0).unwrap();
        let lp = frame.eval_loop(Complex64::new(0.3, -0.2));
        let text = loop_to_json(&lp).render();
        let back = loop_from_json(&text).unwrap();
        assert!(lp.sub(&back).max_abs() < 1e-15);
    }

    #[test]
    fn frame_json_round_trip() {
        let pot = s6_example_potential();
        let frame = picard_integrate(&pot, Complex64::new(0.0, 0.0), 0).unwrap();
        let text = frame_to_json(&frame).render();
        let back = frame_from_json(&text).unwrap();
        let z = Complex64::new(0.4, 0.1);
        assert!(sampled_distance(&frame.eval_loop(z), &back.eval_loop(z)) < 1e-14);
    }

    #[test]
    fn potential_json_parsing() {
        // the S⁶ example as a family-3 willmore potential
        let text = r#"{
          "kind": "willmore", "m": 4, "family": 3,
          "columns": [
            { "type": "ii", "h": [ [[0,0],[0,1]], [[0,0],[0,-1]], [[-1,0]], [[0,1]] ] },
            { "type": "ii", "h": [ [[0,-0.5]], [[0,-0.5]], [[0,0],[-0.5,0]], [[0,0],[0,-0.5]] ] }
          ]
        }"#;
        let pot = potential_from_json(text).unwrap();
        let direct = s6_example_potential();
        assert_eq!(pot.eta, direct.eta);
        // graded kind
        let text = r#"{
          "kind": "graded", "m": 3, "selector": [2,3], "symmetric": false,
          "components": [ { "j": 0, "polys": [ [[1,0]], [[0,0]], [[0,0]], [[0,0]] ] } ]
        }"#;
        let pot = potential_from_json(text);
        assert!(pot.is_ok(), "{pot:?}");
        // s4 kind with violated constraint is rejected
        let text = r#"{ "kind": "s4", "f": [ [[0,0],[1,0]], [[0,0],[1,0]], [[0,0],[1,0]], [[0,0],[1,0]] ] }"#;
        assert!(potential_from_json(text).is_err());
    }

    #[test]
    fn obj_counts() {
        let grid = GridSpec::parse("0:1:2,0:1:2").unwrap();
        let s = SurfaceGrid {
            grid,
            lambda: Complex64::new(1.0, 0.0),
            ambient_dim: 3,
            values: vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.1],
                vec![0.0, 1.0, 0.2],
                vec![1.0, 1.0, 0.3],
            ],
        };
        let obj = surface_obj(&s, (1, 2, 3)).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2);
        let grid = GridSpec::parse("0:1:21,0:1:21").unwrap();
        let s = SurfaceGrid {
            grid: grid.clone(),
            lambda: Complex64::new(1.0, 0.0),
            ambient_dim: 3,
            values: vec![vec![0.0, 0.0, 0.0]; grid.len()],
        };
        let obj = surface_obj(&s, (1, 2, 3)).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 441);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 800);
        assert!(obj.starts_with("# warning: degenerate"));
    }

    #[test]
    fn lambda_parsing() {
        let l = parse_lambdas("1,i,-1,angle:0.7853981633974483,0.5+0.5i").unwrap();
        assert_eq!(l.len(), 5);
        assert!((l[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((l[3] - Complex64::new(0.5f64.sqrt(), 0.5f64.sqrt())).norm() < 1e-12);
        assert!((l[4] - Complex64::new(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn deterministic_float_format() {
        assert_eq!(fmt_f64(1.0), "1.0");
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        let v = JsonValue::Object(vec![
            ("a".into(), JsonValue::Float(std::f64::consts::PI)),
            ("b".into(), JsonValue::Array(vec![JsonValue::Int(3)])),
        ]);
        assert_eq!(v.render(), v.render());
    }
}
