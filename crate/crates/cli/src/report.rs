//! Report assembly: a structured JSON document and a plain-text table view
//! of the same data.

use std::fmt::Write as _;

use itertools::Itertools;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use toric_lambda::fan::{CheckResult, ValidationReport, Wall};
use toric_lambda::io::int_to_json;
use toric_lambda::mmp::{BlowdownStep, Classification, ContractionInfo, LengthReport, MoriCone, Outcome};
use toric_lambda::positivity::{splitting_type, PositivityVerdict, WallRelation};
use toric_lambda::{Int, SmoothFan};

pub const SCHEMA: &str = "toric-lambda.report/1";

fn ints(v: &[Int]) -> Vec<Value> {
    v.iter().map(int_to_json).collect()
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

#[derive(Serialize)]
pub struct FanSummary {
    pub rank: usize,
    pub rays: usize,
    pub max_cones: usize,
    pub walls: usize,
}

#[derive(Serialize)]
pub struct CheckRow {
    pub check: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Serialize)]
pub struct WallRow {
    pub index: usize,
    pub rays: Vec<usize>,
    pub apexes: [usize; 2],
    pub b: Vec<Value>,
    pub relation: String,
    pub splitting_type: Vec<Value>,
    pub antican_degree: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction: Option<String>,
}

#[derive(Serialize)]
pub struct WitnessRow {
    pub wall: usize,
    pub wall_rays: Vec<usize>,
    pub wall_coordinates: Vec<Vec<Value>>,
    pub apexes: [usize; 2],
    pub min_degree: Value,
    pub inequality: String,
    pub tight_walls: Vec<usize>,
}

#[derive(Serialize)]
pub struct VerdictRow {
    pub m: usize,
    pub ample: bool,
    pub nef: bool,
    pub witness: WitnessRow,
}

#[derive(Serialize)]
pub struct ContractionRow {
    pub generator: usize,
    pub class: Vec<Value>,
    pub walls: Vec<usize>,
    pub kind: String,
    pub j_minus: Vec<usize>,
    pub j_zero: Vec<usize>,
    pub j_plus: Vec<usize>,
    pub fiber_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_of_exceptional_dim: Option<usize>,
    pub antican_degree: Value,
}

#[derive(Serialize)]
pub struct LengthRow {
    pub generator: usize,
    pub kind: String,
    pub antican_degree: Value,
    pub fiber_bound: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divisorial_bound_holds: Option<bool>,
    pub point_blowup_candidate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

#[derive(Serialize)]
pub struct StepRow {
    pub exceptional_ray: usize,
    pub generator: Vec<Value>,
    pub wall: Vec<usize>,
}

#[derive(Serialize)]
pub struct ClassificationRow {
    pub mode: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub chain: Vec<StepRow>,
    pub terminal_fan: Value,
}

#[derive(Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fan: Option<FanSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<Vec<CheckRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walls: Option<Vec<WallRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<Vec<VerdictRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contractions: Option<Vec<ContractionRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_check: Option<Vec<LengthRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationRow>,
}

impl Report {
    pub fn new(command: &'static str, input: &[u8]) -> Self {
        Report {
            schema: SCHEMA,
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            input_digest: digest(input),
            fan: None,
            validation: None,
            walls: None,
            verdicts: None,
            contractions: None,
            length_check: None,
            classification: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn fan_summary(fan: &SmoothFan) -> FanSummary {
    FanSummary {
        rank: fan.rank(),
        rays: fan.rays().len(),
        max_cones: fan.max_cones().len(),
        walls: fan.walls().len(),
    }
}

/// `name: pass` or `name: fail (detail)`.
pub fn check_line(c: &CheckResult) -> String {
    let status = if c.passed { "pass" } else { "fail" };
    match &c.detail {
        Some(d) => format!("{}: {status} ({d})", c.check.name()),
        None => format!("{}: {status}", c.check.name()),
    }
}

pub fn validation_rows(report: &ValidationReport) -> Vec<CheckRow> {
    report
        .checks
        .iter()
        .map(|c| CheckRow {
            check: c.check.name(),
            passed: c.passed,
            detail: c.detail.clone(),
        })
        .collect()
}

pub fn wall_rows(relations: &[WallRelation], cone: Option<&MoriCone>) -> Vec<WallRow> {
    relations
        .iter()
        .enumerate()
        .map(|(i, rel)| {
            let generator = cone.map(|c| c.generator_of_wall(i));
            let extremal = cone.zip(generator).map(|(c, g)| c.is_extremal(g));
            let contraction = cone.and_then(|c| c.classify_wall(i).ok()).map(|info| info.kind.to_string());
            WallRow {
                index: i,
                rays: rel.wall.ray_indices.clone(),
                apexes: [rel.wall.apex_a, rel.wall.apex_b],
                b: ints(rel.b()),
                relation: rel.to_string(),
                splitting_type: ints(splitting_type(rel).degrees()),
                antican_degree: int_to_json(&rel.antican_degree()),
                generator,
                extremal,
                contraction,
            }
        })
        .collect()
}

pub fn verdict_rows(fan: &SmoothFan, verdicts: &[PositivityVerdict]) -> Vec<VerdictRow> {
    verdicts
        .iter()
        .map(|v| {
            let wall: &Wall = &fan.walls()[v.witness.wall];
            VerdictRow {
                m: v.m,
                ample: v.ample,
                nef: v.nef,
                witness: WitnessRow {
                    wall: v.witness.wall,
                    wall_rays: wall.ray_indices.clone(),
                    wall_coordinates: wall.ray_indices.iter().map(|&r| ints(fan.ray(r))).collect(),
                    apexes: [wall.apex_a, wall.apex_b],
                    min_degree: int_to_json(&v.witness.min_degree),
                    inequality: v.witness.binding.to_string(),
                    tight_walls: v.witness.tight_walls.clone(),
                },
            }
        })
        .collect()
}

pub fn contraction_rows(cone: &MoriCone, contractions: &[ContractionInfo]) -> Vec<ContractionRow> {
    contractions
        .iter()
        .map(|c| ContractionRow {
            generator: c.generator,
            class: ints(&cone.generators()[c.generator].class.intersections),
            walls: c.walls.clone(),
            kind: c.kind.to_string(),
            j_minus: c.j_minus.clone(),
            j_zero: c.j_zero.clone(),
            j_plus: c.j_plus.clone(),
            fiber_dim: c.fiber_dim,
            image_of_exceptional_dim: c.image_of_exceptional_dim,
            antican_degree: int_to_json(&c.antican_degree),
        })
        .collect()
}

pub fn length_rows(report: &LengthReport) -> Vec<LengthRow> {
    report
        .entries
        .iter()
        .map(|e| LengthRow {
            generator: e.contraction.generator,
            kind: e.contraction.kind.to_string(),
            antican_degree: int_to_json(&e.contraction.antican_degree),
            fiber_bound: e.fiber_bound,
            divisorial_bound_holds: e.divisorial_bound_holds,
            point_blowup_candidate: e.point_blowup_candidate,
            violation: e.violation.clone(),
        })
        .collect()
}

fn step_row(s: &BlowdownStep) -> StepRow {
    StepRow {
        exceptional_ray: s.exceptional_ray,
        generator: ints(&s.generator),
        wall: s.wall.ray_indices.clone(),
    }
}

pub fn classification_row(mode: &str, c: &Classification) -> ClassificationRow {
    let (outcome, diagnostic) = match &c.outcome {
        Outcome::OutOfTheoremScope(why) => ("out_of_theorem_scope".to_string(), Some(why.clone())),
        other => (other.to_string(), None),
    };
    let terminal = &c.terminal;
    let terminal_fan = serde_json::json!({
        "rank": terminal.rank(),
        "rays": terminal.rays().iter().map(|r| ints(r)).collect::<Vec<_>>(),
        "max_cones": terminal.max_cones(),
    });
    ClassificationRow {
        mode: mode.to_string(),
        outcome,
        diagnostic,
        chain: c.chain.iter().map(step_row).collect(),
        terminal_fan,
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::Array(items) => format!("({})", items.iter().map(show).join(",")),
        other => other.to_string(),
    }
}

/// Human-readable rendering of a report.
pub fn render_table(r: &Report) -> String {
    let mut out = String::new();
    if let Some(f) = &r.fan {
        let _ = writeln!(
            out,
            "fan: rank {}, {} rays, {} maximal cones, {} walls",
            f.rank, f.rays, f.max_cones, f.walls
        );
    }
    if let Some(checks) = &r.validation {
        for c in checks {
            let status = if c.passed { "pass" } else { "fail" };
            match &c.detail {
                Some(d) => writeln!(out, "{}: {status} ({d})", c.check),
                None => writeln!(out, "{}: {status}", c.check),
            }
            .ok();
        }
    }
    if let Some(walls) = &r.walls {
        let _ = writeln!(out, "\nwalls:");
        for w in walls {
            let _ = write!(
                out,
                "  [{}] rays {:?} apexes {:?}  b={}  T_X|C={}  -K.C={}  {}",
                w.index,
                w.rays,
                w.apexes,
                show(&Value::Array(w.b.clone())),
                show(&Value::Array(w.splitting_type.clone())),
                w.antican_degree,
                w.relation
            );
            if let (Some(g), Some(e)) = (w.generator, w.extremal) {
                let _ = write!(out, "  class #{g} {}", if e { "extremal" } else { "not extremal" });
            }
            if let Some(k) = &w.contraction {
                let _ = write!(out, " ({k})");
            }
            let _ = writeln!(out);
        }
    }
    if let Some(verdicts) = &r.verdicts {
        let _ = writeln!(out, "\n  m  ample  nef  witness");
        for v in verdicts {
            let _ = writeln!(
                out,
                "  {}  {:<5}  {:<3}  wall {} rays {:?} = {}: {} = {}",
                v.m,
                yes_no(v.ample),
                yes_no(v.nef),
                v.witness.wall,
                v.witness.wall_rays,
                show(&Value::Array(v.witness.wall_coordinates.iter().map(|c| Value::Array(c.clone())).collect())),
                v.witness.inequality,
                v.witness.min_degree
            );
        }
    }
    if let Some(cs) = &r.contractions {
        let _ = writeln!(out, "\nextremal contractions:");
        for c in cs {
            let _ = write!(
                out,
                "  class #{} {}  {}  J-={:?} J0={:?} J+={:?}  fiber dim {}",
                c.generator,
                show(&Value::Array(c.class.clone())),
                c.kind,
                c.j_minus,
                c.j_zero,
                c.j_plus,
                c.fiber_dim
            );
            if let Some(d) = c.image_of_exceptional_dim {
                let _ = write!(out, ", exceptional image dim {d}");
            }
            let _ = writeln!(out, ", -K.C={}", c.antican_degree);
        }
    }
    if let Some(ls) = &r.length_check {
        let _ = writeln!(out, "\nlength bounds on birational rays:");
        if ls.is_empty() {
            let _ = writeln!(out, "  (none)");
        }
        for l in ls {
            let _ = write!(
                out,
                "  class #{} {}: -K.C={} <= {}",
                l.generator, l.kind, l.antican_degree, l.fiber_bound
            );
            if l.point_blowup_candidate {
                let _ = write!(out, "  [point blowup]");
            }
            match &l.violation {
                Some(v) => {
                    let _ = writeln!(out, "  VIOLATION: {v}");
                }
                None => {
                    let _ = writeln!(out, "  ok");
                }
            }
        }
    }
    if let Some(c) = &r.classification {
        let _ = writeln!(out, "\nclassification ({}): {}", c.mode, c.outcome);
        if let Some(d) = &c.diagnostic {
            let _ = writeln!(out, "  {d}");
        }
        for (i, s) in c.chain.iter().enumerate() {
            let _ = writeln!(
                out,
                "  step {}: blow down ray {} = {} (wall {:?})",
                i + 1,
                s.exceptional_ray,
                show(&Value::Array(s.generator.clone())),
                s.wall
            );
        }
        let _ = writeln!(out, "  terminal fan: {}", c.terminal_fan);
    }
    out
}
