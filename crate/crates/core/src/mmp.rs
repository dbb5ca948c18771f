//! Curve classes, the Mori cone, extremal contractions and the
//! classification driver.
//!
//! Curve classes are stored as full intersection vectors `(D_ρ · C)_ρ`. For a
//! smooth fan the class of `V(τ)` is the wall relation itself (apex entries 1),
//! so two walls give the same class iff their vectors agree after dividing
//! out the content.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::constructions::{is_projective_space, point_blowdown, ConstructionError};
use crate::fan::{SmoothFan, Wall};
use crate::lattice::{
    integer_kernel_member_check, nonneg_combination_feasible, primitive_part, to_rational, LatticeError,
};
use crate::positivity::{analyze_relations, wall_relations, Family, PositivityError, WallRelation};
use crate::{Int, LatticeVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MmpError {
    #[error(transparent)]
    Positivity(#[from] PositivityError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("curve class of {wall} is not a relation among the rays")]
    NotInKernel { wall: Wall },
    #[error("the class of {wall} does not span an extremal ray of the Mori cone")]
    NotExtremal { wall: Wall },
    #[error("{mode} needs dimension at least {min}, got {n}")]
    DimensionTooSmall { mode: Mode, n: usize, min: usize },
    #[error("{mode} hypothesis fails: Λ^{m} T_X {property} fails at {wall}: {family} = {degree}")]
    HypothesisFailed {
        mode: Mode,
        m: usize,
        property: &'static str,
        wall: Wall,
        family: Family,
        degree: Int,
    },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

/// Intersection numbers `D_ρ · C` for every ray `ρ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveClass {
    pub intersections: Vec<Int>,
}

impl CurveClass {
    pub fn primitive(&self) -> CurveClass {
        CurveClass {
            intersections: primitive_part(&self.intersections),
        }
    }

    fn indices_where(&self, pred: impl Fn(&Int) -> bool) -> Vec<usize> {
        self.intersections.iter().positions(pred).collect()
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.intersections.iter().join(","))
    }
}

pub fn curve_class(fan: &SmoothFan, rel: &WallRelation) -> Result<CurveClass, MmpError> {
    let intersections = rel.full_vector(fan.rays().len());
    if !integer_kernel_member_check(&fan.relation_matrix(), &intersections)? {
        return Err(MmpError::NotInKernel {
            wall: rel.wall.clone(),
        });
    }
    Ok(CurveClass { intersections })
}

/// A generator of the Mori cone together with the walls realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoriGenerator {
    pub class: CurveClass,
    /// Indices into [`SmoothFan::walls`], ascending.
    pub walls: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContractionKind {
    Fiber,
    Divisorial,
    Small,
}

impl fmt::Display for ContractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContractionKind::Fiber => "fiber",
            ContractionKind::Divisorial => "divisorial",
            ContractionKind::Small => "small",
        })
    }
}

/// Sign data and type of the contraction of an extremal ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionInfo {
    /// Index of the Mori generator spanning the ray.
    pub generator: usize,
    pub walls: Vec<usize>,
    pub j_minus: Vec<usize>,
    /// Rays of the relation with coefficient zero.
    pub j_zero: Vec<usize>,
    pub j_plus: Vec<usize>,
    pub kind: ContractionKind,
    /// `|J_+| - 1`.
    pub fiber_dim: usize,
    /// `n - |J_+|`, divisorial contractions only.
    pub image_of_exceptional_dim: Option<usize>,
    pub antican_degree: Int,
}

/// The Mori cone of a smooth complete fan, spanned by the wall classes.
#[derive(Clone, Debug)]
pub struct MoriCone {
    rank: usize,
    relations: Vec<WallRelation>,
    generators: Vec<MoriGenerator>,
    extremal: Vec<bool>,
    wall_generator: Vec<usize>,
}

impl MoriCone {
    pub fn new(fan: &SmoothFan) -> Result<Self, MmpError> {
        let relations = wall_relations(fan)?;
        Self::from_relations(fan, relations)
    }

    pub fn from_relations(fan: &SmoothFan, relations: Vec<WallRelation>) -> Result<Self, MmpError> {
        let classes: Vec<CurveClass> = relations
            .iter()
            .map(|r| curve_class(fan, r))
            .collect::<Result<_, _>>()?;

        // generators in order of first wall
        let mut by_class: BTreeMap<CurveClass, usize> = BTreeMap::new();
        let mut generators: Vec<MoriGenerator> = Vec::new();
        let mut wall_generator = Vec::with_capacity(classes.len());
        for (w, c) in classes.into_iter().enumerate() {
            let key = c.primitive();
            let g = *by_class.entry(key.clone()).or_insert_with(|| {
                generators.push(MoriGenerator {
                    class: key,
                    walls: Vec::new(),
                });
                generators.len() - 1
            });
            generators[g].walls.push(w);
            wall_generator.push(g);
        }

        let rational: Vec<_> = generators
            .iter()
            .map(|g| to_rational(&g.class.intersections))
            .collect();
        let extremal = (0..generators.len())
            .into_par_iter()
            .map(|i| {
                let others: Vec<_> = rational
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, v)| v.clone())
                    .collect();
                nonneg_combination_feasible(&others, &rational[i]).map(|inside| !inside)
            })
            .collect::<Result<Vec<bool>, _>>()?;

        Ok(Self {
            rank: fan.rank(),
            relations,
            generators,
            extremal,
            wall_generator,
        })
    }

    pub fn relations(&self) -> &[WallRelation] {
        &self.relations
    }

    pub fn generators(&self) -> &[MoriGenerator] {
        &self.generators
    }

    pub fn is_extremal(&self, generator: usize) -> bool {
        self.extremal[generator]
    }

    pub fn generator_of_wall(&self, wall: usize) -> usize {
        self.wall_generator[wall]
    }

    pub fn extremal_rays(&self) -> Vec<(&MoriGenerator, bool)> {
        self.generators.iter().zip(self.extremal.iter().copied()).collect()
    }

    /// Contraction data for the ray spanned by the class of `wall`.
    pub fn classify_wall(&self, wall: usize) -> Result<ContractionInfo, MmpError> {
        let g = self.wall_generator[wall];
        if !self.extremal[g] {
            return Err(MmpError::NotExtremal {
                wall: self.relations[wall].wall.clone(),
            });
        }
        Ok(self.contraction_of(g))
    }

    fn contraction_of(&self, g: usize) -> ContractionInfo {
        let gen = &self.generators[g];
        let rel = &self.relations[gen.walls[0]];
        let class = &gen.class;
        let j_minus = class.indices_where(Signed::is_negative);
        let j_plus = class.indices_where(Signed::is_positive);
        let j_zero: Vec<usize> = rel
            .wall
            .ray_indices
            .iter()
            .zip(rel.b())
            .filter(|(_, b)| b.is_zero())
            .map(|(&r, _)| r)
            .collect();
        let kind = match j_minus.len() {
            0 => ContractionKind::Fiber,
            1 => ContractionKind::Divisorial,
            _ => ContractionKind::Small,
        };
        let antican_degree = gen
            .walls
            .iter()
            .map(|&w| self.relations[w].antican_degree())
            .min()
            .expect("generator has walls");
        ContractionInfo {
            generator: g,
            walls: gen.walls.clone(),
            fiber_dim: j_plus.len() - 1,
            image_of_exceptional_dim: (kind == ContractionKind::Divisorial)
                .then(|| self.rank.saturating_sub(j_plus.len())),
            j_minus,
            j_zero,
            j_plus,
            kind,
            antican_degree,
        }
    }

    /// Contractions of all extremal rays, in generator order.
    pub fn contractions(&self) -> Vec<ContractionInfo> {
        (0..self.generators.len())
            .filter(|&g| self.extremal[g])
            .map(|g| self.contraction_of(g))
            .collect()
    }
}

/// Wall classes deduplicated up to positive scaling, ordered by first wall.
pub fn mori_generators(fan: &SmoothFan) -> Result<Vec<MoriGenerator>, MmpError> {
    Ok(MoriCone::new(fan)?.generators)
}

/// Each generator with whether it spans an extremal ray.
pub fn extremal_rays(fan: &SmoothFan) -> Result<Vec<(MoriGenerator, bool)>, MmpError> {
    let cone = MoriCone::new(fan)?;
    Ok(cone.generators.into_iter().zip(cone.extremal).collect())
}

pub fn classify_contraction(fan: &SmoothFan, rel: &WallRelation) -> Result<ContractionInfo, MmpError> {
    let cone = MoriCone::new(fan)?;
    let wall = fan
        .walls()
        .iter()
        .position(|w| w.ray_indices == rel.wall.ray_indices)
        .expect("relation belongs to this fan");
    cone.classify_wall(wall)
}

/// Smooth point-blowup relation: one entry `-1`, exactly `n` entries `+1`,
/// zeros elsewhere.
pub fn is_point_blowup_pattern(class: &CurveClass, n: usize) -> bool {
    let minus_one = Int::from(-1);
    let one = Int::from(1);
    let negatives = class.intersections.iter().filter(|x| **x == minus_one).count();
    let positives = class.intersections.iter().filter(|x| **x == one).count();
    let others = class
        .intersections
        .iter()
        .filter(|x| !x.is_zero() && **x != one && **x != minus_one)
        .count();
    negatives == 1 && positives == n && others == 0
}

/// Length bound for one birational extremal ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthCheck {
    pub contraction: ContractionInfo,
    /// `d = |J_+| - 1`; the bound is `-K_X · C < d + 1`.
    pub fiber_bound: usize,
    /// `-K_X · C ≤ n - 1`, divisorial rays only.
    pub divisorial_bound_holds: Option<bool>,
    pub point_blowup_candidate: bool,
    pub violation: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LengthReport {
    pub entries: Vec<LengthCheck>,
}

impl LengthReport {
    pub fn violations(&self) -> impl Iterator<Item = &LengthCheck> {
        self.entries.iter().filter(|e| e.violation.is_some())
    }

    pub fn is_clean(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// Checks the toric length bounds on every birational extremal ray:
/// `-K·C ≤ |J_+| - 1`, and for divisorial rays `-K·C ≤ n - 1` with equality
/// only for the blowup of a smooth invariant point.
pub fn fujino_sato_check(fan: &SmoothFan) -> Result<LengthReport, MmpError> {
    Ok(length_report(&MoriCone::new(fan)?))
}

pub fn length_report(cone: &MoriCone) -> LengthReport {
    let n = cone.rank;
    let entries = cone
        .contractions()
        .into_iter()
        .filter(|c| c.kind != ContractionKind::Fiber)
        .map(|c| {
            let class = &cone.generators[c.generator].class;
            let d = c.fiber_dim;
            let mut violation = None;
            if c.antican_degree > Int::from(d) {
                violation = Some(format!("-K·C = {} exceeds |J+|-1 = {d}", c.antican_degree));
            }
            let mut divisorial_bound_holds = None;
            let mut point_blowup_candidate = false;
            if c.kind == ContractionKind::Divisorial {
                let bound = Int::from(n as i64 - 1);
                divisorial_bound_holds = Some(c.antican_degree <= bound);
                if c.antican_degree > bound {
                    violation = Some(format!("-K·C = {} exceeds n-1 = {bound}", c.antican_degree));
                } else if c.antican_degree == bound {
                    point_blowup_candidate = true;
                    if !is_point_blowup_pattern(class, n) {
                        violation = Some(format!(
                            "-K·C = n-1 but class {class} is not a point blowup"
                        ));
                    }
                }
            }
            LengthCheck {
                contraction: c,
                fiber_bound: d,
                divisorial_bound_holds,
                point_blowup_candidate,
                violation,
            }
        })
        .collect();
    LengthReport { entries }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `Λ^2 T_X` nef, `n ≥ 3`.
    Lambda2Nef,
    /// `Λ^3 T_X` ample, `n ≥ 4`.
    Lambda3Ample,
}

impl Mode {
    fn power(self) -> usize {
        match self {
            Mode::Lambda2Nef => 2,
            Mode::Lambda3Ample => 3,
        }
    }

    fn min_dim(self) -> usize {
        match self {
            Mode::Lambda2Nef => 3,
            Mode::Lambda3Ample => 4,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Lambda2Nef => "lambda2-nef",
            Mode::Lambda3Ample => "lambda3-ample",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    TangentNef,
    BlowupOfPnAtPoint,
    OutOfTheoremScope(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::TangentNef => f.write_str("tangent_nef"),
            Outcome::BlowupOfPnAtPoint => f.write_str("blowup_of_Pn_at_point"),
            Outcome::OutOfTheoremScope(why) => write!(f, "out_of_theorem_scope ({why})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowdownStep {
    /// Index of the removed ray in the fan before this step.
    pub exceptional_ray: usize,
    pub generator: LatticeVector,
    pub wall: Wall,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub outcome: Outcome,
    pub chain: Vec<BlowdownStep>,
    pub terminal: SmoothFan,
}

/// Checks the mode's hypothesis, then contracts divisorial extremal rays by
/// point blowdowns until only fiber-type rays remain.
pub fn classify_variety(fan: &SmoothFan, mode: Mode) -> Result<Classification, MmpError> {
    let n = fan.rank();
    if n < mode.min_dim() {
        return Err(MmpError::DimensionTooSmall {
            mode,
            n,
            min: mode.min_dim(),
        });
    }
    let relations = wall_relations(fan)?;
    let verdicts = analyze_relations(&relations, n)?;
    let v = &verdicts[mode.power() - 1];
    let holds = match mode {
        Mode::Lambda2Nef => v.nef,
        Mode::Lambda3Ample => v.ample,
    };
    if !holds {
        return Err(MmpError::HypothesisFailed {
            mode,
            m: v.m,
            property: if mode == Mode::Lambda2Nef { "nef" } else { "ample" },
            wall: fan.walls()[v.witness.wall].clone(),
            family: v.witness.binding,
            degree: v.witness.min_degree.clone(),
        });
    }
    let tangent_nef = verdicts[0].nef;

    let mut current = fan.clone();
    let mut cone = MoriCone::from_relations(&current, relations)?;
    let mut chain = Vec::new();
    let out_of_scope = |why: String, chain: Vec<BlowdownStep>, terminal: SmoothFan| Classification {
        outcome: Outcome::OutOfTheoremScope(why),
        chain,
        terminal,
    };
    loop {
        let birational: Vec<ContractionInfo> = cone
            .contractions()
            .into_iter()
            .filter(|c| c.kind != ContractionKind::Fiber)
            .collect();
        let Some(first) = birational.first() else { break };
        if let Some(small) = birational.iter().find(|c| c.kind == ContractionKind::Small) {
            let wall = &current.walls()[small.walls[0]];
            return Ok(out_of_scope(
                format!("small contraction at {wall}; flips are not executed"),
                chain,
                current,
            ));
        }
        let class = &cone.generators()[first.generator].class;
        let wall = current.walls()[first.walls[0]].clone();
        if !is_point_blowup_pattern(class, n) {
            return Ok(out_of_scope(
                format!("divisorial contraction at {wall} is not a point blowup"),
                chain,
                current,
            ));
        }
        let ray = first.j_minus[0];
        match point_blowdown(&current, ray) {
            Ok(next) => {
                chain.push(BlowdownStep {
                    exceptional_ray: ray,
                    generator: current.ray(ray).clone(),
                    wall,
                });
                current = next;
                cone = MoriCone::new(&current)?;
            }
            Err(ConstructionError::NotAPointBlowup { reason, .. }) => {
                return Ok(out_of_scope(
                    format!("cannot blow down ray {ray}: {reason}"),
                    chain,
                    current,
                ));
            }
            Err(e) => return Err(MmpError::Invariant(e.to_string())),
        }
    }

    let outcome = if chain.is_empty() {
        if !tangent_nef {
            return Err(MmpError::Invariant(
                "only fiber-type extremal rays but some wall has a negative coefficient".into(),
            ));
        }
        Outcome::TangentNef
    } else if chain.len() == 1 && is_projective_space(&current) {
        Outcome::BlowupOfPnAtPoint
    } else {
        Outcome::OutOfTheoremScope(format!(
            "{} blowdown(s) ending in a fan with {} rays",
            chain.len(),
            current.rays().len()
        ))
    };
    Ok(Classification {
        outcome,
        chain,
        terminal: current,
    })
}
