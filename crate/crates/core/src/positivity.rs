//! Wall relations, splitting types of the tangent bundle on invariant curves,
//! and ampleness/nefness of its exterior powers.
//!
//! For a wall `τ` spanned by `v_1, …, v_{n-1}` with apexes `v_n`, `v_{n+1}`,
//! the wall relation is `b_1 v_1 + … + b_{n-1} v_{n-1} + v_n + v_{n+1} = 0`
//! and `T_X` restricted to the curve `V(τ)` splits as
//! `O(2) ⊕ O(b_1) ⊕ … ⊕ O(b_{n-1})`. Nefness and ampleness of an equivariant
//! bundle are tested on invariant curves, so `Λ^m T_X` is nef (ample) iff every
//! `m`-fold sum of distinct splitting degrees is `≥ 0` (`> 0`) on every wall.

use std::fmt;

use itertools::Itertools;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::fan::{SmoothFan, Wall};
use crate::lattice::{integer_kernel_member_check, solve_in_basis, LatticeError};
use crate::Int;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PositivityError {
    #[error("exterior power index {m} is outside 1..={n}")]
    PowerOutOfRange { m: usize, n: usize },
    #[error("{wall}: apex coefficient is {coefficient}, expected -1 (cones are not smooth or not on opposite sides)")]
    BadApexCoefficient { wall: Wall, coefficient: Int },
    #[error("{wall}: relation does not vanish")]
    RelationNotExact { wall: Wall },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// The relation `Σ b_i v_i + v_{apex_a} + v_{apex_b} = 0` of a wall.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WallRelation {
    pub wall: Wall,
    /// `b_i`, aligned with `wall.ray_indices`.
    pub coefficients: Vec<Int>,
}

impl WallRelation {
    pub fn b(&self) -> &[Int] {
        &self.coefficients
    }

    /// Dimension of the ambient variety.
    pub fn dim(&self) -> usize {
        self.coefficients.len() + 1
    }

    /// `-K_X · V(τ) = 2 + Σ b_i`.
    pub fn antican_degree(&self) -> Int {
        self.coefficients.iter().fold(Int::from(2), |acc, b| acc + b)
    }

    /// The relation as a vector indexed by all `ray_count` rays.
    pub fn full_vector(&self, ray_count: usize) -> Vec<Int> {
        let mut v = vec![Int::zero(); ray_count];
        for (&r, b) in self.wall.ray_indices.iter().zip(&self.coefficients) {
            v[r] = b.clone();
        }
        v[self.wall.apex_a] = Int::from(1);
        v[self.wall.apex_b] = Int::from(1);
        v
    }

    /// Relation with the two apexes exchanged; the coefficients are unchanged.
    pub fn swapped(&self) -> WallRelation {
        let mut wall = self.wall.clone();
        std::mem::swap(&mut wall.apex_a, &mut wall.apex_b);
        std::mem::swap(&mut wall.cone_a, &mut wall.cone_b);
        WallRelation {
            wall,
            coefficients: self.coefficients.clone(),
        }
    }
}

impl fmt::Display for WallRelation {
    /// Written with 1-based ray names, apexes first: `v3 + v4 - v5 + 0·v1 = 0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<(Int, usize)> = vec![
            (Int::from(1), self.wall.apex_a),
            (Int::from(1), self.wall.apex_b),
        ];
        terms.extend(
            self.coefficients
                .iter()
                .cloned()
                .zip(self.wall.ray_indices.iter().copied()),
        );
        for (k, (c, r)) in terms.iter().enumerate() {
            let name = format!("v{}", r + 1);
            let abs = c.abs();
            let body = if c.is_zero() {
                format!("0·{name}")
            } else if abs == Int::from(1) {
                name
            } else {
                format!("{abs}·{name}")
            };
            match (k, c.is_negative()) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        f.write_str(" = 0")
    }
}

/// Solves `v_{apex_b}` in the basis `{wall rays, v_{apex_a}}`; the apex
/// coordinate must be `-1` and the wall coordinates are `-b_i`.
pub fn wall_relation(fan: &SmoothFan, wall: &Wall) -> Result<WallRelation, PositivityError> {
    let mut basis_idx = wall.ray_indices.clone();
    basis_idx.push(wall.apex_a);
    let basis = fan.cone_matrix(&basis_idx);
    let coords = solve_in_basis(&basis, fan.ray(wall.apex_b))?;
    let (apex, rest) = coords.split_last().expect("basis is nonempty");
    if *apex != Int::from(-1) {
        return Err(PositivityError::BadApexCoefficient {
            wall: wall.clone(),
            coefficient: apex.clone(),
        });
    }
    let rel = WallRelation {
        wall: wall.clone(),
        coefficients: rest.iter().map(|a| -a).collect(),
    };
    if !integer_kernel_member_check(&fan.relation_matrix(), &rel.full_vector(fan.rays().len()))? {
        return Err(PositivityError::RelationNotExact { wall: wall.clone() });
    }
    Ok(rel)
}

/// Wall relations of every wall, in canonical wall order.
pub fn wall_relations(fan: &SmoothFan) -> Result<Vec<WallRelation>, PositivityError> {
    fan.walls()
        .par_iter()
        .map(|w| wall_relation(fan, w))
        .collect()
}

/// Degrees of the line bundles in `T_X|_C`, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SplittingType {
    degrees: Vec<Int>,
}

impl SplittingType {
    pub fn degrees(&self) -> &[Int] {
        &self.degrees
    }

    pub fn rank(&self) -> usize {
        self.degrees.len()
    }

    pub fn total(&self) -> Int {
        self.degrees.iter().sum()
    }
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.degrees.iter().join(","))
    }
}

pub fn splitting_type(rel: &WallRelation) -> SplittingType {
    let mut degrees = rel.coefficients.clone();
    degrees.push(Int::from(2));
    degrees.sort();
    SplittingType { degrees }
}

/// Degrees of `Λ^m` of a sum of line bundles on `P^1`: all sums of `m`
/// distinct entries, sorted ascending.
pub fn exterior_degrees(st: &SplittingType, m: usize) -> Result<Vec<Int>, PositivityError> {
    let n = st.rank();
    if m == 0 || m > n {
        return Err(PositivityError::PowerOutOfRange { m, n });
    }
    let mut sums: Vec<Int> = st
        .degrees
        .iter()
        .combinations(m)
        .map(|c| c.into_iter().sum())
        .collect();
    sums.sort();
    Ok(sums)
}

/// Which inequality family attains the minimum on a wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `b_{i_1} + … + b_{i_m}`
    CoefficientSum,
    /// `2 + b_{j_1} + … + b_{j_{m-1}}`
    TwoPlusSum,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::CoefficientSum => "b-sum",
            Family::TwoPlusSum => "2+b-sum",
        })
    }
}

/// Verdict of the criterion on a single wall.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallVerdict {
    pub m: usize,
    pub ample: bool,
    pub nef: bool,
    /// Smallest left-hand side over both inequality families.
    pub min_degree: Int,
    pub binding: Family,
}

/// Evaluates only the two minimal subset sums: the `m` smallest `b_i`, and 2
/// plus the `m - 1` smallest. For `m = n` the first family is empty and the
/// second is the anticanonical degree.
pub fn criterion_check(rel: &WallRelation, m: usize) -> Result<WallVerdict, PositivityError> {
    let n = rel.dim();
    if m == 0 || m > n {
        return Err(PositivityError::PowerOutOfRange { m, n });
    }
    let mut b = rel.coefficients.clone();
    b.sort();
    let prefix = |k: usize| -> Int { b[..k].iter().sum() };

    let two_plus = Int::from(2) + prefix(m - 1);
    let (min_degree, binding) = if m < n {
        let plain = prefix(m);
        if plain <= two_plus {
            (plain, Family::CoefficientSum)
        } else {
            (two_plus, Family::TwoPlusSum)
        }
    } else {
        (two_plus, Family::TwoPlusSum)
    };
    Ok(WallVerdict {
        m,
        ample: min_degree.is_positive(),
        nef: !min_degree.is_negative(),
        min_degree,
        binding,
    })
}

/// Walls attaining the minimum degree for one exterior power.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// First wall (canonical order) attaining the minimum.
    pub wall: usize,
    pub min_degree: Int,
    pub binding: Family,
    /// Every wall attaining the minimum.
    pub tight_walls: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositivityVerdict {
    pub m: usize,
    pub ample: bool,
    pub nef: bool,
    pub witness: Witness,
}

/// Aggregates per-wall verdicts for `m = 1..=n` over precomputed relations.
pub fn analyze_relations(
    relations: &[WallRelation],
    n: usize,
) -> Result<Vec<PositivityVerdict>, PositivityError> {
    (1..=n)
        .map(|m| {
            let per_wall: Vec<WallVerdict> = relations
                .iter()
                .map(|r| criterion_check(r, m))
                .collect::<Result<_, _>>()?;
            let (first, worst) = per_wall
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.min_degree.cmp(&b.1.min_degree))
                .expect("a complete fan has walls");
            let tight_walls = per_wall
                .iter()
                .positions(|v| v.min_degree == worst.min_degree)
                .collect();
            Ok(PositivityVerdict {
                m,
                ample: per_wall.iter().all(|v| v.ample),
                nef: per_wall.iter().all(|v| v.nef),
                witness: Witness {
                    wall: first,
                    min_degree: worst.min_degree.clone(),
                    binding: worst.binding,
                    tight_walls,
                },
            })
        })
        .collect()
}

/// Verdicts for `Λ^m T_X`, `m = 1..=n`; entry `m - 1` is for `Λ^m`.
pub fn analyze(fan: &SmoothFan) -> Result<Vec<PositivityVerdict>, PositivityError> {
    analyze_relations(&wall_relations(fan)?, fan.rank())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanoReport {
    pub fano: bool,
    /// `-K_X · V(τ)` per wall, canonical order.
    pub degrees: Vec<Int>,
}

pub fn is_fano(fan: &SmoothFan) -> Result<FanoReport, PositivityError> {
    let degrees: Vec<Int> = wall_relations(fan)?
        .iter()
        .map(WallRelation::antican_degree)
        .collect();
    Ok(FanoReport {
        fano: degrees.iter().all(Signed::is_positive),
        degrees,
    })
}

/// Brute-force verdict from the exterior degrees; used to cross-check
/// [`criterion_check`].
pub fn brute_force_check(rel: &WallRelation, m: usize) -> Result<(bool, bool), PositivityError> {
    let degrees = exterior_degrees(&splitting_type(rel), m)?;
    let min = &degrees[0];
    Ok((min.is_positive(), !min.is_negative()))
}
