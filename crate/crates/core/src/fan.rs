//! Fans of smooth complete toric varieties.
//!
//! A [`Fan`] is raw data: rank, primitive ray generators and maximal cones as
//! sets of ray indices. [`Fan::validate`] checks it, and a [`SmoothFan`] is a
//! fan that passed every check, together with its walls.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::Deref;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{self, determinant, dual_basis, nonneg_combination_feasible, to_rational, Matrix};
use crate::{Int, IntMatrix, LatticeVector, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanError {
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("ray {index} has {got} coordinates, expected {expected}")]
    RayLength {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("cone {cone} references ray {ray}, but the fan has {count} rays")]
    RayIndex { cone: usize, ray: usize, count: usize },
    #[error("cone {cone} lists ray {ray} more than once")]
    RepeatedIndex { cone: usize, ray: usize },
    #[error("invalid fan: {0}")]
    Invalid(Box<ValidationReport>),
    #[error("facet {facet:?} lies in {count} maximal cones instead of 2")]
    Incomplete { facet: Vec<usize>, count: usize },
}

/// The data of a fan in `Z^rank`. Cone index sets are stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fan {
    rank: usize,
    rays: Vec<LatticeVector>,
    max_cones: Vec<Vec<usize>>,
}

impl Fan {
    /// Structural checks only; geometry is left to [`Fan::validate`].
    pub fn new(
        rank: usize,
        rays: Vec<LatticeVector>,
        max_cones: Vec<Vec<usize>>,
    ) -> Result<Self, FanError> {
        if rank == 0 {
            return Err(FanError::ZeroRank);
        }
        for (index, r) in rays.iter().enumerate() {
            if r.len() != rank {
                return Err(FanError::RayLength {
                    index,
                    expected: rank,
                    got: r.len(),
                });
            }
        }
        let mut cones = Vec::with_capacity(max_cones.len());
        for (ci, mut cone) in max_cones.into_iter().enumerate() {
            cone.sort_unstable();
            for w in cone.windows(2) {
                if w[0] == w[1] {
                    return Err(FanError::RepeatedIndex { cone: ci, ray: w[0] });
                }
            }
            if let Some(&ray) = cone.iter().find(|&&r| r >= rays.len()) {
                return Err(FanError::RayIndex {
                    cone: ci,
                    ray,
                    count: rays.len(),
                });
            }
            cones.push(cone);
        }
        Ok(Self {
            rank,
            rays,
            max_cones: cones,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &LatticeVector {
        &self.rays[i]
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    /// Matrix whose rows are the ray generators of `cone`.
    pub fn cone_matrix(&self, cone: &[usize]) -> IntMatrix {
        let rows: Vec<&LatticeVector> = cone.iter().map(|&i| &self.rays[i]).collect();
        Matrix::from_rows(&rows).expect("rays share the fan rank")
    }

    /// `rank x rays` matrix; its kernel is the space of linear relations among rays.
    pub fn relation_matrix(&self) -> IntMatrix {
        let rows: Vec<Vec<Int>> = (0..self.rank)
            .map(|c| self.rays.iter().map(|r| r[c].clone()).collect())
            .collect();
        Matrix::from_rows(&rows).expect("rectangular")
    }

    /// Same fan with rays sorted lexicographically and cones re-sorted.
    /// Two fans differ only by reindexing iff their canonical forms agree.
    pub fn canonical(&self) -> Fan {
        let mut order: Vec<usize> = (0..self.rays.len()).collect();
        order.sort_by(|&a, &b| self.rays[a].cmp(&self.rays[b]));
        let mut new_index = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let rays = order.iter().map(|&i| self.rays[i].clone()).collect();
        let mut cones: Vec<Vec<usize>> = self
            .max_cones
            .iter()
            .map(|c| {
                let mut c: Vec<usize> = c.iter().map(|&i| new_index[i]).collect();
                c.sort_unstable();
                c
            })
            .collect();
        cones.sort();
        Fan {
            rank: self.rank,
            rays,
            max_cones: cones,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        report.push(Check::Primitive, self.check_primitive());
        report.push(Check::Rays, self.check_rays());
        report.push(Check::Simplicial, self.check_simplicial());
        report.push(Check::Smooth, self.check_smooth());
        report.push(Check::Complete, self.check_complete());
        report.push(Check::FanCondition, self.check_fan_condition());
        report
    }

    fn check_primitive(&self) -> Result<(), String> {
        for (i, r) in self.rays.iter().enumerate() {
            let g = lattice::content(r);
            if g.is_zero() {
                return Err(format!("ray {i} is zero"));
            }
            if !g.is_one() {
                return Err(format!("ray {i} {} has content {g}", fmt_vec(r)));
            }
        }
        Ok(())
    }

    fn check_rays(&self) -> Result<(), String> {
        let mut seen: HashMap<&LatticeVector, usize> = HashMap::new();
        for (i, r) in self.rays.iter().enumerate() {
            if let Some(j) = seen.insert(r, i) {
                return Err(format!("duplicate ray {} at indices {j} and {i}", fmt_vec(r)));
            }
        }
        let used: HashSet<usize> = self.max_cones.iter().flatten().copied().collect();
        if let Some(i) = (0..self.rays.len()).find(|i| !used.contains(i)) {
            return Err(format!("ray {i} lies in no maximal cone"));
        }
        Ok(())
    }

    fn check_simplicial(&self) -> Result<(), String> {
        match self.max_cones.iter().position(|c| c.len() != self.rank) {
            Some(ci) => Err(format!(
                "cone {ci} has {} rays, expected {}",
                self.max_cones[ci].len(),
                self.rank
            )),
            None => Ok(()),
        }
    }

    fn check_smooth(&self) -> Result<(), String> {
        for (ci, cone) in self.max_cones.iter().enumerate() {
            if cone.len() != self.rank {
                return Err(format!("cone {ci} is not simplicial"));
            }
            let det = determinant(&self.cone_matrix(cone)).expect("square");
            if !det.abs().is_one() {
                return Err(format!("cone {ci} {cone:?} has determinant {det}"));
            }
        }
        Ok(())
    }

    fn check_complete(&self) -> Result<(), String> {
        if self.max_cones.is_empty() {
            return Err("no maximal cones".into());
        }
        if self.max_cones.iter().any(|c| c.len() != self.rank) {
            return Err("completeness needs simplicial maximal cones".into());
        }
        let facets = facet_map(&self.max_cones);
        for (facet, adj) in &facets {
            if adj.len() != 2 {
                return Err(format!(
                    "facet {facet:?} lies in {} maximal cone(s)",
                    adj.len()
                ));
            }
        }
        // adjacency graph must be connected
        let mut parent: Vec<usize> = (0..self.max_cones.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for adj in facets.values() {
            let (a, b) = (find(&mut parent, adj[0].0), find(&mut parent, adj[1].0));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        if let Some(ci) = (0..self.max_cones.len()).find(|&c| find(&mut parent, c) != root) {
            return Err(format!("cone {ci} is not connected to cone 0 through walls"));
        }
        Ok(())
    }

    fn check_fan_condition(&self) -> Result<(), String> {
        if self.max_cones.iter().any(|c| c.len() != self.rank) {
            return Err("fan condition needs simplicial maximal cones".into());
        }
        let mats: Vec<IntMatrix> = self.max_cones.iter().map(|c| self.cone_matrix(c)).collect();
        let mut duals = Vec::with_capacity(mats.len());
        for (ci, m) in mats.iter().enumerate() {
            let det = determinant(m).expect("square");
            if det.is_zero() {
                return Err(format!("cone {ci} is not full-dimensional"));
            }
            duals.push(if det.abs().is_one() {
                Some(dual_basis(m).expect("unimodular"))
            } else {
                None
            });
        }
        let count = self.max_cones.len();
        let pairs: Vec<(usize, usize)> = (0..count)
            .flat_map(|i| (i + 1..count).map(move |j| (i, j)))
            .collect();
        match pairs
            .par_iter()
            .find_first(|&&(i, j)| !self.cones_meet_properly(i, j, &duals))
        {
            Some(&(i, j)) => Err(format!(
                "cones {i} {:?} and {j} {:?} overlap beyond their common face",
                self.max_cones[i], self.max_cones[j]
            )),
            None => Ok(()),
        }
    }

    /// Whether `cone_i ∩ cone_j` is the cone on their common rays.
    fn cones_meet_properly(&self, i: usize, j: usize, duals: &[Option<IntMatrix>]) -> bool {
        let (a, b) = (&self.max_cones[i], &self.max_cones[j]);
        let common: HashSet<usize> = a.iter().filter(|r| b.contains(r)).copied().collect();

        // Fast path: the functional summing the dual basis of one cone over
        // its non-shared rays separates the two cones.
        if self.separates(a, b, &common, duals[i].as_ref())
            || self.separates(b, a, &common, duals[j].as_ref())
        {
            return true;
        }

        // Exact fallback: look for x = sum l_u u = sum m_w w with some weight
        // on a non-shared generator.
        let n = self.rank;
        let mut gens: Vec<Vec<Rational>> = Vec::with_capacity(2 * n);
        for (sign, cone) in [(1, a), (-1, b)] {
            for &r in cone {
                let mut g: Vec<Int> = self.rays[r].iter().map(|x| x * sign).collect();
                g.push(Int::from(i32::from(!common.contains(&r))));
                gens.push(to_rational(&g));
            }
        }
        let mut target = vec![Int::zero(); n];
        target.push(Int::one());
        !nonneg_combination_feasible(&gens, &to_rational(&target)).expect("consistent dimensions")
    }

    fn separates(
        &self,
        own: &[usize],
        other: &[usize],
        common: &HashSet<usize>,
        dual: Option<&IntMatrix>,
    ) -> bool {
        let Some(dual) = dual else { return false };
        let mut h = vec![Int::zero(); self.rank];
        for (p, &r) in own.iter().enumerate() {
            if !common.contains(&r) {
                for (x, d) in h.iter_mut().zip(dual.row(p)) {
                    *x += d;
                }
            }
        }
        other
            .iter()
            .filter(|r| !common.contains(r))
            .all(|&r| lattice::dot(&h, &self.rays[r]).is_negative())
    }

    /// One wall per facet shared by two maximal cones, sorted by ray indices.
    pub fn walls(&self) -> Result<Vec<Wall>, FanError> {
        let facets = facet_map(&self.max_cones);
        let mut walls = Vec::with_capacity(facets.len());
        for (facet, adj) in facets {
            if adj.len() != 2 {
                return Err(FanError::Incomplete {
                    facet,
                    count: adj.len(),
                });
            }
            let ((cone_a, apex_a), (cone_b, apex_b)) = (adj[0], adj[1]);
            walls.push(Wall {
                ray_indices: facet,
                cone_a,
                cone_b,
                apex_a,
                apex_b,
            });
        }
        Ok(walls)
    }
}

impl fmt::Display for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fan of rank {} with {} rays and {} maximal cones",
            self.rank,
            self.rays.len(),
            self.max_cones.len()
        )
    }
}

/// Facet (sorted ray indices) -> list of (cone index, apex ray).
fn facet_map(cones: &[Vec<usize>]) -> BTreeMap<Vec<usize>, Vec<(usize, usize)>> {
    let mut map: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
    for (ci, cone) in cones.iter().enumerate() {
        for (skip, &apex) in cone.iter().enumerate() {
            let facet: Vec<usize> = cone
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != skip)
                .map(|(_, &r)| r)
                .collect();
            map.entry(facet).or_default().push((ci, apex));
        }
    }
    map
}

pub(crate) fn fmt_vec(v: &[Int]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

/// A codimension-one cone shared by two maximal cones; an invariant curve.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wall {
    /// The `rank - 1` rays spanning the wall, sorted.
    pub ray_indices: Vec<usize>,
    pub cone_a: usize,
    pub cone_b: usize,
    /// Ray completing the wall to `cone_a`.
    pub apex_a: usize,
    /// Ray completing the wall to `cone_b`.
    pub apex_b: usize,
}

impl fmt::Display for Wall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "wall {:?} (apexes {} and {})",
            self.ray_indices, self.apex_a, self.apex_b
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Primitive,
    /// Rays are pairwise distinct and each lies in some maximal cone.
    Rays,
    Simplicial,
    Smooth,
    Complete,
    FanCondition,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::Primitive,
        Check::Rays,
        Check::Simplicial,
        Check::Smooth,
        Check::Complete,
        Check::FanCondition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Primitive => "primitive",
            Check::Rays => "rays",
            Check::Simplicial => "simplicial",
            Check::Smooth => "smooth",
            Check::Complete => "complete",
            Check::FanCondition => "fan_condition",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub check: Check,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    fn push(&mut self, check: Check, outcome: Result<(), String>) {
        self.checks.push(CheckResult {
            check,
            passed: outcome.is_ok(),
            detail: outcome.err(),
        });
    }

    pub fn passed(&self, check: Check) -> bool {
        self.checks.iter().any(|c| c.check == check && c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn flags(&self) -> Vec<(Check, bool)> {
        self.checks.iter().map(|c| (c.check, c.passed)).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.first_failure() {
            None => f.write_str("all checks pass"),
            Some(c) => write!(
                f,
                "{}: fail ({})",
                c.check,
                c.detail.as_deref().unwrap_or("no detail")
            ),
        }
    }
}

/// A validated smooth complete fan with its walls in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothFan {
    fan: Fan,
    walls: Vec<Wall>,
}

impl SmoothFan {
    pub fn new(fan: Fan) -> Result<Self, FanError> {
        let report = fan.validate();
        if !report.all_passed() {
            return Err(FanError::Invalid(Box::new(report)));
        }
        let walls = fan.walls()?;
        Ok(Self { fan, walls })
    }

    /// For fans that are smooth and complete by construction. Debug builds
    /// still run the full validation.
    pub(crate) fn from_trusted(fan: Fan) -> Self {
        debug_assert!(
            fan.validate().all_passed(),
            "constructed fan failed validation: {}",
            fan.validate()
        );
        let walls = fan.walls().expect("constructed fan is complete");
        Self { fan, walls }
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn into_fan(self) -> Fan {
        self.fan
    }

    pub fn canonical(&self) -> SmoothFan {
        let fan = self.fan.canonical();
        let walls = fan.walls().expect("reindexing keeps completeness");
        SmoothFan { fan, walls }
    }
}

impl Deref for SmoothFan {
    type Target = Fan;

    fn deref(&self) -> &Fan {
        &self.fan
    }
}

impl TryFrom<Fan> for SmoothFan {
    type Error = FanError;

    fn try_from(fan: Fan) -> Result<Self, FanError> {
        SmoothFan::new(fan)
    }
}
