//! Builders for the fan families used throughout: projective spaces,
//! products, star subdivisions (blowups along orbit closures), Hirzebruch
//! surfaces and smooth point blowdowns.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::Zero;
use thiserror::Error;

use crate::fan::{Fan, SmoothFan};
use crate::lattice::primitive_part;
use crate::{Int, LatticeVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("projective space needs dimension at least 1")]
    ZeroDimension,
    #[error("blowup site {face:?} is not a face of any maximal cone")]
    NotAFace { face: Vec<usize> },
    #[error("blowup site must contain at least 2 rays, got {0}")]
    FaceTooSmall(usize),
    #[error("ray {0} does not exist")]
    NoSuchRay(usize),
    #[error("ray {ray} is not the exceptional ray of a point blowup: {reason}")]
    NotAPointBlowup { ray: usize, reason: String },
    #[error("linear subspace dimension {k} is out of range for P^{n} (need k <= n-2)")]
    SubspaceOutOfRange { n: usize, k: usize },
    #[error("cannot blow up {points} torus fixed points of P^{n} (at most {max})")]
    TooManyPoints { n: usize, points: usize, max: usize },
}

/// Cone of the fan whose orbit closure is blown up.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlowupSite {
    pub face: Vec<usize>,
}

impl BlowupSite {
    pub fn new(face: impl IntoIterator<Item = usize>) -> Self {
        let mut face: Vec<usize> = face.into_iter().collect();
        face.sort_unstable();
        face.dedup();
        Self { face }
    }
}

fn unit(n: usize, i: usize) -> LatticeVector {
    let mut v = vec![Int::zero(); n];
    v[i] = Int::from(1);
    v
}

/// `P^n`: rays `e_1, …, e_n, -(e_1 + … + e_n)`, all `n`-subsets as cones.
pub fn projective_space(n: usize) -> Result<SmoothFan, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::ZeroDimension);
    }
    let mut rays: Vec<LatticeVector> = (0..n).map(|i| unit(n, i)).collect();
    rays.push(vec![Int::from(-1); n]);
    let cones = (0..=n).combinations(n).collect();
    let fan = Fan::new(n, rays, cones).expect("well-formed");
    Ok(SmoothFan::from_trusted(fan))
}

/// Product fan: block-embedded rays, cones `σ_a ⊔ σ_b`.
pub fn product(a: &SmoothFan, b: &SmoothFan) -> SmoothFan {
    let (na, nb) = (a.rank(), b.rank());
    let n = na + nb;
    let mut rays: Vec<LatticeVector> = Vec::with_capacity(a.rays().len() + b.rays().len());
    for r in a.rays() {
        let mut v = r.clone();
        v.resize(n, Int::zero());
        rays.push(v);
    }
    for r in b.rays() {
        let mut v = vec![Int::zero(); na];
        v.extend(r.iter().cloned());
        rays.push(v);
    }
    let offset = a.rays().len();
    let cones = a
        .max_cones()
        .iter()
        .cartesian_product(b.max_cones())
        .map(|(ca, cb)| ca.iter().copied().chain(cb.iter().map(|&i| i + offset)).collect())
        .collect();
    SmoothFan::from_trusted(Fan::new(n, rays, cones).expect("well-formed"))
}

/// `P^{k_1} × … × P^{k_s}`.
pub fn product_of_projective_spaces(dims: &[usize]) -> Result<SmoothFan, ConstructionError> {
    let (&first, rest) = dims.split_first().ok_or(ConstructionError::ZeroDimension)?;
    let mut acc = projective_space(first)?;
    for &k in rest {
        acc = product(&acc, &projective_space(k)?);
    }
    Ok(acc)
}

/// Star subdivision at `site`: the new ray is the primitive part of the sum
/// of the face generators, and every maximal cone containing the face is
/// replaced by the cones swapping one face ray for the new ray.
///
/// The new ray is appended last; replaced cones are expanded in place.
pub fn star_subdivide(fan: &SmoothFan, site: &BlowupSite) -> Result<SmoothFan, ConstructionError> {
    let face = &site.face;
    if face.len() < 2 {
        return Err(ConstructionError::FaceTooSmall(face.len()));
    }
    if let Some(&r) = face.iter().find(|&&r| r >= fan.rays().len()) {
        return Err(ConstructionError::NoSuchRay(r));
    }
    let contains_face = |cone: &Vec<usize>| face.iter().all(|r| cone.contains(r));
    if !fan.max_cones().iter().any(contains_face) {
        return Err(ConstructionError::NotAFace { face: face.clone() });
    }

    let n = fan.rank();
    let mut sum = vec![Int::zero(); n];
    for &r in face {
        for (s, x) in sum.iter_mut().zip(fan.ray(r)) {
            *s += x;
        }
    }
    let new_ray = fan.rays().len();
    let mut rays = fan.rays().to_vec();
    rays.push(primitive_part(&sum));

    let mut cones = Vec::with_capacity(fan.max_cones().len() + face.len());
    for cone in fan.max_cones() {
        if contains_face(cone) {
            for &drop in face {
                cones.push(
                    cone.iter()
                        .map(|&r| if r == drop { new_ray } else { r })
                        .collect(),
                );
            }
        } else {
            cones.push(cone.clone());
        }
    }
    Ok(SmoothFan::from_trusted(Fan::new(n, rays, cones).expect("well-formed")))
}

/// Blowup of `P^n` at `points` distinct torus fixed points. Point `j` is the
/// maximal cone omitting ray `j - 1` in the order `e_1, …, e_n, -Σe_i`
/// (point 0 omits the last ray, giving the new ray `(1, …, 1)`).
pub fn blowup_points_of_projective_space(
    n: usize,
    points: usize,
) -> Result<SmoothFan, ConstructionError> {
    let mut fan = projective_space(n)?;
    if points > n + 1 {
        return Err(ConstructionError::TooManyPoints {
            n,
            points,
            max: n + 1,
        });
    }
    for j in 0..points {
        let omit = if j == 0 { n } else { j - 1 };
        let site = BlowupSite::new((0..=n).filter(|&r| r != omit));
        fan = star_subdivide(&fan, &site)?;
    }
    Ok(fan)
}

/// Blowup of `P^n` along the `k`-dimensional invariant linear subspace whose
/// cone is spanned by the last `n - k` rays (for `n = 3, k = 1` this is the
/// face `{v_3, v_4}`, new ray `(-1, -1, 0)`).
pub fn blowup_linear_subspace(n: usize, k: usize) -> Result<SmoothFan, ConstructionError> {
    if n < 2 || k > n - 2 {
        return Err(ConstructionError::SubspaceOutOfRange { n, k });
    }
    let fan = projective_space(n)?;
    star_subdivide(&fan, &BlowupSite::new(k + 1..=n))
}

/// Hirzebruch surface `F_a`: rays `(1,0), (0,1), (-1,a), (0,-1)`.
pub fn hirzebruch(a: u64) -> SmoothFan {
    let v = |x: i64, y: Int| vec![Int::from(x), y];
    let rays = vec![
        v(1, Int::from(0)),
        v(0, Int::from(1)),
        v(-1, Int::from(a)),
        v(0, Int::from(-1)),
    ];
    let cones = vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]];
    SmoothFan::from_trusted(Fan::new(2, rays, cones).expect("well-formed"))
}

/// Inverse of the star subdivision of a smooth maximal cone: removes
/// `exceptional_ray` and merges its star into the cone on the link rays.
///
/// Requires the star to consist of exactly `n` maximal cones whose other rays
/// form an `n`-element link summing to the exceptional generator. Surviving
/// rays keep their relative order; the merged cone takes the place of the
/// first star cone.
pub fn point_blowdown(fan: &SmoothFan, exceptional_ray: usize) -> Result<SmoothFan, ConstructionError> {
    let n = fan.rank();
    if exceptional_ray >= fan.rays().len() {
        return Err(ConstructionError::NoSuchRay(exceptional_ray));
    }
    let fail = |reason: String| ConstructionError::NotAPointBlowup {
        ray: exceptional_ray,
        reason,
    };
    let star: Vec<usize> = fan
        .max_cones()
        .iter()
        .positions(|c| c.contains(&exceptional_ray))
        .collect();
    if star.len() != n {
        return Err(fail(format!(
            "its star has {} maximal cones, expected {n}",
            star.len()
        )));
    }
    let link: BTreeSet<usize> = star
        .iter()
        .flat_map(|&ci| fan.max_cones()[ci].iter().copied())
        .filter(|&r| r != exceptional_ray)
        .collect();
    if link.len() != n {
        return Err(fail(format!("its link has {} rays, expected {n}", link.len())));
    }
    let mut sum = vec![Int::zero(); n];
    for &r in &link {
        for (s, x) in sum.iter_mut().zip(fan.ray(r)) {
            *s += x;
        }
    }
    if &sum != fan.ray(exceptional_ray) {
        return Err(fail("its generator is not the sum of the link generators".into()));
    }

    let reindex = |r: usize| if r > exceptional_ray { r - 1 } else { r };
    let rays: Vec<LatticeVector> = fan
        .rays()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != exceptional_ray)
        .map(|(_, r)| r.clone())
        .collect();
    let merged: Vec<usize> = link.iter().map(|&r| reindex(r)).collect();
    let mut cones = Vec::with_capacity(fan.max_cones().len() + 1 - n);
    for (ci, cone) in fan.max_cones().iter().enumerate() {
        if ci == star[0] {
            cones.push(merged.clone());
        } else if !star.contains(&ci) {
            cones.push(cone.iter().map(|&r| reindex(r)).collect());
        }
    }
    Ok(SmoothFan::from_trusted(Fan::new(n, rays, cones).expect("well-formed")))
}

/// Whether `fan` is the standard fan of `P^n` up to `GL_n(Z)`: `n + 1` rays
/// summing to zero with every `n`-subset a maximal cone.
pub fn is_projective_space(fan: &SmoothFan) -> bool {
    let n = fan.rank();
    if fan.rays().len() != n + 1 || fan.max_cones().len() != n + 1 {
        return false;
    }
    let sums_to_zero = (0..n).all(|c| fan.rays().iter().map(|r| &r[c]).sum::<Int>().is_zero());
    let expected: BTreeSet<Vec<usize>> = (0..=n).combinations(n).collect();
    let cones: BTreeSet<Vec<usize>> = fan.max_cones().iter().cloned().collect();
    sums_to_zero && cones == expected
}
