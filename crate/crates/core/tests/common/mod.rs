//! Shared test corpus of smooth complete projective fans.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toric_lambda::constructions::{
    blowup_linear_subspace, blowup_points_of_projective_space, hirzebruch, point_blowdown,
    product_of_projective_spaces, projective_space, star_subdivide, BlowupSite,
};
use toric_lambda::mmp::{is_point_blowup_pattern, MoriCone};
use toric_lambda::SmoothFan;

pub struct Entry {
    pub name: String,
    pub fan: SmoothFan,
}

fn entry(name: impl Into<String>, fan: SmoothFan) -> Entry {
    Entry { name: name.into(), fan }
}

/// Ordered partitions of `n` into at least two parts, each part nonincreasing.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            if cur.len() >= 2 {
                out.push(cur.clone());
            }
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

pub fn products(dims: std::ops::RangeInclusive<usize>) -> Vec<Entry> {
    dims.flat_map(partitions)
        .map(|p| entry(format!("product{p:?}"), product_of_projective_spaces(&p).unwrap()))
        .collect()
}

pub fn standard() -> Vec<Entry> {
    let mut out = Vec::new();
    for n in 1..=7 {
        out.push(entry(format!("P{n}"), projective_space(n).unwrap()));
    }
    out.extend(products(2..=7));
    for a in 0..=10u64 {
        out.push(entry(format!("F{a}"), hirzebruch(a)));
    }
    for n in 2..=7 {
        for p in 1..=3 {
            out.push(entry(
                format!("Bl{p}pts P{n}"),
                blowup_points_of_projective_space(n, p).unwrap(),
            ));
        }
    }
    for n in 3..=7 {
        for k in 0..=n - 2 {
            out.push(entry(format!("Bl P{k} P{n}"), blowup_linear_subspace(n, k).unwrap()));
        }
    }
    out
}

/// A random walk of blowups and extremal point blowdowns starting at a
/// product of projective spaces. Every step keeps the fan projective.
pub fn random_fan(rng: &mut ChaCha8Rng, n: usize, steps: usize) -> SmoothFan {
    let starts = {
        let mut s = vec![vec![n]];
        s.extend(partitions(n));
        s
    };
    let start = starts.choose(rng).unwrap();
    let mut fan = product_of_projective_spaces(start).unwrap();
    for _ in 0..steps {
        let roll: f64 = rng.gen();
        if roll < 0.2 {
            if let Some(next) = random_blowdown(rng, &fan) {
                fan = next;
                continue;
            }
        }
        let cone = fan.max_cones().choose(rng).unwrap().clone();
        let size = if roll < 0.6 { n } else { rng.gen_range(2..=n) };
        let face: Vec<usize> = cone.choose_multiple(rng, size).copied().collect();
        fan = star_subdivide(&fan, &BlowupSite::new(face)).unwrap();
    }
    fan
}

fn random_blowdown(rng: &mut ChaCha8Rng, fan: &SmoothFan) -> Option<SmoothFan> {
    let cone = MoriCone::new(fan).ok()?;
    let n = fan.rank();
    let mut rays: Vec<usize> = cone
        .generators()
        .iter()
        .enumerate()
        .filter(|&(g, gen)| cone.is_extremal(g) && is_point_blowup_pattern(&gen.class, n))
        .filter_map(|(_, gen)| gen.class.intersections.iter().position(|x| *x < 0.into()))
        .collect();
    rays.shuffle(rng);
    rays.into_iter().find_map(|r| point_blowdown(fan, r).ok())
}

pub fn random(count: usize, seed: u64) -> Vec<Entry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = 2 + i % 4;
            let steps = rng.gen_range(1..=3);
            entry(format!("random#{i} (dim {n})"), random_fan(&mut rng, n, steps))
        })
        .collect()
}

/// At least 200 fans in dimensions 1 to 7.
pub fn corpus() -> Vec<Entry> {
    let mut out = standard();
    out.extend(random(150, 0x5eed));
    out
}
