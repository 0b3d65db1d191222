//! Triple-orientation sign vectors and the census of generic N-gon chambers.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::curvature::gaussian_configuration;
use crate::geometry::jm::triples;
use crate::nbody::{triangle_area, MassSystem, PlanarConfig};

/// Samples per census block; each block has its own random stream.
const BLOCK: usize = 4096;

/// Default rejection threshold for `|Δ| / I`.
pub const DEFAULT_EPS: f64 = 1e-6;

/// Signs of the triangle areas `Δ(i, j, k)`, triples in lexicographic order.
///
/// Ordered lexicographically with `+` before `-`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignVector(pub Vec<i8>);

impl Ord for SignVector {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for SignVector {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl SignVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Image under a reflection of the plane.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// Sign vector of the relabeled polygon `q'_i = q_{perm[i]}`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let n = perm.len();
        let index: BTreeMap<[usize; 3], usize> = triples(n).enumerate().map(|(i, t)| (t, i)).collect();
        Self(
            triples(n)
                .map(|[i, j, k]| {
                    let mut t = [perm[i], perm[j], perm[k]];
                    let mut parity = 1;
                    // bubble sort, counting transpositions
                    for a in 0..3 {
                        for b in 0..2 - a {
                            if t[b] > t[b + 1] {
                                t.swap(b, b + 1);
                                parity = -parity;
                            }
                        }
                    }
                    parity * self.0[index[&t]]
                })
                .collect(),
        )
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Sign vector of `q`, or `None` if some `|Δ(i,j,k)| < eps · I(q)`, with
/// `I` the unit-mass moment of inertia about the centroid.
pub fn sign_vector(q: &PlanarConfig, eps: f64) -> Option<SignVector> {
    let p = q.points();
    if p.len() < 3 {
        return None;
    }
    let n = p.len() as f64;
    let c = p.iter().sum::<crate::nbody::Vec2>() / n;
    let inertia: f64 = p.iter().map(|x| (x - c).norm_squared()).sum();
    let threshold = eps * inertia;
    let mut signs = Vec::with_capacity(p.len() * (p.len() - 1) * (p.len() - 2) / 6);
    for [i, j, k] in triples(p.len()) {
        let area = triangle_area(&p[i], &p[j], &p[k]);
        if !(area.abs() >= threshold) || area == 0.0 {
            return None;
        }
        signs.push(if area > 0.0 { 1 } else { -1 });
    }
    Some(SignVector(signs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCensus {
    pub n_bodies: usize,
    pub samples_drawn: usize,
    pub samples_rejected: usize,
    pub realized: BTreeMap<SignVector, usize>,
    /// Index of the first sample realizing each sign vector.
    pub first_seen: BTreeMap<SignVector, usize>,
    pub distinct: usize,
    pub seed: u64,
    pub eps: f64,
}

impl ComponentCensus {
    /// Index of the sample that produced the most recent new sign vector.
    pub fn last_new_at(&self) -> Option<usize> {
        self.first_seen.values().copied().max()
    }

    /// No new sign vector appeared over the final half of the samples.
    pub fn is_stable(&self) -> bool {
        self.last_new_at().is_some_and(|i| 2 * i < self.samples_drawn)
    }

    /// Distinct sign vectors among the first `k` samples.
    pub fn distinct_after(&self, k: usize) -> usize {
        self.first_seen.values().filter(|&&i| i < k).count()
    }

    /// One `"<signs> <count>"` line per realized sign vector.
    pub fn to_lines(&self) -> Vec<String> {
        self.realized.iter().map(|(s, c)| format!("{s} {c}")).collect()
    }
}

#[derive(Default)]
struct Tally {
    rejected: usize,
    seen: BTreeMap<SignVector, (usize, usize)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.rejected += other.rejected;
        for (k, (count, first)) in other.seen {
            let e = self.seen.entry(k).or_insert((0, usize::MAX));
            e.0 += count;
            e.1 = e.1.min(first);
        }
        self
    }
}

/// Monte Carlo census of sign vectors over `n_samples` centered Gaussian
/// N-gons. Blocks of samples draw from independent streams of a ChaCha
/// generator seeded with `seed`, so the result is independent of the thread
/// count and a longer run extends a shorter one.
pub fn component_census(ms: &MassSystem, n_samples: usize, eps: f64, seed: u64) -> Result<ComponentCensus> {
    let n = ms.len();
    if n < 3 {
        return Err(Error::Usage(format!("census needs at least 3 bodies, got {n}")));
    }
    if n_samples == 0 {
        return Err(Error::Usage("census needs at least one sample".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Usage(format!("eps must be positive, got {eps}")));
    }
    let blocks = n_samples.div_ceil(BLOCK);
    let tally = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut t = Tally::default();
            let start = b * BLOCK;
            for i in start..n_samples.min(start + BLOCK) {
                let q = gaussian_configuration(ms, &mut rng);
                match sign_vector(&q, eps) {
                    Some(s) => {
                        let e = t.seen.entry(s).or_insert((0, i));
                        e.0 += 1;
                    }
                    None => t.rejected += 1,
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    let mut realized = BTreeMap::new();
    let mut first_seen = BTreeMap::new();
    for (k, (count, first)) in tally.seen {
        realized.insert(k.clone(), count);
        first_seen.insert(k, first);
    }
    Ok(ComponentCensus {
        n_bodies: n,
        samples_drawn: n_samples,
        samples_rejected: tally.rejected,
        distinct: realized.len(),
        realized,
        first_seen,
        seed,
        eps,
    })
}
