use crate::error::{Error, Result};
use crate::nbody::{mass_inner, triangle_area, MassSystem, PlanarConfig, Vec2, SINGULAR_TOLERANCE};

/// All `(i, j, k)` with `i < j < k < n`, in lexicographic order.
pub fn triples(n: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..n).flat_map(move |i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| [i, j, k])))
}

/// Moment of inertia of the sub-triangle `(i, j, k)` about its own center of mass.
pub fn triple_inertia(masses: &[f64], q: &[Vec2], [i, j, k]: [usize; 3]) -> f64 {
    let (mi, mj, mk) = (masses[i], masses[j], masses[k]);
    let pairwise = mi * mj * (q[i] - q[j]).norm_squared()
        + mi * mk * (q[i] - q[k]).norm_squared()
        + mj * mk * (q[j] - q[k]).norm_squared();
    pairwise / (mi + mj + mk)
}

/// `V_N = -γ Σ_{i<j<k} I(i,j,k) / Δ(i,j,k)²`.
///
/// For three bodies this is the same arithmetic as [`crate::nbody::potential`].
pub fn vn_potential(ms: &MassSystem, q: &PlanarConfig) -> Result<f64> {
    ms.check_len(q.len())?;
    let p = q.points();
    let mut acc = 0.0;
    for t in triples(p.len()) {
        let inertia = triple_inertia(ms.masses(), p, t);
        let area = triangle_area(&p[t[0]], &p[t[1]], &p[t[2]]);
        if !(area.abs() >= SINGULAR_TOLERANCE * inertia) || inertia == 0.0 {
            return Err(Error::CollinearTriple {
                triple: t,
                ratio: if inertia > 0.0 { area.abs() / inertia } else { 0.0 },
            });
        }
        acc += inertia / (area * area);
    }
    Ok(-ms.gamma() * acc)
}

/// Length of a discrete path in the metric `2U |dq|²` (`U = -V_N`), using the
/// midpoint rule on each segment.
pub fn jm_length(ms: &MassSystem, path: &[PlanarConfig]) -> Result<f64> {
    for q in path {
        vn_potential(ms, q)?;
    }
    let mut total = 0.0;
    for pair in path.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        ms.check_len(a.len())?;
        ms.check_len(b.len())?;
        let d: Vec<Vec2> = b.points().iter().zip(a.points()).map(|(x, y)| x - y).collect();
        let step = mass_inner(ms, &d, &d)?.sqrt();
        if step == 0.0 {
            continue;
        }
        let mid = PlanarConfig(a.points().iter().zip(b.points()).map(|(x, y)| (x + y) * 0.5).collect());
        let u = -vn_potential(ms, &mid)?;
        total += (2.0 * u).sqrt() * step;
    }
    Ok(total)
}
