//! Bad-set extraction, ball merging, orientability of loops, ring charge and
//! loop energy diagnostics.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{radial_extension, FieldArray, NodeClass};
use crate::qtensor::{leading_director, potential_c, QComponents, DEFAULT_GAP_TOL, POTENTIAL_C, Q_INF};
use crate::seeds::theta0;

pub const DEFAULT_ETA: f64 = 0.05;
pub const AXIS_THRESHOLD: f64 = 0.2;
/// Largest sample count the orientability refinement may reach.
pub const MAX_LOOP_SAMPLES: usize = 4096;
/// Bound on `|a2|` and `|a4|` for the in-plane phase to be meaningful.
pub const IN_PLANE_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        dist(self.center, p) <= self.radius * (1.0 + 1e-12)
    }

    pub fn intersects(&self, o: &Ball) -> bool {
        dist(self.center, o.center) <= self.radius + o.radius
    }

    /// Smallest ball containing both.
    pub fn enclosing(&self, o: &Ball) -> Ball {
        let d = dist(self.center, o.center);
        if d + o.radius <= self.radius {
            return *self;
        }
        if d + self.radius <= o.radius {
            return *o;
        }
        let r = 0.5 * (d + self.radius + o.radius);
        let t = (r - self.radius) / d;
        Ball {
            center: [
                self.center[0] + t * (o.center[0] - self.center[0]),
                self.center[1] + t * (o.center[1] - self.center[1]),
            ],
            radius: r,
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientability {
    Orientable,
    Nonorientable,
    Unknown,
}

impl Orientability {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientability::Orientable => "orientable",
            Orientability::Nonorientable => "nonorientable",
            Orientability::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefectKind {
    Ring,
    AxisPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectCluster {
    pub center: (f64, f64),
    pub radius: f64,
    /// `∫ ξ⁻² f ρ dρ dz` over the bad nodes of the cluster, full cross-section.
    pub mass: f64,
    pub orientability: Orientability,
    pub kind: DefectKind,
    pub nodes: usize,
}

/// Energy-carrying nodes with `f(Q) > eta`.
pub fn bad_set(field: &FieldArray, eta: f64) -> Result<Vec<usize>> {
    if !(eta > 0.0) {
        return Err(Error::invalid(format!("bad-set threshold must be positive, got {eta}")));
    }
    let g = &field.grid;
    Ok((0..g.len())
        .filter(|&k| g.class[k].carries_energy() && potential_c(&field.values[k], POTENTIAL_C) > eta)
        .collect())
}

/// Covers every point by an `r0`-ball, then merges intersecting balls into
/// their smallest enclosing ball until the family is disjoint.
pub fn merge_balls(points: &[[f64; 2]], r0: f64) -> Vec<Ball> {
    let mut balls: Vec<Ball> = points.iter().map(|&p| Ball { center: p, radius: r0 }).collect();
    'outer: loop {
        for a in 0..balls.len() {
            for b in a + 1..balls.len() {
                if balls[a].intersects(&balls[b]) {
                    let m = balls[a].enclosing(&balls[b]);
                    balls.swap_remove(b);
                    balls[a] = m;
                    continue 'outer;
                }
            }
        }
        return balls;
    }
}

/// Value of the field at any point of the meridian plane, using the
/// symmetric extensions: radial anchoring inside the particle, the mirror
/// image below the plane in half-plane mode, the π-rotation for `ρ < 0`, and
/// `Q_∞` beyond the rectangle.
pub fn extended_value(field: &FieldArray, rho: f64, z: f64) -> QComponents {
    if rho < 0.0 {
        return extended_value(field, -rho, z).mirrored();
    }
    if rho * rho + z * z < 1.0 {
        return radial_extension(rho, z);
    }
    if field.grid.spec.half_plane && z < 0.0 {
        return extended_value(field, rho, -z).mirrored();
    }
    field.interpolate(rho, z).unwrap_or(Q_INF)
}

fn circle(center: (f64, f64), r: f64, t: f64) -> (f64, f64) {
    (center.0 + r * t.cos(), center.1 + r * t.sin())
}

fn director_at(field: &FieldArray, p: (f64, f64), eta: f64) -> Result<[f64; 3]> {
    let q = extended_value(field, p.0, p.1);
    if potential_c(&q, POTENTIAL_C) >= 2.0 * eta {
        return Err(Error::BadLoop { rho: p.0, z: p.1 });
    }
    leading_director(&q, DEFAULT_GAP_TOL).map_err(|_| Error::BadLoop { rho: p.0, z: p.1 })
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Transports the director with sign continuity around the circle; returns
/// `None` when consecutive samples are not close enough.
fn transport(dirs: &[[f64; 3]]) -> Option<bool> {
    let mut cur = dirs[0];
    for d in dirs[1..].iter().chain(std::iter::once(&dirs[0])) {
        let c = dot3(&cur, d);
        if c.abs() <= 0.5 {
            return None;
        }
        cur = if c > 0.0 { *d } else { d.map(|x| -x) };
    }
    Some(dot3(&cur, &dirs[0]) < 0.0)
}

/// ℤ/2 class of the projected loop `|x − center| = radius`, sampled at
/// `samples` points and refined by doubling while the lifting is ambiguous.
pub fn loop_orientability(field: &FieldArray, center: (f64, f64), radius: f64, samples: usize) -> Result<Orientability> {
    loop_orientability_with(field, center, radius, samples, DEFAULT_ETA)
}

pub fn loop_orientability_with(
    field: &FieldArray,
    center: (f64, f64),
    radius: f64,
    samples: usize,
    eta: f64,
) -> Result<Orientability> {
    if !(radius > 0.0) || samples < 3 {
        return Err(Error::invalid("loop needs a positive radius and at least 3 samples"));
    }
    let mut n = samples;
    loop {
        let dirs = (0..n)
            .map(|k| director_at(field, circle(center, radius, 2.0 * PI * k as f64 / n as f64), eta))
            .collect::<Result<Vec<_>>>()?;
        match transport(&dirs) {
            Some(true) => return Ok(Orientability::Nonorientable),
            Some(false) => return Ok(Orientability::Orientable),
            None if 2 * n <= MAX_LOOP_SAMPLES => n *= 2,
            None => {
                return Err(Error::Resolution(format!(
                    "director lifting around ({:.4}, {:.4}) radius {radius} ambiguous at {n} samples",
                    center.0, center.1
                )))
            }
        }
    }
}

/// Sign of the ring: the in-plane phase transported along `|x − (1,0)| = δ`
/// from the particle, where `n = e_r`, down to the equatorial plane.
pub fn ring_charge(field: &FieldArray, delta: f64) -> Result<i8> {
    ring_charge_with(field, delta, 256)
}

pub fn ring_charge_with(field: &FieldArray, delta: f64, samples: usize) -> Result<i8> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("ring loop radius must lie in (0, 1), got {delta}")));
    }
    let t0 = theta0(delta);
    let mut phi = 2.0 * t0 - PI;
    let n = samples.max(2);
    for k in 1..=n {
        let th = t0 * (1.0 - k as f64 / n as f64);
        let (rho, z) = circle((1.0, 0.0), delta, th);
        let q = extended_value(field, rho, z);
        if q.0[2].abs() > IN_PLANE_TOL || q.0[4].abs() > IN_PLANE_TOL {
            return Err(Error::NotApplicable(format!(
                "field is not in-plane at ({rho:.4}, {z:.4}): a2 = {:.3}, a4 = {:.3}",
                q.0[2], q.0[4]
            )));
        }
        let d = leading_director(&q, DEFAULT_GAP_TOL).map_err(|_| Error::BadLoop { rho, z })?;
        let a = d[2].atan2(d[0]);
        // representative of a mod π nearest to the current phase
        let step = a - phi - PI * ((a - phi) / PI).round();
        if step.abs() > PI / 4.0 {
            return Err(Error::Resolution(format!(
                "phase jumps by {step:.3} between samples near ({rho:.4}, {z:.4})"
            )));
        }
        phi += step;
    }
    Ok(if phi.sin() >= 0.0 { 1 } else { -1 })
}

/// `r·∮|∂_τ Q|² ds` on circles about `center`, by finite differences on
/// `samples` equispaced points.
pub fn loop_energy_profile(field: &FieldArray, center: (f64, f64), radii: &[f64]) -> Vec<(f64, f64)> {
    loop_energy_profile_with(field, center, radii, 4096)
}

pub fn loop_energy_profile_with(field: &FieldArray, center: (f64, f64), radii: &[f64], samples: usize) -> Vec<(f64, f64)> {
    radii
        .iter()
        .map(|&r| {
            let n = samples.max(8);
            let ds = 2.0 * PI * r / n as f64;
            let vals: Vec<QComponents> = (0..n)
                .map(|k| {
                    let (rho, z) = circle(center, r, 2.0 * PI * k as f64 / n as f64);
                    extended_value(field, rho, z)
                })
                .collect();
            let sum: f64 = (0..n).map(|k| (vals[(k + 1) % n] - vals[k]).norm2()).sum();
            (r, r * sum / ds)
        })
        .collect()
}

/// Area of the dual cell of node `k`.
fn dual_area(field: &FieldArray, k: usize) -> f64 {
    let g = &field.grid;
    let (i, j) = g.ij(k);
    let span = |x: &[f64], m: usize| {
        let lo = if m > 0 { 0.5 * (x[m] - x[m - 1]) } else { 0.0 };
        let hi = if m + 1 < x.len() { 0.5 * (x[m + 1] - x[m]) } else { 0.0 };
        lo + hi
    };
    span(&g.rho, i) * span(&g.z, j)
}

/// Clusters of the bad set `{f > eta}` merged into disjoint `r0`-balls, each
/// classified by the orientability of a circle of twice its radius.
pub fn locate_defects(field: &FieldArray, xi: f64, eta: f64, r0: f64) -> Result<Vec<DefectCluster>> {
    if !(r0 > 0.0) {
        return Err(Error::invalid(format!("merging radius must be positive, got {r0}")));
    }
    crate::energy::check_xi(xi)?;
    let g = &field.grid;
    let bad = bad_set(field, eta)?;
    let mut is_bad = vec![false; g.len()];
    for &k in &bad {
        is_bad[k] = true;
    }
    let (nr, nz) = (g.n_rho() as isize, g.n_z() as isize);
    let mut comp = vec![usize::MAX; g.len()];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for &start in &bad {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut head = 0;
        while head < members.len() {
            let (i, j) = g.ij(members[head]);
            head += 1;
            for di in -1..=1isize {
                for dj in -1..=1isize {
                    let (ii, jj) = (i as isize + di, j as isize + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= nr || jj >= nz {
                        continue;
                    }
                    let m = g.index(ii as usize, jj as usize);
                    if is_bad[m] && comp[m] == usize::MAX {
                        comp[m] = id;
                        members.push(m);
                    }
                }
            }
        }
        components.push(members);
    }

    // weighted centroids; components touching the mirror line are centred on it
    let inv_xi2 = 1.0 / (xi * xi);
    let mut reps = Vec::with_capacity(components.len());
    let mut masses = Vec::with_capacity(components.len());
    for members in &components {
        let (mut sw, mut sr, mut sz, mut mass) = (0.0, 0.0, 0.0, 0.0);
        let mut on_mirror = false;
        for &k in members {
            let f = potential_c(&field.values[k], POTENTIAL_C);
            let w = (f - eta) * dual_area(field, k);
            let (r, z) = g.position(k);
            sw += w;
            sr += w * r;
            sz += w * z;
            mass += inv_xi2 * f * g.weight[k];
            on_mirror |= g.class[k] == NodeClass::MirrorLine;
        }
        let mut c = [sr / sw, sz / sw];
        if !(sw > 0.0) {
            c = {
                let (r, z) = g.position(members[0]);
                [r, z]
            };
        }
        if on_mirror && g.spec.half_plane {
            c[1] = 0.0;
        }
        reps.push(c);
        masses.push(mass * g.multiplier());
    }

    let balls = merge_balls(&reps, r0);
    let mut clusters = Vec::with_capacity(balls.len());
    for ball in balls {
        let inside: Vec<usize> = (0..reps.len()).filter(|&c| ball.contains(reps[c])).collect();
        let nodes = inside.iter().map(|&c| components[c].len()).sum();
        let mass = inside.iter().map(|&c| masses[c]).sum();
        let center = (ball.center[0], ball.center[1]);
        let orientability = [2.0, 4.0]
            .iter()
            .find_map(|&m| loop_orientability_with(field, center, m * ball.radius, 64, eta).ok())
            .unwrap_or(Orientability::Unknown);
        let kind = if center.0 < AXIS_THRESHOLD && center.1.abs() > 1.0 {
            DefectKind::AxisPoint
        } else {
            DefectKind::Ring
        };
        clusters.push(DefectCluster { center, radius: ball.radius, mass, orientability, kind, nodes });
    }
    clusters.sort_by(|a, b| b.mass.total_cmp(&a.mass));
    Ok(clusters)
}
