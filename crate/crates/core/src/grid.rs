//! Structured (ρ, z) grid of the meridian cross-section, node classes,
//! quadrature weights and boundary data.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qtensor::{uniaxial, QComponents, Q_INF};

/// Geometric clustering of nodes toward bands where the field has structure.
///
/// The target spacing is `min(h_max, h_min + (ratio − 1)·d)` where `d` is the
/// distance to the nearest band. Node counts follow from the spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Grading {
    pub h_min: f64,
    pub ratio: f64,
    pub h_max: f64,
    pub rho_bands: Vec<(f64, f64)>,
    pub z_bands: Vec<(f64, f64)>,
}

impl Grading {
    /// Bands resolving an equatorial ring next to the particle.
    pub fn equatorial(h_min: f64) -> Self {
        Grading {
            h_min,
            ratio: 1.08,
            h_max: 0.15,
            rho_bands: vec![(0.95, 1.35)],
            z_bands: vec![(-0.15, 0.15)],
        }
    }

    /// Fine spacing over the lower half of the particle's neighbourhood, from
    /// the axis below the south pole up to the equator. A defect moving along
    /// the surface gets pinned where the spacing exceeds about 2ξ, so the whole
    /// path is resolved rather than its two ends.
    pub fn dipolar(h_min: f64) -> Self {
        Grading {
            h_min,
            ratio: 1.2,
            h_max: 0.15,
            rho_bands: vec![(0.0, 1.35)],
            z_bands: vec![(-1.7, 0.15)],
        }
    }

    fn spacing(&self, x: f64, bands: &[(f64, f64)]) -> f64 {
        let d = bands
            .iter()
            .map(|&(lo, hi)| (lo - x).max(x - hi).max(0.0))
            .fold(f64::INFINITY, f64::min);
        if d.is_infinite() {
            return self.h_max;
        }
        self.h_max.min(self.h_min + (self.ratio - 1.0) * d)
    }

    fn validate(&self) -> Result<()> {
        if !(self.h_min > 0.0 && self.h_max >= self.h_min && self.ratio >= 1.0) {
            return Err(Error::invalid(format!(
                "grading needs 0 < h_min <= h_max and ratio >= 1 (got h_min {}, h_max {}, ratio {})",
                self.h_min, self.h_max, self.ratio
            )));
        }
        for &(lo, hi) in self.rho_bands.iter().chain(self.z_bands.iter()) {
            if !(lo <= hi) {
                return Err(Error::invalid(format!("grading band ({lo}, {hi}) is empty")));
            }
        }
        Ok(())
    }
}

/// Geometry and resolution of the computational rectangle.
///
/// With `grading` set the node counts are derived from the spacing law and
/// `n_rho`, `n_z` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rho_max: f64,
    pub z_max: f64,
    pub n_rho: usize,
    pub n_z: usize,
    pub grading: Option<Grading>,
    pub half_plane: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { rho_max: 8.0, z_max: 8.0, n_rho: 81, n_z: 81, grading: None, half_plane: true }
    }
}

impl GridSpec {
    pub fn uniform(rho_max: f64, z_max: f64, n_rho: usize, n_z: usize, half_plane: bool) -> Self {
        GridSpec { rho_max, z_max, n_rho, n_z, grading: None, half_plane }
    }

    pub fn graded(rho_max: f64, z_max: f64, grading: Grading, half_plane: bool) -> Self {
        GridSpec { rho_max, z_max, n_rho: 0, n_z: 0, grading: Some(grading), half_plane }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_max > 2.0 && self.rho_max.is_finite()) {
            return Err(Error::invalid(format!("rho_max must exceed 2, got {}", self.rho_max)));
        }
        if !(self.z_max > 2.0 && self.z_max.is_finite()) {
            return Err(Error::invalid(format!("z_max must exceed 2, got {}", self.z_max)));
        }
        match &self.grading {
            Some(g) => g.validate(),
            None if self.n_rho < 16 || self.n_z < 16 => Err(Error::invalid(format!(
                "node counts must be at least 16, got {} x {}",
                self.n_rho, self.n_z
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum NodeClass {
    Fluid = 0,
    Solid = 1,
    SphereDirichlet = 2,
    FarDirichlet = 3,
    Axis = 4,
    MirrorLine = 5,
}

impl NodeClass {
    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => NodeClass::Fluid,
            1 => NodeClass::Solid,
            2 => NodeClass::SphereDirichlet,
            3 => NodeClass::FarDirichlet,
            4 => NodeClass::Axis,
            5 => NodeClass::MirrorLine,
            _ => return None,
        })
    }

    /// Components the flow may change at a node of this class.
    pub fn free_components(self) -> [bool; 5] {
        match self {
            NodeClass::Fluid => [true; 5],
            NodeClass::Axis => [true, false, false, false, false],
            NodeClass::MirrorLine => [true, true, true, false, false],
            _ => [false; 5],
        }
    }

    pub fn is_dirichlet(self) -> bool {
        matches!(self, NodeClass::SphereDirichlet | NodeClass::FarDirichlet | NodeClass::Solid)
    }

    /// Nodes outside the particle whose dual cell carries bulk energy.
    pub fn carries_energy(self) -> bool {
        matches!(self, NodeClass::Fluid | NodeClass::Axis | NodeClass::MirrorLine | NodeClass::FarDirichlet)
    }
}

/// Immutable grid with classification and discretization weights.
#[derive(Debug, Clone)]
pub struct Grid {
    pub spec: GridSpec,
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    pub class: Vec<NodeClass>,
    /// `∫ρ dρ dz` over the dual cell of each node.
    pub weight: Vec<f64>,
    /// Gradient-term couplings to the (ρ−, ρ+, z−, z+) neighbours; zero when the
    /// edge is not part of the discretization.
    pub coupling: Vec<[f64; 4]>,
}

/// Node index with `z` outer and `ρ` inner.
#[inline]
pub fn node_index(n_rho: usize, i: usize, j: usize) -> usize {
    j * n_rho + i
}

pub(crate) fn graded_nodes(a: f64, b: f64, g: &Grading, bands: &[(f64, f64)]) -> Vec<f64> {
    let len = b - a;
    let m = ((50.0 * len / g.h_min).ceil() as usize).clamp(20_000, 2_000_000);
    let dx = len / m as f64;
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for k in 0..m {
        let x = a + (k as f64 + 0.5) * dx;
        acc += dx / g.spacing(x, bands);
        cum.push(acc);
    }
    let cells = (acc.ceil() as usize).max(1);
    let mut nodes = Vec::with_capacity(cells + 1);
    nodes.push(a);
    let mut k = 0;
    for c in 1..cells {
        let target = acc * c as f64 / cells as f64;
        while cum[k + 1] < target {
            k += 1;
        }
        let t = (target - cum[k]) / (cum[k + 1] - cum[k]);
        nodes.push(a + (k as f64 + t) * dx);
    }
    nodes.push(b);
    nodes
}

fn axis_nodes(spec: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    match &spec.grading {
        Some(g) => {
            let rho = graded_nodes(0.0, spec.rho_max, g, &g.rho_bands);
            let up = graded_nodes(0.0, spec.z_max, g, &g.z_bands);
            if spec.half_plane {
                (rho, up)
            } else {
                let reflected: Vec<(f64, f64)> = g.z_bands.iter().map(|&(lo, hi)| (-hi, -lo)).collect();
                let down = graded_nodes(0.0, spec.z_max, g, &reflected);
                let mut z: Vec<f64> = down.iter().skip(1).rev().map(|&x| -x).collect();
                z.extend_from_slice(&up);
                (rho, z)
            }
        }
        None => {
            let nr = spec.n_rho - 1;
            let rho = (0..spec.n_rho).map(|i| spec.rho_max * i as f64 / nr as f64).collect();
            let nz = spec.n_z - 1;
            let z = if spec.half_plane {
                (0..spec.n_z).map(|j| spec.z_max * j as f64 / nz as f64).collect()
            } else {
                (0..spec.n_z)
                    .map(|j| spec.z_max * (2.0 * j as f64 - nz as f64) / nz as f64)
                    .collect()
            };
            (rho, z)
        }
    }
}

fn dual_bounds(x: &[f64], k: usize) -> (f64, f64) {
    let lo = if k == 0 { x[0] } else { 0.5 * (x[k - 1] + x[k]) };
    let hi = if k + 1 == x.len() { x[k] } else { 0.5 * (x[k] + x[k + 1]) };
    (lo, hi)
}

impl Grid {
    pub fn n_rho(&self) -> usize {
        self.rho.len()
    }

    pub fn n_z(&self) -> usize {
        self.z.len()
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        node_index(self.rho.len(), i, j)
    }

    /// (i, j) position of a node index.
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.rho.len(), k / self.rho.len())
    }

    pub fn position(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (self.rho[i], self.z[j])
    }

    pub fn class_at(&self, i: usize, j: usize) -> NodeClass {
        self.class[self.index(i, j)]
    }

    /// Factor mapping computed energies to the full cross-section.
    pub fn multiplier(&self) -> f64 {
        if self.spec.half_plane {
            2.0
        } else {
            1.0
        }
    }

    /// Neighbour node indices in the (ρ−, ρ+, z−, z+) order of `coupling`.
    #[inline]
    pub fn neighbours(&self, k: usize) -> [Option<usize>; 4] {
        let (i, j) = self.ij(k);
        let nr = self.rho.len();
        [
            (i > 0).then(|| k - 1),
            (i + 1 < nr).then(|| k + 1),
            (j > 0).then(|| k - nr),
            (j + 1 < self.z.len()).then(|| k + nr),
        ]
    }

    /// Largest grid spacing among the cells touching the node nearest to
    /// `(rho, z)`.
    pub fn local_spacing(&self, rho: f64, z: f64) -> f64 {
        let i = nearest(&self.rho, rho);
        let j = nearest(&self.z, z);
        let mut h: f64 = 0.0;
        for (x, k) in [(&self.rho, i), (&self.z, j)] {
            if k > 0 {
                h = h.max(x[k] - x[k - 1]);
            }
            if k + 1 < x.len() {
                h = h.max(x[k + 1] - x[k]);
            }
        }
        h
    }

    /// Requires the spacing next to the equator of the particle to resolve a
    /// defect core of size `xi`.
    pub fn check_resolution(&self, xi: f64) -> Result<()> {
        let h = self.local_spacing(1.0, 0.0);
        if h > 0.5 * xi * (1.0 + 1e-9) {
            return Err(Error::invalid(format!(
                "grid spacing {h:.4e} near (1, 0) exceeds xi/2 = {:.4e}",
                0.5 * xi
            )));
        }
        Ok(())
    }

    /// Smallest spacing anywhere in the grid.
    pub fn h_min(&self) -> f64 {
        let m = |x: &[f64]| x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        m(&self.rho).min(m(&self.z))
    }

    /// Index of the cell `[x_k, x_{k+1}]` containing `v`, if inside the range.
    pub fn cell_of(x: &[f64], v: f64) -> Option<usize> {
        if !(v >= x[0] && v <= x[x.len() - 1]) {
            return None;
        }
        let k = x.partition_point(|&p| p <= v);
        Some(k.saturating_sub(1).min(x.len() - 2))
    }
}

fn nearest(x: &[f64], v: f64) -> usize {
    let k = x.partition_point(|&p| p < v);
    if k == 0 {
        0
    } else if k == x.len() || (v - x[k - 1]) <= (x[k] - v) {
        k - 1
    } else {
        k
    }
}

/// Builds and classifies the grid.
pub fn build_grid(spec: &GridSpec) -> Result<Grid> {
    spec.validate()?;
    let (rho, z) = axis_nodes(spec);
    if rho.len() < 16 || z.len() < 16 {
        return Err(Error::invalid(format!(
            "graded grid has only {} x {} nodes, at least 16 per direction required",
            rho.len(),
            z.len()
        )));
    }
    let nr = rho.len();
    let nz = z.len();
    let n = nr * nz;
    let inside = |i: usize, j: usize| rho[i] * rho[i] + z[j] * z[j] <= 1.0;

    let mut class = vec![NodeClass::Fluid; n];
    for j in 0..nz {
        for i in 0..nr {
            let far = i + 1 == nr || j + 1 == nz || (!spec.half_plane && j == 0);
            let c = if far {
                NodeClass::FarDirichlet
            } else if inside(i, j) {
                let touches = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)]
                    .into_iter()
                    .any(|(a, b)| a < nr && b < nz && !inside(a, b));
                if touches {
                    NodeClass::SphereDirichlet
                } else {
                    NodeClass::Solid
                }
            } else if i == 0 {
                NodeClass::Axis
            } else if spec.half_plane && j == 0 {
                NodeClass::MirrorLine
            } else {
                NodeClass::Fluid
            };
            class[node_index(nr, i, j)] = c;
        }
    }

    let mut weight = vec![0.0; n];
    let mut coupling = vec![[0.0; 4]; n];
    let rho_dual: Vec<(f64, f64)> = (0..nr).map(|i| dual_bounds(&rho, i)).collect();
    let z_dual: Vec<(f64, f64)> = (0..nz).map(|j| dual_bounds(&z, j)).collect();
    let outside = |k: usize| !matches!(class[k], NodeClass::Solid | NodeClass::SphereDirichlet);
    let edge_ok = |a: usize, b: usize| {
        class[a] != NodeClass::Solid && class[b] != NodeClass::Solid && (outside(a) || outside(b))
    };
    for j in 0..nz {
        let (zl, zh) = z_dual[j];
        for i in 0..nr {
            let k = node_index(nr, i, j);
            let (rl, rh) = rho_dual[i];
            let rho_int = 0.5 * (rh * rh - rl * rl);
            weight[k] = rho_int * (zh - zl);
            if i + 1 < nr && edge_ok(k, k + 1) {
                let w = 0.5 * (rho[i] + rho[i + 1]) * (zh - zl) / (rho[i + 1] - rho[i]);
                coupling[k][1] = w;
                coupling[k + 1][0] = w;
            }
            if j + 1 < nz && edge_ok(k, k + nr) {
                let w = rho_int / (z[j + 1] - z[j]);
                coupling[k][3] = w;
                coupling[k + nr][2] = w;
            }
        }
    }

    let grid = Grid { spec: spec.clone(), rho, z, class, weight, coupling };
    check_connected(&grid)?;
    Ok(grid)
}

fn check_connected(grid: &Grid) -> Result<()> {
    let free = |k: usize| grid.class[k] == NodeClass::Fluid;
    let Some(start) = (0..grid.len()).find(|&k| free(k)) else {
        return Err(Error::invalid("grid has no fluid nodes"));
    };
    let mut seen = vec![false; grid.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(k) = stack.pop() {
        for m in grid.neighbours(k).into_iter().flatten() {
            if !seen[m] && free(m) {
                seen[m] = true;
                stack.push(m);
            }
        }
    }
    if (0..grid.len()).any(|k| free(k) && !seen[k]) {
        return Err(Error::invalid("fluid region is not connected"));
    }
    Ok(())
}

/// Radial anchoring `n⊗n − I/3` with `n = (ρ, 0, z)/|(ρ, z)|`.
pub fn sphere_boundary_value(rho: f64, z: f64) -> Result<QComponents> {
    let r = rho.hypot(z);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid("radial anchoring is undefined at the origin"));
    }
    Ok(uniaxial([rho / r, 0.0, z / r]))
}

/// Radial anchoring extended into the particle, `Q_∞` at the centre.
pub fn radial_extension(rho: f64, z: f64) -> QComponents {
    sphere_boundary_value(rho, z).unwrap_or(Q_INF)
}

/// Nodal values of a discretized Q field.
#[derive(Debug, Clone)]
pub struct FieldArray {
    pub grid: Arc<Grid>,
    pub values: Vec<QComponents>,
}

impl PartialEq for FieldArray {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.grid, &other.grid)
            || (self.grid.rho == other.grid.rho
                && self.grid.z == other.grid.z
                && self.grid.class == other.grid.class))
            && self.values == other.values
    }
}

impl FieldArray {
    pub fn filled(grid: Arc<Grid>, q: QComponents) -> Self {
        let values = vec![q; grid.len()];
        FieldArray { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> QComponents) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (r, z) = grid.position(k);
                f(r, z)
            })
            .collect();
        FieldArray { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> QComponents {
        self.values[self.grid.index(i, j)]
    }

    /// Enforces the class rules in place.
    pub fn apply_bc(&mut self) {
        let grid = Arc::clone(&self.grid);
        for (k, v) in self.values.iter_mut().enumerate() {
            match grid.class[k] {
                NodeClass::SphereDirichlet => {
                    let (r, z) = grid.position(k);
                    *v = radial_extension(r, z);
                }
                NodeClass::FarDirichlet => *v = Q_INF,
                NodeClass::Axis => *v = QComponents([v.0[0], 0.0, 0.0, 0.0, 0.0]),
                NodeClass::MirrorLine => *v = QComponents([v.0[0], v.0[1], v.0[2], 0.0, 0.0]),
                NodeClass::Fluid | NodeClass::Solid => {}
            }
        }
    }

    /// Fills the particle interior with the radial extension.
    pub fn fill_solid(&mut self) {
        let grid = Arc::clone(&self.grid);
        for (k, v) in self.values.iter_mut().enumerate() {
            if grid.class[k] == NodeClass::Solid {
                let (r, z) = grid.position(k);
                *v = radial_extension(r, z);
            }
        }
    }

    /// Bilinear interpolation; `None` outside the rectangle.
    pub fn interpolate(&self, rho: f64, z: f64) -> Option<QComponents> {
        let g = &self.grid;
        let i = Grid::cell_of(&g.rho, rho)?;
        let j = Grid::cell_of(&g.z, z)?;
        let tx = (rho - g.rho[i]) / (g.rho[i + 1] - g.rho[i]);
        let ty = (z - g.z[j]) / (g.z[j + 1] - g.z[j]);
        let q00 = self.at(i, j);
        let q10 = self.at(i + 1, j);
        let q01 = self.at(i, j + 1);
        let q11 = self.at(i + 1, j + 1);
        Some(QComponents(std::array::from_fn(|c| {
            (1.0 - ty) * ((1.0 - tx) * q00.0[c] + tx * q10.0[c]) + ty * ((1.0 - tx) * q01.0[c] + tx * q11.0[c])
        })))
    }
}

/// Returns a copy of `field` with boundary conditions enforced.
pub fn apply_boundary_conditions(field: &FieldArray) -> FieldArray {
    let mut out = field.clone();
    out.apply_bc();
    out
}
